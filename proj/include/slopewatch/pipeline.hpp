#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slopewatch/errors.hpp"
#include "slopewatch/regime.hpp"
#include "slopewatch/risk.hpp"
#include "slopewatch/series.hpp"
#include "slopewatch/spectral.hpp"

namespace slopewatch {

/// One DisplacementSeries per (location, pixel); pixels of a location share one grid.
using Dataset = std::vector<DisplacementSeries>;

struct PipelineConfig {
    std::size_t window_length = 16;
    std::size_t step = 1;
    Detrend detrend = Detrend::linear;
    bool smooth_candidates = true;
    std::size_t k_min = 2;
    std::size_t k_max = 5;
    double inter_cluster_threshold = 0.80;
    double pca_var_target = 0.90;
    double t_R_level = 0.125;
    double t_I_level = 0.225;
    std::size_t persistence = 2;
    std::uint64_t seed = 0;

    [[nodiscard]] WindowSpec window_spec() const { return WindowSpec{window_length, step, detrend}; }

    [[nodiscard]] RegimeOptions regime_options() const {
        return RegimeOptions{k_min, k_max, inter_cluster_threshold, pca_var_target, seed};
    }

    void validate() const {
        auto need = [](bool ok, const std::string& what) {
            if (!ok) throw Error(ErrorCode::InvalidConfig, what);
        };
        need(window_length >= 4 && window_length % 2 == 0, "window_length must be even and at least 4");
        need(step >= 1, "step must be at least 1");
        need(k_min >= 1 && k_min <= k_max, "k range must satisfy 1 <= k_min <= k_max");
        need(inter_cluster_threshold > 0.0 && inter_cluster_threshold <= 1.0, "inter_cluster_threshold must lie in (0,1]");
        need(pca_var_target > 0.0 && pca_var_target <= 1.0, "pca_var_target must lie in (0,1]");
        need(t_R_level > 0.0 && t_R_level <= 0.25, "t_R_level must lie in (0,0.25]");
        need(t_I_level > 0.0 && t_I_level <= 0.25, "t_I_level must lie in (0,0.25]");
        need(t_R_level <= t_I_level, "t_R_level must not exceed t_I_level");
        need(persistence >= 1, "persistence must be at least 1");
    }

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// ---------------------------------------------------------------------------
// Report model. Everything needed to re-derive the warnings, as plain values.

struct WindowRef {
    std::size_t index = 0;
    std::string start;
    std::string end;

    static WindowRef of(const Window& w) { return {w.index, w.start_date.iso(), w.end_date.iso()}; }
    friend bool operator==(const WindowRef&, const WindowRef&) = default;
};

struct LocationSummary {
    std::string location_id;
    std::size_t n_pixels = 0;
    std::string start_date;
    int interval_days = 0;
    std::size_t sample_count = 0;
    std::vector<double> mean_displacement;
    std::vector<double> moving_window_variance;
    std::vector<double> detrended_moving_window_variance;
    std::vector<std::vector<double>> mean_local_periodograms;  // per window, k = 1..n_L/2
    std::vector<double> median_local_variance;
    std::vector<WindowRef> window_dates;
    friend bool operator==(const LocationSummary&, const LocationSummary&) = default;
};

struct CandidateRecord {
    WindowRef window;
    std::string trigger;
    double trajectory_value = 0.0;
    friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

struct ClusterRow {
    std::size_t k = 0;
    std::vector<double> within_fractions;
    double inter_cluster_fraction = 0.0;
    bool qualifies = false;
    friend bool operator==(const ClusterRow&, const ClusterRow&) = default;
};

struct CandidateDiagnosticsRecord {
    WindowRef window;
    std::size_t pca_components = 0;
    std::string failure;
    std::vector<ClusterRow> rows;
    friend bool operator==(const CandidateDiagnosticsRecord&, const CandidateDiagnosticsRecord&) = default;
};

struct MedoidRecord {
    std::string location_id;
    std::string pixel_id;
    std::size_t cluster_size = 0;
    friend bool operator==(const MedoidRecord&, const MedoidRecord&) = default;
};

struct BaselineRecord {
    WindowRef window;
    std::size_t k = 0;
    double inter_cluster_fraction = 0.0;
    std::vector<double> within_fractions;
    std::size_t pca_components = 0;
    double pca_explained = 0.0;
    std::vector<double> eigenvalues;
    double dispersion_scale = 0.0;
    std::vector<MedoidRecord> medoids;
    friend bool operator==(const BaselineRecord&, const BaselineRecord&) = default;
};

struct RiskRecord {
    WindowRef window;
    double median_pq = 0.0;
    double iqr_pq = 0.0;
    std::size_t n_pixels = 0;
    friend bool operator==(const RiskRecord&, const RiskRecord&) = default;
};

struct WarningRecord {
    std::optional<WindowRef> t_R;
    std::optional<WindowRef> t_I;
    double t_R_level = 0.125;
    double t_I_level = 0.225;
    std::size_t persistence = 2;
    friend bool operator==(const WarningRecord&, const WarningRecord&) = default;
};

enum class RunStatus { ok, no_candidate_qualifies };

inline std::string to_string(RunStatus s) { return s == RunStatus::ok ? "ok" : "no_candidate_qualifies"; }

struct AnalysisReport {
    int schema_version = 1;
    std::string status = "ok";
    std::string message;
    PipelineConfig config;
    std::string input_digest;
    std::size_t n_series = 0;
    std::size_t window_count = 0;
    std::vector<WindowRef> windows;
    std::vector<LocationSummary> locations;
    std::vector<double> median_local_variance;
    std::vector<CandidateRecord> candidates;
    std::vector<CandidateDiagnosticsRecord> cluster_diagnostics;
    std::optional<BaselineRecord> baseline;
    std::vector<RiskRecord> risk;
    WarningRecord warnings;

    [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
    friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

// ---------------------------------------------------------------------------

namespace detail {

// Locations in lexicographic order; pixels keep their input order within a location.
inline std::map<std::string, std::vector<const DisplacementSeries*>> group_by_location(const Dataset& dataset) {
    std::map<std::string, std::vector<const DisplacementSeries*>> groups;
    for (const auto& s : dataset) groups[s.location_id].push_back(&s);
    return groups;
}

inline std::string digest(const Dataset& dataset) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::string& text) {
        for (unsigned char c : text) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    for (const auto& [loc, pixels] : group_by_location(dataset)) {
        for (const auto* s : pixels) {
            feed(s->location_id);
            feed(s->pixel_id);
            feed(s->grid.start.iso());
            feed(std::to_string(s->grid.interval_days));
            char buf[32];
            for (double v : s->values) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                feed(buf);
            }
        }
    }
    char out[32];
    std::snprintf(out, sizeof out, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace detail

/// Mean across pixels at every sample of one location (all pixels share the grid).
inline std::vector<double> location_mean_series(std::span<const DisplacementSeries* const> pixels) {
    detail::require(!pixels.empty(), ErrorCode::EmptyInput, "location without pixels");
    std::vector<double> mean(pixels.front()->values.size(), 0.0);
    for (const auto* s : pixels)
        for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += s->values[t];
    for (double& v : mean) v /= static_cast<double>(pixels.size());
    return mean;
}

/// Per-pixel periodogram matrices ordered by location, cut to the common window count.
inline std::vector<PeriodogramMatrix> dataset_periodograms(const Dataset& dataset, const WindowSpec& spec) {
    detail::require(!dataset.empty(), ErrorCode::EmptyInput, "empty dataset");
    std::vector<PeriodogramMatrix> matrices;
    std::size_t common = std::numeric_limits<std::size_t>::max();
    for (const auto& [loc, pixels] : detail::group_by_location(dataset)) {
        for (const auto* s : pixels) {
            matrices.push_back(dynamic_periodogram(*s, spec));
            common = std::min(common, matrices.back().window_count());
        }
    }
    for (auto& m : matrices) {
        m.windows.resize(common);
        m.entries.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(common));
    }
    return matrices;
}

/// Runs both phases end to end. A dataset where no candidate reaches the clustering
/// threshold yields a report with status "no_candidate_qualifies" and full diagnostics.
inline AnalysisReport run(const Dataset& dataset, const PipelineConfig& config) {
    config.validate();
    const WindowSpec spec = config.window_spec();
    const auto groups = detail::group_by_location(dataset);
    for (const auto& [loc, pixels] : groups)
        detail::require(pixels.front()->grid.count >= config.window_length, ErrorCode::TooShort,
                        "location " + loc + " has fewer samples than window_length");

    AnalysisReport report;
    report.config = config;
    report.input_digest = detail::digest(dataset);
    report.n_series = dataset.size();

    const auto matrices = dataset_periodograms(dataset, spec);
    const std::size_t L = matrices.front().window_count();
    report.window_count = L;
    for (const auto& w : matrices.front().windows) report.windows.push_back(WindowRef::of(w));

    // Local-variance trajectories, per pixel and per location.
    std::vector<LocalVarianceTrajectory> all;
    for (const auto& m : matrices) all.push_back(local_variance_trajectory(m));
    std::size_t offset = 0;
    for (const auto& [loc, pixels] : groups) {
        LocationSummary summary;
        summary.location_id = loc;
        summary.n_pixels = pixels.size();
        const auto& grid = pixels.front()->grid;
        summary.start_date = grid.start.iso();
        summary.interval_days = grid.interval_days;
        summary.sample_count = grid.count;
        summary.mean_displacement = location_mean_series(pixels);
        for (std::size_t l = 1; l <= L; ++l) {
            const Window w = window_at(grid, spec, l);
            summary.window_dates.push_back(WindowRef::of(w));
            const std::span<const double> values(summary.mean_displacement.data() + w.first_sample - 1, spec.length);
            summary.moving_window_variance.push_back(window_mean_variance(values).variance);
            const auto detrended = detrend(values, spec.detrend);
            summary.detrended_moving_window_variance.push_back(window_mean_variance(detrended).variance);
            summary.mean_local_periodograms.push_back(periodogram(detrended, spec, w).ordinates);
        }
        summary.median_local_variance =
            median_local_variance(std::span(all).subspan(offset, pixels.size()), loc).values;
        offset += pixels.size();
        report.locations.push_back(std::move(summary));
    }

    // Phase I.
    const auto median = median_local_variance(all, "*");
    report.median_local_variance = median.values;
    const auto candidates = inflection_candidates(median, matrices.front().windows, config.smooth_candidates);
    for (const auto& c : candidates)
        report.candidates.push_back(CandidateRecord{WindowRef::of(c.window), to_string(c.trigger), c.trajectory_value});

    const auto options = config.regime_options();
    const auto diagnostics = evaluate_candidates(candidates, matrices, options);
    for (const auto& d : diagnostics) {
        CandidateDiagnosticsRecord rec{WindowRef::of(d.candidate.window), d.pca_components, d.failure, {}};
        for (const auto& c : d.clusters)
            rec.rows.push_back(ClusterRow{c.k, c.within_fractions, c.inter_cluster_fraction, c.qualifies});
        report.cluster_diagnostics.push_back(std::move(rec));
    }
    const auto choice = choose_regime(diagnostics);
    report.warnings = WarningRecord{std::nullopt, std::nullopt, config.t_R_level, config.t_I_level, config.persistence};
    if (!choice) {
        report.status = to_string(RunStatus::no_candidate_qualifies);
        report.message = candidates.empty() ? "no candidate windows on the median local-variance trajectory"
                                            : "no (candidate, k) reached the inter-cluster threshold; " +
                                                  describe(diagnostics);
        return report;
    }

    const auto baseline =
        fit_baseline(matrices, diagnostics[choice->candidate].candidate.window.index, choice->k, options);
    BaselineRecord b;
    b.window = WindowRef::of(baseline.w_t0);
    b.k = baseline.k();
    b.inter_cluster_fraction = baseline.clustering.inter_cluster_fraction;
    b.within_fractions = baseline.clustering.within_fractions();
    b.pca_components = baseline.pca.components();
    b.pca_explained = baseline.pca.explained_fraction();
    b.eigenvalues.assign(baseline.pca.eigenvalues.begin(), baseline.pca.eigenvalues.end());
    b.dispersion_scale = baseline.dispersion_scale;
    for (std::size_t c = 0; c < baseline.k(); ++c) {
        const std::size_t item = baseline.clustering.medoids[c];
        const auto size = static_cast<std::size_t>(
            std::count(baseline.clustering.labels.begin(), baseline.clustering.labels.end(), c));
        b.medoids.push_back(MedoidRecord{baseline.location_ids[item], baseline.pixel_ids[item], size});
    }
    report.baseline = std::move(b);

    // Phase II.
    if (baseline.w_t0.index >= L) {
        report.message = "baseline is the last window; no post-baseline windows to monitor";
        return report;
    }
    const auto trajectory = risk_trajectory(matrices, baseline);
    for (const auto& p : trajectory.points)
        report.risk.push_back(RiskRecord{WindowRef::of(p.window), p.median_pq, p.iqr_pq, p.n_pixels});
    const auto warnings = detect_thresholds(trajectory, config.t_R_level, config.t_I_level, config.persistence);
    if (warnings.t_R) report.warnings.t_R = WindowRef::of(*warnings.t_R);
    if (warnings.t_I) report.warnings.t_I = WindowRef::of(*warnings.t_I);
    return report;
}

}  // namespace slopewatch
