#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slopewatch/errors.hpp"
#include "slopewatch/regime.hpp"
#include "slopewatch/series.hpp"
#include "slopewatch/spectral.hpp"
#include "slopewatch/stats.hpp"

namespace slopewatch {

/// Class posterior for one pixel at one window.
struct PosteriorVector {
    std::vector<double> probabilities;
    std::size_t z = 0;  // argmax class
    double p = 1.0;     // max class probability
    double q = 0.0;     // 1 - p
};

struct RiskPoint {
    Window window;
    double median_pq = 0.0;
    double iqr_pq = 0.0;
    std::size_t n_pixels = 0;
};

struct RiskTrajectory {
    Window baseline_window;
    std::vector<RiskPoint> points;  // windows baseline+1, baseline+2, ...
};

struct WarningReport {
    std::optional<Window> t_R;
    std::optional<Window> t_I;
    double t_R_level = 0.125;
    double t_I_level = 0.225;
    std::size_t persistence = 2;
};

// ---------------------------------------------------------------------------

/// Gaussian-kernel softmax over squared distances from `scores` to each baseline medoid:
/// p_l proportional to exp(-d_l^2 / (2 s^2)), s = dispersion scale.
inline PosteriorVector classify_scores(const BaselineState& baseline, const Eigen::VectorXd& scores) {
    detail::require(scores.size() == baseline.medoid_scores.cols(), ErrorCode::LengthMismatch,
                    "score vector does not match the baseline PCA dimension");
    const auto k = static_cast<std::size_t>(baseline.medoid_scores.rows());
    const double two_s2 = 2.0 * baseline.dispersion_scale * baseline.dispersion_scale;
    std::vector<double> exponent(k);
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < k; ++l) {
        exponent[l] = (scores.transpose() - baseline.medoid_scores.row(static_cast<Eigen::Index>(l))).squaredNorm() / two_s2;
        smallest = std::min(smallest, exponent[l]);
    }
    PosteriorVector post;
    post.probabilities.resize(k);
    double sum = 0.0;
    for (std::size_t l = 0; l < k; ++l) sum += post.probabilities[l] = std::exp(smallest - exponent[l]);
    for (auto& v : post.probabilities) v /= sum;

    for (std::size_t l = 1; l < k; ++l)
        if (post.probabilities[l] > post.probabilities[post.z]) post.z = l;
    post.p = post.probabilities[post.z];
    post.q = 1.0 - post.p;

    double check = 0.0;
    for (double v : post.probabilities) {
        detail::require(v >= 0.0, ErrorCode::DomainError, "negative class posterior");
        check += v;
    }
    detail::require(std::abs(check - 1.0) <= 1e-12, ErrorCode::DomainError, "class posteriors do not sum to one");
    return post;
}

/// Projects raw periodogram ordinates with the baseline PCA, then classifies.
inline PosteriorVector classify_window(const BaselineState& baseline, std::span<const double> periodogram_ordinates) {
    return classify_scores(baseline, pca_project(baseline.pca, periodogram_ordinates));
}

inline PosteriorVector classify_window(const BaselineState& baseline, const PeriodogramVector& p) {
    return classify_window(baseline, std::span<const double>(p.ordinates));
}

/// Classification variation p(1 - p), in [0, 0.25].
inline double pq(double p) noexcept { return p * (1.0 - p); }
inline double pq(const PosteriorVector& post) noexcept { return pq(post.p); }

struct PqMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean pq and variance pq(1 - 4pq)/n of the classification variation for n observations.
inline PqMoments m_moments(double p, long n) {
    detail::require(p >= 0.0 && p <= 1.0, ErrorCode::DomainError, "p must lie in [0, 1]");
    detail::require(n >= 1, ErrorCode::DomainError, "n must be at least 1");
    const double m = pq(p);
    return {m, m * (1.0 - 4.0 * m) / static_cast<double>(n)};
}

/// Spatial median and IQR of per-pixel pq at one window.
inline RiskPoint risk_point(std::span<const PeriodogramMatrix> matrices, const BaselineState& baseline,
                            std::size_t window_index) {
    detail::require(!matrices.empty(), ErrorCode::EmptyInput, "risk point over zero pixels");
    std::vector<double> values;
    values.reserve(matrices.size());
    for (const auto& m : matrices) values.push_back(pq(classify_window(baseline, m.column(window_index))));
    return RiskPoint{matrices.front().windows.at(window_index - 1), stats::median(values), stats::iqr(values),
                     values.size()};
}

/// Phase II: classify every pixel at each window after the baseline against the baseline clusters.
inline RiskTrajectory risk_trajectory(std::span<const PeriodogramMatrix> matrices, const BaselineState& baseline) {
    detail::require(!matrices.empty(), ErrorCode::EmptyInput, "risk trajectory over zero pixels");
    const std::size_t total = matrices.front().window_count();
    detail::require(baseline.w_t0.index < total, ErrorCode::NoPostBaselineWindows,
                    "baseline window " + std::to_string(baseline.w_t0.index) + " is the last of " +
                        std::to_string(total));
    RiskTrajectory traj{baseline.w_t0, {}};
    for (std::size_t l = baseline.w_t0.index + 1; l <= total; ++l) traj.points.push_back(risk_point(matrices, baseline, l));
    return traj;
}

/// First window starting a run of `persistence` consecutive points at or above `level`.
inline std::optional<Window> first_sustained_crossing(std::span<const RiskPoint> points, double level,
                                                      std::size_t persistence) {
    std::size_t run = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        run = points[i].median_pq >= level ? run + 1 : 0;
        if (run >= persistence) return points[i + 1 - persistence].window;
    }
    return std::nullopt;
}

inline WarningReport detect_thresholds(const RiskTrajectory& traj, double t_R_level = 0.125, double t_I_level = 0.225,
                                       std::size_t persistence = 2) {
    detail::require(persistence >= 1, ErrorCode::InvalidConfig, "persistence must be at least 1");
    detail::require(t_R_level > 0.0 && t_R_level <= t_I_level && t_I_level <= 0.25, ErrorCode::InvalidConfig,
                    "thresholds must satisfy 0 < t_R <= t_I <= 0.25");
    return WarningReport{first_sustained_crossing(traj.points, t_R_level, persistence),
                         first_sustained_crossing(traj.points, t_I_level, persistence), t_R_level, t_I_level,
                         persistence};
}

/// Incremental Phase II: keeps the last n_L samples of every pixel and emits one RiskPoint
/// per appended sample once a full window is available, without touching earlier windows.
class StreamingRiskMonitor {
public:
    StreamingRiskMonitor(BaselineState baseline, WindowSpec spec, SampleGrid grid, std::size_t pixels)
        : baseline_(std::move(baseline)), spec_(spec), grid_(grid), buffers_(pixels) {
        spec_.validate();
        detail::require(spec_.step == 1, ErrorCode::InvalidWindow, "streaming monitor requires step 1");
        detail::require(pixels >= 1, ErrorCode::EmptyInput, "streaming monitor needs at least one pixel");
        grid_.count = 0;
    }

    /// Appends one sample per pixel (in construction order). Returns the risk point of the
    /// window ending at this sample when that window lies after the baseline.
    std::optional<RiskPoint> append(std::span<const double> samples) {
        detail::require(samples.size() == buffers_.size(), ErrorCode::LengthMismatch,
                        "expected one sample per pixel");
        for (std::size_t s = 0; s < samples.size(); ++s) {
            detail::require(std::isfinite(samples[s]), ErrorCode::NonFinite, "non-finite streamed sample");
            buffers_[s].push_back(samples[s]);
            if (buffers_[s].size() > spec_.length) buffers_[s].pop_front();
        }
        ++grid_.count;
        if (grid_.count < spec_.length) return std::nullopt;
        const Window w = window_at(grid_, spec_, grid_.count - spec_.length + 1);
        if (w.index <= baseline_.w_t0.index) return std::nullopt;
        std::vector<double> values;
        values.reserve(buffers_.size());
        for (const auto& buf : buffers_) {
            const std::vector<double> window(buf.begin(), buf.end());
            const auto p = periodogram(detrend(window, spec_.detrend), spec_, w);
            values.push_back(pq(classify_window(baseline_, p)));
        }
        return RiskPoint{w, stats::median(values), stats::iqr(values), values.size()};
    }

    [[nodiscard]] std::size_t samples_seen() const noexcept { return grid_.count; }

private:
    BaselineState baseline_;
    WindowSpec spec_;
    SampleGrid grid_;
    std::vector<std::deque<double>> buffers_;
};

}  // namespace slopewatch
