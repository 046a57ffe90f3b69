#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slopewatch/errors.hpp"
#include "slopewatch/series.hpp"
#include "slopewatch/spectral.hpp"
#include "slopewatch/stats.hpp"

namespace slopewatch {

enum class Trigger { inflection_up, inflection_down };

inline std::string to_string(Trigger t) { return t == Trigger::inflection_up ? "inflection_up" : "inflection_down"; }

struct CandidateWindow {
    Window window;
    Trigger trigger = Trigger::inflection_up;
    double trajectory_value = 0.0;
};

/// A k-medoids partition. Cluster c is represented by item medoids[c]; labels[i] is the cluster of item i.
struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> medoids;
    std::vector<std::size_t> labels;
    std::vector<double> within_cluster_variations;  // raw dissimilarity sums per cluster
    double total_dissimilarity = 0.0;               // to the 1-medoid of the whole set
    double inter_cluster_fraction = 0.0;

    [[nodiscard]] double cost() const noexcept {
        return std::accumulate(within_cluster_variations.begin(), within_cluster_variations.end(), 0.0);
    }

    /// Within-cluster sums as fractions of the total dissimilarity (the shape tabulated for reports).
    [[nodiscard]] std::vector<double> within_fractions() const {
        std::vector<double> out(within_cluster_variations.size(), 0.0);
        if (total_dissimilarity > 0.0)
            for (std::size_t c = 0; c < out.size(); ++c) out[c] = within_cluster_variations[c] / total_dissimilarity;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Candidate windows

namespace detail {

inline std::vector<double> median3(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        double a = x[i - 1], b = x[i], c = x[i + 1];
        out[i] = std::max(std::min(a, b), std::min(std::max(a, b), c));
    }
    return out;
}

}  // namespace detail

/// Indices (0-based) where the trajectory turns: the sign of the first difference flips.
/// Flat stretches continue the previous direction, so a plateau reports its last window.
inline std::vector<std::pair<std::size_t, Trigger>> turning_points(std::span<const double> trajectory, bool smooth) {
    detail::require(trajectory.size() >= 3, ErrorCode::TooShort, "candidate search needs at least 3 windows");
    const auto x = smooth ? detail::median3(trajectory) : std::vector<double>(trajectory.begin(), trajectory.end());
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    const double eps = 1e-12 * scale;

    std::vector<std::pair<std::size_t, Trigger>> out;
    int previous = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double d = x[i + 1] - x[i];
        const int sign = d > eps ? 1 : (d < -eps ? -1 : 0);
        if (sign == 0) continue;
        if (previous != 0 && sign != previous)
            out.emplace_back(i, sign > 0 ? Trigger::inflection_up : Trigger::inflection_down);
        previous = sign;
    }
    return out;
}

/// Candidate regime-change windows on a (median) local-variance trajectory.
/// `windows[l]` describes trajectory entry l.
inline std::vector<CandidateWindow> inflection_candidates(const LocalVarianceTrajectory& trajectory,
                                                          std::span<const Window> windows, bool smooth = true) {
    detail::require(windows.size() == trajectory.values.size(), ErrorCode::LengthMismatch,
                    "trajectory and window list differ in length");
    std::vector<CandidateWindow> out;
    for (const auto& [i, trigger] : turning_points(trajectory.values, smooth))
        out.push_back(CandidateWindow{windows[i], trigger, trajectory.values[i]});
    return out;
}

// ---------------------------------------------------------------------------
// k-medoids

/// Squared Euclidean dissimilarities between the rows of `features`.
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& features) {
    const Eigen::Index n = features.rows();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (features.row(i) - features.row(j)).squaredNorm();
    }
    return d;
}

namespace detail {

inline std::size_t global_medoid(const Eigen::MatrixXd& dist, double* total = nullptr) {
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        const double c = dist.row(i).sum();
        if (c < best_cost) {
            best_cost = c;
            best = static_cast<std::size_t>(i);
        }
    }
    if (total) *total = best_cost;
    return best;
}

// Nearest medoid slot per item; ties go to the smaller item index.
inline std::vector<std::size_t> assign(const Eigen::MatrixXd& dist, std::span<const std::size_t> medoids) {
    const auto n = static_cast<std::size_t>(dist.rows());
    std::vector<std::size_t> labels(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < medoids.size(); ++c) {
            const double d = dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(medoids[c]));
            if (d < best) {
                best = d;
                labels[j] = c;
            }
        }
        // A medoid always belongs to its own cluster, even with duplicate points.
        for (std::size_t c = 0; c < medoids.size(); ++c)
            if (medoids[c] == j) labels[j] = c;
    }
    return labels;
}

inline double medoid_cost(const Eigen::MatrixXd& dist, std::span<const std::size_t> medoids) {
    double cost = 0.0;
    for (Eigen::Index j = 0; j < dist.rows(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m : medoids) best = std::min(best, dist(j, static_cast<Eigen::Index>(m)));
        cost += best;
    }
    return cost;
}

// PAM swap phase: apply the best improving (medoid, non-medoid) exchange until none improves.
inline double pam_swap(const Eigen::MatrixXd& dist, std::vector<std::size_t>& medoids) {
    const auto n = static_cast<std::size_t>(dist.rows());
    const std::size_t k = medoids.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> nearest(n), second(n);
    std::vector<std::size_t> slot(n);
    std::vector<char> is_medoid(n, 0);

    double cost = medoid_cost(dist, medoids);
    for (;;) {
        std::fill(is_medoid.begin(), is_medoid.end(), 0);
        for (std::size_t m : medoids) is_medoid[m] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            nearest[j] = second[j] = inf;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(medoids[c]));
                if (d < nearest[j]) {
                    second[j] = nearest[j];
                    nearest[j] = d;
                    slot[j] = c;
                } else if (d < second[j]) {
                    second[j] = d;
                }
            }
        }
        double best_delta = 0.0;
        std::size_t best_slot = 0, best_item = 0;
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double dh = dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(h));
                    delta += (slot[j] == c ? std::min(dh, second[j]) : std::min(dh, nearest[j])) - nearest[j];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_slot = c;
                    best_item = h;
                }
            }
        }
        if (!(best_delta < -1e-12 * std::max(cost, std::numeric_limits<double>::min()))) break;
        medoids[best_slot] = best_item;
        cost = medoid_cost(dist, medoids);
    }
    return cost;
}

inline Clustering make_clustering(const Eigen::MatrixXd& dist, std::vector<std::size_t> medoids, double total) {
    std::sort(medoids.begin(), medoids.end());
    Clustering c;
    c.k = medoids.size();
    c.labels = assign(dist, medoids);
    c.within_cluster_variations.assign(c.k, 0.0);
    for (std::size_t j = 0; j < c.labels.size(); ++j)
        c.within_cluster_variations[c.labels[j]] +=
            dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(medoids[c.labels[j]]));
    c.medoids = std::move(medoids);
    c.total_dissimilarity = total;
    c.inter_cluster_fraction = total > 0.0 ? std::clamp(1.0 - c.cost() / total, 0.0, 1.0) : 0.0;
    return c;
}

}  // namespace detail

struct KMedoidsOptions {
    std::uint64_t seed = 0;
    std::size_t random_restarts = 4;  // in addition to the farthest-first start
};

/// PAM k-medoids under squared Euclidean dissimilarity on the rows of `features`.
/// Starts from a farthest-first build seeded at the 1-medoid, plus seeded random starts;
/// every start is driven to swap-optimality and the cheapest result is kept.
inline Clustering kmedoids(const Eigen::MatrixXd& features, std::size_t k, KMedoidsOptions options = {}) {
    const auto n = static_cast<std::size_t>(features.rows());
    detail::require(n >= 1 && features.allFinite(), ErrorCode::DegenerateInput, "k-medoids needs finite, non-empty features");
    detail::require(k >= 1, ErrorCode::DegenerateInput, "k must be at least 1");
    detail::require(k <= n, ErrorCode::KTooLarge,
                    "k = " + std::to_string(k) + " exceeds item count " + std::to_string(n));
    const Eigen::MatrixXd dist = squared_distances(features);
    double total = 0.0;
    const std::size_t g = detail::global_medoid(dist, &total);
    detail::require(n == 1 || total > 0.0, ErrorCode::DegenerateInput, "all items are identical");

    // Farthest-first build.
    std::vector<std::size_t> start{g};
    std::vector<char> chosen(n, 0);
    chosen[g] = 1;
    while (start.size() < k) {
        std::size_t pick = n;
        double far = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (chosen[j]) continue;
            double near = std::numeric_limits<double>::infinity();
            for (std::size_t m : start) near = std::min(near, dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)));
            if (near > far) {
                far = near;
                pick = j;
            }
        }
        chosen[pick] = 1;
        start.push_back(pick);
    }

    std::vector<std::size_t> best = start;
    double best_cost = detail::pam_swap(dist, best);

    if (k > 1 && k < n) {
        std::mt19937_64 rng(options.seed);
        for (std::size_t r = 0; r < options.random_restarts; ++r) {
            // Partial Fisher-Yates with explicit modulo draws keeps the sequence portable.
            std::vector<std::size_t> pool(n);
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
                std::swap(pool[i], pool[j]);
            }
            std::vector<std::size_t> trial(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
            const double c = detail::pam_swap(dist, trial);
            if (c < best_cost - 1e-12 * best_cost) {
                best_cost = c;
                best = trial;
            }
        }
    }
    return detail::make_clustering(dist, std::move(best), total);
}

/// Fraction of the total dissimilarity (to the 1-medoid of all items) not left inside clusters.
inline double cluster_variance_ratio(const Clustering& c, const Eigen::MatrixXd& features) {
    detail::require(c.labels.size() == static_cast<std::size_t>(features.rows()), ErrorCode::LengthMismatch,
                    "clustering and feature matrix differ in item count");
    const Eigen::MatrixXd dist = squared_distances(features);
    double total = 0.0;
    detail::global_medoid(dist, &total);
    if (total <= 0.0) return 0.0;
    double within = 0.0;
    for (std::size_t j = 0; j < c.labels.size(); ++j)
        within += dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c.medoids[c.labels[j]]));
    return std::clamp(1.0 - within / total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Baseline selection

/// The state-of-the-system at the selected regime-change window.
struct BaselineState {
    Window w_t0;
    PcaModel pca;
    Clustering clustering;
    Eigen::MatrixXd medoid_scores;  // k x m
    std::vector<std::string> location_ids;
    std::vector<std::string> pixel_ids;
    double dispersion_scale = 1.0;

    [[nodiscard]] std::size_t k() const noexcept { return clustering.k; }
};

struct ClusterDiagnostic {
    std::size_t k = 0;
    std::vector<double> within_fractions;
    double inter_cluster_fraction = 0.0;
    bool qualifies = false;
};

struct CandidateDiagnostics {
    CandidateWindow candidate;
    std::size_t pca_components = 0;
    std::vector<ClusterDiagnostic> clusters;
    std::string failure;  // non-empty when PCA or clustering could not run at this window

    [[nodiscard]] std::optional<std::size_t> smallest_qualifying_k() const {
        for (const auto& c : clusters)
            if (c.qualifies) return c.k;
        return std::nullopt;
    }
};

struct RegimeOptions {
    std::size_t k_min = 2;
    std::size_t k_max = 5;
    double threshold = 0.80;
    double pca_var_target = 0.90;
    std::uint64_t seed = 0;
};

/// Median distance (not squared) of items to their own medoid; when that is zero,
/// the smallest nonzero pairwise distance.
inline double dispersion_scale(const Eigen::MatrixXd& scores, const Clustering& c) {
    std::vector<double> d(c.labels.size());
    for (std::size_t j = 0; j < c.labels.size(); ++j)
        d[j] = (scores.row(static_cast<Eigen::Index>(j)) - scores.row(static_cast<Eigen::Index>(c.medoids[c.labels[j]]))).norm();
    double scale = stats::median(d);
    if (scale > 0.0) return scale;
    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
        for (Eigen::Index j = i + 1; j < scores.rows(); ++j) {
            const double dij = (scores.row(i) - scores.row(j)).norm();
            if (dij > 0.0) smallest = std::min(smallest, dij);
        }
    detail::require(std::isfinite(smallest), ErrorCode::DegenerateInput, "baseline scores are all identical");
    return smallest;
}

/// Fits PCA at `window_index` over all pixels and clusters the scores with k medoids.
inline BaselineState fit_baseline(std::span<const PeriodogramMatrix> matrices, std::size_t window_index, std::size_t k,
                                  const RegimeOptions& options) {
    const auto x = window_cross_section(matrices, window_index);
    BaselineState b;
    b.w_t0 = x.window;
    b.pca = pca_fit(x, options.pca_var_target);
    const Eigen::MatrixXd scores = pca_project_rows(b.pca, x.rows);
    b.clustering = kmedoids(scores, k, {options.seed});
    b.medoid_scores.resize(static_cast<Eigen::Index>(k), scores.cols());
    for (std::size_t c = 0; c < k; ++c)
        b.medoid_scores.row(static_cast<Eigen::Index>(c)) = scores.row(static_cast<Eigen::Index>(b.clustering.medoids[c]));
    b.location_ids = x.location_ids;
    b.pixel_ids = x.pixel_ids;
    b.dispersion_scale = dispersion_scale(scores, b.clustering);
    return b;
}

/// Clusters every candidate window for each k in range and records the inter-cluster fractions.
inline std::vector<CandidateDiagnostics> evaluate_candidates(std::span<const CandidateWindow> candidates,
                                                             std::span<const PeriodogramMatrix> matrices,
                                                             const RegimeOptions& options) {
    detail::require(options.k_min >= 1 && options.k_min <= options.k_max, ErrorCode::InvalidConfig, "invalid k range");
    std::vector<CandidateDiagnostics> out;
    for (const auto& cand : candidates) {
        CandidateDiagnostics diag{cand, 0, {}, {}};
        try {
            const auto x = window_cross_section(matrices, cand.window.index);
            const auto pca = pca_fit(x, options.pca_var_target);
            diag.pca_components = pca.components();
            const Eigen::MatrixXd scores = pca_project_rows(pca, x.rows);
            for (std::size_t k = options.k_min; k <= options.k_max && k <= static_cast<std::size_t>(scores.rows()); ++k) {
                const auto c = kmedoids(scores, k, {options.seed});
                diag.clusters.push_back(ClusterDiagnostic{k, c.within_fractions(), c.inter_cluster_fraction,
                                                          c.inter_cluster_fraction >= options.threshold - 1e-12});
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateInput) throw;
            diag.failure = e.what();
        }
        out.push_back(std::move(diag));
    }
    return out;
}

struct RegimeChoice {
    std::size_t candidate = 0;  // position in the diagnostics list
    std::size_t k = 0;
};

/// Fewest clusters reaching the threshold wins; ties go to the later window.
inline std::optional<RegimeChoice> choose_regime(std::span<const CandidateDiagnostics> diagnostics) {
    std::optional<RegimeChoice> best;
    for (std::size_t i = 0; i < diagnostics.size(); ++i) {
        const auto k = diagnostics[i].smallest_qualifying_k();
        if (!k) continue;
        const bool better = !best || *k < best->k ||
                            (*k == best->k && diagnostics[i].candidate.window.index >
                                                  diagnostics[best->candidate].candidate.window.index);
        if (better) best = RegimeChoice{i, *k};
    }
    return best;
}

inline std::string describe(std::span<const CandidateDiagnostics> diagnostics) {
    std::string s;
    for (const auto& d : diagnostics) {
        s += "window " + std::to_string(d.candidate.window.index) + ":";
        if (!d.failure.empty()) s += " " + d.failure;
        for (const auto& c : d.clusters) {
            char buf[48];
            std::snprintf(buf, sizeof buf, " k=%zu %.1f%%", c.k, 100.0 * c.inter_cluster_fraction);
            s += buf;
        }
        s += "; ";
    }
    return s;
}

/// Phase I: pick the baseline window among `candidates`.
inline BaselineState select_regime_window(std::span<const CandidateWindow> candidates,
                                          std::span<const PeriodogramMatrix> matrices, const RegimeOptions& options) {
    detail::require(!candidates.empty(), ErrorCode::NoCandidateQualifies, "no candidate windows");
    const auto diagnostics = evaluate_candidates(candidates, matrices, options);
    const auto choice = choose_regime(diagnostics);
    detail::require(choice.has_value(), ErrorCode::NoCandidateQualifies,
                    "no (candidate, k) reached the inter-cluster threshold; " + describe(diagnostics));
    return fit_baseline(matrices, diagnostics[choice->candidate].candidate.window.index, choice->k, options);
}

}  // namespace slopewatch
