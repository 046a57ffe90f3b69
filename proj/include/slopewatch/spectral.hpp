#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slopewatch/errors.hpp"
#include "slopewatch/series.hpp"
#include "slopewatch/stats.hpp"

namespace slopewatch {

/// Local periodograms of one pixel: rows are frequencies k = 1..n_L/2, columns windows l = 1..L.
struct PeriodogramMatrix {
    std::string location_id;
    std::string pixel_id;
    WindowSpec spec;
    std::vector<Window> windows;
    Eigen::MatrixXd entries;

    [[nodiscard]] std::size_t window_count() const noexcept { return windows.size(); }

    [[nodiscard]] PeriodogramVector column(std::size_t l) const {
        detail::require(l >= 1 && l <= windows.size(), ErrorCode::IndexOutOfRange,
                        "window " + std::to_string(l) + " outside 1.." + std::to_string(windows.size()));
        PeriodogramVector p{windows[l - 1], spec.length, std::vector<double>(spec.half())};
        for (std::size_t k = 0; k < spec.half(); ++k)
            p.ordinates[k] = entries(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l - 1));
        return p;
    }
};

/// Periodograms of every pixel in scope at one window: rows pixels, columns frequencies.
struct WindowCrossSection {
    Window window;
    std::vector<std::string> location_ids;
    std::vector<std::string> pixel_ids;
    Eigen::MatrixXd rows;
};

enum class VarianceAggregation { per_pixel, spatial_median };

struct LocalVarianceTrajectory {
    std::string location_id;
    std::vector<double> values;  // one per window
    VarianceAggregation aggregation = VarianceAggregation::per_pixel;
};

/// Principal axes of the periodogram covariance at one window.
struct PcaModel {
    Eigen::MatrixXd loadings;               // features x m, orthonormal columns
    Eigen::VectorXd component_variances;    // m retained eigenvalues, non-increasing
    Eigen::VectorXd eigenvalues;            // all eigenvalues, non-increasing
    Eigen::VectorXd feature_means;
    double total_variance = 0.0;
    double variance_target = 0.90;

    [[nodiscard]] std::size_t components() const noexcept { return static_cast<std::size_t>(loadings.cols()); }
    [[nodiscard]] std::size_t input_dimension() const noexcept { return static_cast<std::size_t>(loadings.rows()); }

    [[nodiscard]] double explained_fraction() const noexcept {
        return total_variance > 0.0 ? component_variances.sum() / total_variance : 0.0;
    }
};

// ---------------------------------------------------------------------------

inline PeriodogramMatrix dynamic_periodogram(const DisplacementSeries& series, const WindowSpec& spec) {
    PeriodogramMatrix m{series.location_id, series.pixel_id, spec, windows(series, spec), {}};
    m.entries.resize(static_cast<Eigen::Index>(spec.half()), static_cast<Eigen::Index>(m.windows.size()));
    for (std::size_t l = 0; l < m.windows.size(); ++l) {
        const auto p = window_periodogram(series, spec, m.windows[l]);
        for (std::size_t k = 0; k < spec.half(); ++k)
            m.entries(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = p.ordinates[k];
    }
    return m;
}

inline WindowCrossSection window_cross_section(std::span<const PeriodogramMatrix> matrices, std::size_t l) {
    detail::require(!matrices.empty(), ErrorCode::EmptyInput, "cross-section over zero pixels");
    const auto& first = matrices.front();
    for (const auto& m : matrices) {
        detail::require(m.spec == first.spec && m.window_count() == first.window_count(), ErrorCode::SpecMismatch,
                        "pixel " + m.location_id + "/" + m.pixel_id + " has a different window layout than " +
                            first.location_id + "/" + first.pixel_id);
    }
    detail::require(l >= 1 && l <= first.window_count(), ErrorCode::IndexOutOfRange,
                    "window " + std::to_string(l) + " outside 1.." + std::to_string(first.window_count()));
    WindowCrossSection x;
    x.window = first.windows[l - 1];
    x.rows.resize(static_cast<Eigen::Index>(matrices.size()), static_cast<Eigen::Index>(first.spec.half()));
    for (std::size_t s = 0; s < matrices.size(); ++s) {
        x.location_ids.push_back(matrices[s].location_id);
        x.pixel_ids.push_back(matrices[s].pixel_id);
        x.rows.row(static_cast<Eigen::Index>(s)) = matrices[s].entries.col(static_cast<Eigen::Index>(l - 1)).transpose();
    }
    return x;
}

/// Sum of the retained ordinates k = 1..n_L/2 (the DC term vanishes after detrending).
inline double local_variance(const PeriodogramVector& p) {
    double s = 0.0;
    for (double v : p.ordinates) s += v;
    return s;
}

inline LocalVarianceTrajectory local_variance_trajectory(const PeriodogramMatrix& m) {
    LocalVarianceTrajectory t{m.location_id, std::vector<double>(m.window_count()), VarianceAggregation::per_pixel};
    for (std::size_t l = 0; l < m.window_count(); ++l) t.values[l] = m.entries.col(static_cast<Eigen::Index>(l)).sum();
    return t;
}

/// Per-window median across pixel trajectories.
inline LocalVarianceTrajectory median_local_variance(std::span<const LocalVarianceTrajectory> trajectories,
                                                     std::string location_id) {
    detail::require(!trajectories.empty(), ErrorCode::EmptyInput, "median over zero pixel trajectories");
    const std::size_t length = trajectories.front().values.size();
    for (const auto& t : trajectories)
        detail::require(t.values.size() == length, ErrorCode::SpecMismatch, "trajectories differ in window count");
    LocalVarianceTrajectory out{std::move(location_id), std::vector<double>(length), VarianceAggregation::spatial_median};
    std::vector<double> column(trajectories.size());
    for (std::size_t l = 0; l < length; ++l) {
        for (std::size_t s = 0; s < trajectories.size(); ++s) column[s] = trajectories[s].values[l];
        out.values[l] = stats::median(column);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PCA

/// Eigen-decomposition of the sample covariance of the rows of `features`.
/// Retains the fewest components whose eigenvalues reach `variance_target` of the total.
inline PcaModel pca_fit(const Eigen::MatrixXd& features, double variance_target = 0.90) {
    detail::require(features.rows() >= 2, ErrorCode::TooShort, "PCA needs at least 2 rows");
    detail::require(features.cols() >= 1, ErrorCode::EmptyInput, "PCA needs at least 1 feature");
    detail::require(features.allFinite(), ErrorCode::NonFinite, "PCA input has non-finite entries");
    detail::require(variance_target > 0.0 && variance_target <= 1.0, ErrorCode::InvalidConfig,
                    "PCA variance target must lie in (0, 1]");

    PcaModel model;
    model.variance_target = variance_target;
    model.feature_means = features.colwise().mean().transpose();
    const Eigen::MatrixXd centred = features.rowwise() - model.feature_means.transpose();
    const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(features.rows() - 1);

    const double total = cov.trace();
    const double scale = model.feature_means.squaredNorm() / static_cast<double>(features.cols());
    detail::require(total > 0.0 && total > 1e-24 * scale, ErrorCode::DegenerateInput,
                    "features have zero total variance");
    model.total_variance = total;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    detail::require(solver.info() == Eigen::Success, ErrorCode::DegenerateInput, "eigen-solve did not converge");

    // Eigen returns ascending order; flip to descending.
    const Eigen::Index d = cov.rows();
    model.eigenvalues.resize(d);
    Eigen::MatrixXd vectors(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        model.eigenvalues(i) = std::max(solver.eigenvalues()(d - 1 - i), 0.0);
        vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
        // Largest-magnitude entry positive.
        Eigen::Index arg = 0;
        vectors.col(i).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, i) < 0.0) vectors.col(i) *= -1.0;
    }

    Eigen::Index m = d;
    double cumulative = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        cumulative += model.eigenvalues(i);
        if (cumulative >= (variance_target - 1e-12) * total) {
            m = i + 1;
            break;
        }
    }
    model.loadings = vectors.leftCols(m);
    model.component_variances = model.eigenvalues.head(m);
    return model;
}

inline PcaModel pca_fit(const WindowCrossSection& x, double variance_target = 0.90) {
    return pca_fit(x.rows, variance_target);
}

/// Scores = loadings^T (features - means).
inline Eigen::VectorXd pca_project(const PcaModel& model, std::span<const double> features) {
    detail::require(features.size() == model.input_dimension(), ErrorCode::LengthMismatch,
                    "feature vector has " + std::to_string(features.size()) + " entries, PCA expects " +
                        std::to_string(model.input_dimension()));
    const Eigen::Map<const Eigen::VectorXd> f(features.data(), static_cast<Eigen::Index>(features.size()));
    return model.loadings.transpose() * (f - model.feature_means);
}

/// Projects every row of `features`; result is rows x m.
inline Eigen::MatrixXd pca_project_rows(const PcaModel& model, const Eigen::MatrixXd& features) {
    detail::require(static_cast<std::size_t>(features.cols()) == model.input_dimension(), ErrorCode::LengthMismatch,
                    "feature matrix width does not match PCA input dimension");
    return (features.rowwise() - model.feature_means.transpose()) * model.loadings;
}

}  // namespace slopewatch
