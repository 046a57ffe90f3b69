#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slopewatch/date.hpp"
#include "slopewatch/errors.hpp"

namespace slopewatch {

/// Regular sampling grid: sample i (0-based) is dated start + i * interval_days.
struct SampleGrid {
    Date start;
    int interval_days = 12;
    std::size_t count = 0;

    [[nodiscard]] Date date_at(std::size_t index) const noexcept {
        return start.plus_days(static_cast<std::int64_t>(index) * interval_days);
    }
    [[nodiscard]] Date last_date() const noexcept { return date_at(count - 1); }

    friend bool operator==(const SampleGrid&, const SampleGrid&) = default;
};

/// One pixel's relative line-of-sight displacement record, in millimetres.
struct DisplacementSeries {
    std::string location_id;
    std::string pixel_id;
    SampleGrid grid;
    std::vector<double> values;
};

enum class Detrend { none, mean_only, linear };

inline std::string to_string(Detrend d) {
    switch (d) {
        case Detrend::none: return "none";
        case Detrend::mean_only: return "mean_only";
        case Detrend::linear: return "linear";
    }
    return "linear";
}

inline Detrend parse_detrend(const std::string& text) {
    if (text == "none") return Detrend::none;
    if (text == "mean_only") return Detrend::mean_only;
    if (text == "linear") return Detrend::linear;
    throw Error(ErrorCode::InvalidConfig, "unknown detrend method '" + text + "'");
}

/// Sliding-window layout. With step 1 consecutive windows overlap by length - 1 samples.
struct WindowSpec {
    std::size_t length = 16;
    std::size_t step = 1;
    Detrend detrend = Detrend::linear;

    [[nodiscard]] std::size_t half() const noexcept { return length / 2; }

    void validate() const {
        detail::require(length >= 2 && length % 2 == 0, ErrorCode::InvalidWindow,
                        "window length must be even and >= 2, got " + std::to_string(length));
        detail::require(step >= 1, ErrorCode::InvalidWindow, "window step must be >= 1");
    }

    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Window l covers samples first_sample..last_sample (1-based, inclusive).
struct Window {
    std::size_t index = 0;
    std::size_t first_sample = 0;
    std::size_t last_sample = 0;
    Date start_date;
    Date end_date;

    [[nodiscard]] std::string date_range() const { return start_date.iso() + " : " + end_date.iso(); }

    friend bool operator==(const Window&, const Window&) = default;
};

struct PeriodogramVector {
    Window window;
    std::size_t window_length = 0;
    std::vector<double> ordinates;  // k = 1..window_length/2

    /// Fourier frequency w_k = 2 pi k / n_L for retained ordinate k (1-based).
    [[nodiscard]] double frequency(std::size_t k) const noexcept {
        return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(window_length);
    }
};

// ---------------------------------------------------------------------------
// Validation and windowing

/// Builds a series from dated samples, inferring the sampling grid.
inline DisplacementSeries validate_series(std::span<const std::pair<Date, double>> raw,
                                          std::string location_id, std::string pixel_id) {
    const std::string who = location_id + "/" + pixel_id;
    detail::require(raw.size() >= 2, ErrorCode::TooShort,
                    who + ": need at least 2 samples, got " + std::to_string(raw.size()));
    const std::int64_t gap = raw[1].first - raw[0].first;
    detail::require(gap > 0, ErrorCode::IrregularSampling, who + ": dates must be strictly increasing");
    DisplacementSeries series{std::move(location_id), std::move(pixel_id),
                              SampleGrid{raw[0].first, static_cast<int>(gap), raw.size()}, {}};
    series.values.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (i > 0) {
            const std::int64_t g = raw[i].first - raw[i - 1].first;
            detail::require(g > 0, ErrorCode::IrregularSampling,
                            who + ": dates must be strictly increasing at " + raw[i].first.iso());
            detail::require(g == gap, ErrorCode::IrregularSampling,
                            who + ": gap of " + std::to_string(g) + " days at " + raw[i].first.iso() +
                                " differs from " + std::to_string(gap));
        }
        detail::require(std::isfinite(raw[i].second), ErrorCode::NonFinite,
                        who + ": non-finite value at " + raw[i].first.iso());
        series.values.push_back(raw[i].second);
    }
    return series;
}

inline std::size_t window_count(std::size_t sample_count, const WindowSpec& spec) {
    spec.validate();
    detail::require(sample_count >= spec.length, ErrorCode::TooShort,
                    "series of " + std::to_string(sample_count) + " samples is shorter than window length " +
                        std::to_string(spec.length));
    return (sample_count - spec.length) / spec.step + 1;
}

/// Window `index` (1-based) on `grid`; dates come from exact integer date arithmetic.
inline Window window_at(const SampleGrid& grid, const WindowSpec& spec, std::size_t index) {
    const std::size_t total = window_count(grid.count, spec);
    detail::require(index >= 1 && index <= total, ErrorCode::IndexOutOfRange,
                    "window " + std::to_string(index) + " outside 1.." + std::to_string(total));
    Window w;
    w.index = index;
    w.first_sample = (index - 1) * spec.step + 1;
    w.last_sample = w.first_sample + spec.length - 1;
    w.start_date = grid.date_at(w.first_sample - 1);
    w.end_date = grid.date_at(w.last_sample - 1);
    return w;
}

inline std::vector<Window> windows(const SampleGrid& grid, const WindowSpec& spec) {
    const std::size_t total = window_count(grid.count, spec);
    std::vector<Window> out;
    out.reserve(total);
    for (std::size_t l = 1; l <= total; ++l) out.push_back(window_at(grid, spec, l));
    return out;
}

inline std::vector<Window> windows(const DisplacementSeries& series, const WindowSpec& spec) {
    return windows(series.grid, spec);
}

inline std::span<const double> window_values(const DisplacementSeries& series, const Window& w) {
    detail::require(w.last_sample <= series.values.size(), ErrorCode::IndexOutOfRange,
                    "window extends past the end of the series");
    return std::span<const double>(series.values).subspan(w.first_sample - 1, w.last_sample - w.first_sample + 1);
}

// ---------------------------------------------------------------------------
// Moments, detrending, autocovariance

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;
};

/// Local sample mean and (n-1)-divisor variance.
inline MeanVariance window_mean_variance(std::span<const double> values) {
    detail::require(values.size() >= 2, ErrorCode::TooShort, "mean/variance needs at least 2 values");
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, ss / (n - 1.0)};
}

inline std::vector<double> detrend(std::span<const double> values, Detrend method) {
    std::vector<double> out(values.begin(), values.end());
    if (method == Detrend::none) return out;
    detail::require(values.size() >= 2, ErrorCode::TooShort, "detrending needs at least 2 values");
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (method == Detrend::mean_only) {
        for (double& v : out) v -= mean;
        return out;
    }
    detail::require(values.size() >= 3, ErrorCode::TooShort, "linear detrending needs at least 3 values");
    // Least squares on the centred time index: slope = sum(tc*y) / sum(tc^2).
    const double t_mid = (n - 1.0) / 2.0;
    double sty = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double tc = static_cast<double>(i) - t_mid;
        sty += tc * (values[i] - mean);
        stt += tc * tc;
    }
    const double slope = sty / stt;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = values[i] - mean - slope * (static_cast<double>(i) - t_mid);
    return out;
}

/// Biased (1/n) sample autocovariance at `lag`; the input mean is removed first.
inline double autocovariance(std::span<const double> values, long lag) {
    const auto n = static_cast<long>(values.size());
    const long u = lag < 0 ? -lag : lag;
    detail::require(n > 0 && u < n, ErrorCode::LagOutOfRange,
                    "lag " + std::to_string(lag) + " out of range for length " + std::to_string(n));
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double acc = 0.0;
    for (long t = 0; t + u < n; ++t) acc += (values[t] - mean) * (values[t + u] - mean);
    return acc / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Periodogram

namespace detail {

// cos(2 pi j / n) for j = 0..n-1, indexed by (k*u) mod n so no phase drifts.
inline std::vector<double> cosine_table(std::size_t n) {
    std::vector<double> table(n);
    for (std::size_t j = 0; j < n; ++j)
        table[j] = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n));
    return table;
}

// I(w_k) for k >= 1 via the autocovariance sum: c(0) + 2 * sum_u c(u) cos(w_k u).
// Equal to |d(w_k)|^2 because the DFT at nonzero Fourier frequencies ignores the mean.
inline std::vector<double> periodogram_from_autocovariance(std::span<const double> values, std::size_t k_max) {
    const std::size_t n = values.size();
    std::vector<double> acov(n);
    for (std::size_t u = 0; u < n; ++u) acov[u] = autocovariance(values, static_cast<long>(u));
    const auto table = cosine_table(n);
    std::vector<double> out(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        double s = acov[0];
        for (std::size_t u = 1; u < n; ++u) s += 2.0 * acov[u] * table[(k * u) % n];
        out[k - 1] = std::max(s, 0.0);
    }
    return out;
}

}  // namespace detail

/// Full periodogram I(w_k) = |d(w_k)|^2 for k = 0..n-1; sums to sum(y^2).
inline std::vector<double> full_periodogram(std::span<const double> values) {
    const std::size_t n = values.size();
    detail::require(n >= 2, ErrorCode::TooShort, "periodogram needs at least 2 values");
    std::vector<double> out(n);
    double sum = 0.0;
    for (double v : values) sum += v;
    out[0] = sum * sum / static_cast<double>(n);
    const auto upper = detail::periodogram_from_autocovariance(values, n - 1);
    std::copy(upper.begin(), upper.end(), out.begin() + 1);
    return out;
}

/// Ordinates k = 1..n_L/2 of an already detrended window.
inline PeriodogramVector periodogram(std::span<const double> values, const WindowSpec& spec, Window window = {}) {
    spec.validate();
    detail::require(values.size() == spec.length, ErrorCode::LengthMismatch,
                    "periodogram input has " + std::to_string(values.size()) + " values, window length is " +
                        std::to_string(spec.length));
    return PeriodogramVector{window, spec.length, detail::periodogram_from_autocovariance(values, spec.half())};
}

/// Detrends window `w` of `series` per `spec` and returns its periodogram.
inline PeriodogramVector window_periodogram(const DisplacementSeries& series, const WindowSpec& spec,
                                            const Window& w) {
    const auto detrended = detrend(window_values(series, w), spec.detrend);
    return periodogram(detrended, spec, w);
}

}  // namespace slopewatch
