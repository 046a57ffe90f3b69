#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "slopewatch/errors.hpp"

namespace slopewatch::stats {

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7).
inline double quantile(std::span<const double> values, double prob) {
    detail::require(!values.empty(), ErrorCode::EmptyInput, "quantile of empty sample");
    detail::require(prob >= 0.0 && prob <= 1.0, ErrorCode::DomainError, "quantile probability outside [0,1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = prob * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Even counts average the two middle values.
inline double median(std::span<const double> values) { return quantile(values, 0.5); }

inline double iqr(std::span<const double> values) {
    return quantile(values, 0.75) - quantile(values, 0.25);
}

}  // namespace slopewatch::stats
