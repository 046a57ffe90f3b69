#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace testing_support {

struct Kendall {
    double tau = 0.0;
    double z = 0.0;
    double p_two_sided = 1.0;
};

// Kendall tau of y against its index, normal approximation without tie correction.
inline Kendall kendall_vs_index(std::span<const double> y) {
    const auto n = static_cast<long>(y.size());
    long s = 0;
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) s += (y[j] > y[i]) - (y[j] < y[i]);
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    const double var = static_cast<double>(n) * (n - 1) * (2.0 * n + 5.0) / 18.0;
    Kendall k;
    k.tau = pairs > 0 ? static_cast<double>(s) / pairs : 0.0;
    k.z = var > 0 ? static_cast<double>(s) / std::sqrt(var) : 0.0;
    k.p_two_sided = std::erfc(std::abs(k.z) / std::sqrt(2.0));
    return k;
}

inline std::vector<double> column_sums(const Eigen::MatrixXd& m) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m.col(c).sum();
    return out;
}

}  // namespace testing_support
