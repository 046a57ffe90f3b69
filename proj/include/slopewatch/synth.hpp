#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slopewatch/date.hpp"
#include "slopewatch/errors.hpp"
#include "slopewatch/regime.hpp"
#include "slopewatch/series.hpp"

namespace slopewatch::synth {

// ---------------------------------------------------------------------------
// Portable random streams: mt19937_64 raw output (fully specified by the standard)
// converted to doubles here rather than through the implementation-defined
// std:: distributions.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (cached_) {
            cached_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        cached_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    long binomial(long n, double p) noexcept {
        long hits = 0;
        for (long i = 0; i < n; ++i) hits += uniform() < p ? 1 : 0;
        return hits;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool cached_ = false;
};

// ---------------------------------------------------------------------------
// Synthetic displacement fields

enum class NoiseModel { white, ar1 };

struct PostChange {
    double trend_slope = 0.0;                  // mm per step after onset
    double variance_ramp = 1.0;                // variance multiplier per step after onset
    std::optional<std::size_t> spectral_shift; // Fourier index (relative to the reference window) of a growing sinusoid
    double spectral_amplitude = 0.0;           // sinusoid amplitude growth, mm per step
};

struct SynthConfig {
    std::uint64_t seed = 1;
    std::size_t n_locations = 6;
    std::size_t pixels_per_location = 20;
    std::size_t count = 44;
    int interval_days = 12;
    Date start_date = Date::from_ymd(2017, 8, 19);
    NoiseModel noise_model = NoiseModel::white;
    double phi = 0.0;       // AR(1) coefficient
    double noise_sd = 1.0;  // marginal standard deviation of each pixel's own noise, mm
    // Contiguous pixels share their location's displacement signal: a stationary process
    // of the same noise model with marginal sd common_sd * location_effect(i).
    double common_sd = 0.0;
    // Window c (1-based, under reference_window_length) is the first window that
    // contains post-change samples: the change starts at its last sample.
    std::optional<std::size_t> change_window;
    std::size_t reference_window_length = 16;
    PostChange post_change;
    // Post-change effects at location i are scaled by 1 + spread * (2i/(n-1) - 1).
    double location_effect_spread = 0.5;

    void validate() const {
        auto need = [](bool ok, const std::string& what) {
            if (!ok) throw Error(ErrorCode::InvalidConfig, what);
        };
        need(n_locations >= 1 && pixels_per_location >= 1, "need at least one location and one pixel");
        need(count >= 2, "count must be at least 2");
        need(interval_days >= 1, "interval_days must be positive");
        need(std::abs(phi) < 1.0 && std::isfinite(phi), "|phi| must be < 1");
        need(noise_sd > 0.0 && std::isfinite(noise_sd), "noise_sd must be positive and finite");
        need(common_sd >= 0.0 && std::isfinite(common_sd), "common_sd must be non-negative and finite");
        need(reference_window_length >= 2, "reference window length must be >= 2");
        need(std::isfinite(post_change.trend_slope) && std::isfinite(post_change.spectral_amplitude),
             "post-change magnitudes must be finite");
        need(post_change.variance_ramp > 0.0 && std::isfinite(post_change.variance_ramp),
             "variance_ramp must be positive and finite");
        need(location_effect_spread >= 0.0 && location_effect_spread < 1.0, "location_effect_spread must lie in [0,1)");
        if (change_window) {
            need(*change_window >= 1, "change_window is 1-based");
            need(onset_sample().value() <= count, "change_window must start before the end of the series");
        }
    }

    /// 1-based index of the first post-change sample.
    [[nodiscard]] std::optional<std::size_t> onset_sample() const {
        if (!change_window) return std::nullopt;
        return *change_window + reference_window_length - 1;
    }

    [[nodiscard]] double location_effect(std::size_t location) const noexcept {
        if (n_locations < 2) return 1.0;
        const double u = 2.0 * static_cast<double>(location) / static_cast<double>(n_locations - 1) - 1.0;
        return 1.0 + location_effect_spread * u;
    }
};

inline std::string location_name(std::size_t i) { return "L" + std::to_string(i + 1); }

inline std::string pixel_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%03zu", i + 1);
    return buf;
}

namespace detail {

// Stationary white or AR(1) path with marginal standard deviation `marginal_sd`.
inline std::vector<double> stationary_path(const SynthConfig& config, Rng& rng, double marginal_sd) {
    std::vector<double> out(config.count);
    const bool ar = config.noise_model == NoiseModel::ar1;
    const double phi = ar ? config.phi : 0.0;
    const double innovation_sd = marginal_sd * std::sqrt(1.0 - phi * phi);
    double state = marginal_sd * rng.normal();
    for (std::size_t t = 0; t < config.count; ++t) {
        if (t > 0) state = phi * state + innovation_sd * rng.normal();
        out[t] = state;
    }
    return out;
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t location, std::uint64_t pixel) {
    return splitmix64(splitmix64(seed) ^ splitmix64((location << 32) | pixel));
}

constexpr std::uint64_t common_stream = 0xFFFFFFFFULL;

}  // namespace detail

/// Pixel streams use seeds derived from (seed, location, pixel) only, so any generation
/// order gives the same data.
inline DisplacementSeries generate_pixel(const SynthConfig& config, std::size_t location, std::size_t pixel) {
    const double g = config.location_effect(location);
    Rng common_rng(detail::stream_seed(config.seed, location, detail::common_stream));
    const auto common = detail::stationary_path(config, common_rng, config.common_sd * g);
    Rng rng(detail::stream_seed(config.seed, location, pixel));
    const auto own = detail::stationary_path(config, rng, config.noise_sd);

    DisplacementSeries s{location_name(location), pixel_name(pixel),
                         SampleGrid{config.start_date, config.interval_days, config.count}, std::vector<double>(config.count)};
    const auto onset = config.onset_sample();
    const auto& pc = config.post_change;
    for (std::size_t t = 0; t < config.count; ++t) {
        double value = common[t] + own[t];
        if (onset && t + 1 >= *onset) {
            const auto tau = static_cast<double>(t + 2 - *onset);  // 1 at the onset sample
            value *= std::pow(pc.variance_ramp, 0.5 * g * tau);
            value += pc.trend_slope * g * tau;
            if (pc.spectral_shift) {
                const double w = 2.0 * std::numbers::pi * static_cast<double>(*pc.spectral_shift) /
                                 static_cast<double>(config.reference_window_length);
                value += pc.spectral_amplitude * g * tau * std::cos(w * static_cast<double>(t + 1));
            }
        }
        s.values[t] = value;
    }
    return s;
}

inline std::vector<DisplacementSeries> generate(const SynthConfig& config) {
    config.validate();
    std::vector<DisplacementSeries> out;
    out.reserve(config.n_locations * config.pixels_per_location);
    for (std::size_t loc = 0; loc < config.n_locations; ++loc)
        for (std::size_t pix = 0; pix < config.pixels_per_location; ++pix) out.push_back(generate_pixel(config, loc, pix));
    return out;
}

/// Stationary benchmark: six locations of twenty pixels, 44 samples, each location
/// sharing a common signal over independent pixel noise.
inline SynthConfig stationary_benchmark(std::uint64_t seed) {
    SynthConfig c;
    c.seed = seed;
    c.common_sd = 2.0;
    c.location_effect_spread = 0.9;
    return c;
}

/// Stationary benchmark plus a variance ramp and trend starting in window `change_window`.
inline SynthConfig regime_change_benchmark(std::uint64_t seed, std::size_t change_window = 16) {
    SynthConfig c = stationary_benchmark(seed);
    c.change_window = change_window;
    c.post_change.variance_ramp = 1.5;
    c.post_change.trend_slope = 0.5;
    return c;
}

// ---------------------------------------------------------------------------
// Reference oracles

/// d(w_k) = n^{-1/2} sum_{t=1..n} y_t exp(-i w_k t), k = 0..n-1, by direct summation.
inline std::vector<std::complex<double>> oracle_dft(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::complex<double>> out(n);
    const double norm = n ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t t = 1; t <= n; ++t) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += values[t - 1] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = acc * norm;
    }
    return out;
}

struct MonteCarloMoments {
    double mean = 0.0;
    double variance = 0.0;
    double mean_se = 0.0;      // standard error of `mean`
    double variance_se = 0.0;  // standard error of `variance`
};

/// Monte Carlo moments of p_hat (1 - p_hat) where p_hat is a binomial proportion of n draws.
inline MonteCarloMoments oracle_pq_moments(double p, long n, long trials, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0) || n < 1 || trials < 10000)
        throw Error(ErrorCode::InvalidConfig, "need p in [0,1], n >= 1 and at least 1e4 trials");
    Rng rng(seed);
    std::vector<double> m(static_cast<std::size_t>(trials));
    double sum = 0.0;
    for (auto& v : m) {
        const double ph = static_cast<double>(rng.binomial(n, p)) / static_cast<double>(n);
        v = ph * (1.0 - ph);
        sum += v;
    }
    const auto N = static_cast<double>(trials);
    MonteCarloMoments out;
    out.mean = sum / N;
    double m2 = 0.0, m4 = 0.0;
    for (double v : m) {
        const double d = v - out.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    out.variance = m2 / (N - 1.0);
    out.mean_se = std::sqrt(m2 / N / N);
    const double pop_var = m2 / N;
    out.variance_se = std::sqrt(std::max(m4 / N - pop_var * pop_var, 0.0) / N);
    return out;
}

/// Exhaustive k-medoids over every medoid subset (squared Euclidean). Global optimum.
inline Clustering oracle_kmedoids(const Eigen::MatrixXd& features, std::size_t k) {
    const auto n = static_cast<std::size_t>(features.rows());
    if (n > 12 || k > 3) throw Error(ErrorCode::TooLarge, "oracle limited to 12 items and k <= 3");
    if (k < 1 || k > n) throw Error(ErrorCode::KTooLarge, "k outside 1..n");
    auto d = [&](std::size_t i, std::size_t j) {
        return (features.row(static_cast<Eigen::Index>(i)) - features.row(static_cast<Eigen::Index>(j))).squaredNorm();
    };
    double total = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double c = 0.0;
        for (std::size_t j = 0; j < n; ++j) c += d(i, j);
        total = std::min(total, c);
    }

    std::vector<std::size_t> best, current;
    double best_cost = std::numeric_limits<double>::infinity();
    auto evaluate = [&]() {
        double cost = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double near = std::numeric_limits<double>::infinity();
            for (std::size_t m : current) near = std::min(near, d(j, m));
            cost += near;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = current;
        }
    };
    auto recurse = [&](auto&& self, std::size_t from) -> void {
        if (current.size() == k) return evaluate();
        for (std::size_t i = from; i < n; ++i) {
            current.push_back(i);
            self(self, i + 1);
            current.pop_back();
        }
    };
    recurse(recurse, 0);

    Clustering c;
    c.k = k;
    c.medoids = best;
    c.labels.assign(n, 0);
    c.within_cluster_variations.assign(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double near = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < k; ++m)
            if (d(j, best[m]) < near) {
                near = d(j, best[m]);
                c.labels[j] = m;
            }
        c.within_cluster_variations[c.labels[j]] += near;
    }
    c.total_dissimilarity = total;
    c.inter_cluster_fraction = total > 0.0 ? std::max(0.0, 1.0 - best_cost / total) : 0.0;
    return c;
}

}  // namespace slopewatch::synth
