#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "slopewatch/series.hpp"
#include "slopewatch/synth.hpp"

using namespace slopewatch;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

double lag1_correlation(const std::vector<double>& y) {
    return autocovariance(y, 1) / autocovariance(y, 0);
}

synth::SynthConfig single_pixel(std::uint64_t seed, std::size_t count) {
    synth::SynthConfig c;
    c.seed = seed;
    c.n_locations = 1;
    c.pixels_per_location = 1;
    c.count = count;
    return c;
}

}  // namespace

TEST(Generator, DeterministicPerSeed) {
    const auto cfg = synth::regime_change_benchmark(17);
    const auto a = synth::generate(cfg);
    const auto b = synth::generate(cfg);
    ASSERT_EQ(a.size(), 120u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].location_id, b[i].location_id);
        EXPECT_EQ(a[i].pixel_id, b[i].pixel_id);
        EXPECT_EQ(a[i].values, b[i].values);
        EXPECT_EQ(a[i].grid, b[i].grid);
    }
    auto other = cfg;
    other.seed = 18;
    EXPECT_NE(synth::generate(other)[0].values, a[0].values);
}

TEST(Generator, PixelsAreIndependentOfGenerationOrder) {
    const auto cfg = synth::regime_change_benchmark(4);
    const auto all = synth::generate(cfg);
    for (std::size_t loc = cfg.n_locations; loc-- > 0;)
        for (std::size_t pix = cfg.pixels_per_location; pix-- > 0;) {
            const auto s = synth::generate_pixel(cfg, loc, pix);
            EXPECT_EQ(s.values, all[loc * cfg.pixels_per_location + pix].values);
        }
}

TEST(Generator, GridAndNames) {
    const auto data = synth::generate(synth::stationary_benchmark(1));
    EXPECT_EQ(data.front().grid.start.iso(), "2017-08-19");
    EXPECT_EQ(data.front().grid.interval_days, 12);
    EXPECT_EQ(data.front().grid.count, 44u);
    EXPECT_EQ(data.front().location_id, "L1");
    EXPECT_EQ(data.back().location_id, "L6");
    for (const auto& s : data)
        for (double v : s.values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Generator, WhiteNoiseIsUncorrelated) {
    const auto s = synth::generate(single_pixel(3, 20000)).front();
    EXPECT_NEAR(lag1_correlation(s.values), 0.0, 4.0 / std::sqrt(20000.0));
    EXPECT_NEAR(std::sqrt(autocovariance(s.values, 0)), 1.0, 0.03);
}

TEST(Generator, Ar1HasRequestedCorrelation) {
    auto cfg = single_pixel(4, 20000);
    cfg.noise_model = synth::NoiseModel::ar1;
    cfg.phi = 0.6;
    const auto s = synth::generate(cfg).front();
    EXPECT_NEAR(lag1_correlation(s.values), 0.6, 0.03);
    EXPECT_NEAR(std::sqrt(autocovariance(s.values, 0)), 1.0, 0.05);
}

TEST(Generator, VarianceRampAfterChange) {
    auto cfg = single_pixel(5, 60);
    cfg.pixels_per_location = 200;
    cfg.change_window = 20;
    cfg.post_change.variance_ramp = 1.1;
    const auto data = synth::generate(cfg);
    // Onset at sample 20 + 16 - 1 = 35: cross-sectional variance grows after it.
    auto cross_var = [&](std::size_t t) {
        double m = 0, v = 0;
        for (const auto& s : data) m += s.values[t];
        m /= static_cast<double>(data.size());
        for (const auto& s : data) v += (s.values[t] - m) * (s.values[t] - m);
        return v / static_cast<double>(data.size() - 1);
    };
    double before = 0, after = 0;
    for (std::size_t t = 0; t < 34; ++t) before += cross_var(t) / 34.0;
    for (std::size_t t = 50; t < 60; ++t) after += cross_var(t) / 10.0;
    EXPECT_NEAR(before, 1.0, 0.1);
    EXPECT_GT(after, 3.0 * before);
}

TEST(Generator, InvalidConfig) {
    auto cfg = single_pixel(1, 10);
    cfg.phi = 1.0;
    EXPECT_EQ(code_of([&] { synth::generate(cfg); }), ErrorCode::InvalidConfig);
    cfg = single_pixel(1, 10);
    cfg.noise_sd = 0.0;
    EXPECT_EQ(code_of([&] { synth::generate(cfg); }), ErrorCode::InvalidConfig);
    cfg = single_pixel(1, 20);
    cfg.change_window = 10;  // onset sample 25 > 20
    EXPECT_EQ(code_of([&] { synth::generate(cfg); }), ErrorCode::InvalidConfig);
    cfg = single_pixel(1, 1);
    EXPECT_EQ(code_of([&] { synth::generate(cfg); }), ErrorCode::InvalidConfig);
}

TEST(Rng, SubstreamsAreDistinct) {
    synth::Rng a(1), b(2);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.uniform() == b.uniform();
    EXPECT_EQ(equal, 0);
    synth::Rng n(7);
    double sum = 0, sq = 0;
    for (int i = 0; i < 100000; ++i) {
        const double v = n.normal();
        sum += v;
        sq += v * v;
    }
    EXPECT_NEAR(sum / 1e5, 0.0, 0.02);
    EXPECT_NEAR(sq / 1e5, 1.0, 0.02);
}

TEST(OracleDft, Examples) {
    const auto impulse = synth::oracle_dft(std::vector<double>{1, 0, 0, 0});
    for (const auto& c : impulse) EXPECT_NEAR(std::abs(c), 0.5, 1e-15);  // |d_k| = n^{-1/2}
    const auto flat = synth::oracle_dft(std::vector<double>(8, 1.0));
    EXPECT_NEAR(std::abs(flat[0]), std::sqrt(8.0), 1e-12);
    for (std::size_t k = 1; k < 8; ++k) EXPECT_NEAR(std::abs(flat[k]), 0.0, 1e-12);
    std::vector<double> cosine(16);
    for (std::size_t t = 1; t <= 16; ++t) cosine[t - 1] = std::cos(2.0 * std::numbers::pi * 3.0 * static_cast<double>(t) / 16.0);
    const auto d = synth::oracle_dft(cosine);
    EXPECT_NEAR(std::norm(d[3]), 4.0, 1e-12);
    EXPECT_NEAR(std::norm(d[13]), 4.0, 1e-12);
}

TEST(OraclePqMoments, DegenerateAndCentral) {
    const auto one = synth::oracle_pq_moments(1.0, 50, 10000, 1);
    EXPECT_EQ(one.mean, 0.0);
    EXPECT_EQ(one.variance, 0.0);
    // E[p_hat (1 - p_hat)] = pq (1 - 1/n) = 0.25 * 0.99.
    const auto half = synth::oracle_pq_moments(0.5, 100, 200000, 2);
    EXPECT_NEAR(half.mean, 0.2475, 4.0 * half.mean_se);
    EXPECT_EQ(code_of([] { synth::oracle_pq_moments(0.5, 10, 100, 1); }), ErrorCode::InvalidConfig);
}

TEST(OracleKMedoids, SmallExamples) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 10, 11;
    const auto c = synth::oracle_kmedoids(x, 2);
    EXPECT_DOUBLE_EQ(c.cost(), 2.0);
    EXPECT_EQ(c.labels[0], c.labels[1]);
    EXPECT_NE(c.labels[1], c.labels[2]);
    // Total to the 1-medoid (item 1 or 2): 1 + 81 + 100 = 182.
    EXPECT_DOUBLE_EQ(c.total_dissimilarity, 182.0);
    EXPECT_NEAR(c.inter_cluster_fraction, 1.0 - 2.0 / 182.0, 1e-15);
    EXPECT_EQ(code_of([] { synth::oracle_kmedoids(Eigen::MatrixXd::Zero(13, 1), 2); }), ErrorCode::TooLarge);
    EXPECT_EQ(code_of([&] { synth::oracle_kmedoids(x, 5); }), ErrorCode::TooLarge);
    EXPECT_EQ(code_of([&] { synth::oracle_kmedoids(x.topRows(2), 3); }), ErrorCode::KTooLarge);
}
