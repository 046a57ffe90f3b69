#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "slopewatch/pipeline.hpp"
#include "slopewatch/regime.hpp"
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

std::vector<std::size_t> candidate_indices(const std::vector<double>& traj, bool smooth) {
    std::vector<Window> ws(traj.size());
    for (std::size_t i = 0; i < ws.size(); ++i) ws[i].index = i + 1;
    std::vector<std::size_t> out;
    for (const auto& c : inflection_candidates(LocalVarianceTrajectory{"L", traj}, ws, smooth))
        out.push_back(c.window.index);
    return out;
}

Eigen::MatrixXd clouds(std::uint64_t seed, std::vector<Eigen::Vector2d> centres, int per_cloud, double sd) {
    synth::Rng rng(seed);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(centres.size()) * per_cloud, 2);
    Eigen::Index r = 0;
    for (const auto& c : centres)
        for (int i = 0; i < per_cloud; ++i, ++r) x.row(r) = (c + sd * Eigen::Vector2d(rng.normal(), rng.normal())).transpose();
    return x;
}

// Builds one PeriodogramMatrix per feature row, all at a single window.
std::vector<PeriodogramMatrix> single_window_matrices(const Eigen::MatrixXd& features) {
    std::vector<PeriodogramMatrix> ms;
    const WindowSpec spec{2 * static_cast<std::size_t>(features.cols()), 1, Detrend::linear};
    Window w;
    w.index = 1;
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        ms.push_back(PeriodogramMatrix{"L", "P" + std::to_string(i), spec, {w}, features.row(i).transpose()});
    return ms;
}

}  // namespace

TEST(Candidates, LinearTrajectoryHasNone) {
    EXPECT_TRUE(candidate_indices({1, 2, 3, 4, 5, 6}, true).empty());
    EXPECT_TRUE(candidate_indices({6, 5, 4, 3}, false).empty());
}

TEST(Candidates, TroughWindow) {
    const auto c = candidate_indices({4, 3, 2, 2, 3, 5}, false);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_TRUE(c[0] == 3 || c[0] == 4);  // the plateau at the bottom
    std::vector<Window> ws(6);
    for (std::size_t i = 0; i < 6; ++i) ws[i].index = i + 1;
    const auto full = inflection_candidates(LocalVarianceTrajectory{"L", {4, 3, 2, 2, 3, 5}}, ws, false);
    EXPECT_EQ(full[0].trigger, Trigger::inflection_up);
    EXPECT_EQ(full[0].trajectory_value, 2.0);
}

TEST(Candidates, PeaksAndTroughsInOrder) {
    const std::vector<double> t{1, 3, 5, 4, 2, 3, 6, 8};
    const auto c = candidate_indices(t, false);
    EXPECT_EQ(c, (std::vector<std::size_t>{3, 5}));
    std::vector<Window> ws(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ws[i].index = i + 1;
    const auto full = inflection_candidates(LocalVarianceTrajectory{"L", t}, ws, false);
    EXPECT_EQ(full[0].trigger, Trigger::inflection_down);
    EXPECT_EQ(full[1].trigger, Trigger::inflection_up);
}

TEST(Candidates, SmoothingRemovesIsolatedSpike) {
    const std::vector<double> t{1, 2, 3, 10, 5, 6, 7};
    EXPECT_FALSE(candidate_indices(t, false).empty());
    EXPECT_TRUE(candidate_indices(t, true).empty());
}

TEST(Candidates, TooShort) {
    EXPECT_EQ(code_of([] { candidate_indices({1, 2}, true); }), ErrorCode::TooShort);
}

TEST(KMedoids, TwoClouds) {
    const auto x = clouds(1, {{0, 0}, {10, 10}}, 6, 0.3);
    const auto c = kmedoids(x, 2);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(c.labels[i], c.labels[0]);
    for (int i = 6; i < 12; ++i) EXPECT_EQ(c.labels[i], c.labels[6]);
    EXPECT_NE(c.labels[0], c.labels[6]);
    EXPECT_GT(c.inter_cluster_fraction, 0.99);
    const auto best = synth::oracle_kmedoids(x, 2);
    EXPECT_NEAR(c.cost(), best.cost(), 1e-9);
}

TEST(KMedoids, EdgeValuesOfK) {
    const auto x = clouds(2, {{0, 0}, {3, 1}}, 4, 1.0);
    const auto all = kmedoids(x, 8);
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(all.within_cluster_variations[c], 0.0);
    EXPECT_DOUBLE_EQ(all.inter_cluster_fraction, 1.0);
    EXPECT_DOUBLE_EQ(cluster_variance_ratio(all, x), 1.0);
    const auto one = kmedoids(x, 1);
    EXPECT_EQ(one.k, 1u);
    EXPECT_NEAR(one.inter_cluster_fraction, 0.0, 1e-15);
    EXPECT_NEAR(cluster_variance_ratio(one, x), 0.0, 1e-15);
    EXPECT_EQ(code_of([&] { kmedoids(x, 9); }), ErrorCode::KTooLarge);
    EXPECT_EQ(code_of([] { kmedoids(Eigen::MatrixXd::Ones(4, 2), 2); }), ErrorCode::DegenerateInput);
}

TEST(KMedoids, MedoidsBelongToTheirClusters) {
    const auto x = clouds(3, {{0, 0}, {4, 0}, {0, 4}}, 10, 1.0);
    for (std::size_t k = 1; k <= 5; ++k) {
        const auto c = kmedoids(x, k, {42});
        ASSERT_EQ(c.medoids.size(), k);
        EXPECT_TRUE(std::is_sorted(c.medoids.begin(), c.medoids.end()));
        for (std::size_t m = 0; m < k; ++m) EXPECT_EQ(c.labels[c.medoids[m]], m);
        EXPECT_NEAR(c.inter_cluster_fraction, 1.0 - c.cost() / c.total_dissimilarity, 1e-12);
        EXPECT_NEAR(cluster_variance_ratio(c, x), c.inter_cluster_fraction, 1e-12);
    }
}

TEST(KMedoids, SwapOptimal) {
    synth::Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(25, 3);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal() * (1 + j);
        const auto c = kmedoids(x, 3, {static_cast<std::uint64_t>(trial)});
        const auto dist = squared_distances(x);
        for (std::size_t m = 0; m < 3; ++m)
            for (std::size_t h = 0; h < 25; ++h) {
                if (std::find(c.medoids.begin(), c.medoids.end(), h) != c.medoids.end()) continue;
                auto trialm = c.medoids;
                trialm[m] = h;
                EXPECT_GE(detail::medoid_cost(dist, trialm), c.cost() - 1e-9 * c.cost());
            }
    }
}

TEST(KMedoids, MatchesExhaustiveOracle) {
    synth::Rng rng(5);
    int matched = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(4 + trial % 9);
        const std::size_t k = 1 + static_cast<std::size_t>(trial % 3);
        Eigen::MatrixXd x(n, 2);
        for (Eigen::Index i = 0; i < n; ++i) x.row(i) << rng.normal(), rng.normal() * 2;
        const auto c = kmedoids(x, k, {static_cast<std::uint64_t>(trial)});
        const auto best = synth::oracle_kmedoids(x, k);
        EXPECT_GE(c.cost(), best.cost() - 1e-9);
        if (std::abs(c.cost() - best.cost()) <= 1e-9 * std::max(1.0, best.cost())) ++matched;
    }
    EXPECT_GE(matched, 95);
}

TEST(KMedoids, DeterministicAndScaleInvariantRatio) {
    const auto x = clouds(6, {{0, 0}, {2, 2}, {5, -1}}, 8, 1.0);
    const auto a = kmedoids(x, 3, {9});
    const auto b = kmedoids(x, 3, {9});
    EXPECT_EQ(a.medoids, b.medoids);
    EXPECT_EQ(a.labels, b.labels);
    const auto scaled = kmedoids(x * 37.5, 3, {9});
    EXPECT_EQ(scaled.labels, a.labels);
    EXPECT_NEAR(scaled.inter_cluster_fraction, a.inter_cluster_fraction, 1e-10);
    EXPECT_NEAR(cluster_variance_ratio(a, x * 37.5), cluster_variance_ratio(a, x), 1e-10);
}

TEST(KMedoids, RatioMonotoneInKForOptimalSolutions) {
    synth::Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::MatrixXd x(10, 2);
        for (Eigen::Index i = 0; i < 10; ++i) x.row(i) << rng.normal(), rng.normal();
        double previous = -1.0;
        for (std::size_t k = 1; k <= 3; ++k) {
            const double r = synth::oracle_kmedoids(x, k).inter_cluster_fraction;
            EXPECT_GE(r, previous - 1e-12);
            previous = r;
        }
    }
}

TEST(Selection, SeparatedCloudsChooseMatchingK) {
    const auto x = clouds(8, {{0, 0}, {20, 0}, {0, 20}}, 10, 0.5);
    const auto ms = single_window_matrices(x);
    CandidateWindow cand{ms.front().windows[0], Trigger::inflection_up, 1.0};
    const auto b = select_regime_window(std::span(&cand, 1), ms, RegimeOptions{});
    EXPECT_EQ(b.w_t0.index, 1u);
    EXPECT_EQ(b.k(), 3u);
    EXPECT_GE(b.clustering.inter_cluster_fraction, 0.8);
    EXPECT_EQ(b.medoid_scores.rows(), 3);
    EXPECT_GT(b.dispersion_scale, 0.0);
}

TEST(Selection, NoiseDoesNotQualify) {
    // Isotropic noise rarely reaches 80% with k <= 3.
    int qualified = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        synth::Rng rng(seed);
        Eigen::MatrixXd x(60, 4);
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = rng.normal();
        const auto ms = single_window_matrices(x);
        CandidateWindow cand{ms.front().windows[0], Trigger::inflection_up, 1.0};
        const auto code = code_of([&] { select_regime_window(std::span(&cand, 1), ms, RegimeOptions{2, 3, 0.8, 0.9, seed}); });
        if (code != ErrorCode::NoCandidateQualifies) ++qualified;
    }
    EXPECT_LE(qualified, 1);
}

TEST(Selection, TieBreakPrefersLaterWindowThenSmallerK) {
    auto diag = [](std::size_t index, std::vector<std::pair<std::size_t, bool>> rows) {
        CandidateDiagnostics d;
        d.candidate.window.index = index;
        for (auto [k, q] : rows) d.clusters.push_back(ClusterDiagnostic{k, {}, q ? 0.9 : 0.5, q});
        return d;
    };
    std::vector<CandidateDiagnostics> ds{diag(7, {{2, false}, {3, false}, {4, true}}),
                                         diag(9, {{2, false}, {3, true}, {4, true}}),
                                         diag(16, {{2, false}, {3, false}, {4, true}})};
    auto choice = choose_regime(ds);
    ASSERT_TRUE(choice);
    EXPECT_EQ(ds[choice->candidate].candidate.window.index, 9u);
    EXPECT_EQ(choice->k, 3u);

    ds[1] = diag(9, {{2, false}, {3, false}, {4, true}});
    choice = choose_regime(ds);
    EXPECT_EQ(ds[choice->candidate].candidate.window.index, 16u);
    EXPECT_EQ(choice->k, 4u);

    ds = {diag(3, {{2, false}})};
    EXPECT_FALSE(choose_regime(ds));
}

TEST(Selection, ReturnsACandidateAndIsDeterministic) {
    const auto data = synth::generate(synth::regime_change_benchmark(3));
    const auto ms = dataset_periodograms(data, WindowSpec{});
    std::vector<CandidateWindow> cands;
    for (std::size_t l : {4, 9, 15, 20}) cands.push_back(CandidateWindow{ms.front().windows[l - 1], Trigger::inflection_up, 0});
    const RegimeOptions opt{2, 5, 0.8, 0.9, 11};
    const auto a = select_regime_window(cands, ms, opt);
    const auto b = select_regime_window(cands, ms, opt);
    EXPECT_TRUE(std::any_of(cands.begin(), cands.end(), [&](const auto& c) { return c.window.index == a.w_t0.index; }));
    EXPECT_EQ(a.w_t0.index, b.w_t0.index);
    EXPECT_EQ(a.clustering.medoids, b.clustering.medoids);
    EXPECT_TRUE(a.medoid_scores.cwiseEqual(b.medoid_scores).all());
    EXPECT_GE(a.clustering.inter_cluster_fraction, 0.8 - 1e-12);
}

TEST(Selection, EmptyCandidateList) {
    const auto ms = single_window_matrices(clouds(1, {{0, 0}}, 5, 1.0));
    EXPECT_EQ(code_of([&] { select_regime_window(std::span<const CandidateWindow>{}, ms, RegimeOptions{}); }),
              ErrorCode::NoCandidateQualifies);
}
