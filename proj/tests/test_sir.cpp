#include "oracles.hpp"

#include <spreaders/errors.hpp>
#include <spreaders/sir.hpp>

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace spreaders;

namespace {

const auto small_fixtures = oracle::sir_fixtures;

double standard_error(const SpreadEstimate &e) {
    return std::sqrt(e.variance / static_cast<double>(e.runs));
}

} // namespace

TEST(Params, Validation) {
    EXPECT_THROW((SirParams{0.0, 1.0}).validate(), UsageError);
    EXPECT_THROW((SirParams{-1.0, 1.0}).validate(), UsageError);
    EXPECT_THROW((SirParams{INFINITY, 1.0}).validate(), UsageError);
    EXPECT_THROW((SirParams{1.0, 2.0}).validate(), UsageError);
    EXPECT_NO_THROW((SirParams{0.5, 1.0}).validate());
}

TEST(Exact, AnalyticValues) {
    EXPECT_DOUBLE_EQ(exact_expected_spread(DirectedGraph::from_edges(1, {}), {1.0, 1.0}, 0), 1.0);
    EXPECT_NEAR(exact_expected_spread(oracle::arc_ab(), {1.0, 1.0}, 0), 1.5, 1e-14);
    EXPECT_NEAR(exact_expected_spread(oracle::pair_graph(), {1.0, 1.0}, 0), 1.5, 1e-14);
    for (const auto &f : small_fixtures())
        EXPECT_DOUBLE_EQ(exact_expected_spread(f.g, {0.0, 1.0}, 0), 1.0) << f.name;
}

TEST(Exact, ClosedFormsOnPathAndStar) {
    for (double lambda : {0.25, 1.0, 4.0}) {
        const double p = lambda / (1.0 + lambda);
        EXPECT_NEAR(exact_expected_spread(oracle::path4(), {lambda, 1.0}, 0),
                    1 + p + p * p + p * p * p, 1e-12);
        EXPECT_NEAR(exact_expected_spread(oracle::cycle(3), {lambda, 1.0}, 0), 1 + p + p * p,
                    1e-12);
        // the hub's four contacts share one recovery clock, but each leaf's
        // marginal is still p
        EXPECT_NEAR(exact_expected_spread(oracle::star(4), {lambda, 1.0}, 0), 1 + 4 * p, 1e-12);
    }
}

TEST(Exact, MatchesPercolationOracle) {
    for (const auto &f : small_fixtures()) {
        for (double lambda : {0.25, 1.0, 4.0}) {
            const auto expected = oracle::percolation_spread(f.g, lambda);
            for (NodeId s = 0; s < f.g.num_nodes(); ++s)
                EXPECT_NEAR(exact_expected_spread(f.g, {lambda, 1.0}, s), expected[s], 1e-10)
                    << f.name << " lambda=" << lambda << " seed=" << s;
        }
    }
}

TEST(Exact, RefusesLargeGraphs) {
    EXPECT_THROW(exact_expected_spread(oracle::cycle(11), {1.0, 1.0}, 0), UsageError);
}

TEST(Simulate, SizeWithinBounds) {
    const auto g = oracle::random_strong(30, 80, 4);
    const RngPolicy rng{7};
    for (double lambda : {0.05, 0.5, 5.0})
        for (auto size : outbreak_sizes(g, {lambda, 1.0}, 0, 500, rng)) {
            EXPECT_GE(size, 1u);
            EXPECT_LE(size, g.num_nodes());
        }
}

TEST(Simulate, TinyLambdaNeverSpreads) {
    const RngPolicy rng{1};
    for (auto size : outbreak_sizes(oracle::clique(5), {1e-9, 1.0}, 2, 2000, rng))
        EXPECT_EQ(size, 1u);
}

TEST(Simulate, ArcTransmitsWithProbabilityOneHalf) {
    const auto e = estimate_influence(oracle::arc_ab(), {1.0, 1.0}, 0, 10000, RngPolicy{3});
    EXPECT_EQ(e.runs, 10000u);
    EXPECT_LT(std::abs(e.mean - 1.5), 3 * standard_error(e));
    for (auto size : outbreak_sizes(oracle::arc_ab(), {1.0, 1.0}, 0, 100, RngPolicy{3}))
        EXPECT_TRUE(size == 1 || size == 2);
}

TEST(Simulate, FirstOrderSmallLambdaOnTree) {
    const double lambda = 1e-4;
    const auto g = oracle::star(4);
    const auto e = estimate_influence(g, {lambda, 1.0}, 0, 10000, RngPolicy{5});
    const double first_order = 1 + lambda * 4 / (1 + lambda);
    EXPECT_LE(std::abs(e.mean - first_order), std::max(3 * standard_error(e), 1e-3));
}

TEST(Simulate, LargeLambdaBurnsEverything) {
    const auto all = influence_all(oracle::star(4), {50.0, 1.0}, 2000, RngPolicy{9});
    for (const auto &e : all)
        EXPECT_GT(e.mean, 4.7);
}

TEST(Simulate, VertexTransitiveMeansAgree) {
    const auto all = influence_all(oracle::cycle(6), {1.0, 1.0}, 5000, RngPolicy{2});
    for (const auto &a : all)
        for (const auto &b : all) {
            const double se = std::sqrt(a.variance / a.runs + b.variance / b.runs);
            EXPECT_LT(std::abs(a.mean - b.mean), 4 * se);
        }
}

TEST(Simulate, MeanMonotoneInLambda) {
    for (const auto &f : small_fixtures()) {
        const auto lo = estimate_influence(f.g, {0.1, 1.0}, 0, 4000, RngPolicy{4});
        const auto hi = estimate_influence(f.g, {1.0, 1.0}, 0, 4000, RngPolicy{4});
        EXPECT_LE(lo.mean, hi.mean + 3 * standard_error(hi)) << f.name;
    }
}

TEST(MonteCarlo, AgreesWithExactOracleWithinThreeStandardErrors) {
    const RngPolicy rng{42};
    int checked = 0, outside = 0;
    for (const auto &f : small_fixtures()) {
        for (double lambda : {0.25, 1.0, 4.0}) {
            const auto all = influence_all(f.g, {lambda, 1.0}, 10000, rng);
            for (NodeId s = 0; s < f.g.num_nodes(); ++s) {
                const double exact = exact_expected_spread(f.g, {lambda, 1.0}, s);
                const double se = standard_error(all[s]);
                ++checked;
                if (std::abs(all[s].mean - exact) > 3 * se + 1e-12)
                    ++outside;
            }
        }
    }
    // each check fails with probability ~0.27% under the null
    EXPECT_LE(outside, 1) << outside << " of " << checked;
}

TEST(Determinism, ReplicateStreamsIgnoreThreadCount) {
    const auto g = oracle::random_strong(60, 50, 12);
    const RngPolicy rng{99};
    const auto serial = influence_all(g, {0.7, 1.0}, 300, rng, Execution::Serial);
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 4}) {
        omp_set_num_threads(threads);
        EXPECT_EQ(influence_all(g, {0.7, 1.0}, 300, rng, Execution::Parallel), serial);
    }
    omp_set_num_threads(saved);
    EXPECT_EQ(outbreak_sizes(g, {0.7, 1.0}, 5, 50, rng), outbreak_sizes(g, {0.7, 1.0}, 5, 50, rng));
}

TEST(Determinism, SeedChangesResults) {
    const auto g = oracle::random_strong(20, 100, 1);
    EXPECT_NE(outbreak_sizes(g, {1.0, 1.0}, 0, 200, RngPolicy{1}),
              outbreak_sizes(g, {1.0, 1.0}, 0, 200, RngPolicy{2}));
}

TEST(Estimate, VarianceIsSampleVariance) {
    const RngPolicy rng{8};
    const auto g = oracle::random_strong(15, 150, 3);
    const auto sizes = outbreak_sizes(g, {0.6, 1.0}, 4, 777, rng);
    double mean = 0;
    for (auto s : sizes)
        mean += s;
    mean /= sizes.size();
    double ss = 0;
    for (auto s : sizes)
        ss += (s - mean) * (s - mean);
    const auto e = estimate_influence(g, {0.6, 1.0}, 4, 777, rng);
    EXPECT_NEAR(e.mean, mean, 1e-12);
    EXPECT_NEAR(e.variance, ss / (sizes.size() - 1), 1e-9);
}

TEST(Csv, RoundTrip) {
    const auto g = oracle::random_strong(12, 150, 2);
    const auto all = influence_all(g, {0.8, 1.0}, 100, RngPolicy{1});
    std::stringstream io;
    write_influence_csv(io, g, all);
    EXPECT_EQ(io.str().substr(0, io.str().find('\n')), "node,mean,variance,runs");
    EXPECT_EQ(read_influence_csv(io, g), all);
}

TEST(Cache, SaveLoadAndKeyMismatch) {
    const auto dir = std::filesystem::temp_directory_path() / "spreaders_sir_cache_test";
    std::filesystem::remove_all(dir);
    const auto g = oracle::random_strong(12, 150, 2);
    const auto all = influence_all(g, {0.8, 1.0}, 100, RngPolicy{1});
    const InfluenceCacheKey key{g.content_hash(), 0.8, 100, 1};
    EXPECT_FALSE(load_influence_cache(dir, key));
    save_influence_cache(dir, key, all);
    EXPECT_EQ(load_influence_cache(dir, key), all);
    auto other = key;
    other.master_seed = 2;
    EXPECT_FALSE(load_influence_cache(dir, other));
    std::filesystem::remove_all(dir);
}
