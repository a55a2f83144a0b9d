#include "oracles.hpp"

#include <spreaders/errors.hpp>
#include <spreaders/sir.hpp>
#include <spreaders/threshold.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace spreaders;

TEST(Variability, Arithmetic) {
    const std::vector<double> same{2, 2, 2, 2};
    EXPECT_EQ(variability_of(same), 0.0);
    const std::vector<double> two{1, 3};
    EXPECT_DOUBLE_EQ(variability_of(two), 0.5);
}

TEST(Variability, VanishesForTinyLambda) {
    const auto g = oracle::random_strong(40, 60, 3);
    const RngPolicy rng{1};
    const auto sample = sample_seed_nodes(g.num_nodes(), 20, rng);
    EXPECT_EQ(variability(g, 1e-9, sample, 10, rng).delta, 0.0);
    EXPECT_EQ(variability(g, 1e-9, sample, 10, rng, DeltaMode::SeedMeans).delta, 0.0);
}

TEST(Variability, PooledMatchesDirectComputation) {
    const auto g = oracle::random_strong(25, 80, 4);
    const RngPolicy rng{6};
    const std::vector<NodeId> sample{0, 3, 7};
    std::vector<double> pooled, seed_means;
    double max_mean = 0;
    for (NodeId s : sample) {
        const auto sizes = outbreak_sizes(g, {0.9, 1.0}, s, 10, rng);
        double m = 0;
        for (auto v : sizes) {
            pooled.push_back(v);
            m += v;
        }
        seed_means.push_back(m / 10);
        max_mean = std::max(max_mean, m / 10);
    }
    const auto p = variability(g, 0.9, sample, 10, rng, DeltaMode::Pooled);
    EXPECT_NEAR(p.delta, variability_of(pooled), 1e-12);
    EXPECT_NEAR(p.max_seed_mean, max_mean, 1e-12);
    EXPECT_NEAR(variability(g, 0.9, sample, 10, rng, DeltaMode::SeedMeans).delta,
                variability_of(seed_means), 1e-12);
}

TEST(Sample, DistinctSortedAndCapped) {
    const RngPolicy rng{3};
    const auto s = sample_seed_nodes(100, 30, rng);
    EXPECT_EQ(s.size(), 30u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<NodeId>(s.begin(), s.end()).size(), 30u);
    EXPECT_EQ(sample_seed_nodes(10, 10000, rng).size(), 10u);
}

TEST(Scan, ArgmaxOfStubbedDeltas) {
    const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto result = scan_with(grid, [](double l) {
        return DeltaPoint{1.0 - std::abs(l - 0.3), 1.0};
    });
    EXPECT_DOUBLE_EQ(result.lambda_c, 0.3);
    EXPECT_EQ(result.deltas.size(), grid.size());
}

TEST(Scan, TiesGoToSmallestLambda) {
    const std::vector<double> deltas{0.1, 0.5, 0.5, 0.2};
    EXPECT_EQ(peak_index(deltas), 1u);
}

TEST(Scan, GridValidation) {
    auto stub = [](double) { return DeltaPoint{0.0, 1.0}; };
    const std::vector<double> short_grid{0.1, 0.2};
    const std::vector<double> descending{0.3, 0.2, 0.1};
    const std::vector<double> nonpositive{0.0, 0.1, 0.2};
    EXPECT_THROW(scan_with(short_grid, stub), UsageError);
    EXPECT_THROW(scan_with(descending, stub), UsageError);
    EXPECT_THROW(scan_with(nonpositive, stub), UsageError);
}

TEST(Scan, DeterministicAndNonNegative) {
    const auto g = oracle::random_strong(60, 40, 8);
    const std::vector<double> grid{0.2, 0.4, 0.8, 1.6};
    ScanOptions opts;
    opts.sample_size = 30;
    const RngPolicy rng{5};
    const auto a = scan(g, grid, opts, rng);
    const auto b = scan(g, grid, opts, rng);
    EXPECT_EQ(a.deltas, b.deltas);
    EXPECT_EQ(a.lambda_c, b.lambda_c);
    EXPECT_EQ(a.sample_nodes.size(), 30u);
    EXPECT_NE(std::find(grid.begin(), grid.end(), a.lambda_c), grid.end());
    for (double d : a.deltas)
        EXPECT_GE(d, 0.0);
    opts.exec = Execution::Serial;
    EXPECT_EQ(scan(g, grid, opts, rng).deltas, a.deltas);
}

TEST(Grids, LogAndLinear) {
    const auto lg = log_grid(1e-3, 10.0, 5);
    ASSERT_EQ(lg.size(), 5u);
    EXPECT_DOUBLE_EQ(lg.front(), 1e-3);
    EXPECT_DOUBLE_EQ(lg.back(), 10.0);
    EXPECT_NEAR(lg[1] / lg[0], lg[2] / lg[1], 1e-12);
    const auto ln = linear_grid(1.0, 2.0, 5);
    EXPECT_EQ(ln, (std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0}));
}

TEST(TwoStage, RefinesAroundCoarsePeak) {
    // a bidirected ring has an epidemic threshold of order one
    std::vector<Edge> ring;
    for (NodeId i = 0; i < 40; ++i)
        ring.emplace_back(i, (i + 1) % 40);
    const auto g = DirectedGraph::from_edges(40, oracle::bidirect(ring));
    ScanOptions opts;
    opts.sample_size = 40;
    const auto result = two_stage_scan(g, opts, RngPolicy{2});
    EXPECT_TRUE(std::is_sorted(result.lambdas.begin(), result.lambdas.end()));
    EXPECT_EQ(std::adjacent_find(result.lambdas.begin(), result.lambdas.end()), result.lambdas.end());
    EXPECT_GE(result.lambdas.size(), 10u);
    EXPECT_LE(result.lambdas.size(), 19u);
    EXPECT_GT(result.lambda_c, 1e-3);
    EXPECT_LT(result.lambda_c, 10.0);
}

TEST(Sanity, FlagsOutOfBandSpread) {
    ThresholdScan s;
    s.lambdas = {0.1, 0.2, 0.3};
    s.deltas = {0.1, 0.4, 0.2};
    s.max_seed_means = {1, 500, 900};
    s.lambda_c = 0.2;
    s.num_nodes = 1000;
    flag_spread_sanity(s);
    EXPECT_EQ(s.warnings.size(), 1u);
    s.warnings.clear();
    s.max_seed_means = {1, 30, 900};
    flag_spread_sanity(s);
    EXPECT_TRUE(s.warnings.empty());
}

TEST(Export, CsvAndJson) {
    ThresholdScan s;
    s.lambdas = {0.1, 0.2, 0.3};
    s.deltas = {0.1, 0.4, 0.2};
    s.max_seed_means = {1, 2, 3};
    s.sample_nodes = {0, 1};
    s.lambda_c = 0.2;
    std::ostringstream csv, json;
    write_scan_csv(csv, s);
    EXPECT_EQ(csv.str(), "lambda,delta\n0.1,0.1\n0.2,0.4\n0.3,0.2\n");
    write_scan_json(json, s);
    EXPECT_NE(json.str().find("\"lambda_c\": 0.2"), std::string::npos) << json.str();
    EXPECT_NE(json.str().find("\"sample_size\": 2"), std::string::npos) << json.str();
}
