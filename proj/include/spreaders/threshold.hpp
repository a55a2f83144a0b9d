#pragma once

#include <spreaders/centrality.hpp>
#include <spreaders/graph.hpp>
#include <spreaders/rng.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spreaders {

/// How outbreak sizes are combined into the variability measure.
enum class DeltaMode {
    /// std/mean of every (seed, replicate) outbreak size pooled together.
    Pooled,
    /// std/mean of the per-seed mean outbreak sizes.
    SeedMeans,
};

struct ScanOptions {
    std::uint32_t sample_size = 10000;
    std::uint32_t runs_per_seed = 10;
    DeltaMode mode = DeltaMode::Pooled;
    Execution exec = Execution::Parallel;
};

/// Result of one variability evaluation.
struct DeltaPoint {
    double delta = 0.0;
    /// Largest per-seed mean outbreak size among the sampled seeds.
    double max_seed_mean = 0.0;
};

struct ThresholdScan {
    std::vector<double> lambdas;
    std::vector<double> deltas;
    std::vector<double> max_seed_means;
    std::vector<NodeId> sample_nodes;
    double lambda_c = 0.0;
    std::size_t num_nodes = 0;
    std::vector<std::string> warnings;
};

/// std/mean of a sample (population standard deviation); 0 when all values are equal.
double variability_of(std::span<const double> values);

/// Delta at one lambda over the given seeds.
DeltaPoint variability(const DirectedGraph &g, double lambda, std::span<const NodeId> sample,
                       std::uint32_t runs_per_seed, const RngPolicy &rng,
                       DeltaMode mode = DeltaMode::Pooled, Execution exec = Execution::Parallel);

/// min(sample_size, n) distinct nodes drawn uniformly, returned in ascending order.
std::vector<NodeId> sample_seed_nodes(std::size_t n, std::uint32_t sample_size,
                                      const RngPolicy &rng);

/// Index of the largest delta; ties resolve to the smallest lambda.
std::size_t peak_index(std::span<const double> deltas);

/// Scan an explicit ascending grid (>= 3 points). Throws UsageError otherwise.
ThresholdScan scan(const DirectedGraph &g, std::span<const double> grid, const ScanOptions &opts,
                   const RngPolicy &rng);

/// Scan driven by an arbitrary evaluator; used by `scan` and for testing the peak search.
ThresholdScan scan_with(std::span<const double> grid,
                        const std::function<DeltaPoint(double)> &evaluate);

/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// `points` evenly spaced values from lo to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

struct TwoStageGrid {
    double lo = 1e-3;
    double hi = 10.0;
    std::size_t coarse_points = 10;
    std::size_t fine_points = 9;
};

/**
 * Coarse logarithmic sweep, then a linear refinement spanning one coarse
 * step either side of the coarse peak. The returned scan holds the merged,
 * ascending grid.
 */
ThresholdScan two_stage_scan(const DirectedGraph &g, const ScanOptions &opts,
                             const RngPolicy &rng, const TwoStageGrid &grid = {});

/// Checks the largest per-seed spread at lambda_c against 0.7%..6% of n.
void flag_spread_sanity(ThresholdScan &scan);

/// CSV: lambda,delta
void write_scan_csv(std::ostream &out, const ThresholdScan &scan);
/// JSON: {"lambda_c", "grid", "sample_size", "deltas", "warnings"}
void write_scan_json(std::ostream &out, const ThresholdScan &scan);

} // namespace spreaders
