#pragma once

#include <spreaders/centrality.hpp>
#include <spreaders/graph.hpp>
#include <spreaders/rng.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace spreaders {

/// The canonical fraction grid 0.01, 0.02, ..., 0.20.
std::vector<double> default_f_grid();

/// round(f * n), at least 1. Throws UsageError unless 0 < f <= 1.
std::size_t top_count(double f, std::size_t n);

/**
 * Positions of the k largest values. Values tied at the cut are chosen
 * uniformly at random with `tie_rng`; everything strictly above the cut is
 * always included. Only comparisons are used, so any strictly increasing
 * transform of `values` yields the same selection for the same stream.
 * Result is in descending value order, ties in the order drawn.
 */
std::vector<NodeId> top_k_by_value(std::span<const double> values, std::size_t k,
                                   RngStream &tie_rng);

/// top_k_by_value with k = top_count(f, values.size()).
std::vector<NodeId> top_f_by_value(std::span<const double> values, double f, RngStream &tie_rng);

/// Positions of the k largest values, ties to the lowest position.
std::vector<NodeId> top_k_stable(std::span<const double> values, std::size_t k);

/// |I ∩ C| / |I| with multiset semantics. Throws UsageError when `truth` is empty.
double recognition_rate(std::span<const NodeId> truth, std::span<const NodeId> predicted);

/**
 * Mean rho over `predicted` divided by mean rho over `truth`, capped at 1.
 * An empty prediction scores 0.
 */
double precision_function(std::span<const NodeId> predicted, std::span<const NodeId> truth,
                          std::span<const double> rho);

struct RankingResult {
    CentralityKind centrality = CentralityKind::Degree;
    double f = 0.0;
    double r_mean = 0.0, r_ci_low = 0.0, r_ci_high = 0.0;
    double p_mean = 0.0, p_ci_low = 0.0, p_ci_high = 0.0;
    std::uint32_t resamples = 0;
};

/// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

/**
 * Bootstrap evaluation of ranking by one centrality column. For each of
 * `resamples` draws, N nodes are sampled with replacement; within the
 * resample the true top-k (by rho, ties by node id) and the predicted
 * top-k (by feature, random ties) are compared with recognition_rate and
 * precision_function. Reports the mean and the 2.5/97.5 percentiles.
 *
 * Resample b uses rng.purpose_stream("bootstrap", b), so every centrality
 * and every f sees the same node draws.
 */
std::vector<RankingResult> bootstrap_rank_evaluate(std::span<const double> feature,
                                                   std::span<const double> rho,
                                                   std::span<const double> f_grid,
                                                   CentralityKind centrality,
                                                   std::uint32_t resamples, const RngPolicy &rng,
                                                   Execution exec = Execution::Parallel);

RankingResult bootstrap_rank_evaluate(std::span<const double> feature, std::span<const double> rho,
                                      double f, CentralityKind centrality,
                                      std::uint32_t resamples, const RngPolicy &rng,
                                      Execution exec = Execution::Parallel);

} // namespace spreaders
