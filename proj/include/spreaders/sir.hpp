#pragma once

#include <spreaders/centrality.hpp>
#include <spreaders/graph.hpp>
#include <spreaders/rng.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <queue>
#include <vector>

namespace spreaders {

/// Normalised SIR rates: infection rate `lambda` per infectious->susceptible
/// arc, recovery rate `mu` (fixed at 1).
struct SirParams {
    double lambda = 0.0;
    double mu = 1.0;

    /// Throws UsageError unless lambda is finite and > 0 and mu == 1.
    void validate() const;
};

/// Outbreak size statistics for one seed. Sizes count the seed itself.
struct SpreadEstimate {
    NodeId node = 0;
    double mean = 0.0;
    double variance = 0.0;
    std::uint32_t runs = 0;

    friend bool operator==(const SpreadEstimate &, const SpreadEstimate &) = default;
};

/**
 * Reusable per-thread scratch space for single-seed simulations. Holding
 * one of these across calls avoids reallocating O(n) state per replicate.
 */
class SirWorkspace {
public:
    explicit SirWorkspace(std::size_t n) : infected_(n, 0) {}

    /**
     * One continuous-time SIR trajectory from `seed_node`. Each newly
     * infected node draws its recovery clock T ~ Exp(mu) and, for every
     * currently susceptible out-neighbour, a contact clock E ~ Exp(lambda);
     * contacts with E < T are scheduled at t + E and processed in time
     * order. Returns the number of nodes ever infected (>= 1).
     */
    std::uint32_t simulate(const DirectedGraph &g, const SirParams &params, NodeId seed_node,
                           RngStream &stream);

private:
    struct Event {
        double time;
        NodeId node;
        bool operator>(const Event &o) const noexcept {
            return time > o.time || (time == o.time && node > o.node);
        }
    };

    std::vector<std::uint8_t> infected_;
    std::vector<NodeId> touched_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
};

std::uint32_t simulate_once(const DirectedGraph &g, const SirParams &params, NodeId seed_node,
                            RngStream &stream);

/// Per-replicate outbreak sizes for one seed; replicate r uses rng.replicate_stream(seed, r).
std::vector<std::uint32_t> outbreak_sizes(const DirectedGraph &g, const SirParams &params,
                                          NodeId seed_node, std::uint32_t runs,
                                          const RngPolicy &rng);

/// Mean and sample variance of `runs` replicates.
SpreadEstimate estimate_influence(const DirectedGraph &g, const SirParams &params,
                                  NodeId seed_node, std::uint32_t runs, const RngPolicy &rng);

/// One estimate per node. The parallel kernel splits work over seed nodes;
/// results are identical to the serial loop for any thread count.
std::vector<SpreadEstimate> influence_all(const DirectedGraph &g, const SirParams &params,
                                          std::uint32_t runs, const RngPolicy &rng,
                                          Execution exec = Execution::Parallel);

/// Means only, as a plain vector indexed by NodeId.
std::vector<double> influence_means(const std::vector<SpreadEstimate> &estimates);

/**
 * Exact expected number of ever-infected nodes for the continuous-time
 * Markov chain over (S/I/R)^n, by memoised first-step analysis. Limited to
 * n <= 10 (3^10 states); throws UsageError above. Accepts lambda = 0.
 */
double exact_expected_spread(const DirectedGraph &g, const SirParams &params, NodeId seed_node);

/// CSV: node,mean,variance,runs
void write_influence_csv(std::ostream &out, const DirectedGraph &g,
                         const std::vector<SpreadEstimate> &estimates);
std::vector<SpreadEstimate> read_influence_csv(std::istream &in, const DirectedGraph &g);

/// Identifies a cached influence table.
struct InfluenceCacheKey {
    std::uint64_t graph_hash = 0;
    double lambda = 0.0;
    std::uint32_t runs = 0;
    std::uint64_t master_seed = 0;

    std::filesystem::path file_name() const;
};

void save_influence_cache(const std::filesystem::path &dir, const InfluenceCacheKey &key,
                          const std::vector<SpreadEstimate> &estimates);
/// Returns nullopt when the entry is missing or its header does not match `key`.
std::optional<std::vector<SpreadEstimate>>
load_influence_cache(const std::filesystem::path &dir, const InfluenceCacheKey &key);

} // namespace spreaders
