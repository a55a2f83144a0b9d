#pragma once

#include <spreaders/graph.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace spreaders {

/// Selects the OpenMP kernel or the single-threaded reference loop. Both
/// produce bit-identical results.
enum class Execution { Parallel, Serial };

enum class CentralityKind : std::uint8_t {
    Degree,
    Neighbourhood,
    TwoHopNeighbourhood,
    CoreNumber,
    Closeness,
    PageRank,
    Eigenvector,
};

inline constexpr std::size_t kNumCentralities = 7;
inline constexpr std::array<CentralityKind, kNumCentralities> kAllCentralities{
    CentralityKind::Degree,      CentralityKind::Neighbourhood, CentralityKind::TwoHopNeighbourhood,
    CentralityKind::CoreNumber,  CentralityKind::Closeness,     CentralityKind::PageRank,
    CentralityKind::Eigenvector,
};

/// CSV column names: degree, neighbourhood, two_hop, core, closeness, pagerank, eigenvector.
std::string_view column_name(CentralityKind kind);
std::optional<CentralityKind> centrality_from_name(std::string_view name);

/// Per-node centrality values, one column per CentralityKind in declaration order.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::size_t n);

    std::size_t num_nodes() const noexcept { return n_; }

    std::vector<double> &column(CentralityKind kind) { return columns_[index(kind)]; }
    const std::vector<double> &column(CentralityKind kind) const { return columns_[index(kind)]; }

    double at(NodeId node, CentralityKind kind) const { return columns_[index(kind)][node]; }

    friend bool operator==(const FeatureMatrix &, const FeatureMatrix &) = default;

private:
    static constexpr std::size_t index(CentralityKind kind) {
        return static_cast<std::size_t>(kind);
    }

    std::size_t n_ = 0;
    std::array<std::vector<double>, kNumCentralities> columns_;
};

/// Out-degree.
std::vector<std::int64_t> degree(const DirectedGraph &g);

/// Sum of the out-degrees of a node's out-neighbours (k_sum).
std::vector<std::int64_t> neighbourhood(const DirectedGraph &g);

/// Sum of out-degrees over nodes at shortest out-distance exactly two (k_2sum).
std::vector<std::int64_t> two_hop_neighbourhood(const DirectedGraph &g,
                                                Execution exec = Execution::Parallel);

/**
 * Shell index by out-degree peeling: for k = 1, 2, ... repeatedly remove
 * every node whose remaining out-degree is <= k; removed nodes get shell k.
 * Out-degrees are decremented as out-neighbours are removed.
 */
std::vector<std::int64_t> core_number(const DirectedGraph &g);

/// (n-1) / sum of BFS out-distances; 0 for a single node. Requires strong connectivity.
std::vector<double> closeness(const DirectedGraph &g, Execution exec = Execution::Parallel);

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-10;
    int max_iter = 1000;
};

/// Power iteration along out-links, L1-normalised. Throws ConvergenceError.
std::vector<double> pagerank(const DirectedGraph &g, const PageRankOptions &opts = {});

struct EigenvectorOptions {
    double tol = 1e-10;
    int max_iter = 10000;
    /// Iterates on A + shift*I. Any positive shift leaves the eigenvector
    /// unchanged and makes the iteration converge on periodic graphs
    /// (bipartite stars, even cycles) where plain power iteration oscillates.
    double shift = 1.0;
};

/**
 * Leading eigenvector of the out-adjacency matrix: x_i proportional to the
 * sum of x_j over out-neighbours j. Unit L2 norm, nonnegative.
 * Throws ConvergenceError.
 */
std::vector<double> eigenvector(const DirectedGraph &g, const EigenvectorOptions &opts = {});

/// All seven columns. Deterministic given g.
FeatureMatrix compute_all(const DirectedGraph &g, Execution exec = Execution::Parallel);

/// CSV with header node,degree,neighbourhood,two_hop,core,closeness,pagerank,eigenvector.
void write_features_csv(std::ostream &out, const DirectedGraph &g, const FeatureMatrix &fm);

/// Reads a features CSV back, mapping labels through `g`. Throws DataError.
FeatureMatrix read_features_csv(std::istream &in, const DirectedGraph &g);

} // namespace spreaders
