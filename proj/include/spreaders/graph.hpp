#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spreaders {

/// Dense node index, 0..n-1, valid for the lifetime of one loaded graph.
using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// How the arcs of an input file map onto the flow graph.
enum class Direction { AsIs, Reverse, Undirected };

Direction parse_direction(std::string_view name);
std::string_view to_string(Direction d);

/**
 * Immutable simple digraph in compressed sparse row form, with both the
 * out- and in-adjacency stored. Neighbour lists are sorted; there are no
 * self-loops and no parallel arcs.
 */
class DirectedGraph {
public:
    DirectedGraph() = default;

    /// Builds a graph from arbitrary arcs: self-loops dropped, duplicates collapsed.
    /// `labels` maps NodeId to the external identifier; empty means "0".."n-1".
    static DirectedGraph from_edges(std::size_t n, std::vector<Edge> edges,
                                    std::vector<std::string> labels = {});

    std::size_t num_nodes() const noexcept { return labels_.size(); }
    std::size_t num_edges() const noexcept { return out_targets_.size(); }

    std::span<const NodeId> out_neighbors(NodeId u) const noexcept {
        return {out_targets_.data() + out_offsets_[u], out_targets_.data() + out_offsets_[u + 1]};
    }
    std::span<const NodeId> in_neighbors(NodeId u) const noexcept {
        return {in_sources_.data() + in_offsets_[u], in_sources_.data() + in_offsets_[u + 1]};
    }
    std::size_t out_degree(NodeId u) const noexcept { return out_offsets_[u + 1] - out_offsets_[u]; }
    std::size_t in_degree(NodeId u) const noexcept { return in_offsets_[u + 1] - in_offsets_[u]; }

    bool has_edge(NodeId u, NodeId v) const noexcept;

    const std::string &label(NodeId u) const noexcept { return labels_[u]; }
    const std::vector<std::string> &labels() const noexcept { return labels_; }
    /// External identifier -> NodeId lookup table.
    std::unordered_map<std::string, NodeId> label_index() const;

    /// All arcs sorted by (src, dst).
    std::vector<Edge> edges() const;

    /// Stable 64-bit content hash over labels and arcs.
    std::uint64_t content_hash() const;

    friend bool operator==(const DirectedGraph &, const DirectedGraph &) = default;

private:
    std::vector<std::size_t> out_offsets_{0};
    std::vector<NodeId> out_targets_;
    std::vector<std::size_t> in_offsets_{0};
    std::vector<NodeId> in_sources_;
    std::vector<std::string> labels_;
};

/**
 * Parses a whitespace-separated "src dst" edge list. Lines starting with '#'
 * or '%' and blank lines are skipped; tokens after the second are ignored.
 * Node ids are assigned in order of first appearance.
 *
 * Throws DataError on a one-token line (with its line number) or when no
 * usable arc remains.
 */
DirectedGraph parse_edge_list(std::istream &in, Direction direction = Direction::AsIs);
DirectedGraph read_edge_list(const std::filesystem::path &path,
                             Direction direction = Direction::AsIs);

/// Canonical writer: one "src dst" line per arc, sorted by NodeId pair, using labels.
void write_edge_list(std::ostream &out, const DirectedGraph &g);

DirectedGraph reverse_edges(const DirectedGraph &g);

/// Component id per node (Tarjan, iterative). Ids are assigned in completion order.
std::vector<std::uint32_t> strongly_connected_components(const DirectedGraph &g,
                                                         std::size_t *num_components = nullptr);

/**
 * Induced subgraph on the largest strongly connected component, re-indexed
 * 0..m-1 preserving relative NodeId order. Equal-size components are ranked
 * by their smallest original label (numeric comparison when both labels are
 * integers, lexicographic otherwise).
 */
DirectedGraph largest_scc(const DirectedGraph &g);

/// Forward and backward BFS from node 0 both reach every node.
bool is_strongly_connected(const DirectedGraph &g);

/// Orders labels numerically when both parse as integers, else lexicographically.
bool label_less(std::string_view a, std::string_view b);

} // namespace spreaders
