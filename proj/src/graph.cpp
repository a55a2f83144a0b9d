#include <spreaders/errors.hpp>
#include <spreaders/graph.hpp>
#include <spreaders/rng.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace spreaders {

Direction parse_direction(std::string_view name) {
    if (name == "as-is" || name == "asis")
        return Direction::AsIs;
    if (name == "reverse")
        return Direction::Reverse;
    if (name == "undirected")
        return Direction::Undirected;
    throw UsageError("unknown direction '" + std::string(name) +
                     "' (expected as-is, reverse or undirected)");
}

std::string_view to_string(Direction d) {
    switch (d) {
    case Direction::AsIs:
        return "as-is";
    case Direction::Reverse:
        return "reverse";
    case Direction::Undirected:
        return "undirected";
    }
    return "as-is";
}

DirectedGraph DirectedGraph::from_edges(std::size_t n, std::vector<Edge> edges,
                                        std::vector<std::string> labels) {
    if (labels.empty()) {
        labels.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            labels.push_back(std::to_string(i));
    }
    if (labels.size() != n)
        throw UsageError("label count does not match node count");

    std::erase_if(edges, [](const Edge &e) { return e.first == e.second; });
    for (const auto &[u, v] : edges) {
        if (u >= n || v >= n)
            throw UsageError("edge endpoint out of range");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    DirectedGraph g;
    g.labels_ = std::move(labels);
    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    for (const auto &[u, v] : edges) {
        ++g.out_offsets_[u + 1];
        ++g.in_offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.out_offsets_[i + 1] += g.out_offsets_[i];
        g.in_offsets_[i + 1] += g.in_offsets_[i];
    }
    g.out_targets_.resize(edges.size());
    g.in_sources_.resize(edges.size());
    std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    // edges are sorted by (u, v), so both fills come out sorted
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto [u, v] = edges[k];
        g.out_targets_[k] = v;
        g.in_sources_[in_fill[v]++] = u;
    }
    return g;
}

bool DirectedGraph::has_edge(NodeId u, NodeId v) const noexcept {
    const auto nbrs = out_neighbors(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::unordered_map<std::string, NodeId> DirectedGraph::label_index() const {
    std::unordered_map<std::string, NodeId> index;
    index.reserve(labels_.size());
    for (NodeId i = 0; i < labels_.size(); ++i)
        index.emplace(labels_[i], i);
    return index;
}

std::vector<Edge> DirectedGraph::edges() const {
    std::vector<Edge> result;
    result.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes(); ++u) {
        for (NodeId v : out_neighbors(u))
            result.emplace_back(u, v);
    }
    return result;
}

std::uint64_t DirectedGraph::content_hash() const {
    std::uint64_t h = fnv1a("spreaders-graph-v1");
    h = hash_combine(h, num_nodes());
    for (const auto &label : labels_)
        h = hash_combine(h, fnv1a(label));
    for (NodeId u = 0; u < num_nodes(); ++u) {
        h = hash_combine(h, out_degree(u));
        for (NodeId v : out_neighbors(u))
            h = hash_combine(h, v);
    }
    return h;
}

DirectedGraph parse_edge_list(std::istream &in, Direction direction) {
    std::unordered_map<std::string, NodeId> ids;
    std::vector<std::string> labels;
    std::vector<Edge> edges;

    auto intern = [&](std::string token) {
        auto [it, inserted] = ids.try_emplace(token, static_cast<NodeId>(labels.size()));
        if (inserted)
            labels.push_back(std::move(token));
        return it->second;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#' || line[first] == '%')
            continue;
        std::istringstream tokens(line);
        std::string src, dst;
        tokens >> src;
        if (!(tokens >> dst))
            throw DataError("edge list line " + std::to_string(line_no) +
                            ": expected two node identifiers");
        const NodeId u = intern(std::move(src));
        const NodeId v = intern(std::move(dst));
        if (labels.size() > std::numeric_limits<NodeId>::max())
            throw DataError("edge list has too many nodes");
        if (u == v)
            continue;
        switch (direction) {
        case Direction::AsIs:
            edges.emplace_back(u, v);
            break;
        case Direction::Reverse:
            edges.emplace_back(v, u);
            break;
        case Direction::Undirected:
            edges.emplace_back(u, v);
            edges.emplace_back(v, u);
            break;
        }
    }
    if (edges.empty())
        throw DataError("edge list contains no usable edges");
    const std::size_t n = labels.size();
    return DirectedGraph::from_edges(n, std::move(edges), std::move(labels));
}

DirectedGraph read_edge_list(const std::filesystem::path &path, Direction direction) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open edge list '" + path.string() + "'");
    return parse_edge_list(in, direction);
}

void write_edge_list(std::ostream &out, const DirectedGraph &g) {
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.out_neighbors(u))
            out << g.label(u) << ' ' << g.label(v) << '\n';
    }
}

DirectedGraph reverse_edges(const DirectedGraph &g) {
    auto edges = g.edges();
    for (auto &e : edges)
        std::swap(e.first, e.second);
    return DirectedGraph::from_edges(g.num_nodes(), std::move(edges), g.labels());
}

std::vector<std::uint32_t> strongly_connected_components(const DirectedGraph &g,
                                                         std::size_t *num_components) {
    constexpr std::uint32_t unvisited = std::numeric_limits<std::uint32_t>::max();
    const std::size_t n = g.num_nodes();
    std::vector<std::uint32_t> index(n, unvisited), lowlink(n, 0), component(n, unvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<NodeId> stack;
    // (node, position in its out-neighbour list)
    std::vector<std::pair<NodeId, std::size_t>> call_stack;
    std::uint32_t next_index = 0, next_component = 0;

    for (NodeId root = 0; root < n; ++root) {
        if (index[root] != unvisited)
            continue;
        call_stack.emplace_back(root, 0);
        index[root] = lowlink[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;

        while (!call_stack.empty()) {
            auto &[u, pos] = call_stack.back();
            const auto nbrs = g.out_neighbors(u);
            if (pos < nbrs.size()) {
                const NodeId v = nbrs[pos++];
                if (index[v] == unvisited) {
                    index[v] = lowlink[v] = next_index++;
                    stack.push_back(v);
                    on_stack[v] = true;
                    call_stack.emplace_back(v, 0);
                } else if (on_stack[v]) {
                    lowlink[u] = std::min(lowlink[u], index[v]);
                }
                continue;
            }
            const NodeId done = u;
            call_stack.pop_back();
            if (!call_stack.empty()) {
                const NodeId parent = call_stack.back().first;
                lowlink[parent] = std::min(lowlink[parent], lowlink[done]);
            }
            if (lowlink[done] == index[done]) {
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component[w] = next_component;
                } while (w != done);
                ++next_component;
            }
        }
    }
    if (num_components)
        *num_components = next_component;
    return component;
}

bool label_less(std::string_view a, std::string_view b) {
    long long x = 0, y = 0;
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), x);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), y);
    const bool a_numeric = ra.ec == std::errc{} && ra.ptr == a.data() + a.size();
    const bool b_numeric = rb.ec == std::errc{} && rb.ptr == b.data() + b.size();
    if (a_numeric && b_numeric)
        return x < y;
    return a < b;
}

DirectedGraph largest_scc(const DirectedGraph &g) {
    const std::size_t n = g.num_nodes();
    if (n == 0)
        return g;
    std::size_t count = 0;
    const auto component = strongly_connected_components(g, &count);

    std::vector<std::size_t> size(count, 0);
    std::vector<NodeId> min_label_node(count, std::numeric_limits<NodeId>::max());
    for (NodeId u = 0; u < n; ++u) {
        const auto c = component[u];
        ++size[c];
        if (min_label_node[c] == std::numeric_limits<NodeId>::max() ||
            label_less(g.label(u), g.label(min_label_node[c])))
            min_label_node[c] = u;
    }
    std::uint32_t best = 0;
    for (std::uint32_t c = 1; c < count; ++c) {
        if (size[c] > size[best] ||
            (size[c] == size[best] &&
             label_less(g.label(min_label_node[c]), g.label(min_label_node[best]))))
            best = c;
    }

    std::vector<NodeId> remap(n, std::numeric_limits<NodeId>::max());
    std::vector<std::string> labels;
    labels.reserve(size[best]);
    for (NodeId u = 0; u < n; ++u) {
        if (component[u] == best) {
            remap[u] = static_cast<NodeId>(labels.size());
            labels.push_back(g.label(u));
        }
    }
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        if (component[u] != best)
            continue;
        for (NodeId v : g.out_neighbors(u)) {
            if (component[v] == best)
                edges.emplace_back(remap[u], remap[v]);
        }
    }
    const std::size_t m = labels.size();
    return DirectedGraph::from_edges(m, std::move(edges), std::move(labels));
}

namespace {

std::size_t reach_count(const DirectedGraph &g, bool forward) {
    std::vector<bool> seen(g.num_nodes(), false);
    std::vector<NodeId> frontier{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!frontier.empty()) {
        const NodeId u = frontier.back();
        frontier.pop_back();
        for (NodeId v : forward ? g.out_neighbors(u) : g.in_neighbors(u)) {
            if (!seen[v]) {
                seen[v] = true;
                ++count;
                frontier.push_back(v);
            }
        }
    }
    return count;
}

} // namespace

bool is_strongly_connected(const DirectedGraph &g) {
    if (g.num_nodes() == 0)
        return false;
    return reach_count(g, true) == g.num_nodes() && reach_count(g, false) == g.num_nodes();
}

} // namespace spreaders
