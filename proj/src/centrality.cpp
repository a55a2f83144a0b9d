#include <spreaders/centrality.hpp>
#include <spreaders/errors.hpp>
#include <spreaders/text.hpp>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace spreaders {

namespace {

constexpr std::array<std::string_view, kNumCentralities> kColumnNames{
    "degree", "neighbourhood", "two_hop", "core", "closeness", "pagerank", "eigenvector"};

// Sum of BFS distances from `source`, or -1 if some node is unreachable.
std::int64_t distance_sum(const DirectedGraph &g, NodeId source, std::vector<std::int32_t> &dist,
                          std::vector<NodeId> &queue) {
    std::fill(dist.begin(), dist.end(), -1);
    queue.clear();
    queue.push_back(source);
    dist[source] = 0;
    std::int64_t total = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        total += dist[u];
        for (NodeId v : g.out_neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return queue.size() == g.num_nodes() ? total : -1;
}

// Sum of out-degrees over nodes at distance exactly two from `source`.
// `stamp` marks nodes already seen in this source's search.
std::int64_t two_hop_sum(const DirectedGraph &g, NodeId source, std::vector<std::uint32_t> &stamp,
                         std::uint32_t tag) {
    stamp[source] = tag;
    for (NodeId v : g.out_neighbors(source))
        stamp[v] = tag;
    std::int64_t total = 0;
    for (NodeId v : g.out_neighbors(source)) {
        for (NodeId w : g.out_neighbors(v)) {
            if (stamp[w] != tag) {
                stamp[w] = tag;
                total += static_cast<std::int64_t>(g.out_degree(w));
            }
        }
    }
    return total;
}

} // namespace

std::string_view column_name(CentralityKind kind) {
    return kColumnNames[static_cast<std::size_t>(kind)];
}

std::optional<CentralityKind> centrality_from_name(std::string_view name) {
    for (auto kind : kAllCentralities) {
        if (column_name(kind) == name)
            return kind;
    }
    return std::nullopt;
}

FeatureMatrix::FeatureMatrix(std::size_t n) : n_(n) {
    for (auto &col : columns_)
        col.assign(n, 0.0);
}

std::vector<std::int64_t> degree(const DirectedGraph &g) {
    std::vector<std::int64_t> out(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u)
        out[u] = static_cast<std::int64_t>(g.out_degree(u));
    return out;
}

std::vector<std::int64_t> neighbourhood(const DirectedGraph &g) {
    std::vector<std::int64_t> out(g.num_nodes(), 0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.out_neighbors(u))
            out[u] += static_cast<std::int64_t>(g.out_degree(v));
    }
    return out;
}

std::vector<std::int64_t> two_hop_neighbourhood(const DirectedGraph &g, Execution exec) {
    const auto n = static_cast<std::int64_t>(g.num_nodes());
    std::vector<std::int64_t> out(g.num_nodes(), 0);
    if (exec == Execution::Serial) {
        std::vector<std::uint32_t> stamp(g.num_nodes(), 0);
        for (std::int64_t u = 0; u < n; ++u)
            out[u] = two_hop_sum(g, static_cast<NodeId>(u), stamp, static_cast<std::uint32_t>(u + 1));
        return out;
    }
#pragma omp parallel
    {
        std::vector<std::uint32_t> stamp(g.num_nodes(), 0);
#pragma omp for schedule(dynamic, 64)
        for (std::int64_t u = 0; u < n; ++u)
            out[u] = two_hop_sum(g, static_cast<NodeId>(u), stamp, static_cast<std::uint32_t>(u + 1));
    }
    return out;
}

std::vector<std::int64_t> core_number(const DirectedGraph &g) {
    // Bucket peeling (Batagelj-Zaversnik) on out-degree; removing v lowers
    // the out-degree of each in-neighbour of v.
    const std::size_t n = g.num_nodes();
    std::vector<std::int64_t> deg(n);
    std::size_t max_deg = 0;
    for (NodeId u = 0; u < n; ++u) {
        deg[u] = static_cast<std::int64_t>(g.out_degree(u));
        max_deg = std::max(max_deg, g.out_degree(u));
    }
    std::vector<std::size_t> bin(max_deg + 2, 0);
    for (NodeId u = 0; u < n; ++u)
        ++bin[deg[u]];
    std::size_t start = 0;
    for (auto &b : bin) {
        const auto count = b;
        b = start;
        start += count;
    }
    std::vector<NodeId> order(n);
    std::vector<std::size_t> pos(n);
    for (NodeId u = 0; u < n; ++u) {
        pos[u] = bin[deg[u]]++;
        order[pos[u]] = u;
    }
    for (std::size_t d = bin.size() - 1; d > 0; --d)
        bin[d] = bin[d - 1];
    bin[0] = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const NodeId v = order[i];
        for (NodeId u : g.in_neighbors(v)) {
            if (deg[u] > deg[v]) {
                const auto du = static_cast<std::size_t>(deg[u]);
                const std::size_t pu = pos[u];
                const std::size_t pw = bin[du];
                const NodeId w = order[pw];
                if (u != w) {
                    order[pu] = w;
                    pos[w] = pu;
                    order[pw] = u;
                    pos[u] = pw;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }
    return deg;
}

std::vector<double> closeness(const DirectedGraph &g, Execution exec) {
    const std::size_t n = g.num_nodes();
    std::vector<double> out(n, 0.0);
    if (n <= 1)
        return out;
    std::vector<std::int64_t> sums(n, 0);
    const auto count = static_cast<std::int64_t>(n);
    if (exec == Execution::Serial) {
        std::vector<std::int32_t> dist(n);
        std::vector<NodeId> queue;
        queue.reserve(n);
        for (std::int64_t u = 0; u < count; ++u)
            sums[u] = distance_sum(g, static_cast<NodeId>(u), dist, queue);
    } else {
#pragma omp parallel
        {
            std::vector<std::int32_t> dist(n);
            std::vector<NodeId> queue;
            queue.reserve(n);
#pragma omp for schedule(dynamic, 16)
            for (std::int64_t u = 0; u < count; ++u)
                sums[u] = distance_sum(g, static_cast<NodeId>(u), dist, queue);
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (sums[u] <= 0)
            throw DataError("closeness requires a strongly connected graph (node '" +
                            g.label(static_cast<NodeId>(u)) + "' cannot reach every node)");
        out[u] = static_cast<double>(n - 1) / static_cast<double>(sums[u]);
    }
    return out;
}

std::vector<double> pagerank(const DirectedGraph &g, const PageRankOptions &opts) {
    const std::size_t n = g.num_nodes();
    if (n == 0)
        return {};
    const double uniform = 1.0 / static_cast<double>(n);
    std::vector<double> x(n, uniform), next(n);
    double residual = 0.0;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double dangling = 0.0;
        for (NodeId u = 0; u < n; ++u) {
            if (g.out_degree(u) == 0)
                dangling += x[u];
        }
        const double base = (1.0 - opts.damping) * uniform + opts.damping * dangling * uniform;
        for (NodeId v = 0; v < n; ++v) {
            double acc = 0.0;
            for (NodeId u : g.in_neighbors(v))
                acc += x[u] / static_cast<double>(g.out_degree(u));
            next[v] = base + opts.damping * acc;
        }
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            residual += std::abs(next[i] - x[i]);
        x.swap(next);
        if (residual < opts.tol) {
            const double total = std::accumulate(x.begin(), x.end(), 0.0);
            for (auto &v : x)
                v /= total;
            return x;
        }
    }
    throw ConvergenceError("pagerank did not converge in " + std::to_string(opts.max_iter) +
                               " iterations",
                           residual);
}

std::vector<double> eigenvector(const DirectedGraph &g, const EigenvectorOptions &opts) {
    const std::size_t n = g.num_nodes();
    if (n == 0)
        return {};
    std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), next(n);
    double residual = 0.0;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        for (NodeId u = 0; u < n; ++u) {
            double acc = opts.shift * x[u];
            for (NodeId v : g.out_neighbors(u))
                acc += x[v];
            next[u] = acc;
        }
        double norm = 0.0;
        for (double v : next)
            norm += v * v;
        norm = std::sqrt(norm);
        if (norm == 0.0)
            throw ConvergenceError("eigenvector iterate vanished", 0.0);
        residual = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] /= norm;
            const double d = next[i] - x[i];
            residual += d * d;
        }
        residual = std::sqrt(residual);
        x.swap(next);
        if (residual < opts.tol)
            return x;
    }
    throw ConvergenceError("eigenvector centrality did not converge in " +
                               std::to_string(opts.max_iter) + " iterations",
                           residual);
}

FeatureMatrix compute_all(const DirectedGraph &g, Execution exec) {
    FeatureMatrix fm(g.num_nodes());
    auto fill = [&](CentralityKind kind, const auto &values) {
        auto &col = fm.column(kind);
        for (std::size_t i = 0; i < values.size(); ++i)
            col[i] = static_cast<double>(values[i]);
    };
    fill(CentralityKind::Degree, degree(g));
    fill(CentralityKind::Neighbourhood, neighbourhood(g));
    fill(CentralityKind::TwoHopNeighbourhood, two_hop_neighbourhood(g, exec));
    fill(CentralityKind::CoreNumber, core_number(g));
    fill(CentralityKind::Closeness, closeness(g, exec));
    fill(CentralityKind::PageRank, pagerank(g));
    fill(CentralityKind::Eigenvector, eigenvector(g));
    return fm;
}

void write_features_csv(std::ostream &out, const DirectedGraph &g, const FeatureMatrix &fm) {
    out << "node";
    for (auto kind : kAllCentralities)
        out << ',' << column_name(kind);
    out << '\n';
    for (NodeId u = 0; u < fm.num_nodes(); ++u) {
        out << g.label(u);
        for (auto kind : kAllCentralities)
            out << ',' << format_double(fm.at(u, kind));
        out << '\n';
    }
}

FeatureMatrix read_features_csv(std::istream &in, const DirectedGraph &g) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("features CSV is empty");
    const auto header = split(trim(line), ',');
    if (header.size() != kNumCentralities + 1 || header[0] != "node")
        throw DataError("features CSV has an unexpected header");
    for (std::size_t c = 0; c < kNumCentralities; ++c) {
        if (header[c + 1] != column_name(kAllCentralities[c]))
            throw DataError("features CSV has an unexpected header");
    }
    const auto index = g.label_index();
    FeatureMatrix fm(g.num_nodes());
    std::vector<bool> seen(g.num_nodes(), false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != kNumCentralities + 1)
            throw DataError("features CSV line " + std::to_string(line_no) + ": wrong field count");
        const auto it = index.find(std::string(cells[0]));
        if (it == index.end())
            throw DataError("features CSV line " + std::to_string(line_no) + ": unknown node '" +
                            std::string(cells[0]) + "'");
        for (std::size_t c = 0; c < kNumCentralities; ++c) {
            double v = 0.0;
            if (!parse_number(cells[c + 1], v))
                throw DataError("features CSV line " + std::to_string(line_no) + ": bad number");
            fm.column(kAllCentralities[c])[it->second] = v;
        }
        seen[it->second] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw DataError("features CSV does not cover every node of the graph");
    return fm;
}

} // namespace spreaders
