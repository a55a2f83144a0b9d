#include <spreaders/errors.hpp>
#include <spreaders/sir.hpp>
#include <spreaders/text.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace spreaders {

void SirParams::validate() const {
    if (!std::isfinite(lambda) || lambda <= 0.0)
        throw UsageError("SIR lambda must be finite and > 0");
    if (mu != 1.0)
        throw UsageError("SIR recovery rate mu is fixed at 1");
}

std::uint32_t SirWorkspace::simulate(const DirectedGraph &g, const SirParams &params,
                                     NodeId seed_node, RngStream &stream) {
    std::uint32_t count = 0;
    events_.push({0.0, seed_node});
    while (!events_.empty()) {
        const Event ev = events_.top();
        events_.pop();
        if (infected_[ev.node])
            continue;
        infected_[ev.node] = 1;
        touched_.push_back(ev.node);
        ++count;
        const double recovery = stream.exponential(params.mu);
        for (NodeId w : g.out_neighbors(ev.node)) {
            if (infected_[w])
                continue;
            const double contact = stream.exponential(params.lambda);
            if (contact < recovery)
                events_.push({ev.time + contact, w});
        }
    }
    for (NodeId u : touched_)
        infected_[u] = 0;
    touched_.clear();
    return count;
}

std::uint32_t simulate_once(const DirectedGraph &g, const SirParams &params, NodeId seed_node,
                            RngStream &stream) {
    SirWorkspace ws(g.num_nodes());
    return ws.simulate(g, params, seed_node, stream);
}

std::vector<std::uint32_t> outbreak_sizes(const DirectedGraph &g, const SirParams &params,
                                          NodeId seed_node, std::uint32_t runs,
                                          const RngPolicy &rng) {
    SirWorkspace ws(g.num_nodes());
    std::vector<std::uint32_t> sizes(runs);
    for (std::uint32_t r = 0; r < runs; ++r) {
        auto stream = rng.replicate_stream(seed_node, r);
        sizes[r] = ws.simulate(g, params, seed_node, stream);
    }
    return sizes;
}

namespace {

SpreadEstimate estimate_with(SirWorkspace &ws, const DirectedGraph &g, const SirParams &params,
                             NodeId seed_node, std::uint32_t runs, const RngPolicy &rng) {
    std::uint64_t sum = 0;
    unsigned __int128 sum_sq = 0;
    for (std::uint32_t r = 0; r < runs; ++r) {
        auto stream = rng.replicate_stream(seed_node, r);
        const std::uint64_t size = ws.simulate(g, params, seed_node, stream);
        sum += size;
        sum_sq += size * size;
    }
    SpreadEstimate est;
    est.node = seed_node;
    est.runs = runs;
    est.mean = static_cast<double>(sum) / runs;
    if (runs > 1) {
        // R * sum(x^2) - (sum x)^2 is exact in 128-bit integers
        const unsigned __int128 num =
            static_cast<unsigned __int128>(runs) * sum_sq -
            static_cast<unsigned __int128>(sum) * sum;
        est.variance = static_cast<double>(num) / (static_cast<double>(runs) * (runs - 1.0));
    }
    return est;
}

} // namespace

SpreadEstimate estimate_influence(const DirectedGraph &g, const SirParams &params,
                                  NodeId seed_node, std::uint32_t runs, const RngPolicy &rng) {
    params.validate();
    if (runs == 0)
        throw UsageError("runs must be >= 1");
    if (seed_node >= g.num_nodes())
        throw UsageError("seed node out of range");
    SirWorkspace ws(g.num_nodes());
    return estimate_with(ws, g, params, seed_node, runs, rng);
}

std::vector<SpreadEstimate> influence_all(const DirectedGraph &g, const SirParams &params,
                                          std::uint32_t runs, const RngPolicy &rng,
                                          Execution exec) {
    params.validate();
    if (runs == 0)
        throw UsageError("runs must be >= 1");
    const auto n = static_cast<std::int64_t>(g.num_nodes());
    std::vector<SpreadEstimate> out(g.num_nodes());
    if (exec == Execution::Serial) {
        SirWorkspace ws(g.num_nodes());
        for (std::int64_t u = 0; u < n; ++u)
            out[u] = estimate_with(ws, g, params, static_cast<NodeId>(u), runs, rng);
        return out;
    }
#pragma omp parallel
    {
        SirWorkspace ws(g.num_nodes());
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t u = 0; u < n; ++u)
            out[u] = estimate_with(ws, g, params, static_cast<NodeId>(u), runs, rng);
    }
    return out;
}

std::vector<double> influence_means(const std::vector<SpreadEstimate> &estimates) {
    std::vector<double> means(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i)
        means[i] = estimates[i].mean;
    return means;
}

namespace {

class ExactSpreadSolver {
public:
    ExactSpreadSolver(const DirectedGraph &g, const SirParams &params) : g_(g), params_(params) {
        std::size_t states = 1;
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            states *= 3;
        memo_.assign(states, std::numeric_limits<double>::quiet_NaN());
        pow3_.assign(g.num_nodes(), 1);
        for (std::size_t i = 1; i < g.num_nodes(); ++i)
            pow3_[i] = pow3_[i - 1] * 3;
    }

    // state digit per node: 0 = S, 1 = I, 2 = R
    double value(std::size_t state) {
        double &slot = memo_[state];
        if (!std::isnan(slot))
            return slot;
        const std::size_t n = g_.num_nodes();
        double total_rate = 0.0;
        double weighted = 0.0;
        std::size_t ever = 0;
        for (NodeId i = 0; i < n; ++i) {
            const auto di = digit(state, i);
            if (di != 0)
                ++ever;
            if (di != 1)
                continue;
            total_rate += params_.mu;
            weighted += params_.mu * value(state + pow3_[i]);
            if (params_.lambda > 0.0) {
                for (NodeId j : g_.out_neighbors(i)) {
                    if (digit(state, j) == 0) {
                        total_rate += params_.lambda;
                        weighted += params_.lambda * value(state + pow3_[j]);
                    }
                }
            }
        }
        slot = total_rate == 0.0 ? static_cast<double>(ever) : weighted / total_rate;
        return slot;
    }

    std::size_t seed_state(NodeId seed) const { return pow3_[seed]; }

private:
    std::size_t digit(std::size_t state, NodeId i) const { return (state / pow3_[i]) % 3; }

    const DirectedGraph &g_;
    SirParams params_;
    std::vector<double> memo_;
    std::vector<std::size_t> pow3_;
};

} // namespace

double exact_expected_spread(const DirectedGraph &g, const SirParams &params, NodeId seed_node) {
    if (g.num_nodes() > 10)
        throw UsageError("exact_expected_spread supports at most 10 nodes");
    if (!std::isfinite(params.lambda) || params.lambda < 0.0)
        throw UsageError("SIR lambda must be finite and >= 0");
    if (seed_node >= g.num_nodes())
        throw UsageError("seed node out of range");
    ExactSpreadSolver solver(g, params);
    return solver.value(solver.seed_state(seed_node));
}

void write_influence_csv(std::ostream &out, const DirectedGraph &g,
                         const std::vector<SpreadEstimate> &estimates) {
    out << "node,mean,variance,runs\n";
    for (const auto &est : estimates) {
        out << g.label(est.node) << ',' << format_double(est.mean) << ','
            << format_double(est.variance) << ',' << est.runs << '\n';
    }
}

std::vector<SpreadEstimate> read_influence_csv(std::istream &in, const DirectedGraph &g) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "node,mean,variance,runs")
        throw DataError("influence CSV has an unexpected header");
    const auto index = g.label_index();
    std::vector<SpreadEstimate> out(g.num_nodes());
    std::vector<bool> seen(g.num_nodes(), false);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto cells = split(trim(line), ',');
        const auto it = cells.size() == 4 ? index.find(std::string(cells[0])) : index.end();
        SpreadEstimate est;
        if (it == index.end() || !parse_number(cells[1], est.mean) ||
            !parse_number(cells[2], est.variance) || !parse_number(cells[3], est.runs))
            throw DataError("influence CSV line " + std::to_string(line_no) + " is malformed");
        est.node = it->second;
        out[est.node] = est;
        seen[est.node] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw DataError("influence CSV does not cover every node of the graph");
    return out;
}

namespace {

constexpr char kCacheMagic[8] = {'S', 'P', 'R', 'I', 'N', 'F', '0', '1'};

template <typename T>
void put(std::ostream &out, const T &value) {
    out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
bool get(std::istream &in, T &value) {
    return static_cast<bool>(in.read(reinterpret_cast<char *>(&value), sizeof(T)));
}

} // namespace

std::filesystem::path InfluenceCacheKey::file_name() const {
    std::uint64_t h = hash_combine(graph_hash, std::bit_cast<std::uint64_t>(lambda));
    h = hash_combine(h, runs);
    h = hash_combine(h, master_seed);
    return "influence-" + format_hex(h) + ".bin";
}

void save_influence_cache(const std::filesystem::path &dir, const InfluenceCacheKey &key,
                          const std::vector<SpreadEstimate> &estimates) {
    std::filesystem::create_directories(dir);
    const auto path = dir / key.file_name();
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw DataError("cannot write influence cache '" + tmp + "'");
        out.write(kCacheMagic, sizeof(kCacheMagic));
        put(out, key.graph_hash);
        put(out, key.lambda);
        put(out, key.runs);
        put(out, key.master_seed);
        put(out, static_cast<std::uint64_t>(estimates.size()));
        for (const auto &e : estimates) {
            put(out, e.node);
            put(out, e.mean);
            put(out, e.variance);
            put(out, e.runs);
        }
    }
    std::filesystem::rename(tmp, path);
}

std::optional<std::vector<SpreadEstimate>>
load_influence_cache(const std::filesystem::path &dir, const InfluenceCacheKey &key) {
    std::ifstream in(dir / key.file_name(), std::ios::binary);
    if (!in)
        return std::nullopt;
    char magic[8];
    InfluenceCacheKey stored;
    std::uint64_t count = 0;
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        return std::nullopt;
    if (!get(in, stored.graph_hash) || !get(in, stored.lambda) || !get(in, stored.runs) ||
        !get(in, stored.master_seed) || !get(in, count))
        return std::nullopt;
    if (stored.graph_hash != key.graph_hash || stored.lambda != key.lambda ||
        stored.runs != key.runs || stored.master_seed != key.master_seed)
        return std::nullopt;
    std::vector<SpreadEstimate> out(count);
    for (auto &e : out) {
        if (!get(in, e.node) || !get(in, e.mean) || !get(in, e.variance) || !get(in, e.runs))
            return std::nullopt;
    }
    return out;
}

} // namespace spreaders
