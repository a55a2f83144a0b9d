// Serial reference vs OpenMP kernels on a synthetic strongly connected digraph.
// Both variants produce identical outputs; only wall time differs.

#include <spreaders/centrality.hpp>
#include <spreaders/ranking.hpp>
#include <spreaders/sir.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace spreaders;

namespace {

DirectedGraph synthetic_graph(std::size_t n, double mean_degree, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
    const auto extra = static_cast<std::size_t>(mean_degree * n) - n;
    for (std::size_t k = 0; k < extra; ++k)
        edges.emplace_back(static_cast<NodeId>(node(gen)), static_cast<NodeId>(node(gen)));
    return largest_scc(DirectedGraph::from_edges(n, edges));
}

const DirectedGraph &graph() {
    static const DirectedGraph g = synthetic_graph(2000, 5.0, 1);
    return g;
}

Execution exec_of(const benchmark::State &state) {
    return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void label(benchmark::State &state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_Influence(benchmark::State &state) {
    const SirParams params{0.15, 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(influence_all(graph(), params, 50, RngPolicy{1}, exec_of(state)));
    label(state);
}

void BM_Closeness(benchmark::State &state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(closeness(graph(), exec_of(state)));
    label(state);
}

void BM_TwoHop(benchmark::State &state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(two_hop_neighbourhood(graph(), exec_of(state)));
    label(state);
}

void BM_Bootstrap(benchmark::State &state) {
    static const auto feature = [] {
        const auto d = degree(graph());
        return std::vector<double>(d.begin(), d.end());
    }();
    static const auto rho = pagerank(graph());
    const auto grid = default_f_grid();
    for (auto _ : state)
        benchmark::DoNotOptimize(bootstrap_rank_evaluate(feature, rho, grid, CentralityKind::Degree,
                                                         100, RngPolicy{1}, exec_of(state)));
    label(state);
}

} // namespace

BENCHMARK(BM_Influence)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Closeness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TwoHop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Bootstrap)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
