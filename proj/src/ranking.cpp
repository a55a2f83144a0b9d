#include <spreaders/errors.hpp>
#include <spreaders/ranking.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spreaders {

std::vector<double> default_f_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i)
        grid.push_back(i / 100.0);
    return grid;
}

std::size_t top_count(double f, std::size_t n) {
    if (!(f > 0.0 && f <= 1.0))
        throw UsageError("fraction f must lie in (0, 1]");
    const auto k = static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

namespace {

// Positions sorted by value descending, ties by position.
std::vector<NodeId> descending_order(std::span<const double> values) {
    std::vector<NodeId> order(values.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return values[a] > values[b]; });
    return order;
}

// Picks k entries from a descending order, drawing uniformly among the
// entries tied with the k-th one.
std::vector<NodeId> take_top(std::span<const NodeId> order, std::span<const double> values,
                             std::size_t k, RngStream &tie_rng) {
    k = std::min(k, order.size());
    if (k == 0)
        return {};
    const double cut = values[order[k - 1]];
    std::size_t first_tied = k - 1;
    while (first_tied > 0 && !(values[order[first_tied - 1]] > cut))
        --first_tied;
    std::size_t end_tied = k;
    while (end_tied < order.size() && !(cut > values[order[end_tied]]))
        ++end_tied;

    std::vector<NodeId> out(order.begin(), order.begin() + first_tied);
    if (end_tied - first_tied == k - first_tied) {
        out.insert(out.end(), order.begin() + first_tied, order.begin() + k);
        return out;
    }
    std::vector<NodeId> tied(order.begin() + first_tied, order.begin() + end_tied);
    const std::size_t need = k - first_tied;
    for (std::size_t i = 0; i < need; ++i) {
        const auto j = i + tie_rng.below(tied.size() - i);
        std::swap(tied[i], tied[j]);
    }
    out.insert(out.end(), tied.begin(), tied.begin() + need);
    return out;
}

} // namespace

std::vector<NodeId> top_k_by_value(std::span<const double> values, std::size_t k,
                                   RngStream &tie_rng) {
    const auto order = descending_order(values);
    return take_top(order, values, k, tie_rng);
}

std::vector<NodeId> top_f_by_value(std::span<const double> values, double f, RngStream &tie_rng) {
    return top_k_by_value(values, top_count(f, values.size()), tie_rng);
}

std::vector<NodeId> top_k_stable(std::span<const double> values, std::size_t k) {
    auto order = descending_order(values);
    order.resize(std::min(k, order.size()));
    return order;
}

double recognition_rate(std::span<const NodeId> truth, std::span<const NodeId> predicted) {
    if (truth.empty())
        throw UsageError("recognition rate needs a nonempty true top set");
    std::vector<NodeId> a(truth.begin(), truth.end()), b(predicted.begin(), predicted.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<NodeId> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(truth.size());
}

double precision_function(std::span<const NodeId> predicted, std::span<const NodeId> truth,
                          std::span<const double> rho) {
    if (truth.empty())
        throw UsageError("precision function needs a nonempty true top set");
    if (predicted.empty())
        return 0.0;
    // summed in node order so equal multisets give bitwise-equal means
    auto mean_over = [&](std::span<const NodeId> nodes) {
        std::vector<NodeId> sorted(nodes.begin(), nodes.end());
        std::sort(sorted.begin(), sorted.end());
        double sum = 0.0;
        for (NodeId u : sorted)
            sum += rho[u];
        return sum / static_cast<double>(sorted.size());
    };
    const double pred = mean_over(predicted), best = mean_over(truth);
    return std::min(1.0, pred / best);
}

double percentile(std::vector<double> values, double q) {
    if (values.empty())
        return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<RankingResult> bootstrap_rank_evaluate(std::span<const double> feature,
                                                   std::span<const double> rho,
                                                   std::span<const double> f_grid,
                                                   CentralityKind centrality,
                                                   std::uint32_t resamples, const RngPolicy &rng,
                                                   Execution exec) {
    const std::size_t n = feature.size();
    if (n == 0 || rho.size() != n)
        throw UsageError("feature and influence vectors must be nonempty and equally long");
    if (resamples == 0)
        throw UsageError("resamples must be >= 1");
    std::vector<std::size_t> ks;
    for (double f : f_grid)
        ks.push_back(top_count(f, n));

    // scores[b][fi] for r and p
    std::vector<double> r_scores(static_cast<std::size_t>(resamples) * ks.size());
    std::vector<double> p_scores(r_scores.size());

    auto run = [&](std::uint32_t b) {
        auto stream = rng.purpose_stream("bootstrap", b);
        std::vector<NodeId> nodes(n);
        std::vector<double> feat(n), infl(n);
        for (std::size_t i = 0; i < n; ++i) {
            nodes[i] = static_cast<NodeId>(stream.below(n));
            feat[i] = feature[nodes[i]];
            infl[i] = rho[nodes[i]];
        }
        const auto pred_order = descending_order(feat);
        // truth ties resolve by node id, then position
        std::vector<NodeId> truth_order(n);
        std::iota(truth_order.begin(), truth_order.end(), NodeId{0});
        std::sort(truth_order.begin(), truth_order.end(), [&](NodeId a, NodeId b) {
            if (infl[a] != infl[b])
                return infl[a] > infl[b];
            if (nodes[a] != nodes[b])
                return nodes[a] < nodes[b];
            return a < b;
        });

        std::vector<NodeId> truth_nodes, pred_nodes;
        for (std::size_t fi = 0; fi < ks.size(); ++fi) {
            const std::size_t k = ks[fi];
            const auto picked = take_top(pred_order, feat, k, stream);
            truth_nodes.clear();
            pred_nodes.clear();
            for (std::size_t i = 0; i < k; ++i)
                truth_nodes.push_back(nodes[truth_order[i]]);
            for (NodeId pos : picked)
                pred_nodes.push_back(nodes[pos]);
            const std::size_t slot = static_cast<std::size_t>(b) * ks.size() + fi;
            r_scores[slot] = recognition_rate(truth_nodes, pred_nodes);
            p_scores[slot] = precision_function(pred_nodes, truth_nodes, rho);
        }
    };

    const auto count = static_cast<std::int64_t>(resamples);
    if (exec == Execution::Serial) {
        for (std::int64_t b = 0; b < count; ++b)
            run(static_cast<std::uint32_t>(b));
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t b = 0; b < count; ++b)
            run(static_cast<std::uint32_t>(b));
    }

    std::vector<RankingResult> out;
    for (std::size_t fi = 0; fi < ks.size(); ++fi) {
        std::vector<double> r(resamples), p(resamples);
        for (std::uint32_t b = 0; b < resamples; ++b) {
            r[b] = r_scores[static_cast<std::size_t>(b) * ks.size() + fi];
            p[b] = p_scores[static_cast<std::size_t>(b) * ks.size() + fi];
        }
        RankingResult res;
        res.centrality = centrality;
        res.f = f_grid[fi];
        res.resamples = resamples;
        res.r_mean = std::accumulate(r.begin(), r.end(), 0.0) / resamples;
        res.p_mean = std::accumulate(p.begin(), p.end(), 0.0) / resamples;
        res.r_ci_low = percentile(r, 0.025);
        res.r_ci_high = percentile(r, 0.975);
        res.p_ci_low = percentile(p, 0.025);
        res.p_ci_high = percentile(p, 0.975);
        // a skewed sample can put its mean outside the percentile band
        res.r_ci_low = std::min(res.r_ci_low, res.r_mean);
        res.r_ci_high = std::max(res.r_ci_high, res.r_mean);
        res.p_ci_low = std::min(res.p_ci_low, res.p_mean);
        res.p_ci_high = std::max(res.p_ci_high, res.p_mean);
        out.push_back(res);
    }
    return out;
}

RankingResult bootstrap_rank_evaluate(std::span<const double> feature, std::span<const double> rho,
                                      double f, CentralityKind centrality,
                                      std::uint32_t resamples, const RngPolicy &rng,
                                      Execution exec) {
    const double grid[] = {f};
    return bootstrap_rank_evaluate(feature, rho, grid, centrality, resamples, rng, exec).front();
}

} // namespace spreaders
