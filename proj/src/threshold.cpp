#include <spreaders/errors.hpp>
#include <spreaders/sir.hpp>
#include <spreaders/text.hpp>
#include <spreaders/threshold.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace spreaders {

double variability_of(std::span<const double> values) {
    if (values.empty())
        return 0.0;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    var /= n;
    if (var <= 0.0 || mean == 0.0)
        return 0.0;
    return std::sqrt(var) / mean;
}

DeltaPoint variability(const DirectedGraph &g, double lambda, std::span<const NodeId> sample,
                       std::uint32_t runs_per_seed, const RngPolicy &rng, DeltaMode mode,
                       Execution exec) {
    if (sample.empty())
        throw UsageError("variability needs a nonempty seed sample");
    if (runs_per_seed == 0)
        throw UsageError("runs_per_seed must be >= 1");
    const SirParams params{lambda, 1.0};
    params.validate();

    const auto count = static_cast<std::int64_t>(sample.size());
    std::vector<std::uint32_t> sizes(sample.size() * runs_per_seed);
    auto run_seed = [&](SirWorkspace &ws, std::int64_t s) {
        const NodeId seed = sample[s];
        for (std::uint32_t r = 0; r < runs_per_seed; ++r) {
            auto stream = rng.replicate_stream(seed, r);
            sizes[s * runs_per_seed + r] = ws.simulate(g, params, seed, stream);
        }
    };
    if (exec == Execution::Serial) {
        SirWorkspace ws(g.num_nodes());
        for (std::int64_t s = 0; s < count; ++s)
            run_seed(ws, s);
    } else {
#pragma omp parallel
        {
            SirWorkspace ws(g.num_nodes());
#pragma omp for schedule(dynamic, 4)
            for (std::int64_t s = 0; s < count; ++s)
                run_seed(ws, s);
        }
    }

    DeltaPoint point;
    std::vector<double> seed_means(sample.size());
    for (std::size_t s = 0; s < sample.size(); ++s) {
        std::uint64_t total = 0;
        for (std::uint32_t r = 0; r < runs_per_seed; ++r)
            total += sizes[s * runs_per_seed + r];
        seed_means[s] = static_cast<double>(total) / runs_per_seed;
        point.max_seed_mean = std::max(point.max_seed_mean, seed_means[s]);
    }
    if (mode == DeltaMode::SeedMeans) {
        point.delta = variability_of(seed_means);
        return point;
    }
    // Pooled: exact integer moments.
    std::uint64_t sum = 0;
    unsigned __int128 sum_sq = 0;
    for (std::uint64_t v : sizes) {
        sum += v;
        sum_sq += v * v;
    }
    const auto m = static_cast<unsigned __int128>(sizes.size());
    const unsigned __int128 num = m * sum_sq - static_cast<unsigned __int128>(sum) * sum;
    if (num == 0)
        return point;
    // delta = sqrt(m*sum_sq - sum^2) / sum
    point.delta = std::sqrt(static_cast<double>(num)) / static_cast<double>(sum);
    return point;
}

std::vector<NodeId> sample_seed_nodes(std::size_t n, std::uint32_t sample_size,
                                      const RngPolicy &rng) {
    std::vector<NodeId> nodes(n);
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    const std::size_t k = std::min<std::size_t>(sample_size, n);
    if (k < n) {
        auto stream = rng.purpose_stream("threshold-sample");
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + stream.below(n - i);
            std::swap(nodes[i], nodes[j]);
        }
        nodes.resize(k);
        std::sort(nodes.begin(), nodes.end());
    }
    return nodes;
}

std::size_t peak_index(std::span<const double> deltas) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < deltas.size(); ++i) {
        if (deltas[i] > deltas[best])
            best = i;
    }
    return best;
}

ThresholdScan scan_with(std::span<const double> grid,
                        const std::function<DeltaPoint(double)> &evaluate) {
    if (grid.size() < 3)
        throw UsageError("threshold grid needs at least 3 points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || grid[i] <= 0.0)
            throw UsageError("threshold grid values must be finite and > 0");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw UsageError("threshold grid must be strictly ascending");
    }
    ThresholdScan out;
    out.lambdas.assign(grid.begin(), grid.end());
    for (double lambda : grid) {
        const auto point = evaluate(lambda);
        out.deltas.push_back(point.delta);
        out.max_seed_means.push_back(point.max_seed_mean);
    }
    out.lambda_c = out.lambdas[peak_index(out.deltas)];
    return out;
}

ThresholdScan scan(const DirectedGraph &g, std::span<const double> grid, const ScanOptions &opts,
                   const RngPolicy &rng) {
    const auto sample = sample_seed_nodes(g.num_nodes(), opts.sample_size, rng);
    auto out = scan_with(grid, [&](double lambda) {
        return variability(g, lambda, sample, opts.runs_per_seed, rng, opts.mode, opts.exec);
    });
    out.sample_nodes = sample;
    out.num_nodes = g.num_nodes();
    flag_spread_sanity(out);
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || lo <= 0.0 || hi <= lo)
        throw UsageError("log grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> grid(points);
    const double step = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo * std::exp(step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || hi <= lo)
        throw UsageError("linear grid needs lo < hi and >= 2 points");
    std::vector<double> grid(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

ThresholdScan two_stage_scan(const DirectedGraph &g, const ScanOptions &opts,
                             const RngPolicy &rng, const TwoStageGrid &grid) {
    const auto sample = sample_seed_nodes(g.num_nodes(), opts.sample_size, rng);
    auto evaluate = [&](double lambda) {
        return variability(g, lambda, sample, opts.runs_per_seed, rng, opts.mode, opts.exec);
    };
    const auto coarse = log_grid(grid.lo, grid.hi, grid.coarse_points);
    const auto first = scan_with(coarse, evaluate);
    const std::size_t k = peak_index(first.deltas);
    const double lo = coarse[k == 0 ? 0 : k - 1];
    const double hi = coarse[std::min(k + 1, coarse.size() - 1)];

    std::vector<std::pair<double, DeltaPoint>> points;
    for (std::size_t i = 0; i < coarse.size(); ++i)
        points.push_back({coarse[i], {first.deltas[i], first.max_seed_means[i]}});
    for (double lambda : linear_grid(lo, hi, grid.fine_points)) {
        const bool known = std::any_of(points.begin(), points.end(), [&](const auto &p) {
            return std::abs(p.first - lambda) <= 1e-12 * lambda;
        });
        if (!known)
            points.push_back({lambda, evaluate(lambda)});
    }
    std::sort(points.begin(), points.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });

    ThresholdScan out;
    for (const auto &[lambda, point] : points) {
        out.lambdas.push_back(lambda);
        out.deltas.push_back(point.delta);
        out.max_seed_means.push_back(point.max_seed_mean);
    }
    out.lambda_c = out.lambdas[peak_index(out.deltas)];
    out.sample_nodes = sample;
    out.num_nodes = g.num_nodes();
    flag_spread_sanity(out);
    return out;
}

void flag_spread_sanity(ThresholdScan &scan) {
    if (scan.num_nodes == 0 || scan.lambdas.empty())
        return;
    const std::size_t k = peak_index(scan.deltas);
    const double fraction = scan.max_seed_means[k] / static_cast<double>(scan.num_nodes);
    if (fraction < 0.007 || fraction > 0.06) {
        scan.warnings.push_back("largest per-seed mean spread at lambda_c is " +
                                format_double(fraction * 100.0) +
                                "% of the network, outside the expected 0.7%..6% band");
    }
}

void write_scan_csv(std::ostream &out, const ThresholdScan &scan) {
    out << "lambda,delta\n";
    for (std::size_t i = 0; i < scan.lambdas.size(); ++i)
        out << format_double(scan.lambdas[i]) << ',' << format_double(scan.deltas[i]) << '\n';
}

void write_scan_json(std::ostream &out, const ThresholdScan &scan) {
    nlohmann::ordered_json j;
    j["lambda_c"] = scan.lambda_c;
    j["grid"] = scan.lambdas;
    j["deltas"] = scan.deltas;
    j["sample_size"] = scan.sample_nodes.size();
    j["warnings"] = scan.warnings;
    out << j.dump(2) << '\n';
}

} // namespace spreaders
