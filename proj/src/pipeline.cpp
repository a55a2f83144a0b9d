#include <spreaders/errors.hpp>
#include <spreaders/pipeline.hpp>
#include <spreaders/text.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace spreaders {

namespace {

using json = nlohmann::ordered_json;

// Runs `body`, prefixing any library error with the stage name.
template <typename F>
auto in_stage(std::string_view stage, F &&body) -> decltype(body()) {
    const std::string tag = "[" + std::string(stage) + "] ";
    try {
        return body();
    } catch (const ConvergenceError &e) {
        throw ConvergenceError(tag + e.what(), e.residual());
    } catch (const DataError &e) {
        throw DataError(tag + e.what());
    } catch (const UsageError &e) {
        throw UsageError(tag + e.what());
    }
}

std::string join(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::string_view policy_name(LambdaPolicy p) {
    switch (p) {
    case LambdaPolicy::Scan:
        return "scan";
    case LambdaPolicy::Fixed:
        return "fixed";
    case LambdaPolicy::Multiplier:
        return "multiplier";
    }
    return "scan";
}

} // namespace

std::vector<std::vector<CentralityKind>> default_subsets() {
    using K = CentralityKind;
    std::vector<std::vector<CentralityKind>> out;
    for (std::size_t a = 0; a < kNumCentralities; ++a) {
        for (std::size_t b = a + 1; b < kNumCentralities; ++b) {
            const K x = kAllCentralities[a], y = kAllCentralities[b];
            if (x == K::Degree && y == K::Neighbourhood)
                continue;
            if (x == K::Neighbourhood && y == K::TwoHopNeighbourhood)
                continue;
            out.push_back({x, y});
        }
    }
    out.emplace_back(kAllCentralities.begin(), kAllCentralities.end());
    return out;
}

std::string subset_name(std::span<const CentralityKind> subset) {
    if (subset.size() == kNumCentralities &&
        std::equal(subset.begin(), subset.end(), kAllCentralities.begin()))
        return "all";
    std::string out;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (i)
            out += '+';
        out += column_name(subset[i]);
    }
    return out;
}

std::vector<CentralityKind> parse_subset(std::string_view name) {
    name = trim(name);
    if (name == "all")
        return {kAllCentralities.begin(), kAllCentralities.end()};
    std::vector<CentralityKind> out;
    for (auto part : split(name, '+')) {
        const auto kind = centrality_from_name(trim(part));
        if (!kind)
            throw UsageError("unknown centrality '" + std::string(part) + "'");
        if (std::find(out.begin(), out.end(), *kind) != out.end())
            throw UsageError("centrality listed twice in subset '" + std::string(name) + "'");
        out.push_back(*kind);
    }
    if (out.empty())
        throw UsageError("empty feature subset");
    return out;
}

void RunConfig::validate() const {
    if (runs == 0 || resamples == 0 || classifier.draws == 0)
        throw UsageError("runs, resamples and draws must be >= 1");
    if (scan.sample_size == 0 || scan.runs_per_seed == 0)
        throw UsageError("threshold sample size and runs per seed must be >= 1");
    if (!(multiplier > 0.0))
        throw UsageError("lambda multiplier must be > 0");
    if (lambda_policy == LambdaPolicy::Fixed && !(lambda > 0.0 && std::isfinite(lambda)))
        throw UsageError("a fixed lambda must be finite and > 0");
    if (f_grid.empty())
        throw UsageError("f grid is empty");
    for (double f : f_grid) {
        if (!(f > 0.0 && f <= 1.0))
            throw UsageError("every f must lie in (0, 1]");
    }
    if (!scan_grid.empty()) {
        if (scan_grid.size() < 3)
            throw UsageError("threshold grid needs at least 3 points");
        for (std::size_t i = 0; i < scan_grid.size(); ++i) {
            if (!(scan_grid[i] > 0.0) || (i > 0 && scan_grid[i] <= scan_grid[i - 1]))
                throw UsageError("threshold grid must be positive and strictly ascending");
        }
    }
    if (!(classifier.train_fraction > 0.0 && classifier.train_fraction < 1.0))
        throw UsageError("training fraction must lie in (0, 1)");
    if (classifier.cv.folds < 2)
        throw UsageError("cross-validation needs at least 2 folds");
    if (classifier.cv.c_grid.empty())
        throw UsageError("C grid is empty");
    for (double c : classifier.cv.c_grid) {
        if (!(c > 0.0))
            throw UsageError("every C must be > 0");
    }
    if (!(classifier.cv.tol > 0.0))
        throw UsageError("SVM tolerance must be > 0");
    if (!(pagerank.damping > 0.0 && pagerank.damping < 1.0))
        throw UsageError("PageRank damping must lie in (0, 1)");
}

std::string RunConfig::canonical() const {
    std::ostringstream out;
    out << "network=" << network << '\n'
        << "direction=" << to_string(direction) << '\n'
        << "lambda_policy=" << policy_name(lambda_policy) << '\n'
        << "lambda=" << format_double(lambda) << '\n'
        << "multiplier=" << format_double(multiplier) << '\n'
        << "scan_grid=" << join(scan_grid) << '\n'
        << "two_stage=" << format_double(two_stage.lo) << ',' << format_double(two_stage.hi) << ','
        << two_stage.coarse_points << ',' << two_stage.fine_points << '\n'
        << "sample_size=" << scan.sample_size << '\n'
        << "runs_per_seed=" << scan.runs_per_seed << '\n'
        << "delta_mode=" << (scan.mode == DeltaMode::Pooled ? "pooled" : "seed-means") << '\n'
        << "runs=" << runs << '\n'
        << "f_grid=" << join(f_grid) << '\n'
        << "resamples=" << resamples << '\n'
        << "rank_singles=" << rank_singles << '\n'
        << "draws=" << classifier.draws << '\n'
        << "train_fraction=" << format_double(classifier.train_fraction) << '\n'
        << "c_grid=" << join(classifier.cv.c_grid) << '\n'
        << "folds=" << classifier.cv.folds << '\n'
        << "tol=" << format_double(classifier.cv.tol) << '\n'
        << "coef0=" << format_double(classifier.coef0) << '\n'
        << "truth=" << (classifier.truth == TestTruth::GlobalLabels ? "global" : "test-top") << '\n'
        << "subsets=";
    for (std::size_t i = 0; i < subsets.size(); ++i)
        out << (i ? ";" : "") << subset_name(subsets[i]);
    out << '\n'
        << "damping=" << format_double(pagerank.damping) << '\n'
        << "pagerank_tol=" << format_double(pagerank.tol) << '\n'
        << "eigenvector_tol=" << format_double(eigenvector.tol) << '\n'
        << "eigenvector_shift=" << format_double(eigenvector.shift) << '\n'
        << "seed=" << master_seed << '\n';
    return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

FeatureMatrix compute_features(const RunConfig &config, const DirectedGraph &g) {
    return in_stage("centrality", [&] {
        const auto compute = [&] {
            FeatureMatrix fm(g.num_nodes());
            auto fill = [&](CentralityKind kind, const auto &values) {
                auto &col = fm.column(kind);
                for (std::size_t i = 0; i < values.size(); ++i)
                    col[i] = static_cast<double>(values[i]);
            };
            fill(CentralityKind::Degree, degree(g));
            fill(CentralityKind::Neighbourhood, neighbourhood(g));
            fill(CentralityKind::TwoHopNeighbourhood, two_hop_neighbourhood(g));
            fill(CentralityKind::CoreNumber, core_number(g));
            fill(CentralityKind::Closeness, closeness(g));
            fill(CentralityKind::PageRank, pagerank(g, config.pagerank));
            fill(CentralityKind::Eigenvector, eigenvector(g, config.eigenvector));
            return fm;
        };
        if (config.cache_dir.empty())
            return compute();
        const std::string settings = format_double(config.pagerank.damping) + ',' +
                                     format_double(config.pagerank.tol) + ',' +
                                     format_double(config.eigenvector.tol) + ',' +
                                     format_double(config.eigenvector.shift);
        const std::uint64_t key = hash_combine(g.content_hash(), fnv1a(settings));
        const auto path = config.cache_dir / ("features-" + format_hex(key) + ".csv");
        if (std::ifstream in(path); in) {
            try {
                return read_features_csv(in, g);
            } catch (const DataError &) {
                // fall through and rebuild a damaged entry
            }
        }
        auto fm = compute();
        std::filesystem::create_directories(config.cache_dir);
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp);
            write_features_csv(out, g, fm);
        }
        std::filesystem::rename(tmp, path);
        return fm;
    });
}

std::vector<SpreadEstimate> compute_influence(const RunConfig &config, const DirectedGraph &g,
                                              double lambda) {
    return in_stage("simulate", [&] {
        const RngPolicy rng{config.master_seed};
        if (config.cache_dir.empty())
            return influence_all(g, {lambda, 1.0}, config.runs, rng);
        const InfluenceCacheKey key{g.content_hash(), lambda, config.runs, config.master_seed};
        if (auto cached = load_influence_cache(config.cache_dir, key);
            cached && cached->size() == g.num_nodes())
            return *cached;
        auto estimates = influence_all(g, {lambda, 1.0}, config.runs, rng);
        save_influence_cache(config.cache_dir, key, estimates);
        return estimates;
    });
}

ThresholdScan run_threshold(const RunConfig &config, const DirectedGraph &g) {
    return in_stage("threshold", [&] {
        const RngPolicy rng{config.master_seed};
        if (config.scan_grid.empty())
            return two_stage_scan(g, config.scan, rng, config.two_stage);
        return scan(g, config.scan_grid, config.scan, rng);
    });
}

double resolve_lambda(const RunConfig &config, const DirectedGraph &g,
                      std::optional<ThresholdScan> *scan_out) {
    if (config.lambda_policy == LambdaPolicy::Fixed)
        return config.lambda;
    auto result = run_threshold(config, g);
    const double lambda = config.lambda_policy == LambdaPolicy::Scan
                              ? result.lambda_c
                              : config.multiplier * result.lambda_c;
    if (scan_out)
        *scan_out = std::move(result);
    return lambda;
}

DirectedGraph flow_graph(const DirectedGraph &graph) {
    return in_stage("scc", [&] {
        auto scc = largest_scc(graph);
        if (scc.num_nodes() < 2)
            throw DataError("largest strongly connected component has fewer than 2 nodes");
        return scc;
    });
}

DirectedGraph load_flow_graph(const RunConfig &config) {
    const auto raw =
        in_stage("ingest", [&] { return read_edge_list(config.input, config.direction); });
    return flow_graph(raw);
}

EvaluationReport run_pipeline(const RunConfig &config, PipelineArtifacts *artifacts) {
    config.validate();
    const auto raw =
        in_stage("ingest", [&] { return read_edge_list(config.input, config.direction); });
    return run_pipeline(config, raw, artifacts);
}

EvaluationReport run_pipeline(const RunConfig &config, const DirectedGraph &graph,
                              PipelineArtifacts *artifacts) {
    config.validate();
    EvaluationReport report;
    report.network = config.network;
    report.config_hash = config.hash();
    report.master_seed = config.master_seed;
    report.version = std::string(kVersion);

    const auto g = flow_graph(graph);
    report.nodes = g.num_nodes();
    report.edges = g.num_edges();

    const auto features = compute_features(config, g);

    const RngPolicy rng{config.master_seed};
    report.lambda = resolve_lambda(config, g, &report.scan);
    if (report.scan) {
        report.lambda_c = report.scan->lambda_c;
        for (const auto &w : report.scan->warnings)
            report.warnings.push_back("threshold: " + w);
    }

    const auto influence = compute_influence(config, g, report.lambda);
    const auto rho = influence_means(influence);

    if (config.rank_singles) {
        in_stage("rank", [&] {
            for (auto kind : kAllCentralities) {
                auto rows = bootstrap_rank_evaluate(features.column(kind), rho, config.f_grid, kind,
                                                    config.resamples, rng);
                report.rank_rows.insert(report.rank_rows.end(), rows.begin(), rows.end());
            }
        });
    }
    in_stage("classify", [&] {
        for (double f : config.f_grid) {
            for (const auto &subset : config.subsets) {
                auto row = evaluate_classifier(features, rho, f, subset, config.classifier, rng);
                for (const auto &w : row.warnings) {
                    const auto msg = "classify " + subset_name(subset) + " f=" + format_double(f) + ": " + w;
                    if (std::find(report.warnings.begin(), report.warnings.end(), msg) ==
                        report.warnings.end())
                        report.warnings.push_back(msg);
                }
                report.svm_rows.push_back(std::move(row));
            }
        }
    });

    if (artifacts) {
        artifacts->graph = g;
        artifacts->features = features;
        artifacts->influence = influence;
    }
    return report;
}

void write_report_json(std::ostream &out, const EvaluationReport &report) {
    json j;
    j["network"] = report.network;
    j["provenance"] = {{"config_hash", format_hex(report.config_hash)},
                       {"master_seed", report.master_seed},
                       {"version", report.version}};
    j["nodes"] = report.nodes;
    j["edges"] = report.edges;
    j["lambda_c"] = report.lambda_c ? json(*report.lambda_c) : json(nullptr);
    j["lambda"] = report.lambda;
    if (report.scan) {
        j["scan"] = {{"lambda_c", report.scan->lambda_c},
                     {"grid", report.scan->lambdas},
                     {"deltas", report.scan->deltas},
                     {"max_seed_means", report.scan->max_seed_means},
                     {"sample_size", report.scan->sample_nodes.size()},
                     {"sample_nodes", report.scan->sample_nodes},
                     {"warnings", report.scan->warnings}};
    }
    json rank = json::array();
    for (const auto &r : report.rank_rows) {
        rank.push_back({{"centrality", column_name(r.centrality)},
                        {"f", r.f},
                        {"r", r.r_mean},
                        {"r_lo", r.r_ci_low},
                        {"r_hi", r.r_ci_high},
                        {"p", r.p_mean},
                        {"p_lo", r.p_ci_low},
                        {"p_hi", r.p_ci_high},
                        {"resamples", r.resamples}});
    }
    j["rank"] = rank;
    json svm = json::array();
    for (const auto &r : report.svm_rows) {
        json baseline = json::object();
        for (std::size_t c = 0; c < r.features.size(); ++c)
            baseline[std::string(column_name(r.features[c]))] = r.ranker_recall[c];
        svm.push_back({{"features", subset_name(r.features)},
                       {"f", r.f},
                       {"f1", r.f1_mean},
                       {"f1_sd", r.f1_sd},
                       {"recall", r.recall_mean},
                       {"precision", r.precision_mean},
                       {"pfun", r.pfun_mean},
                       {"draws", r.draws},
                       {"ranker_recall", baseline}});
    }
    j["svm"] = svm;
    j["warnings"] = report.warnings;
    out << j.dump(2) << '\n';
}

EvaluationReport read_report_json(std::istream &in) {
    json j;
    try {
        j = json::parse(in);
        EvaluationReport report;
        report.network = j.at("network").get<std::string>();
        const auto &prov = j.at("provenance");
        report.config_hash = std::stoull(prov.at("config_hash").get<std::string>(), nullptr, 16);
        report.master_seed = prov.at("master_seed").get<std::uint64_t>();
        report.version = prov.at("version").get<std::string>();
        report.nodes = j.at("nodes").get<std::size_t>();
        report.edges = j.at("edges").get<std::size_t>();
        if (!j.at("lambda_c").is_null())
            report.lambda_c = j.at("lambda_c").get<double>();
        report.lambda = j.at("lambda").get<double>();
        if (j.contains("scan")) {
            ThresholdScan scan;
            const auto &s = j.at("scan");
            scan.lambda_c = s.at("lambda_c").get<double>();
            scan.lambdas = s.at("grid").get<std::vector<double>>();
            scan.deltas = s.at("deltas").get<std::vector<double>>();
            scan.max_seed_means = s.at("max_seed_means").get<std::vector<double>>();
            scan.sample_nodes = s.at("sample_nodes").get<std::vector<NodeId>>();
            scan.warnings = s.at("warnings").get<std::vector<std::string>>();
            scan.num_nodes = report.nodes;
            report.scan = std::move(scan);
        }
        for (const auto &r : j.at("rank")) {
            RankingResult row;
            const auto kind = centrality_from_name(r.at("centrality").get<std::string>());
            if (!kind)
                throw DataError("report has an unknown centrality");
            row.centrality = *kind;
            row.f = r.at("f").get<double>();
            row.r_mean = r.at("r").get<double>();
            row.r_ci_low = r.at("r_lo").get<double>();
            row.r_ci_high = r.at("r_hi").get<double>();
            row.p_mean = r.at("p").get<double>();
            row.p_ci_low = r.at("p_lo").get<double>();
            row.p_ci_high = r.at("p_hi").get<double>();
            row.resamples = r.at("resamples").get<std::uint32_t>();
            report.rank_rows.push_back(row);
        }
        for (const auto &r : j.at("svm")) {
            ClassifierResult row;
            row.features = parse_subset(r.at("features").get<std::string>());
            row.f = r.at("f").get<double>();
            row.f1_mean = r.at("f1").get<double>();
            row.f1_sd = r.at("f1_sd").get<double>();
            row.recall_mean = r.at("recall").get<double>();
            row.precision_mean = r.at("precision").get<double>();
            row.pfun_mean = r.at("pfun").get<double>();
            row.draws = r.at("draws").get<std::uint32_t>();
            for (auto kind : row.features)
                row.ranker_recall.push_back(
                    r.at("ranker_recall").at(std::string(column_name(kind))).get<double>());
            report.svm_rows.push_back(std::move(row));
        }
        report.warnings = j.at("warnings").get<std::vector<std::string>>();
        return report;
    } catch (const json::exception &e) {
        throw DataError(std::string("malformed report JSON: ") + e.what());
    } catch (const UsageError &e) {
        throw DataError(std::string("malformed report JSON: ") + e.what());
    }
}

void write_rank_csv(std::ostream &out, const EvaluationReport &report) {
    out << "# config_hash=" << format_hex(report.config_hash) << '\n';
    out << "network,method,centrality,f,lambda,r,r_lo,r_hi,p,p_lo,p_hi\n";
    for (const auto &r : report.rank_rows) {
        out << report.network << ",rank," << column_name(r.centrality) << ','
            << format_double(r.f) << ',' << format_double(report.lambda) << ','
            << format_double(r.r_mean) << ',' << format_double(r.r_ci_low) << ','
            << format_double(r.r_ci_high) << ',' << format_double(r.p_mean) << ','
            << format_double(r.p_ci_low) << ',' << format_double(r.p_ci_high) << '\n';
    }
}

void write_svm_csv(std::ostream &out, const EvaluationReport &report) {
    out << "# config_hash=" << format_hex(report.config_hash) << '\n';
    out << "network,method,features,f,lambda,f1,f1_sd,recall,precision,pfun\n";
    for (const auto &r : report.svm_rows) {
        out << report.network << ",svm," << subset_name(r.features) << ',' << format_double(r.f)
            << ',' << format_double(report.lambda) << ',' << format_double(r.f1_mean) << ','
            << format_double(r.f1_sd) << ',' << format_double(r.recall_mean) << ','
            << format_double(r.precision_mean) << ',' << format_double(r.pfun_mean) << '\n';
    }
}

namespace {

struct Accumulator {
    std::vector<double> values;

    void add(double v) { values.push_back(v); }
    double mean() const {
        double s = 0.0;
        for (double v : values)
            s += v;
        return values.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : s / static_cast<double>(values.size());
    }
    double sd() const {
        if (values.size() < 2)
            return 0.0;
        const double m = mean();
        double ss = 0.0;
        for (double v : values)
            ss += (v - m) * (v - m);
        return std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
};

} // namespace

Summary summarize(std::span<const EvaluationReport> reports) {
    if (reports.empty())
        throw UsageError("summarize needs at least one report");
    // (method, features, metric) -> values, in first-seen order
    std::vector<std::tuple<std::string, std::string, std::string>> order;
    std::map<std::tuple<std::string, std::string, std::string>, Accumulator> acc;
    auto add = [&](std::string method, std::string features, std::string metric, double v) {
        auto key = std::make_tuple(std::move(method), std::move(features), std::move(metric));
        auto [it, inserted] = acc.try_emplace(key);
        if (inserted)
            order.push_back(key);
        it->second.add(v);
    };
    std::array<std::array<Accumulator, kNumCentralities>, kNumCentralities> recall, pfun;
    for (const auto &report : reports) {
        for (const auto &r : report.rank_rows) {
            const std::string name(column_name(r.centrality));
            add("rank", name, "r", r.r_mean);
            add("rank", name, "p", r.p_mean);
            const auto c = static_cast<std::size_t>(r.centrality);
            recall[c][c].add(r.r_mean);
            pfun[c][c].add(r.p_mean);
        }
        for (const auto &r : report.svm_rows) {
            const auto name = subset_name(r.features);
            add("svm", name, "f1", r.f1_mean);
            add("svm", name, "recall", r.recall_mean);
            add("svm", name, "precision", r.precision_mean);
            add("svm", name, "pfun", r.pfun_mean);
            if (r.features.size() == 2) {
                const auto a = static_cast<std::size_t>(r.features[0]);
                const auto b = static_cast<std::size_t>(r.features[1]);
                recall[a][b].add(r.f1_mean);
                recall[b][a].add(r.f1_mean);
                pfun[a][b].add(r.pfun_mean);
                pfun[b][a].add(r.pfun_mean);
            }
        }
    }
    Summary summary;
    for (const auto &key : order) {
        const auto &a = acc.at(key);
        summary.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), a.mean(),
                                a.sd(), a.values.size()});
    }
    for (std::size_t a = 0; a < kNumCentralities; ++a) {
        for (std::size_t b = 0; b < kNumCentralities; ++b) {
            summary.recall_matrix[a][b] = recall[a][b].mean();
            summary.pfun_matrix[a][b] = pfun[a][b].mean();
        }
    }
    return summary;
}

void write_summary_csv(std::ostream &out, const Summary &summary, std::uint64_t config_hash) {
    out << "# config_hash=" << format_hex(config_hash) << '\n';
    out << "method,features,metric,mean,sd,count\n";
    for (const auto &r : summary.rows) {
        out << r.method << ',' << r.features << ',' << r.metric << ',' << format_double(r.mean)
            << ',' << format_double(r.sd) << ',' << r.count << '\n';
    }
}

void write_matrix_csv(std::ostream &out, const Summary &summary, std::string_view which,
                      std::uint64_t config_hash) {
    const auto &m = which == "pfun" ? summary.pfun_matrix : summary.recall_matrix;
    out << "# config_hash=" << format_hex(config_hash) << '\n';
    out << "centrality";
    for (auto kind : kAllCentralities)
        out << ',' << column_name(kind);
    out << '\n';
    for (std::size_t a = 0; a < kNumCentralities; ++a) {
        out << column_name(kAllCentralities[a]);
        for (std::size_t b = 0; b < kNumCentralities; ++b) {
            out << ',';
            if (!std::isnan(m[a][b]))
                out << format_double(m[a][b]);
        }
        out << '\n';
    }
}

} // namespace spreaders
