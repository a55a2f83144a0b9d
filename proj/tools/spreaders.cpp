// Command-line front end: one subcommand per stage plus the full pipeline.
// stdout carries only the paths of written files; diagnostics go to stderr.

#include <spreaders/config.hpp>
#include <spreaders/errors.hpp>
#include <spreaders/pipeline.hpp>
#include <spreaders/text.hpp>

#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace spreaders;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kConvergence = 3 };

struct Command {
    CLI::App *app = nullptr;
    std::string config_path;
    std::vector<std::string> reports;
    std::map<const OptionSpec *, std::string> values;
    std::map<const OptionSpec *, CLI::Option *> options;
};

void register_options(Command &cmd, std::initializer_list<std::string_view> sections) {
    const Settings defaults;
    cmd.app->add_option("--config", cmd.config_path, "INI config file; flags override it");
    for (const auto &opt : option_table()) {
        if (std::find(sections.begin(), sections.end(), opt.section) == sections.end())
            continue;
        const std::string name = "--" + std::string(opt.flag);
        const std::string help = std::string(opt.help) + " [" + std::string(opt.section) + "] " +
                                 std::string(opt.key);
        CLI::Option *o = nullptr;
        if (opt.is_switch) {
            o = cmd.app->add_flag(name, help);
        } else {
            o = cmd.app->add_option(name, cmd.values[&opt], help);
            o->default_str(opt.show(defaults));
        }
        cmd.options[&opt] = o;
    }
}

Settings resolve(Command &cmd) {
    Settings s;
    if (!cmd.config_path.empty())
        apply_config_file(s, cmd.config_path);
    for (const auto &[opt, o] : cmd.options) {
        if (o->count() == 0)
            continue;
        opt->apply(s, opt->is_switch ? "true" : cmd.values[opt]);
    }
    if (s.run.network.empty() && !s.run.input.empty())
        s.run.network = s.run.input.stem().string();
    if (s.threads > 0)
        omp_set_num_threads(s.threads);
    s.run.validate();
    return s;
}

void require_input(const Settings &s) {
    if (s.run.input.empty())
        throw UsageError("--input is required");
}

// Opens <output_dir>/<name> for writing and reports the path on stdout once closed.
class OutputFile {
public:
    OutputFile(const Settings &s, const std::string &name) : path_(s.output_dir / name) {
        fs::create_directories(s.output_dir);
        out_.open(path_);
        if (!out_)
            throw DataError("cannot write " + path_.string());
    }
    ~OutputFile() {
        out_.close();
        std::cout << path_.string() << '\n';
    }
    std::ostream &stream() { return out_; }

private:
    fs::path path_;
    std::ofstream out_;
};

FeatureMatrix features_for(const Settings &s, const DirectedGraph &g) {
    if (s.features_csv.empty())
        return compute_features(s.run, g);
    std::ifstream in(s.features_csv);
    if (!in)
        throw DataError("cannot open " + s.features_csv.string());
    return read_features_csv(in, g);
}

std::vector<double> influence_for(const Settings &s, const DirectedGraph &g, double *lambda) {
    if (s.influence_csv.empty()) {
        *lambda = resolve_lambda(s.run, g);
        return influence_means(compute_influence(s.run, g, *lambda));
    }
    std::ifstream in(s.influence_csv);
    if (!in)
        throw DataError("cannot open " + s.influence_csv.string());
    *lambda = s.run.lambda_policy == LambdaPolicy::Fixed ? s.run.lambda : 0.0;
    return influence_means(read_influence_csv(in, g));
}

EvaluationReport header_report(const Settings &s, const DirectedGraph &g) {
    EvaluationReport r;
    r.network = s.run.network;
    r.config_hash = s.run.hash();
    r.master_seed = s.run.master_seed;
    r.version = std::string(kVersion);
    r.nodes = g.num_nodes();
    r.edges = g.num_edges();
    return r;
}

void cmd_ingest(const Settings &s) {
    require_input(s);
    const auto g = load_flow_graph(s.run);
    std::cerr << "largest SCC: " << g.num_nodes() << " nodes, " << g.num_edges() << " edges\n";
    OutputFile out(s, s.run.network + ".scc.txt");
    write_edge_list(out.stream(), g);
}

void cmd_centrality(const Settings &s) {
    require_input(s);
    const auto g = load_flow_graph(s.run);
    const auto fm = compute_features(s.run, g);
    OutputFile out(s, s.run.network + ".features.csv");
    write_features_csv(out.stream(), g, fm);
}

void cmd_simulate(const Settings &s) {
    require_input(s);
    const auto g = load_flow_graph(s.run);
    const double lambda = resolve_lambda(s.run, g);
    std::cerr << "lambda = " << format_double(lambda) << '\n';
    const auto estimates = compute_influence(s.run, g, lambda);
    OutputFile out(s, s.run.network + ".influence.csv");
    write_influence_csv(out.stream(), g, estimates);
}

void cmd_threshold(const Settings &s) {
    require_input(s);
    const auto g = load_flow_graph(s.run);
    const auto result = run_threshold(s.run, g);
    for (const auto &w : result.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cerr << "lambda_c = " << format_double(result.lambda_c) << '\n';
    {
        OutputFile out(s, s.run.network + ".threshold.csv");
        out.stream() << "# config_hash=" << format_hex(s.run.hash()) << '\n';
        write_scan_csv(out.stream(), result);
    }
    OutputFile out(s, s.run.network + ".threshold.json");
    write_scan_json(out.stream(), result);
}

void cmd_rank(const Settings &s) {
    require_input(s);
    const auto g = load_flow_graph(s.run);
    const auto fm = features_for(s, g);
    auto report = header_report(s, g);
    const auto rho = influence_for(s, g, &report.lambda);
    const RngPolicy rng{s.run.master_seed};
    for (auto kind : kAllCentralities) {
        auto rows = bootstrap_rank_evaluate(fm.column(kind), rho, s.run.f_grid, kind,
                                            s.run.resamples, rng);
        report.rank_rows.insert(report.rank_rows.end(), rows.begin(), rows.end());
    }
    OutputFile out(s, s.run.network + ".rank.csv");
    write_rank_csv(out.stream(), report);
}

void cmd_classify(const Settings &s) {
    require_input(s);
    const auto g = load_flow_graph(s.run);
    const auto fm = features_for(s, g);
    auto report = header_report(s, g);
    const auto rho = influence_for(s, g, &report.lambda);
    const RngPolicy rng{s.run.master_seed};
    for (double f : s.run.f_grid) {
        for (const auto &subset : s.run.subsets) {
            auto row = evaluate_classifier(fm, rho, f, subset, s.run.classifier, rng);
            for (const auto &w : row.warnings)
                std::cerr << "warning: " << subset_name(subset) << " f=" << format_double(f)
                          << ": " << w << '\n';
            report.svm_rows.push_back(std::move(row));
        }
    }
    OutputFile out(s, s.run.network + ".svm.csv");
    write_svm_csv(out.stream(), report);
}

void cmd_pipeline(const Settings &s) {
    require_input(s);
    const auto report = run_pipeline(s.run);
    for (const auto &w : report.warnings)
        std::cerr << "warning: " << w << '\n';
    {
        OutputFile out(s, s.run.network + ".report.json");
        write_report_json(out.stream(), report);
    }
    {
        OutputFile out(s, s.run.network + ".rank.csv");
        write_rank_csv(out.stream(), report);
    }
    OutputFile out(s, s.run.network + ".svm.csv");
    write_svm_csv(out.stream(), report);
}

void cmd_summarize(const Settings &s, const std::vector<std::string> &paths) {
    if (paths.empty())
        throw UsageError("summarize needs at least one report");
    std::vector<EvaluationReport> reports;
    std::string hashes;
    for (const auto &p : paths) {
        std::ifstream in(p);
        if (!in)
            throw DataError("cannot open " + p);
        reports.push_back(read_report_json(in));
        hashes += format_hex(reports.back().config_hash);
    }
    const auto hash = fnv1a(hashes);
    const auto summary = summarize(reports);
    {
        OutputFile out(s, "summary.csv");
        write_summary_csv(out.stream(), summary, hash);
    }
    {
        OutputFile out(s, "matrix_recall.csv");
        write_matrix_csv(out.stream(), summary, "recall", hash);
    }
    OutputFile out(s, "matrix_pfun.csv");
    write_matrix_csv(out.stream(), summary, "pfun", hash);
}

int run(int argc, char **argv) {
    CLI::App app{"Superspreader prediction from network centralities"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::map<std::string, Command> cmds;
    auto add = [&](const std::string &name, const std::string &help,
                   std::initializer_list<std::string_view> sections) -> Command & {
        auto &cmd = cmds[name];
        cmd.app = app.add_subcommand(name, help);
        register_options(cmd, sections);
        return cmd;
    };
    add("ingest", "parse an edge list and write its largest SCC", {"input", "run"});
    add("centrality", "compute the seven centralities", {"input", "centrality", "run"});
    add("simulate", "SIR influence of every node", {"input", "sir", "threshold", "run"});
    add("threshold", "scan lambda for the variability peak", {"input", "threshold", "run"});
    add("rank", "bootstrap evaluation of single-centrality rankings",
        {"input", "sir", "threshold", "rank", "centrality", "run"});
    add("classify", "SVM prediction of the top-f spreaders",
        {"input", "sir", "threshold", "rank", "classify", "centrality", "run"});
    add("pipeline", "every stage for one network",
        {"input", "sir", "threshold", "rank", "classify", "centrality", "run"});
    auto &summ = add("summarize", "aggregate report JSON files", {"run"});
    summ.app->add_option("reports", summ.reports, "report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    for (auto &[name, cmd] : cmds) {
        if (!cmd.app->parsed())
            continue;
        const Settings s = resolve(cmd);
        if (name == "ingest")
            cmd_ingest(s);
        else if (name == "centrality")
            cmd_centrality(s);
        else if (name == "simulate")
            cmd_simulate(s);
        else if (name == "threshold")
            cmd_threshold(s);
        else if (name == "rank")
            cmd_rank(s);
        else if (name == "classify")
            cmd_classify(s);
        else if (name == "pipeline")
            cmd_pipeline(s);
        else
            cmd_summarize(s, cmd.reports);
    }
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConvergenceError &e) {
        std::cerr << "no convergence: " << e.what() << " (residual " << e.residual() << ")\n";
        return kConvergence;
    } catch (const DataError &e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const fs::filesystem_error &e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
}
