#include <spreaders/config.hpp>
#include <spreaders/errors.hpp>
#include <spreaders/text.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <limits>
#include <ostream>

namespace spreaders {

namespace {

std::string in_quotes(std::string_view s) { return "'" + std::string(s) + "'"; }

template <typename T>
T parse_count(std::string_view text, std::string_view what) {
    long long v = 0;
    if (!parse_number(text, v) || v < 0 ||
        static_cast<unsigned long long>(v) > std::numeric_limits<T>::max())
        throw UsageError(std::string(what) + ": expected a non-negative integer, got " +
                         in_quotes(text));
    return static_cast<T>(v);
}

double parse_real(std::string_view text, std::string_view what) {
    double v = 0.0;
    if (!parse_number(text, v))
        throw UsageError(std::string(what) + ": expected a number, got " + in_quotes(text));
    return v;
}

bool parse_bool(std::string_view text, std::string_view what) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw UsageError(std::string(what) + ": expected true or false, got " + in_quotes(text));
}

std::string show_list(const std::vector<double> &values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + format_double(values[i]);
    return out;
}

std::string_view policy_name(LambdaPolicy p) {
    switch (p) {
    case LambdaPolicy::Fixed:
        return "fixed";
    case LambdaPolicy::Multiplier:
        return "multiplier";
    default:
        return "scan";
    }
}

std::vector<OptionSpec> build_table() {
    using S = Settings;
    std::vector<OptionSpec> t;
    auto add = [&](std::string_view section, std::string_view key, std::string_view flag,
                   std::string_view help, auto apply, auto show, bool is_switch = false) {
        t.push_back({section, key, flag, help, is_switch, apply, show});
    };

    add("input", "path", "input", "edge list file",
        [](S &s, std::string_view v) { s.run.input = std::string(trim(v)); },
        [](const S &s) { return s.run.input.string(); });
    add("input", "network", "network", "network id written into reports (default: file stem)",
        [](S &s, std::string_view v) { s.run.network = std::string(trim(v)); },
        [](const S &s) { return s.run.network; });
    add("input", "direction", "direction", "as-is | reverse | undirected",
        [](S &s, std::string_view v) { s.run.direction = parse_direction(trim(v)); },
        [](const S &s) { return std::string(to_string(s.run.direction)); });

    add("sir", "runs", "runs", "SIR replicates per seed node",
        [](S &s, std::string_view v) { s.run.runs = parse_count<std::uint32_t>(v, "runs"); },
        [](const S &s) { return std::to_string(s.run.runs); });
    add("sir", "lambda", "lambda", "fixed transmissibility (implies policy = fixed)",
        [](S &s, std::string_view v) {
            s.run.lambda = parse_real(v, "lambda");
            s.run.lambda_policy = LambdaPolicy::Fixed;
        },
        [](const S &s) { return format_double(s.run.lambda); });
    add("sir", "multiplier", "multiplier",
        "factor on the scanned threshold (implies policy = multiplier)",
        [](S &s, std::string_view v) {
            s.run.multiplier = parse_real(v, "multiplier");
            s.run.lambda_policy = LambdaPolicy::Multiplier;
        },
        [](const S &s) { return format_double(s.run.multiplier); });
    add("sir", "policy", "lambda-policy", "scan | fixed | multiplier",
        [](S &s, std::string_view v) {
            v = trim(v);
            if (v == "scan")
                s.run.lambda_policy = LambdaPolicy::Scan;
            else if (v == "fixed")
                s.run.lambda_policy = LambdaPolicy::Fixed;
            else if (v == "multiplier")
                s.run.lambda_policy = LambdaPolicy::Multiplier;
            else
                throw UsageError("lambda policy: unknown value " + in_quotes(v));
        },
        [](const S &s) { return std::string(policy_name(s.run.lambda_policy)); });
    add("sir", "scan", "scan", "evaluate at the scanned threshold (policy = scan)",
        [](S &s, std::string_view v) {
            if (parse_bool(v, "scan"))
                s.run.lambda_policy = LambdaPolicy::Scan;
        },
        [](const S &s) { return s.run.lambda_policy == LambdaPolicy::Scan ? "true" : "false"; },
        true);

    add("threshold", "grid", "grid", "ascending lambda grid; empty selects the two-stage scan",
        [](S &s, std::string_view v) { s.run.scan_grid = parse_double_list(v); },
        [](const S &s) { return show_list(s.run.scan_grid); });
    add("threshold", "sample_size", "sample-size", "seed nodes sampled per lambda",
        [](S &s, std::string_view v) {
            s.run.scan.sample_size = parse_count<std::uint32_t>(v, "sample size");
        },
        [](const S &s) { return std::to_string(s.run.scan.sample_size); });
    add("threshold", "runs_per_seed", "runs-per-seed", "SIR replicates per sampled seed",
        [](S &s, std::string_view v) {
            s.run.scan.runs_per_seed = parse_count<std::uint32_t>(v, "runs per seed");
        },
        [](const S &s) { return std::to_string(s.run.scan.runs_per_seed); });
    add("threshold", "delta", "delta", "pooled | seed-means",
        [](S &s, std::string_view v) {
            v = trim(v);
            if (v == "pooled")
                s.run.scan.mode = DeltaMode::Pooled;
            else if (v == "seed-means")
                s.run.scan.mode = DeltaMode::SeedMeans;
            else
                throw UsageError("delta: unknown value " + in_quotes(v));
        },
        [](const S &s) {
            return std::string(s.run.scan.mode == DeltaMode::Pooled ? "pooled" : "seed-means");
        });
    add("threshold", "coarse_lo", "coarse-lo", "two-stage scan: lowest coarse lambda",
        [](S &s, std::string_view v) { s.run.two_stage.lo = parse_real(v, "coarse lo"); },
        [](const S &s) { return format_double(s.run.two_stage.lo); });
    add("threshold", "coarse_hi", "coarse-hi", "two-stage scan: highest coarse lambda",
        [](S &s, std::string_view v) { s.run.two_stage.hi = parse_real(v, "coarse hi"); },
        [](const S &s) { return format_double(s.run.two_stage.hi); });
    add("threshold", "coarse_points", "coarse-points", "two-stage scan: log-spaced coarse points",
        [](S &s, std::string_view v) {
            s.run.two_stage.coarse_points = parse_count<std::size_t>(v, "coarse points");
        },
        [](const S &s) { return std::to_string(s.run.two_stage.coarse_points); });
    add("threshold", "fine_points", "fine-points", "two-stage scan: linear refinement points",
        [](S &s, std::string_view v) {
            s.run.two_stage.fine_points = parse_count<std::size_t>(v, "fine points");
        },
        [](const S &s) { return std::to_string(s.run.two_stage.fine_points); });

    add("rank", "f", "f", "fractions of top spreaders",
        [](S &s, std::string_view v) { s.run.f_grid = parse_double_list(v); },
        [](const S &s) { return show_list(s.run.f_grid); });
    add("rank", "resamples", "resamples", "bootstrap resamples",
        [](S &s, std::string_view v) {
            s.run.resamples = parse_count<std::uint32_t>(v, "resamples");
        },
        [](const S &s) { return std::to_string(s.run.resamples); });
    add("rank", "singles", "singles", "rank by every single centrality (true | false)",
        [](S &s, std::string_view v) { s.run.rank_singles = parse_bool(v, "singles"); },
        [](const S &s) { return std::string(s.run.rank_singles ? "true" : "false"); });

    add("classify", "draws", "draws", "random train/test splits",
        [](S &s, std::string_view v) {
            s.run.classifier.draws = parse_count<std::uint32_t>(v, "draws");
        },
        [](const S &s) { return std::to_string(s.run.classifier.draws); });
    add("classify", "train_fraction", "train-fraction", "share of nodes used for training",
        [](S &s, std::string_view v) {
            s.run.classifier.train_fraction = parse_real(v, "train fraction");
        },
        [](const S &s) { return format_double(s.run.classifier.train_fraction); });
    add("classify", "c_grid", "c-grid", "SVM C values searched by cross-validation",
        [](S &s, std::string_view v) { s.run.classifier.cv.c_grid = parse_double_list(v); },
        [](const S &s) { return show_list(s.run.classifier.cv.c_grid); });
    add("classify", "folds", "folds", "cross-validation folds",
        [](S &s, std::string_view v) {
            s.run.classifier.cv.folds = parse_count<std::size_t>(v, "folds");
        },
        [](const S &s) { return std::to_string(s.run.classifier.cv.folds); });
    add("classify", "tol", "tol", "SVM KKT tolerance",
        [](S &s, std::string_view v) { s.run.classifier.cv.tol = parse_real(v, "tol"); },
        [](const S &s) { return format_double(s.run.classifier.cv.tol); });
    add("classify", "coef0", "coef0", "polynomial kernel offset",
        [](S &s, std::string_view v) { s.run.classifier.coef0 = parse_real(v, "coef0"); },
        [](const S &s) { return format_double(s.run.classifier.coef0); });
    add("classify", "truth", "truth", "global (top-f labels of test rows) | test-top",
        [](S &s, std::string_view v) {
            v = trim(v);
            if (v == "global")
                s.run.classifier.truth = TestTruth::GlobalLabels;
            else if (v == "test-top")
                s.run.classifier.truth = TestTruth::TestTopF;
            else
                throw UsageError("truth: unknown value " + in_quotes(v));
        },
        [](const S &s) {
            return std::string(s.run.classifier.truth == TestTruth::GlobalLabels ? "global"
                                                                                 : "test-top");
        });
    add("classify", "subsets", "subsets",
        "feature subsets, comma separated, members joined by '+'; 'default' or 'all'",
        [](S &s, std::string_view v) {
            s.run.subsets.clear();
            for (auto part : split(trim(v), ',')) {
                if (trim(part) == "default") {
                    auto d = default_subsets();
                    s.run.subsets.insert(s.run.subsets.end(), d.begin(), d.end());
                } else if (!trim(part).empty()) {
                    s.run.subsets.push_back(parse_subset(part));
                }
            }
        },
        [](const S &s) {
            if (s.run.subsets == default_subsets())
                return std::string("default");
            std::string out;
            for (std::size_t i = 0; i < s.run.subsets.size(); ++i)
                out += (i ? "," : "") + subset_name(s.run.subsets[i]);
            return out;
        });

    add("centrality", "damping", "damping", "PageRank damping factor",
        [](S &s, std::string_view v) { s.run.pagerank.damping = parse_real(v, "damping"); },
        [](const S &s) { return format_double(s.run.pagerank.damping); });
    add("centrality", "pagerank_tol", "pagerank-tol", "PageRank L1 tolerance",
        [](S &s, std::string_view v) { s.run.pagerank.tol = parse_real(v, "pagerank tol"); },
        [](const S &s) { return format_double(s.run.pagerank.tol); });
    add("centrality", "eigenvector_tol", "eigenvector-tol", "eigenvector L2 tolerance",
        [](S &s, std::string_view v) {
            s.run.eigenvector.tol = parse_real(v, "eigenvector tol");
        },
        [](const S &s) { return format_double(s.run.eigenvector.tol); });
    add("centrality", "eigenvector_shift", "eigenvector-shift", "diagonal shift for power iteration",
        [](S &s, std::string_view v) {
            s.run.eigenvector.shift = parse_real(v, "eigenvector shift");
        },
        [](const S &s) { return format_double(s.run.eigenvector.shift); });

    add("run", "seed", "seed", "master seed for all randomness",
        [](S &s, std::string_view v) { s.run.master_seed = parse_count<std::uint64_t>(v, "seed"); },
        [](const S &s) { return std::to_string(s.run.master_seed); });
    add("run", "threads", "threads", "worker threads (0 = OpenMP default); never changes outputs",
        [](S &s, std::string_view v) { s.threads = parse_count<int>(v, "threads"); },
        [](const S &s) { return std::to_string(s.threads); });
    add("run", "cache_dir", "cache-dir", "cache for centralities and influence (empty = off)",
        [](S &s, std::string_view v) { s.run.cache_dir = std::string(trim(v)); },
        [](const S &s) { return s.run.cache_dir.string(); });
    add("run", "output", "output", "output directory",
        [](S &s, std::string_view v) { s.output_dir = std::string(trim(v)); },
        [](const S &s) { return s.output_dir.string(); });
    add("run", "features", "features", "precomputed centrality CSV (rank, classify)",
        [](S &s, std::string_view v) { s.features_csv = std::string(trim(v)); },
        [](const S &s) { return s.features_csv.string(); });
    add("run", "influence", "influence", "precomputed influence CSV (rank, classify)",
        [](S &s, std::string_view v) { s.influence_csv = std::string(trim(v)); },
        [](const S &s) { return s.influence_csv.string(); });
    return t;
}

} // namespace

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    text = trim(text);
    if (text.empty())
        return out;
    for (auto part : split(text, ','))
        out.push_back(parse_real(part, "list"));
    return out;
}

const std::vector<OptionSpec> &option_table() {
    static const std::vector<OptionSpec> table = build_table();
    return table;
}

const OptionSpec *find_option(std::string_view section, std::string_view key) {
    for (const auto &opt : option_table()) {
        if (opt.section == section && opt.key == key)
            return &opt;
    }
    return nullptr;
}

void apply_config(Settings &settings, std::istream &in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
        throw UsageError(std::string("config: ") + e.what());
    }
    for (const auto &[section, body] : tree) {
        if (body.empty())
            throw UsageError("config: key " + in_quotes(section) + " is outside any section");
        for (const auto &[key, value] : body) {
            const auto *opt = find_option(section, key);
            if (!opt)
                throw UsageError("config: unknown key " + in_quotes(section + "." + key));
            opt->apply(settings, value.data());
        }
    }
}

void apply_config_file(Settings &settings, const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config file " + in_quotes(path.string()));
    apply_config(settings, in);
}

void write_config(std::ostream &out, const Settings &settings) {
    std::string_view section;
    for (const auto &opt : option_table()) {
        if (opt.is_switch)
            continue;
        if (opt.section != section) {
            if (!section.empty())
                out << '\n';
            section = opt.section;
            out << '[' << section << "]\n";
        }
        out << opt.key << " = " << opt.show(settings) << '\n';
    }
}

} // namespace spreaders
