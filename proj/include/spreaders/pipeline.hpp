#pragma once

#include <spreaders/centrality.hpp>
#include <spreaders/classify.hpp>
#include <spreaders/graph.hpp>
#include <spreaders/ranking.hpp>
#include <spreaders/sir.hpp>
#include <spreaders/threshold.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace spreaders {

inline constexpr std::string_view kVersion = "0.1.0";

enum class LambdaPolicy {
    /// Use the scanned threshold.
    Scan,
    /// Use RunConfig::lambda as given.
    Fixed,
    /// Use RunConfig::multiplier times the scanned threshold.
    Multiplier,
};

/// Non-redundant centrality pairs (skips degree+neighbourhood and
/// neighbourhood+two_hop) followed by the all-seven subset.
std::vector<std::vector<CentralityKind>> default_subsets();

struct RunConfig {
    std::string network;
    std::filesystem::path input;
    Direction direction = Direction::AsIs;

    LambdaPolicy lambda_policy = LambdaPolicy::Scan;
    double lambda = 0.0;
    double multiplier = 1.0;
    /// Explicit scan grid; empty selects the two-stage grid.
    std::vector<double> scan_grid;
    TwoStageGrid two_stage;
    ScanOptions scan;

    std::uint32_t runs = 10000;
    std::vector<double> f_grid = default_f_grid();
    std::uint32_t resamples = 100;
    bool rank_singles = true;
    ClassifierOptions classifier;
    std::vector<std::vector<CentralityKind>> subsets = default_subsets();

    PageRankOptions pagerank;
    EigenvectorOptions eigenvector;

    std::uint64_t master_seed = 42;
    std::filesystem::path cache_dir;

    /// Throws UsageError on out-of-range values.
    void validate() const;
    /// Key=value dump of every setting that affects results.
    std::string canonical() const;
    std::uint64_t hash() const;
};

/// "degree+core" style names; "all" for the seven-centrality subset.
std::string subset_name(std::span<const CentralityKind> subset);
/// Parses "degree+core", "all" or a single name. Throws UsageError.
std::vector<CentralityKind> parse_subset(std::string_view name);

struct EvaluationReport {
    std::string network;
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::string version;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::optional<double> lambda_c;
    double lambda = 0.0;
    std::optional<ThresholdScan> scan;
    std::vector<RankingResult> rank_rows;
    std::vector<ClassifierResult> svm_rows;
    std::vector<std::string> warnings;
};

/// Reads config.input and keeps the largest strongly connected component.
DirectedGraph load_flow_graph(const RunConfig &config);
/// Largest SCC of an already-parsed graph; DataError below 2 nodes.
DirectedGraph flow_graph(const DirectedGraph &graph);

/// All seven centralities, served from config.cache_dir when possible.
FeatureMatrix compute_features(const RunConfig &config, const DirectedGraph &g);
/// Influence of every node at `lambda`, served from config.cache_dir when possible.
std::vector<SpreadEstimate> compute_influence(const RunConfig &config, const DirectedGraph &g,
                                              double lambda);
/// Scan of the explicit grid, or the two-stage scan when no grid is set.
ThresholdScan run_threshold(const RunConfig &config, const DirectedGraph &g);
/// lambda under config.lambda_policy; runs a scan unless the policy is fixed.
double resolve_lambda(const RunConfig &config, const DirectedGraph &g,
                      std::optional<ThresholdScan> *scan_out = nullptr);

/// Evaluation stage outputs that can be reused between runs.
struct PipelineArtifacts {
    DirectedGraph graph;
    FeatureMatrix features;
    std::vector<SpreadEstimate> influence;
};

/**
 * ingest -> largest SCC -> centralities -> threshold -> influence at lambda
 * -> ranking and classification over the f grid. Errors are rethrown with a
 * "[stage]" prefix and their original type.
 */
EvaluationReport run_pipeline(const RunConfig &config, PipelineArtifacts *artifacts = nullptr);

/// Same, starting from an already-loaded flow graph (the SCC is still taken).
EvaluationReport run_pipeline(const RunConfig &config, const DirectedGraph &graph,
                              PipelineArtifacts *artifacts = nullptr);

void write_report_json(std::ostream &out, const EvaluationReport &report);
EvaluationReport read_report_json(std::istream &in);
/// network,method,centrality,f,lambda,r,r_lo,r_hi,p,p_lo,p_hi (after a "# config_hash=" line)
void write_rank_csv(std::ostream &out, const EvaluationReport &report);
/// network,method,features,f,lambda,f1,f1_sd,recall,precision,pfun (after a "# config_hash=" line)
void write_svm_csv(std::ostream &out, const EvaluationReport &report);

struct SummaryRow {
    std::string method;
    std::string features;
    std::string metric;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
};

struct Summary {
    std::vector<SummaryRow> rows;
    /// 7x7, diagonal from ranking (r / p), off-diagonal from pair classifiers
    /// (F1 / pfun); NaN where no result exists.
    std::array<std::array<double, kNumCentralities>, kNumCentralities> recall_matrix;
    std::array<std::array<double, kNumCentralities>, kNumCentralities> pfun_matrix;
};

/// Mean and sample sd of every score per (method, feature subset) across
/// all reports and f values. Throws UsageError for an empty list.
Summary summarize(std::span<const EvaluationReport> reports);

void write_summary_csv(std::ostream &out, const Summary &summary, std::uint64_t config_hash);
/// Matrix CSV for "recall" (r/F1) or "pfun" (p/pfun).
void write_matrix_csv(std::ostream &out, const Summary &summary, std::string_view which,
                      std::uint64_t config_hash);

} // namespace spreaders
