#pragma once

#include <spreaders/centrality.hpp>
#include <spreaders/rng.hpp>
#include <spreaders/svm.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spreaders {

/// Features for a chosen centrality subset plus +1/-1 top-f labels.
struct LabeledDataset {
    DenseMatrix features;
    std::vector<int> labels;
    std::vector<CentralityKind> columns;
    std::size_t positives = 0;
};

/// +1 for the round(f*n) largest rho (ties to the lowest NodeId), -1 otherwise.
std::vector<int> top_f_labels(std::span<const double> rho, double f);

LabeledDataset build_dataset(const FeatureMatrix &features, std::span<const double> rho, double f,
                             std::span<const CentralityKind> subset);

/// Per-column z-score fitted on a set of rows (population standard deviation).
class Standardizer {
public:
    static Standardizer fit(const DenseMatrix &x, std::span<const std::size_t> rows);
    DenseMatrix transform(const DenseMatrix &x, std::span<const std::size_t> rows) const;

    const std::vector<double> &means() const noexcept { return mean_; }
    const std::vector<double> &scales() const noexcept { return scale_; }

    friend bool operator==(const Standardizer &, const Standardizer &) = default;

private:
    std::vector<double> mean_, scale_;
};

/// gamma = 1 / (n_features * variance of all entries of x), coef0 as given, degree 2.
KernelParams default_kernel(const DenseMatrix &x, double coef0);

struct BinaryScores {
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

/// Scores of a predicted +1/-1 vector against true labels. With no true and
/// no predicted positives all three scores are 1; otherwise 0/0 counts as 0.
BinaryScores binary_scores(std::span<const int> truth, std::span<const int> predicted);

struct CvConfig {
    std::vector<double> c_grid{1.0, 3.16, 10.0, 31.6, 100.0};
    std::size_t folds = 5;
    double tol = 5e-4;
};

struct TuneResult {
    double C = 1.0;
    std::vector<double> mean_f1;
    std::size_t folds_used = 0;
    std::vector<std::string> warnings;
};

/**
 * Stratified k-fold cross-validation over cv.c_grid, selecting the C with
 * the highest mean validation F1 (ties to the smallest C). Each fold
 * refits the standardizer and kernel scale on its own training rows.
 * With fewer positives than folds, folds shrink to the positive count;
 * fewer than 2 positives throws UsageError.
 */
TuneResult tune_C(const DenseMatrix &x, std::span<const int> y, const CvConfig &cv, double coef0,
                  RngStream &stream);

/// A model plus the preprocessing fitted on its training rows.
struct FittedClassifier {
    Standardizer scaler;
    SvmModel model;
    double C = 1.0;
    TuneResult tuning;
    /// Nonzero when the training rows held a single class: every row gets this label.
    int constant_label = 0;

    /// +1/-1 predictions for the requested rows of the raw feature matrix.
    std::vector<int> predict(const DenseMatrix &x, std::span<const std::size_t> rows) const;
    std::vector<double> decision_values(const DenseMatrix &x,
                                        std::span<const std::size_t> rows) const;
};

/// Standardize on `train`, tune C by CV, refit on all of `train`. Fewer than
/// 2 rows of a class skips tuning (smallest C); a single class gives a
/// constant predictor. Both cases add a warning.
FittedClassifier fit_classifier(const DenseMatrix &x, std::span<const int> y,
                                std::span<const std::size_t> train, const CvConfig &cv,
                                double coef0, RngStream &stream);

/// Which set counts as the true top spreaders inside the test half.
enum class TestTruth {
    /// Test rows carrying the global top-f label.
    GlobalLabels,
    /// The round(f * n_test) test rows with the largest rho.
    TestTopF,
};

struct ClassifierOptions {
    double train_fraction = 0.5;
    std::uint32_t draws = 100;
    CvConfig cv;
    double coef0 = 1.0;
    TestTruth truth = TestTruth::GlobalLabels;
    Execution exec = Execution::Parallel;
};

/// Scores of one train/test draw.
struct DrawScores {
    BinaryScores scores;
    double pfun = 0.0;
    double C = 1.0;
    /// Recognition rate of ranking the test rows by each feature alone.
    std::vector<double> ranker_recall;
    std::vector<std::string> warnings;
};

struct ClassifierResult {
    std::vector<CentralityKind> features;
    double f = 0.0;
    double f1_mean = 0.0, f1_sd = 0.0;
    double recall_mean = 0.0, precision_mean = 0.0;
    double pfun_mean = 0.0;
    std::uint32_t draws = 0;
    /// Mean same-split single-feature ranking recall, per feature in `features`.
    std::vector<double> ranker_recall;
    std::vector<std::string> warnings;
};

/// Train on `train`, evaluate on `test`. `rho` indexes the same rows as `data`.
DrawScores evaluate_split(const LabeledDataset &data, std::span<const double> rho, double f,
                          std::span<const std::size_t> train, std::span<const std::size_t> test,
                          const ClassifierOptions &opts, RngStream &stream);

/**
 * Repeated random train/test splits (train fraction t, without replacement).
 * Draw d uses rng.purpose_stream("classifier-draw", d); a draw with fewer than
 * 2 rows of either class in training (or no positives in test) is redrawn up
 * to 10 times, after which the last draw is used with a warning.
 */
ClassifierResult evaluate_classifier(const FeatureMatrix &features, std::span<const double> rho,
                                     double f, std::span<const CentralityKind> subset,
                                     const ClassifierOptions &opts, const RngPolicy &rng);

/// Decision values on a resolution x resolution grid spanning [lo, hi] in
/// standardized space for a two-feature model. CSV: x,y,decision
void write_boundary_grid(std::ostream &out, const SvmModel &model, double lo, double hi,
                         std::size_t resolution = 200);

} // namespace spreaders
