#include <spreaders/classify.hpp>
#include <spreaders/errors.hpp>
#include <spreaders/ranking.hpp>
#include <spreaders/text.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>

namespace spreaders {

std::vector<int> top_f_labels(std::span<const double> rho, double f) {
    const std::size_t k = top_count(f, rho.size());
    std::vector<int> labels(rho.size(), -1);
    for (NodeId u : top_k_stable(rho, k))
        labels[u] = 1;
    return labels;
}

LabeledDataset build_dataset(const FeatureMatrix &features, std::span<const double> rho, double f,
                             std::span<const CentralityKind> subset) {
    if (subset.empty())
        throw UsageError("classifier needs at least one feature");
    if (rho.size() != features.num_nodes())
        throw UsageError("influence vector does not match the feature matrix");
    for (double v : rho) {
        if (!std::isfinite(v))
            throw DataError("influence values must be finite");
    }
    LabeledDataset data;
    data.columns.assign(subset.begin(), subset.end());
    data.features = DenseMatrix(features.num_nodes(), subset.size());
    for (std::size_t c = 0; c < subset.size(); ++c) {
        const auto &col = features.column(subset[c]);
        for (std::size_t i = 0; i < col.size(); ++i)
            data.features(i, c) = col[i];
    }
    data.labels = top_f_labels(rho, f);
    data.positives = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
    return data;
}

Standardizer Standardizer::fit(const DenseMatrix &x, std::span<const std::size_t> rows) {
    if (rows.empty())
        throw UsageError("cannot fit a standardizer on zero rows");
    Standardizer s;
    const std::size_t d = x.cols();
    s.mean_.assign(d, 0.0);
    s.scale_.assign(d, 0.0);
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < d; ++c)
            s.mean_[c] += x(r, c);
    }
    for (auto &m : s.mean_)
        m /= static_cast<double>(rows.size());
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < d; ++c) {
            const double dev = x(r, c) - s.mean_[c];
            s.scale_[c] += dev * dev;
        }
    }
    for (auto &sc : s.scale_) {
        sc = std::sqrt(sc / static_cast<double>(rows.size()));
        if (!(sc > 0.0))
            sc = 1.0;
    }
    return s;
}

DenseMatrix Standardizer::transform(const DenseMatrix &x, std::span<const std::size_t> rows) const {
    DenseMatrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < x.cols(); ++c)
            out(i, c) = (x(rows[i], c) - mean_[c]) / scale_[c];
    }
    return out;
}

KernelParams default_kernel(const DenseMatrix &x, double coef0) {
    const double count = static_cast<double>(x.rows() * x.cols());
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (double v : x.row(i))
            mean += v;
    }
    mean /= count;
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (double v : x.row(i))
            var += (v - mean) * (v - mean);
    }
    var /= count;
    KernelParams k;
    k.gamma = var > 0.0 ? 1.0 / (static_cast<double>(x.cols()) * var) : 1.0;
    k.coef0 = coef0;
    k.degree = 2;
    return k;
}

BinaryScores binary_scores(std::span<const int> truth, std::span<const int> predicted) {
    std::size_t tp = 0, actual = 0, guessed = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        actual += truth[i] == 1;
        guessed += predicted[i] == 1;
        tp += truth[i] == 1 && predicted[i] == 1;
    }
    BinaryScores s;
    if (actual == 0 && guessed == 0)
        return {1.0, 1.0, 1.0};
    s.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    s.precision = guessed ? static_cast<double>(tp) / static_cast<double>(guessed) : 0.0;
    s.f1 = tp ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

template <typename T>
void shuffle(std::vector<T> &v, RngStream &stream) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[stream.below(i)]);
}

} // namespace

TuneResult tune_C(const DenseMatrix &x, std::span<const int> y, const CvConfig &cv, double coef0,
                  RngStream &stream) {
    if (cv.c_grid.empty())
        throw UsageError("C grid is empty");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i)
        (y[i] == 1 ? pos : neg).push_back(i);
    if (pos.size() < 2 || neg.size() < 2)
        throw UsageError("cross-validation needs at least 2 rows of each class");

    TuneResult result;
    std::size_t folds = cv.folds;
    if (pos.size() < folds || neg.size() < folds) {
        folds = std::min(pos.size(), neg.size());
        result.warnings.push_back("too few rows of one class for " + std::to_string(cv.folds) +
                                  " folds; using " + std::to_string(folds));
    }
    result.folds_used = folds;
    shuffle(pos, stream);
    shuffle(neg, stream);
    std::vector<std::size_t> fold_of(y.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
        fold_of[pos[i]] = i % folds;
    for (std::size_t i = 0; i < neg.size(); ++i)
        fold_of[neg[i]] = i % folds;

    result.mean_f1.assign(cv.c_grid.size(), 0.0);
    for (std::size_t k = 0; k < folds; ++k) {
        std::vector<std::size_t> fit_rows, val_rows;
        for (std::size_t i = 0; i < y.size(); ++i)
            (fold_of[i] == k ? val_rows : fit_rows).push_back(i);
        const auto scaler = Standardizer::fit(x, fit_rows);
        const auto fit_x = scaler.transform(x, fit_rows);
        const auto val_x = scaler.transform(x, val_rows);
        const auto kernel = default_kernel(fit_x, coef0);
        std::vector<int> fit_y, val_y;
        for (auto r : fit_rows)
            fit_y.push_back(y[r]);
        for (auto r : val_rows)
            val_y.push_back(y[r]);
        for (std::size_t c = 0; c < cv.c_grid.size(); ++c) {
            const auto model = train_svm(fit_x, fit_y, kernel, {cv.c_grid[c], cv.tol});
            std::vector<int> pred(val_rows.size());
            for (std::size_t i = 0; i < val_rows.size(); ++i)
                pred[i] = model.predict(val_x.row(i));
            result.mean_f1[c] += binary_scores(val_y, pred).f1 / static_cast<double>(folds);
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < cv.c_grid.size(); ++c) {
        if (result.mean_f1[c] > result.mean_f1[best] ||
            (result.mean_f1[c] == result.mean_f1[best] && cv.c_grid[c] < cv.c_grid[best]))
            best = c;
    }
    result.C = cv.c_grid[best];
    return result;
}

std::vector<int> FittedClassifier::predict(const DenseMatrix &x,
                                           std::span<const std::size_t> rows) const {
    if (constant_label)
        return std::vector<int>(rows.size(), constant_label);
    const auto scaled = scaler.transform(x, rows);
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = model.predict(scaled.row(i));
    return out;
}

std::vector<double> FittedClassifier::decision_values(const DenseMatrix &x,
                                                      std::span<const std::size_t> rows) const {
    if (constant_label)
        return std::vector<double>(rows.size(), static_cast<double>(constant_label));
    const auto scaled = scaler.transform(x, rows);
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[i] = model.decision_value(scaled.row(i));
    return out;
}

FittedClassifier fit_classifier(const DenseMatrix &x, std::span<const int> y,
                                std::span<const std::size_t> train, const CvConfig &cv,
                                double coef0, RngStream &stream) {
    FittedClassifier fitted;
    const auto train_x = x.select_rows(train);
    std::vector<int> train_y;
    for (auto r : train)
        train_y.push_back(y[r]);
    fitted.scaler = Standardizer::fit(x, train);
    const auto positives = static_cast<std::size_t>(std::count(train_y.begin(), train_y.end(), 1));
    const auto negatives = train_y.size() - positives;
    if (positives == 0 || negatives == 0) {
        fitted.constant_label = positives ? 1 : -1;
        fitted.tuning.C = fitted.C = *std::min_element(cv.c_grid.begin(), cv.c_grid.end());
        fitted.tuning.warnings.push_back("training rows hold a single class; constant prediction");
        return fitted;
    }
    if (positives < 2 || negatives < 2) {
        fitted.tuning.C = *std::min_element(cv.c_grid.begin(), cv.c_grid.end());
        fitted.tuning.warnings.push_back("too few rows of one class to cross-validate; using smallest C");
    } else {
        fitted.tuning = tune_C(train_x, train_y, cv, coef0, stream);
    }
    fitted.C = fitted.tuning.C;
    const auto scaled = fitted.scaler.transform(x, train);
    fitted.model = train_svm(scaled, train_y, default_kernel(scaled, coef0), {fitted.C, cv.tol});
    return fitted;
}

DrawScores evaluate_split(const LabeledDataset &data, std::span<const double> rho, double f,
                          std::span<const std::size_t> train, std::span<const std::size_t> test,
                          const ClassifierOptions &opts, RngStream &stream) {
    const auto fitted = fit_classifier(data.features, data.labels, train, opts.cv, opts.coef0, stream);
    const auto predicted = fitted.predict(data.features, test);

    std::vector<int> truth(test.size(), -1);
    if (opts.truth == TestTruth::GlobalLabels) {
        for (std::size_t i = 0; i < test.size(); ++i)
            truth[i] = data.labels[test[i]];
    } else {
        std::vector<double> test_rho(test.size());
        for (std::size_t i = 0; i < test.size(); ++i)
            test_rho[i] = rho[test[i]];
        for (NodeId pos : top_k_stable(test_rho, top_count(f, test.size())))
            truth[pos] = 1;
    }

    DrawScores out;
    out.C = fitted.C;
    out.warnings = fitted.tuning.warnings;
    out.scores = binary_scores(truth, predicted);
    std::vector<NodeId> truth_nodes, predicted_nodes;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (truth[i] == 1)
            truth_nodes.push_back(static_cast<NodeId>(test[i]));
        if (predicted[i] == 1)
            predicted_nodes.push_back(static_cast<NodeId>(test[i]));
    }
    if (truth_nodes.empty())
        out.pfun = predicted_nodes.empty() ? 1.0 : 0.0;
    else
        out.pfun = precision_function(predicted_nodes, truth_nodes, rho);

    std::vector<double> column(test.size());
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
        for (std::size_t i = 0; i < test.size(); ++i)
            column[i] = data.features(test[i], c);
        std::vector<NodeId> picked;
        for (NodeId pos : top_k_by_value(column, truth_nodes.size(), stream))
            picked.push_back(static_cast<NodeId>(test[pos]));
        out.ranker_recall.push_back(truth_nodes.empty() ? 1.0
                                                        : recognition_rate(truth_nodes, picked));
    }
    return out;
}

ClassifierResult evaluate_classifier(const FeatureMatrix &features, std::span<const double> rho,
                                     double f, std::span<const CentralityKind> subset,
                                     const ClassifierOptions &opts, const RngPolicy &rng) {
    if (opts.draws == 0)
        throw UsageError("draws must be >= 1");
    if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0))
        throw UsageError("training fraction must lie in (0, 1)");
    const auto data = build_dataset(features, rho, f, subset);
    const std::size_t n = data.labels.size();
    const auto n_train = static_cast<std::size_t>(
        std::llround(opts.train_fraction * static_cast<double>(n)));
    if (n_train < 2 || n_train >= n)
        throw DataError("network too small for a train/test split");

    std::vector<DrawScores> draws(opts.draws);
    std::vector<std::vector<std::string>> draw_warnings(opts.draws);
    std::vector<std::exception_ptr> errors(opts.draws);

    auto run = [&](std::uint32_t d) {
        try {
            auto stream = rng.purpose_stream("classifier-draw", d);
            for (int attempt = 0;; ++attempt) {
                auto rows = all_rows(n);
                shuffle(rows, stream);
                std::vector<std::size_t> train(rows.begin(), rows.begin() + n_train);
                std::vector<std::size_t> test(rows.begin() + n_train, rows.end());
                std::sort(train.begin(), train.end());
                std::sort(test.begin(), test.end());
                std::size_t train_pos = 0, test_pos = 0;
                for (auto r : train)
                    train_pos += data.labels[r] == 1;
                for (auto r : test)
                    test_pos += data.labels[r] == 1;
                const bool usable = train_pos >= 2 && train.size() - train_pos >= 2 && test_pos > 0;
                if (!usable && attempt < 9)
                    continue;
                auto stream_for_fit = rng.purpose_stream("classifier-fit", d);
                draws[d] = evaluate_split(data, rho, f, train, test, opts, stream_for_fit);
                if (!usable)
                    draws[d].warnings.insert(draws[d].warnings.begin(),
                                             "no well-stratified split in 10 attempts");
                return;
            }
        } catch (...) {
            errors[d] = std::current_exception();
        }
    };

    const auto count = static_cast<std::int64_t>(opts.draws);
    if (opts.exec == Execution::Serial) {
        for (std::int64_t d = 0; d < count; ++d)
            run(static_cast<std::uint32_t>(d));
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t d = 0; d < count; ++d)
            run(static_cast<std::uint32_t>(d));
    }
    for (const auto &e : errors) {
        if (e)
            std::rethrow_exception(e);
    }

    ClassifierResult result;
    result.features = data.columns;
    result.f = f;
    result.draws = opts.draws;
    result.ranker_recall.assign(data.columns.size(), 0.0);
    const double m = opts.draws;
    for (const auto &d : draws) {
        result.f1_mean += d.scores.f1 / m;
        result.recall_mean += d.scores.recall / m;
        result.precision_mean += d.scores.precision / m;
        result.pfun_mean += d.pfun / m;
        for (std::size_t c = 0; c < d.ranker_recall.size(); ++c)
            result.ranker_recall[c] += d.ranker_recall[c] / m;
    }
    for (const auto &d : draws) {
        for (const auto &w : d.warnings) {
            if (std::find(result.warnings.begin(), result.warnings.end(), w) == result.warnings.end())
                result.warnings.push_back(w);
        }
    }
    if (opts.draws > 1) {
        double ss = 0.0;
        for (const auto &d : draws)
            ss += (d.scores.f1 - result.f1_mean) * (d.scores.f1 - result.f1_mean);
        result.f1_sd = std::sqrt(ss / (m - 1.0));
    }
    return result;
}

void write_boundary_grid(std::ostream &out, const SvmModel &model, double lo, double hi,
                         std::size_t resolution) {
    if (model.support_vectors().cols() != 2)
        throw UsageError("boundary grids are only defined for two-feature models");
    if (resolution < 2 || !(hi > lo))
        throw UsageError("boundary grid needs lo < hi and resolution >= 2");
    out << "x,y,decision\n";
    const double step = (hi - lo) / static_cast<double>(resolution - 1);
    for (std::size_t i = 0; i < resolution; ++i) {
        for (std::size_t j = 0; j < resolution; ++j) {
            const double point[2] = {lo + step * static_cast<double>(i),
                                     lo + step * static_cast<double>(j)};
            out << format_double(point[0]) << ',' << format_double(point[1]) << ','
                << format_double(model.decision_value(point)) << '\n';
        }
    }
}

} // namespace spreaders
