#include <spreaders/errors.hpp>
#include <spreaders/svm.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

namespace spreaders {

DenseMatrix DenseMatrix::select_rows(std::span<const std::size_t> rows) const {
    DenseMatrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(data_.data() + rows[i] * cols_, cols_, out.data_.data() + i * cols_);
    return out;
}

double kernel_eval(std::span<const double> x, std::span<const double> y, const KernelParams &k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        dot += x[i] * y[i];
    const double base = k.gamma * dot + k.coef0;
    double out = 1.0;
    for (int d = 0; d < k.degree; ++d)
        out *= base;
    return out;
}

double SvmModel::decision_value(std::span<const double> x) const {
    double sum = bias_;
    for (std::size_t i = 0; i < dual_coef_.size(); ++i)
        sum += dual_coef_[i] * kernel_eval(support_vectors_.row(i), x, kernel_);
    return sum;
}

namespace {

// Q-matrix rows, either fully materialised or held in an LRU cache.
class QRows {
public:
    QRows(const DenseMatrix &x, std::span<const int> y, const KernelParams &k, std::size_t budget)
        : x_(x), y_(y), k_(k), n_(x.rows()) {
        const std::size_t row_bytes = std::max<std::size_t>(n_ * sizeof(double), 1);
        capacity_ = std::max<std::size_t>(budget / row_bytes, 2);
        diag_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            diag_[i] = kernel_eval(x.row(i), x.row(i), k);
    }

    double diag(std::size_t i) const { return diag_[i]; }

    const std::vector<double> &row(std::size_t i) {
        if (auto it = index_.find(i); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        std::vector<double> values(n_);
        const auto xi = x_.row(i);
        for (std::size_t j = 0; j < n_; ++j)
            values[j] = y_[i] * y_[j] * kernel_eval(xi, x_.row(j), k_);
        lru_.emplace_front(i, std::move(values));
        index_[i] = lru_.begin();
        return lru_.front().second;
    }

private:
    const DenseMatrix &x_;
    std::span<const int> y_;
    KernelParams k_;
    std::size_t n_;
    std::size_t capacity_;
    std::vector<double> diag_;
    std::list<std::pair<std::size_t, std::vector<double>>> lru_;
    std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

constexpr double kTau = 1e-12;

} // namespace

SvmModel train_svm(const DenseMatrix &x, std::span<const int> y, const KernelParams &kernel,
                   const SvmOptions &opts) {
    const std::size_t n = x.rows();
    if (y.size() != n)
        throw UsageError("label count does not match training rows");
    if (!(opts.C > 0.0) || !(opts.tol > 0.0))
        throw UsageError("SVM C and tol must be > 0");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw UsageError("SVM labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw UsageError("SVM training set contains a single class");

    const double C = opts.C;
    const std::size_t max_iter =
        opts.max_iter ? opts.max_iter : std::max<std::size_t>(10'000'000, 100 * n);
    QRows q(x, y, kernel, opts.cache_bytes);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    auto in_up = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
    };
    auto in_low = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C);
    };

    std::size_t iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    while (true) {
        // i: maximal violating index in I_up
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] >= gmax) {
                if (-y[t] * grad[t] > gmax || i == n) {
                    gmax = -y[t] * grad[t];
                    i = t;
                }
            }
        }
        // j: second-order choice in I_low
        double gmin = std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        const std::vector<double> *qi = i < n ? &q.row(i) : nullptr;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t))
                continue;
            const double v = -y[t] * grad[t];
            gmin = std::min(gmin, v);
            if (qi && v < gmax) {
                const double b = gmax - v;
                // a = K_ii + K_tt - 2 K_it; y_i y_t Q_it = K_it
                double a = q.diag(i) + q.diag(t) - 2.0 * y[i] * y[t] * (*qi)[t];
                if (a <= 0.0)
                    a = kTau;
                const double obj = -(b * b) / a;
                if (obj <= best_obj) {
                    if (obj < best_obj || j == n) {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        gap = gmax - gmin;
        if (i == n || j == n || gap < opts.tol)
            break;
        if (iter >= max_iter)
            throw ConvergenceError("SVM solver hit the iteration cap", gap);
        ++iter;

        const auto &Qi = q.row(i);
        const auto &Qj = q.row(j);
        const double old_ai = alpha[i], old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = q.diag(i) + q.diag(j) + 2.0 * Qi[j];
            if (quad <= 0.0)
                quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = q.diag(i) + q.diag(j) - 2.0 * Qi[j];
            if (quad <= 0.0)
                quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += Qi[t] * dai + Qj[t] * daj;
    }

    // bias from free vectors, else the midpoint of the feasible interval
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] == -1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;

    SvmModel model;
    model.kernel_ = kernel;
    model.C_ = C;
    model.bias_ = -rho;
    model.iterations_ = iter;
    model.kkt_gap_ = gap;
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0)
            sv.push_back(t);
    }
    model.support_vectors_ = x.select_rows(sv);
    model.support_indices_ = sv;
    for (std::size_t t : sv)
        model.dual_coef_.push_back(alpha[t] * y[t]);
    return model;
}

} // namespace spreaders
