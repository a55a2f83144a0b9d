#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spreaders {

/// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    double &operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    /// Copy of the selected rows, in the given order.
    DenseMatrix select_rows(std::span<const std::size_t> rows) const;

    friend bool operator==(const DenseMatrix &, const DenseMatrix &) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// K(x, y) = (gamma * <x, y> + coef0) ^ degree
struct KernelParams {
    double gamma = 1.0;
    double coef0 = 1.0;
    int degree = 2;

    friend bool operator==(const KernelParams &, const KernelParams &) = default;
};

double kernel_eval(std::span<const double> x, std::span<const double> y, const KernelParams &k);

struct SvmOptions {
    double C = 1.0;
    /// Stop when the maximal KKT violation (m(a) - M(a)) drops below tol.
    double tol = 5e-4;
    /// 0 selects max(10^7, 100 n).
    std::size_t max_iter = 0;
    /// Kernel row cache budget.
    std::size_t cache_bytes = std::size_t{256} << 20;
};

/// Trained soft-margin SVM: d(x) = sum_i coef_i K(s_i, x) + bias, coef_i = alpha_i y_i.
class SvmModel {
public:
    double decision_value(std::span<const double> x) const;
    /// +1 when decision_value(x) > 0, else -1.
    int predict(std::span<const double> x) const { return decision_value(x) > 0.0 ? 1 : -1; }

    const DenseMatrix &support_vectors() const noexcept { return support_vectors_; }
    const std::vector<double> &dual_coefficients() const noexcept { return dual_coef_; }
    /// Training-row index of each support vector.
    const std::vector<std::size_t> &support_indices() const noexcept { return support_indices_; }
    double bias() const noexcept { return bias_; }
    const KernelParams &kernel() const noexcept { return kernel_; }
    double C() const noexcept { return C_; }
    std::size_t iterations() const noexcept { return iterations_; }
    /// KKT violation at termination.
    double kkt_gap() const noexcept { return kkt_gap_; }

    friend bool operator==(const SvmModel &, const SvmModel &) = default;

private:
    friend SvmModel train_svm(const DenseMatrix &, std::span<const int>, const KernelParams &,
                              const SvmOptions &);

    DenseMatrix support_vectors_;
    std::vector<double> dual_coef_;
    std::vector<std::size_t> support_indices_;
    double bias_ = 0.0;
    KernelParams kernel_;
    double C_ = 0.0;
    std::size_t iterations_ = 0;
    double kkt_gap_ = 0.0;
};

/**
 * Solves the C-SVC dual
 *     min 1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)
 * by sequential minimal optimisation with second-order working-set
 * selection. Labels must be +1/-1 with both classes present.
 *
 * Throws UsageError for a single-class training set and ConvergenceError
 * when the iteration cap is reached.
 */
SvmModel train_svm(const DenseMatrix &x, std::span<const int> y, const KernelParams &kernel,
                   const SvmOptions &opts);

} // namespace spreaders
