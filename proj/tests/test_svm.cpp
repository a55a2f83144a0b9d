#include "oracles.hpp"

#include <spreaders/errors.hpp>
#include <spreaders/svm.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace spreaders;

namespace {

using Rows = std::vector<std::vector<double>>;

DenseMatrix to_matrix(const Rows &rows) {
    DenseMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(i, j) = rows[i][j];
    return m;
}

struct Problem {
    Rows x;
    std::vector<int> y;
};

// Two overlapping Gaussian clouds in `dim` dimensions.
Problem random_problem(std::size_t n, std::size_t dim, double separation, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Problem p;
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> row(dim);
        for (auto &v : row)
            v = noise(gen) + 0.5 * separation * label;
        p.x.push_back(row);
        p.y.push_back(label);
    }
    return p;
}

// Full dual vector rebuilt from the model's support vectors.
std::vector<double> dual_alpha(const SvmModel &m, const std::vector<int> &y) {
    std::vector<double> alpha(y.size(), 0.0);
    for (std::size_t s = 0; s < m.support_indices().size(); ++s) {
        const auto i = m.support_indices()[s];
        alpha[i] = m.dual_coefficients()[s] * y[i];
    }
    return alpha;
}

double dual_objective(const Eigen::MatrixXd &K, const std::vector<int> &y,
                      const std::vector<double> &alpha) {
    double quad = 0, lin = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < y.size(); ++j)
            quad += alpha[i] * alpha[j] * y[i] * y[j] * K(i, j);
    }
    return 0.5 * quad - lin;
}

double training_f1(const SvmModel &m, const Problem &p) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < p.y.size(); ++i) {
        const int pred = m.predict(p.x[i]);
        tp += pred == 1 && p.y[i] == 1;
        fp += pred == 1 && p.y[i] == -1;
        fn += pred == -1 && p.y[i] == 1;
    }
    return tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

} // namespace

TEST(Kernel, Examples) {
    const std::vector<double> zero{0, 0}, ones{1, 1}, a{1, 2}, b{3, -1};
    EXPECT_EQ(kernel_eval(zero, zero, {1.0, 0.0, 2}), 0.0);
    EXPECT_EQ(kernel_eval(ones, ones, {1.0, 0.0, 2}), 4.0);
    EXPECT_EQ(kernel_eval(ones, ones, {1.0, 1.0, 2}), 9.0);
    EXPECT_DOUBLE_EQ(kernel_eval(a, b, {0.5, 1.0, 2}), 2.25);
    EXPECT_EQ(kernel_eval(a, b, {0.5, 1.0, 2}), kernel_eval(b, a, {0.5, 1.0, 2}));
    EXPECT_DOUBLE_EQ(kernel_eval(a, b, {1.0, 0.0, 1}), 1.0);
}

TEST(Oracle, ExhaustiveAndInteriorPointAgree) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto p = random_problem(8 + seed % 3, 3, 1.0, seed);
        const auto K = oracle::kernel_matrix(p.x, 0.5, 1.0, 2);
        for (double C : {0.1, 1.0, 10.0}) {
            const auto ex = oracle::exhaustive_dual(K, p.y, C);
            const auto ip = oracle::interior_point_dual(K, p.y, C);
            ASSERT_TRUE(ex.found);
            EXPECT_NEAR(dual_objective(K, p.y, ex.alpha), dual_objective(K, p.y, ip.alpha), 1e-8)
                << "seed " << seed << " C " << C;
        }
    }
}

TEST(Train, MatchesInteriorPointOracle) {
    SvmOptions opts;
    opts.tol = 1e-9;
    int compared = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto p = random_problem(12 + seed, 5, 1.5, seed + 40);
        const KernelParams kp{0.2, 1.0, 2};
        const auto K = oracle::kernel_matrix(p.x, kp.gamma, kp.coef0, kp.degree);
        for (double C : {0.1, 1.0, 10.0}) {
            opts.C = C;
            const auto model = train_svm(to_matrix(p.x), p.y, kp, opts);
            const auto ip = oracle::interior_point_dual(K, p.y, C);
            EXPECT_NEAR(dual_objective(K, p.y, dual_alpha(model, p.y)),
                        dual_objective(K, p.y, ip.alpha), 1e-6);
            for (std::size_t i = 0; i < p.y.size(); ++i) {
                EXPECT_NEAR(model.decision_value(p.x[i]), oracle::decision(K, i, ip, p.y), 1e-4)
                    << "seed " << seed << " C " << C << " row " << i;
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 300);
}

TEST(Train, XorNeedsTheQuadraticKernel) {
    const Problem xor_problem{{{1, 1}, {-1, -1}, {1, -1}, {-1, 1}}, {1, 1, -1, -1}};
    SvmOptions opts;
    opts.C = 10.0;
    const auto quad = train_svm(to_matrix(xor_problem.x), xor_problem.y, {1.0, 1.0, 2}, opts);
    EXPECT_DOUBLE_EQ(training_f1(quad, xor_problem), 1.0);
    const auto linear = train_svm(to_matrix(xor_problem.x), xor_problem.y, {1.0, 1.0, 1}, opts);
    EXPECT_LT(training_f1(linear, xor_problem), 1.0);
}

TEST(Train, SeparableBlobsAreClassifiedPerfectly) {
    const auto p = random_problem(60, 2, 8.0, 3);
    SvmOptions opts;
    opts.C = 100.0;
    const auto model = train_svm(to_matrix(p.x), p.y, {0.5, 1.0, 2}, opts);
    EXPECT_DOUBLE_EQ(training_f1(model, p), 1.0);
    EXPECT_LT(model.support_indices().size(), 30u);
}

TEST(Train, ConflictingDuplicatesSitAtTheBound) {
    const Rows x{{0, 0}, {0, 0}, {2, 2}, {-2, -2}};
    const std::vector<int> y{1, -1, 1, -1};
    SvmOptions opts;
    opts.C = 0.5;
    const auto model = train_svm(to_matrix(x), y, {1.0, 1.0, 2}, opts);
    const auto alpha = dual_alpha(model, y);
    EXPECT_NEAR(alpha[0], 0.5, 1e-9);
    EXPECT_NEAR(alpha[1], 0.5, 1e-9);
}

TEST(Train, DualFeasibility) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = random_problem(80, 4, 0.8, seed);
        for (double C : {0.01, 1.0, 100.0}) {
            SvmOptions opts;
            opts.C = C;
            const auto model = train_svm(to_matrix(p.x), p.y, {0.25, 1.0, 2}, opts);
            const auto alpha = dual_alpha(model, p.y);
            double balance = 0;
            for (std::size_t i = 0; i < alpha.size(); ++i) {
                EXPECT_GE(alpha[i], 0.0);
                EXPECT_LE(alpha[i], C * (1 + 1e-12));
                balance += alpha[i] * p.y[i];
            }
            EXPECT_LE(std::abs(balance), 1e-9 * C * alpha.size());
            EXPECT_LE(model.kkt_gap(), opts.tol);
            EXPECT_DOUBLE_EQ(model.C(), C);
        }
    }
}

TEST(Train, DeterministicRetrain) {
    const auto p = random_problem(50, 3, 1.0, 9);
    const auto a = train_svm(to_matrix(p.x), p.y, {0.3, 1.0, 2}, {});
    const auto b = train_svm(to_matrix(p.x), p.y, {0.3, 1.0, 2}, {});
    EXPECT_EQ(a, b);
}

TEST(Train, SingleClassIsUsageError) {
    const Rows x{{0, 1}, {1, 0}};
    const std::vector<int> y{1, 1};
    EXPECT_THROW(train_svm(to_matrix(x), y, {}, {}), UsageError);
    const std::vector<int> bad{1, 0};
    EXPECT_THROW(train_svm(to_matrix(x), bad, {}, {}), UsageError);
}

TEST(Train, IterationCapIsConvergenceError) {
    const auto p = random_problem(60, 3, 0.5, 2);
    SvmOptions opts;
    opts.C = 10.0;
    opts.max_iter = 2;
    EXPECT_THROW(train_svm(to_matrix(p.x), p.y, {0.3, 1.0, 2}, opts), ConvergenceError);
}
