#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "permacheck/green.hpp"
#include "permacheck/matrix_types.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd uniform_matrix(Rng& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = u(rng);
    return m;
}

inline Eigen::MatrixXd integer_matrix(Rng& rng, int n, int lo, int hi) {
    std::uniform_int_distribution<int> u(lo, hi);
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = u(rng);
    return m;
}

/// Number of cycles of a permutation given as an image vector.
inline int cycle_count(const std::vector<int>& perm) {
    std::vector<bool> seen(perm.size(), false);
    int cycles = 0;
    for (std::size_t s = 0; s < perm.size(); ++s) {
        if (seen[s]) continue;
        ++cycles;
        for (auto v = s; !seen[v]; v = static_cast<std::size_t>(perm[v])) seen[v] = true;
    }
    return cycles;
}

/// Naive m! loop: sum over permutations of beta^cycles * prod A(i, tau(i)).
inline double naive_beta_permanent(const Eigen::MatrixXd& a, double beta) {
    const int m = static_cast<int>(a.rows());
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    do {
        double prod = 1.0;
        for (int i = 0; i < m; ++i) prod *= a(i, perm[static_cast<std::size_t>(i)]);
        total += std::pow(beta, cycle_count(perm)) * prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

/// Ryser's inclusion-exclusion permanent.
inline double ryser_permanent(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    double total = 0.0;
    for (unsigned mask = 1; mask < (1U << n); ++mask) {
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j)
                if (mask >> j & 1U) row += a(i, j);
            prod *= row;
        }
        const int bits = __builtin_popcount(mask);
        total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
    }
    return total;
}

/// Symmetric positive definite with unit diagonal.
inline Eigen::MatrixXd random_correlation(Rng& rng, int n) {
    const Eigen::MatrixXd a = uniform_matrix(rng, n, -1.0, 1.0);
    Eigen::MatrixXd s = a * a.transpose() + 0.2 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
    s = d.asDiagonal() * s * d.asDiagonal();
    return 0.5 * (s + s.transpose());
}

/// Symmetric inverse M-matrix with dense, clearly positive off-diagonals
/// (the kernel of an infinitely divisible squared Gaussian), unit diagonal.
inline Eigen::MatrixXd random_inverse_m(Rng& rng, int n) {
    Eigen::MatrixXd b = uniform_matrix(rng, n, 0.3, 1.0);
    b = (0.5 * (b + b.transpose())).eval();
    b.diagonal().setZero();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    const double s = es.eigenvalues().maxCoeff() / 0.75;
    Eigen::MatrixXd g = (s * Eigen::MatrixXd::Identity(n, n) - b).inverse();
    const Eigen::VectorXd d = g.diagonal().cwiseSqrt().cwiseInverse();
    g = d.asDiagonal() * g * d.asDiagonal();
    return 0.5 * (g + g.transpose());
}

/// Nonnegative sub-Markov matrix with max row sum 0.95; about a third of the
/// entries zero when `sparse`.
inline Eigen::MatrixXd random_chain(Rng& rng, int n, bool sparse = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd q(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q(i, j) = sparse && u(rng) < 0.33 ? 0.0 : u(rng);
    const double top = q.rowwise().sum().maxCoeff();
    if (top > 0.0) q *= 0.95 / top;
    return q;
}

inline Eigen::MatrixXd random_symmetric_chain(Rng& rng, int n) {
    Eigen::MatrixXd q = random_chain(rng, n, true);
    q = (0.5 * (q + q.transpose())).eval();
    const double top = q.rowwise().sum().maxCoeff();
    if (top > 0.0) q *= 0.95 / top;
    return q;
}

inline std::vector<int> random_signs(Rng& rng, int n) {
    std::bernoulli_distribution coin(0.5);
    std::vector<int> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = coin(rng) ? 1 : -1;
    return s;
}

}  // namespace testsupport
