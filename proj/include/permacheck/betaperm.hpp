#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "permacheck/matrix_types.hpp"

namespace permacheck {

/// How beta enters the permutation sum.
///   cycle_count: beta^{#cycles(tau)}  (Vere-Jones alpha-permanent; default)
///   signature:   beta^{sgn(tau)}, sgn in {+1,-1}
enum class ExponentConvention { cycle_count, signature };

inline constexpr std::size_t default_permanent_cap = 8;

/// Coefficients c_0..c_m with c_k = sum over permutations with k cycles of
/// prod_i A(i, tau(i)). per_beta(A) = sum_k c_k beta^k.
///
/// Computed without enumerating permutations: Hamiltonian-cycle sums for every
/// subset, then a set-partition recursion over the subset containing the
/// lowest remaining index. O(3^m + 2^m m^2).
std::vector<double> cycle_polynomial(const Eigen::MatrixXd& a, std::size_t cap = default_permanent_cap);

/// Evaluates per_beta from a precomputed cycle polynomial.
double evaluate_cycle_polynomial(std::span<const double> coefficients, double beta,
                                 ExponentConvention convention = ExponentConvention::cycle_count);

/// per_beta(A). Throws DomainError when dim(A) exceeds `cap`.
double beta_permanent(const Eigen::MatrixXd& a, double beta,
                      ExponentConvention convention = ExponentConvention::cycle_count,
                      std::size_t cap = default_permanent_cap);

struct PositivityWitness {
    double alpha;
    double beta;
    IndexMultiset indices;
    double value;
};

struct PositivityReport {
    Verdict verdict;
    std::size_t scanned = 0;
    std::optional<PositivityWitness> witness;
    // scanned range, recorded for the report
    std::vector<double> beta_grid;
    std::vector<double> alpha_grid;
    std::size_t m_max = 0;
    ExponentConvention convention = ExponentConvention::cycle_count;
};

struct ScanOptions {
    std::vector<double> beta_grid;
    std::vector<double> alpha_grid;
    std::size_t m_max = 5;
    ExponentConvention convention = ExponentConvention::cycle_count;
    unsigned threads = 1;
};

/// Default grids: beta 0.1..2.0 step 0.1, alpha 0..5 step 0.5, m_max 5.
ScanOptions default_scan_options();

/// Checks per_beta of every multiset-indexed submatrix of resolvent(G, alpha)
/// over the grids. Fails on the first value below -1e-10 * max|entry|^m, where
/// "first" is in (alpha, beta, multiset) order regardless of thread count.
PositivityReport beta_positivity_scan(const KernelMatrix& g, const ScanOptions& options);

/// Necessary conditions for an infinitely divisible permanental kernel:
/// (a) G(i,j) G(j,i) >= 0, (b) G(j,i) G(j,k) G(k,i) >= 0, and (c) both on
/// resolvent(G, alpha) for every alpha in `alphas` (default 0.5..5 step 0.5).
Verdict id_necessary_battery(const KernelMatrix& g, std::span<const double> alphas);
Verdict id_necessary_battery(const KernelMatrix& g);

/// 0.5, 1.0, ..., 5.0
std::vector<double> default_battery_alphas();

}  // namespace permacheck
