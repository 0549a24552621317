#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "permacheck/idcheck.hpp"
#include "permacheck/matrix_types.hpp"

namespace permacheck {

/// One-step kernel Q of a transient sub-Markov chain on {0..dim-1}.
class TransientChain {
public:
    /// Throws DomainError for negative entries or a non-square Q, and
    /// SpectralRadiusError when rho(Q) >= 1 - 1e-9.
    explicit TransientChain(Eigen::MatrixXd q);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    const Eigen::MatrixXd& q() const noexcept { return q_; }

private:
    Eigen::MatrixXd q_;
};

/// Potential matrix (I - Q)^{-1} = sum_k Q^k with respect to counting measure.
KernelMatrix green_from_chain(const TransientChain& chain);

/// m = 1^T (I - Q)^{-1}, an excessive measure (m Q <= m).
Eigen::VectorXd excessive_reference_measure(const TransientChain& chain);

/// Potential density relative to the excessive measure: (I - Q)^{-1} diag(m)^{-1}.
/// Its inverse is an M-matrix with nonnegative row and column sums.
KernelMatrix green_with_reference(const TransientChain& chain);

enum class GreenClass { green, green_up_to_density, not_green };

std::string to_string(GreenClass cls);

struct GreenVerdict {
    Verdict verdict;
    GreenClass cls = GreenClass::not_green;
    /// d with d G^{-1} d row-diagonally dominant, reported for green_up_to_density.
    std::optional<Eigen::VectorXd> density;
};

/// Recognizes finite Green matrices: (a) entries >= -tol, (b) nonsingular,
/// (c) G^{-1} off-diagonals <= 0, (d) G^{-1} 1 >= 0. When only (a)-(c) hold
/// the class is green_up_to_density (verdict holds, with the density d = G 1).
GreenVerdict is_green(const KernelMatrix& g);

struct HadamardResult {
    KernelMatrix power;
    GreenVerdict green;
};

/// Entrywise G(i,j)^beta for beta >= 1 and G >= 0, with is_green of the result.
/// Roundoff negatives within tolerance are treated as zero.
HadamardResult hadamard_power(const KernelMatrix& g, double beta);

struct PlusConstantEntry {
    double c;
    IdVerdict id;
};

struct PlusConstantReport {
    Verdict verdict;
    std::vector<PlusConstantEntry> entries;
    double beta = 2.0;
};

/// 0.1, 0.5, 1, 2, 10
std::vector<double> default_c_grid();

/// id_verdict(G + c J, beta) for every c in the grid; fails at the first failing
/// c, inconclusive if none fails but some is undecided.
PlusConstantReport plus_constant_check(const KernelMatrix& g, std::span<const double> c_grid, double beta = 2.0,
                                       const IdOptions& options = {});

/// Principal submatrix on `subset` (0-based, distinct, nonempty).
KernelMatrix restriction(const KernelMatrix& g, std::span<const std::size_t> subset);

}  // namespace permacheck
