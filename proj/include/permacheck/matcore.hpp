#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "permacheck/matrix_types.hpp"

namespace permacheck {

/// 2-norm condition number via SVD; +inf when exactly singular.
double condition_estimate(const Eigen::MatrixXd& m);

/// Inverse of a nonsingular kernel. Throws SingularMatrixError (carrying the
/// condition estimate) above tol::condition_cap. Symmetry is preserved.
KernelMatrix invert(const KernelMatrix& g);
Eigen::MatrixXd invert(const Eigen::MatrixXd& m);

/// (I + alpha G)^{-1} G. alpha == 0 returns G unchanged.
KernelMatrix resolvent(const KernelMatrix& g, double alpha);

/// Resolvents of one base kernel on an increasing, nonnegative alpha grid.
class ResolventFamily {
public:
    ResolventFamily(KernelMatrix base, std::vector<double> alphas);

    const KernelMatrix& base() const noexcept { return base_; }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    const std::vector<KernelMatrix>& members() const noexcept { return members_; }
    const KernelMatrix& at(std::size_t k) const { return members_.at(k); }

private:
    KernelMatrix base_;
    std::vector<double> alphas_;
    std::vector<KernelMatrix> members_;
};

/// Vere-Jones condition (I): every (numerically) real eigenvalue is >= 0.
/// Witness values are {Re, Im} of the offending eigenvalue.
Verdict real_eigen_nonneg(const KernelMatrix& g);

struct MMatrixVerdict {
    Verdict z_pattern;              ///< off-diagonal entries <= tolerance
    Verdict diagonally_dominant;    ///< z_pattern and every row sum >= -tolerance
};

MMatrixVerdict is_m_matrix(const Eigen::MatrixXd& m, double rel_tol = tol::identity);

/// Smallest eigenvalue of the symmetric part.
double min_symmetric_eigenvalue(const Eigen::MatrixXd& m);

/// lambda_min >= -tol::psd * ||G||.
bool is_psd(const KernelMatrix& g);

/// Maximum absolute row sum.
double inf_norm(const Eigen::MatrixXd& m);

double spectral_radius(const Eigen::MatrixXd& m);

/// det(I + diag(x) G).
double det_i_plus_diag(const Eigen::MatrixXd& g, std::span<const double> x);

}  // namespace permacheck
