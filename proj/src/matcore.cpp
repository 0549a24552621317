#include "permacheck/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace permacheck {

double condition_estimate(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return std::numeric_limits<double>::infinity();
    const double smin = s(s.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

Eigen::MatrixXd invert(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() == 0) throw DomainError("invert: matrix must be square and nonempty");
    const double cond = condition_estimate(m);
    if (!(cond <= tol::condition_cap)) {
        std::ostringstream os;
        os << "matrix is singular or ill-conditioned (condition estimate " << cond << ")";
        throw SingularMatrixError(cond, os.str());
    }
    return m.partialPivLu().inverse();
}

KernelMatrix invert(const KernelMatrix& g) {
    Eigen::MatrixXd h = invert(g.entries());
    if (g.symmetric()) h = (0.5 * (h + h.transpose())).eval();
    return KernelMatrix(std::move(h), g.symmetric());
}

KernelMatrix resolvent(const KernelMatrix& g, double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("resolvent: alpha must be finite and >= 0");
    if (alpha == 0.0) return g;
    const auto n = static_cast<Eigen::Index>(g.dim());
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + alpha * g.entries();
    const double cond = condition_estimate(a);
    if (!(cond <= tol::condition_cap)) {
        std::ostringstream os;
        os << "I + alpha*G is singular at alpha=" << alpha << " (condition estimate " << cond << ")";
        throw SingularMatrixError(cond, os.str());
    }
    Eigen::MatrixXd r = a.partialPivLu().solve(g.entries());
    if (g.symmetric()) r = (0.5 * (r + r.transpose())).eval();
    return KernelMatrix(std::move(r), g.symmetric());
}

ResolventFamily::ResolventFamily(KernelMatrix base, std::vector<double> alphas)
    : base_(std::move(base)), alphas_(std::move(alphas)) {
    if (alphas_.empty()) throw DomainError("resolvent family needs a nonempty alpha grid");
    for (std::size_t k = 0; k < alphas_.size(); ++k) {
        if (!(alphas_[k] >= 0.0)) throw DomainError("resolvent family: alphas must be >= 0");
        if (k > 0 && !(alphas_[k] > alphas_[k - 1])) throw DomainError("resolvent family: alphas must increase");
    }
    members_.reserve(alphas_.size());
    for (double a : alphas_) members_.push_back(resolvent(base_, a));
}

double inf_norm(const Eigen::MatrixXd& m) {
    return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

Verdict real_eigen_nonneg(const KernelMatrix& g) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.entries(), false);
    if (es.info() != Eigen::Success) return Verdict::undecided("eigenvalue solver did not converge");
    const double norm = std::max(1.0, inf_norm(g.entries()));
    const auto& ev = es.eigenvalues();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const double re = ev(k).real();
        const double im = ev(k).imag();
        if (std::abs(im) <= tol::imag_cutoff * norm && re < -tol::identity * norm) {
            return Verdict::fail(Witness{"negative real eigenvalue", {}, {re, im}, std::nullopt, std::nullopt});
        }
    }
    return Verdict::pass();
}

MMatrixVerdict is_m_matrix(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.rows() != m.cols()) throw DomainError("is_m_matrix: matrix must be square");
    const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
    const double t = rel_tol * scale;
    MMatrixVerdict out{Verdict::pass(), Verdict::pass()};
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j && m(i, j) > t) {
                Witness w{"positive off-diagonal entry",
                          {static_cast<std::size_t>(i), static_cast<std::size_t>(j)},
                          {m(i, j)}, std::nullopt, std::nullopt};
                out.z_pattern = Verdict::fail(w);
                out.diagonally_dominant = Verdict::fail(std::move(w));
                return out;
            }
        }
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double rs = m.row(i).sum();
        if (rs < -t * static_cast<double>(m.cols())) {
            out.diagonally_dominant = Verdict::fail(
                Witness{"negative row sum", {static_cast<std::size_t>(i)}, {rs}, std::nullopt, std::nullopt});
            return out;
        }
    }
    return out;
}

double min_symmetric_eigenvalue(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("nonconvergence", "symmetric eigen-decomposition failed");
    return es.eigenvalues().minCoeff();
}

bool is_psd(const KernelMatrix& g) {
    if (!g.symmetric()) return false;
    const double norm = inf_norm(g.entries());
    return min_symmetric_eigenvalue(g.entries()) >= -tol::psd * norm;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw NumericError("nonconvergence", "eigenvalue solver did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double det_i_plus_diag(const Eigen::MatrixXd& g, std::span<const double> x) {
    if (static_cast<Eigen::Index>(x.size()) != g.rows()) throw DomainError("det_i_plus_diag: size mismatch");
    Eigen::MatrixXd a = g;
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) *= x[static_cast<std::size_t>(i)];
    a += Eigen::MatrixXd::Identity(a.rows(), a.cols());
    return a.determinant();
}

}  // namespace permacheck
