#include "permacheck/green.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "permacheck/matcore.hpp"

namespace permacheck {

namespace {

constexpr double transience_margin = 1e-9;

/// Clears roundoff negatives of a matrix that is nonnegative in exact arithmetic.
Eigen::MatrixXd clamp_roundoff(Eigen::MatrixXd m) {
    const double t = tol::identity * std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m.size(); ++i)
        if (m.data()[i] < 0.0 && m.data()[i] >= -t) m.data()[i] = 0.0;
    return m;
}

}  // namespace

TransientChain::TransientChain(Eigen::MatrixXd q) : q_(std::move(q)) {
    if (q_.rows() == 0 || q_.rows() != q_.cols()) throw DomainError("chain matrix must be square and nonempty");
    if (!q_.allFinite()) throw DomainError("chain matrix has non-finite entries");
    if (q_.minCoeff() < 0.0) throw DomainError("chain matrix has negative entries");
    const double rho = spectral_radius(q_);
    if (rho >= 1.0 - transience_margin) {
        std::ostringstream os;
        os << "chain is not transient: spectral radius " << rho;
        throw SpectralRadiusError(rho, os.str());
    }
}

KernelMatrix green_from_chain(const TransientChain& chain) {
    const auto n = static_cast<Eigen::Index>(chain.dim());
    const Eigen::MatrixXd i_minus_q = Eigen::MatrixXd::Identity(n, n) - chain.q();
    return KernelMatrix(clamp_roundoff(invert(i_minus_q)));
}

Eigen::VectorXd excessive_reference_measure(const TransientChain& chain) {
    const Eigen::MatrixXd u = green_from_chain(chain).entries();
    return u.colwise().sum().transpose();
}

KernelMatrix green_with_reference(const TransientChain& chain) {
    const Eigen::MatrixXd u = green_from_chain(chain).entries();
    const Eigen::VectorXd m = u.colwise().sum().transpose();
    return KernelMatrix(u * m.cwiseInverse().asDiagonal());
}

std::string to_string(GreenClass cls) {
    switch (cls) {
    case GreenClass::green: return "green";
    case GreenClass::green_up_to_density: return "green-up-to-density";
    case GreenClass::not_green: return "not-green";
    }
    return "unknown";
}

GreenVerdict is_green(const KernelMatrix& g) {
    GreenVerdict out;
    const double scale = std::max(1.0, g.max_abs());
    for (std::size_t i = 0; i < g.dim(); ++i) {
        for (std::size_t j = 0; j < g.dim(); ++j) {
            if (g(i, j) < -tol::identity * scale) {
                out.verdict = Verdict::fail(Witness{"(a) negative entry", {i, j}, {g(i, j)}, std::nullopt, std::nullopt});
                return out;
            }
        }
    }
    Eigen::MatrixXd inv;
    try {
        inv = invert(g.entries());
    } catch (const SingularMatrixError& ex) {
        out.verdict = Verdict::fail(Witness{"(b) singular", {}, {ex.condition()}, std::nullopt, std::nullopt});
        return out;
    }
    const auto m = is_m_matrix(inv);
    if (!m.z_pattern.holds()) {
        Witness w = *m.z_pattern.witness;
        w.reason = "(c) inverse has a positive off-diagonal entry";
        out.verdict = Verdict::fail(std::move(w));
        return out;
    }
    const Eigen::VectorXd rows = inv.rowwise().sum();
    const double t = tol::identity * std::max(1.0, inv.cwiseAbs().maxCoeff()) * static_cast<double>(g.dim());
    for (Eigen::Index i = 0; i < rows.size(); ++i) {
        if (rows(i) < -t) {
            // (d) fails for the counting measure; d = G 1 gives M d = 1 >= 0.
            out.cls = GreenClass::green_up_to_density;
            out.density = g.entries().rowwise().sum();
            out.verdict = Verdict::pass("green up to a density factor: inverse row " + std::to_string(i + 1) +
                                        " has a negative sum; rescale by d = G 1");
            return out;
        }
    }
    out.cls = GreenClass::green;
    out.verdict = Verdict::pass();
    return out;
}

HadamardResult hadamard_power(const KernelMatrix& g, double beta) {
    if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("hadamard_power needs beta >= 1");
    Eigen::MatrixXd m = clamp_roundoff(g.entries());
    if (m.minCoeff() < 0.0) throw DomainError("negative-entry", "hadamard_power needs a nonnegative kernel");
    m = m.array().pow(beta).matrix();
    KernelMatrix p(std::move(m), g.symmetric());
    GreenVerdict v = is_green(p);
    return HadamardResult{std::move(p), std::move(v)};
}

std::vector<double> default_c_grid() { return {0.1, 0.5, 1.0, 2.0, 10.0}; }

PlusConstantReport plus_constant_check(const KernelMatrix& g, std::span<const double> c_grid, double beta,
                                       const IdOptions& options) {
    if (c_grid.empty()) throw DomainError("c grid must be nonempty");
    PlusConstantReport report;
    report.beta = beta;
    const auto n = static_cast<Eigen::Index>(g.dim());
    std::optional<std::size_t> first_fail;
    std::optional<std::size_t> first_open;
    for (double c : c_grid) {
        if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("c grid must be positive");
        const KernelMatrix shifted(g.entries() + Eigen::MatrixXd::Constant(n, n, c), g.symmetric());
        report.entries.push_back({c, id_verdict(shifted, beta, options)});
        const auto k = report.entries.size() - 1;
        if (report.entries[k].id.verdict.fails() && !first_fail) first_fail = k;
        if (report.entries[k].id.verdict.inconclusive() && !first_open) first_open = k;
    }
    if (first_fail) {
        const auto& e = report.entries[*first_fail];
        Witness w = e.id.verdict.witness.value_or(Witness{});
        w.reason = "G + c J is not ID at c = " + std::to_string(e.c) + ": " + w.reason;
        w.values.insert(w.values.begin(), e.c);
        report.verdict = Verdict::fail(std::move(w));
    } else if (first_open) {
        report.verdict = Verdict::undecided("undecided at c = " + std::to_string(report.entries[*first_open].c));
    } else {
        report.verdict = Verdict::pass();
    }
    return report;
}

KernelMatrix restriction(const KernelMatrix& g, std::span<const std::size_t> subset) {
    if (subset.empty()) throw DomainError("index", "restriction subset is empty");
    std::vector<std::size_t> seen(subset.begin(), subset.end());
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw DomainError("index", "restriction subset has repeated indices");
    if (seen.back() >= g.dim()) throw DomainError("index", "restriction index out of range");
    const auto k = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd m(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            m(a, b) = g(subset[static_cast<std::size_t>(a)], subset[static_cast<std::size_t>(b)]);
    return KernelMatrix(std::move(m), g.symmetric());
}

}  // namespace permacheck
