#include "permacheck/betaperm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "parallel.hpp"
#include "permacheck/matcore.hpp"

namespace permacheck {

std::vector<double> cycle_polynomial(const Eigen::MatrixXd& a, std::size_t cap) {
    if (a.rows() != a.cols()) throw DomainError("beta_permanent: matrix must be square");
    const auto m = static_cast<std::size_t>(a.rows());
    if (m > cap) {
        throw DomainError("beta_permanent: dimension " + std::to_string(m) + " exceeds cap " + std::to_string(cap));
    }
    if (m == 0) return {1.0};

    const std::size_t full = (std::size_t{1} << m) - 1;
    const auto at = [&](std::size_t i, std::size_t j) {
        return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    const auto lowbit = [](std::size_t mask) { return static_cast<std::size_t>(__builtin_ctzll(mask)); };

    // paths[mask * m + v]: weighted paths from lowbit(mask) through exactly
    // `mask`, ending at v.
    std::vector<double> paths((full + 1) * m, 0.0);
    std::vector<double> cyc(full + 1, 0.0);
    for (std::size_t s = 0; s < m; ++s) paths[(std::size_t{1} << s) * m + s] = 1.0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        const std::size_t s = lowbit(mask);
        if (mask == (std::size_t{1} << s)) {
            cyc[mask] = at(s, s);
        } else {
            double closing = 0.0;
            for (std::size_t v = s + 1; v < m; ++v)
                if (mask >> v & 1U) closing += paths[mask * m + v] * at(v, s);
            cyc[mask] = closing;
        }
        for (std::size_t v = s; v < m; ++v) {
            if (!(mask >> v & 1U)) continue;
            const double p = paths[mask * m + v];
            if (p == 0.0) continue;
            for (std::size_t w = s + 1; w < m; ++w) {
                if (mask >> w & 1U) continue;
                paths[(mask | std::size_t{1} << w) * m + w] += p * at(v, w);
            }
        }
    }

    // parts[mask]: cycle-count polynomial of the permutations of `mask`.
    std::vector<std::vector<double>> parts(full + 1);
    parts[0] = {1.0};
    for (std::size_t mask = 1; mask <= full; ++mask) {
        std::vector<double> poly(static_cast<std::size_t>(__builtin_popcountll(mask)) + 1, 0.0);
        const std::size_t low = std::size_t{1} << lowbit(mask);
        const std::size_t rest = mask ^ low;
        for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
            const std::size_t block = sub | low;
            const double c = cyc[block];
            if (c != 0.0) {
                const auto& tail = parts[mask ^ block];
                for (std::size_t k = 0; k < tail.size(); ++k) poly[k + 1] += c * tail[k];
            }
            if (sub == 0) break;
        }
        parts[mask] = std::move(poly);
    }
    return parts[full];
}

double evaluate_cycle_polynomial(std::span<const double> c, double beta, ExponentConvention convention) {
    if (c.empty()) return 0.0;
    const std::size_t m = c.size() - 1;
    if (convention == ExponentConvention::cycle_count) {
        double v = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) v = v * beta + c[k];
        return v;
    }
    if (m == 0) return c[0];
    if (beta == 0.0) throw DomainError("signature convention needs beta != 0");
    // sgn(tau) = (-1)^(m - cycles)
    double even = 0.0;
    double odd = 0.0;
    for (std::size_t k = 0; k <= m; ++k) ((m - k) % 2 == 0 ? even : odd) += c[k];
    return beta * even + odd / beta;
}

double beta_permanent(const Eigen::MatrixXd& a, double beta, ExponentConvention convention, std::size_t cap) {
    const auto poly = cycle_polynomial(a, cap);
    return evaluate_cycle_polynomial(poly, beta, convention);
}

ScanOptions default_scan_options() {
    ScanOptions o;
    for (int k = 1; k <= 20; ++k) o.beta_grid.push_back(0.1 * k);
    for (int k = 0; k <= 10; ++k) o.alpha_grid.push_back(0.5 * k);
    o.m_max = 5;
    return o;
}

namespace {

struct AlphaCell {
    std::optional<PositivityWitness> witness;
};

}  // namespace

PositivityReport beta_positivity_scan(const KernelMatrix& g, const ScanOptions& options) {
    if (options.beta_grid.empty() || options.alpha_grid.empty()) throw DomainError("scan grids must be nonempty");
    if (options.m_max == 0 || options.m_max > default_permanent_cap)
        throw DomainError("m_max must be in 1.." + std::to_string(default_permanent_cap));
    for (double b : options.beta_grid)
        if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("beta grid must be positive");
    for (double a : options.alpha_grid)
        if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("alpha grid must be nonnegative");

    const auto multisets = enumerate_multisets(g.dim(), options.m_max);

    // Resolvents first so singularity errors propagate from the calling thread.
    std::vector<KernelMatrix> resolvents;
    resolvents.reserve(options.alpha_grid.size());
    for (double a : options.alpha_grid) resolvents.push_back(resolvent(g, a));

    std::vector<AlphaCell> cells(options.alpha_grid.size());
    detail::parallel_for(options.alpha_grid.size(), options.threads, [&](std::size_t ia) {
        const auto& r = resolvents[ia].entries();
        std::vector<std::vector<double>> polys;
        std::vector<double> scales;
        polys.reserve(multisets.size());
        for (const auto& ms : multisets) {
            const Eigen::MatrixXd sub = ms.submatrix(r);
            polys.push_back(cycle_polynomial(sub));
            scales.push_back(std::pow(sub.cwiseAbs().maxCoeff(), static_cast<double>(ms.size())));
        }
        for (double beta : options.beta_grid) {
            for (std::size_t k = 0; k < multisets.size(); ++k) {
                const double v = evaluate_cycle_polynomial(polys[k], beta, options.convention);
                if (v < -tol::identity * scales[k]) {
                    cells[ia].witness = PositivityWitness{options.alpha_grid[ia], beta, multisets[k], v};
                    return;
                }
            }
        }
    });

    PositivityReport report;
    report.beta_grid = options.beta_grid;
    report.alpha_grid = options.alpha_grid;
    report.m_max = options.m_max;
    report.convention = options.convention;
    report.scanned = options.alpha_grid.size() * options.beta_grid.size() * multisets.size();
    report.verdict = Verdict::pass("holds over the scanned range only");
    for (auto& cell : cells) {
        if (cell.witness) {
            const auto& w = *cell.witness;
            report.verdict = Verdict::fail(Witness{"negative beta-permanent", w.indices.indices(), {w.value},
                                                   w.alpha, w.beta});
            report.witness = std::move(cell.witness);
            break;
        }
    }
    return report;
}

std::vector<double> default_battery_alphas() {
    std::vector<double> a;
    for (int k = 1; k <= 10; ++k) a.push_back(0.5 * k);
    return a;
}

namespace {

std::optional<Witness> sign_conditions(const Eigen::MatrixXd& g, std::optional<double> alpha) {
    const auto n = static_cast<std::size_t>(g.rows());
    const double scale = g.cwiseAbs().maxCoeff();
    const auto at = [&](std::size_t i, std::size_t j) {
        return g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double p = at(i, j) * at(j, i);
            if (p < -tol::identity * scale * scale)
                return Witness{"pairwise product G(i,j)G(j,i) < 0", {i, j}, {p}, alpha, std::nullopt};
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            for (std::size_t k = 0; k < n; ++k) {
                const double p = at(j, i) * at(j, k) * at(k, i);
                if (p < -tol::identity * scale * scale * scale)
                    return Witness{"triple product G(j,i)G(j,k)G(k,i) < 0", {i, j, k}, {p}, alpha, std::nullopt};
            }
        }
    }
    return std::nullopt;
}

}  // namespace

Verdict id_necessary_battery(const KernelMatrix& g, std::span<const double> alphas) {
    if (auto w = sign_conditions(g.entries(), std::nullopt)) return Verdict::fail(std::move(*w));
    std::string note;
    for (double a : alphas) {
        if (a == 0.0) continue;
        Eigen::MatrixXd r;
        try {
            r = resolvent(g, a).entries();
        } catch (const SingularMatrixError&) {
            note += "skipped singular alpha=" + std::to_string(a) + "; ";
            continue;
        }
        if (auto w = sign_conditions(r, a)) return Verdict::fail(std::move(*w), note);
    }
    return Verdict::pass(note);
}

Verdict id_necessary_battery(const KernelMatrix& g) {
    const auto alphas = default_battery_alphas();
    return id_necessary_battery(g, alphas);
}

}  // namespace permacheck
