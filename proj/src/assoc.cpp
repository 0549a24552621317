#include "permacheck/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "permacheck/matcore.hpp"

namespace permacheck {

double IncreasingFunction::operator()(std::span<const double> x) const {
    switch (kind) {
    case Kind::upper_set: return x[coord] >= thresholds[0] ? 1.0 : 0.0;
    case Kind::orthant:
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < thresholds[i]) return 0.0;
        return 1.0;
    case Kind::projection: return x[coord];
    case Kind::maximum: return *std::max_element(x.begin(), x.end());
    case Kind::minimum: return *std::min_element(x.begin(), x.end());
    case Kind::soft_upper_set: return 1.0 / (1.0 + std::exp(-slope * (x[coord] - thresholds[0])));
    }
    return 0.0;
}

namespace {

double empirical_quantile(std::vector<double> v, double p) {
    const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(v.size() - 1)));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

std::string level_tag(double q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

}  // namespace

std::vector<IncreasingFunction> realize_family(const IncreasingFunctionFamily& family, const Eigen::MatrixXd& psi) {
    if (psi.rows() == 0) throw DomainError("family needs at least one draw");
    const auto n = static_cast<std::size_t>(psi.cols());
    std::vector<std::vector<double>> q(n);
    std::vector<double> median(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto col = psi.col(static_cast<Eigen::Index>(i));
        const std::vector<double> values(col.data(), col.data() + col.size());
        for (double level : family.quantile_levels) {
            if (!(level > 0.0 && level < 1.0)) throw DomainError("quantile levels must lie in (0, 1)");
            q[i].push_back(empirical_quantile(values, level));
        }
        median[i] = empirical_quantile(values, 0.5);
    }
    using K = IncreasingFunction::Kind;
    std::vector<IncreasingFunction> out;
    if (family.upper_sets)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < family.quantile_levels.size(); ++l)
                out.push_back({K::upper_set, i, {q[i][l]}, 1.0,
                               "1{x" + std::to_string(i + 1) + ">=q" + level_tag(family.quantile_levels[l]) + "}"});
    if (family.orthants && n > 1)
        for (std::size_t l = 0; l < family.quantile_levels.size(); ++l) {
            std::vector<double> t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = q[i][l];
            out.push_back({K::orthant, 0, std::move(t), 1.0, "1{x>=q" + level_tag(family.quantile_levels[l]) + "}"});
        }
    if (family.projections)
        for (std::size_t i = 0; i < n; ++i) out.push_back({K::projection, i, {}, 1.0, "x" + std::to_string(i + 1)});
    if (family.max_min && n > 1) {
        out.push_back({K::maximum, 0, {}, 1.0, "max"});
        out.push_back({K::minimum, 0, {}, 1.0, "min"});
    }
    for (double s : family.soft_slopes) {
        if (!(s > 0.0)) throw DomainError("soft slopes must be positive");
        for (std::size_t i = 0; i < n; ++i)
            out.push_back({K::soft_upper_set, i, {median[i]}, s,
                           "soft(x" + std::to_string(i + 1) + ",s=" + level_tag(s) + ")"});
    }
    return out;
}

namespace {

struct BlockSums {
    double w = 0.0;
    Eigen::VectorXd s;
    Eigen::MatrixXd p;
};

Eigen::MatrixXd covariance_from(double w, const Eigen::VectorXd& s, const Eigen::MatrixXd& p) {
    const Eigen::VectorXd mean = s / w;
    return p / w - mean * mean.transpose();
}

}  // namespace

AssociationReport association_mc_test(const SampleBatch& batch, const IncreasingFunctionFamily& family,
                                      const AssociationOptions& options) {
    const std::size_t n = batch.size();
    const std::size_t groups = options.jackknife_groups;
    if (groups < 2 || groups > n) throw DomainError("jackknife groups must be in 2..N");

    Eigen::MatrixXd psi(batch.draws.rows(), batch.draws.cols());
    for (std::size_t r = 0; r < n; ++r) psi.row(static_cast<Eigen::Index>(r)) = batch.psi(r).transpose();
    const auto functions = realize_family(family, psi);
    const auto f = static_cast<Eigen::Index>(functions.size());

    AssociationReport report;
    report.draws = n;
    report.seed = batch.seed;
    report.jackknife_groups = groups;
    for (const auto& fn : functions) report.functions.push_back(fn.name);
    if (f < 2) {
        report.verdict = Verdict::pass("fewer than two functions: nothing to test");
        return report;
    }

    std::vector<BlockSums> blocks(groups);
    detail::parallel_for(groups, options.threads, [&](std::size_t b) {
        const std::size_t begin = b * n / groups;
        const std::size_t end = (b + 1) * n / groups;
        BlockSums acc{0.0, Eigen::VectorXd::Zero(f), Eigen::MatrixXd::Zero(f, f)};
        Eigen::VectorXd vals(f);
        std::vector<double> x(psi.cols());
        for (std::size_t r = begin; r < end; ++r) {
            for (Eigen::Index c = 0; c < psi.cols(); ++c) x[static_cast<std::size_t>(c)] = psi(static_cast<Eigen::Index>(r), c);
            for (Eigen::Index k = 0; k < f; ++k) vals(k) = functions[static_cast<std::size_t>(k)](x);
            const double w = batch.weights(static_cast<Eigen::Index>(r));
            acc.w += w;
            acc.s += w * vals;
            acc.p.selfadjointView<Eigen::Upper>().rankUpdate(vals, w);
        }
        acc.p.triangularView<Eigen::StrictlyLower>() = acc.p.transpose();
        blocks[b] = std::move(acc);
    });

    BlockSums total{0.0, Eigen::VectorXd::Zero(f), Eigen::MatrixXd::Zero(f, f)};
    for (const auto& b : blocks) {
        total.w += b.w;
        total.s += b.s;
        total.p += b.p;
    }
    const Eigen::MatrixXd cov = covariance_from(total.w, total.s, total.p);
    std::vector<Eigen::MatrixXd> loo;
    loo.reserve(groups);
    Eigen::MatrixXd loo_mean = Eigen::MatrixXd::Zero(f, f);
    for (const auto& b : blocks) {
        loo.push_back(covariance_from(total.w - b.w, total.s - b.s, total.p - b.p));
        loo_mean += loo.back();
    }
    loo_mean /= static_cast<double>(groups);
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(f, f);
    for (const auto& c : loo) var += (c - loo_mean).array().square().matrix();
    var *= static_cast<double>(groups - 1) / static_cast<double>(groups);

    std::optional<std::size_t> worst;
    for (Eigen::Index a = 0; a < f; ++a) {
        for (Eigen::Index b = a + 1; b < f; ++b) {
            const double se = std::sqrt(var(a, b));
            const double z = se > 0.0 ? cov(a, b) / se : 0.0;
            report.pairs.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), cov(a, b), se, z});
            if (z <= association_z_threshold && (!worst || z < report.pairs[*worst].z)) worst = report.pairs.size() - 1;
        }
    }
    if (worst) {
        const auto& p = report.pairs[*worst];
        report.verdict = Verdict::fail(Witness{"negative covariance of increasing functions " +
                                                   report.functions[p.first] + ", " + report.functions[p.second],
                                               {p.first, p.second}, {p.covariance, p.se, p.z}, std::nullopt,
                                               std::nullopt});
    } else {
        report.verdict = Verdict::pass("no pair with z <= -3");
    }
    return report;
}

AssociationReport association_mc_test(const PermanentalSpec& spec, const IncreasingFunctionFamily& family,
                                      std::size_t n, std::uint64_t seed, const AssociationOptions& options) {
    return association_mc_test(sample_permanental(spec, n, seed, options.threads), family, options);
}

namespace {

double pair_abs_moment(const Eigen::MatrixXd& c, Eigen::Index i, Eigen::Index j) {
    const double si = std::sqrt(std::max(c(i, i), 0.0));
    const double sj = std::sqrt(std::max(c(j, j), 0.0));
    if (si == 0.0 || sj == 0.0) return 0.0;
    const double rho = std::clamp(c(i, j) / (si * sj), -1.0, 1.0);
    return abs_product_moment(si, sj, rho);
}

}  // namespace

double abs_moment_along_resolvent(const KernelMatrix& g, double alpha, std::size_t i, std::size_t j) {
    const Eigen::MatrixXd c = resolvent(g, alpha).entries();
    return pair_abs_moment(c, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double abs_moment_alpha_derivative(const KernelMatrix& g, double alpha, std::size_t i, std::size_t j) {
    const Eigen::MatrixXd c = resolvent(g, alpha).entries();
    const Eigen::MatrixXd s = c * c;
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(j);
    const double si = std::sqrt(c(a, a));
    const double sj = std::sqrt(c(b, b));
    const double rho = std::clamp(c(a, b) / (si * sj), -1.0, 1.0);
    const double root = std::sqrt(1.0 - rho * rho);
    return -(2.0 / std::numbers::pi) *
           (std::asin(rho) * s(a, b) + 0.5 * root * (sj / si * s(a, a) + si / sj * s(b, b)));
}

MonotonicityReport resolvent_monotonicity_scan(const KernelMatrix& g, std::span<const double> alphas,
                                               std::span<const Eigen::VectorXd> scalings, double tolerance) {
    if (!g.symmetric()) throw DomainError("monotonicity scan needs a symmetric kernel");
    if (alphas.size() < 2) throw DomainError("alpha grid needs at least two points");
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        if (!(alphas[k] >= 0.0)) throw DomainError("alpha grid must be nonnegative");
        if (k > 0 && !(alphas[k] > alphas[k - 1])) throw DomainError("alpha grid must be increasing");
    }
    const auto n = static_cast<Eigen::Index>(g.dim());
    MonotonicityReport report;
    for (std::size_t d = 0; d < scalings.size(); ++d) {
        const Eigen::VectorXd& diag = scalings[d];
        if (diag.size() != n || !(diag.minCoeff() > 0.0)) throw DomainError("scalings must be positive diagonals");
        const KernelMatrix scaled(diag.asDiagonal() * g.entries() * diag.asDiagonal(), true);
        std::vector<Eigen::MatrixXd> res;
        res.reserve(alphas.size());
        for (double a : alphas) res.push_back(resolvent(scaled, a).entries());
        ++report.scalings_tried;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                double prev = pair_abs_moment(res[0], i, j);
                for (std::size_t k = 1; k < alphas.size(); ++k) {
                    const double cur = pair_abs_moment(res[k], i, j);
                    if (cur > prev + tolerance * std::max(1.0, prev)) {
                        MonotonicityWitness w{d, static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                              alphas[k - 1], alphas[k], prev, cur};
                        report.verdict = Verdict::fail(
                            Witness{"E|eta_a(i) eta_a(j)| increases in alpha", {w.i, w.j}, {prev, cur}, alphas[k],
                                    std::nullopt},
                            "scaling #" + std::to_string(d + 1));
                        report.witness = w;
                        report.witness_scaling = diag;
                        return report;
                    }
                    prev = cur;
                }
            }
        }
    }
    report.verdict = Verdict::pass("nonincreasing for every scaling and pair");
    return report;
}

std::vector<Eigen::VectorXd> random_scalings(std::size_t dim, std::size_t count, std::uint64_t seed, double spread) {
    if (!(spread >= 1.0)) throw DomainError("scaling spread must be >= 1");
    std::vector<Eigen::VectorXd> out;
    out.reserve(count);
    const double span = std::log(spread);
    for (std::size_t k = 0; k < count; ++k) {
        if (k == 0) {
            out.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim)));
            continue;
        }
        CounterRng rng(seed, k);
        std::uniform_real_distribution<double> u(-span, span);
        Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(u(rng));
        out.push_back(std::move(d));
    }
    return out;
}

double shifted_square_log_density(const Eigen::Matrix2d& c, double r, double u, double v) {
    if (!(u > 0.0) || !(v > 0.0)) return -std::numeric_limits<double>::infinity();
    const double det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    const Eigen::Matrix2d inv = c.inverse();
    const double su = std::sqrt(u);
    const double sv = std::sqrt(v);
    double q[4];
    int k = 0;
    for (double s1 : {1.0, -1.0}) {
        for (double s2 : {1.0, -1.0}) {
            const Eigen::Vector2d z(s1 * su - r, s2 * sv - r);
            q[k++] = -0.5 * z.dot(inv * z);
        }
    }
    const double top = *std::max_element(q, q + 4);
    double sum = 0.0;
    for (double e : q) sum += std::exp(e - top);
    return top + std::log(sum) - std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - std::log(4.0) -
           0.5 * std::log(u * v);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double shifted_square_cdf(double var, double r, double t) {
    if (t <= 0.0) return 0.0;
    const double s = std::sqrt(var);
    const double st = std::sqrt(t);
    return normal_cdf((st - r) / s) - normal_cdf((-st - r) / s);
}

double shifted_square_quantile(double var, double r, double p) {
    if (!(var > 0.0)) throw DomainError("variance must be positive");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    double lo = 0.0;
    double hi = std::pow(std::abs(r) + 12.0 * std::sqrt(var), 2);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (shifted_square_cdf(var, r, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi > lo) || points < 2) throw DomainError("geometric grid needs 0 < lo < hi and >= 2 points");
    std::vector<double> out(points);
    const double ratio = std::log(hi / lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) out[k] = lo * std::exp(ratio * static_cast<double>(k));
    out.back() = hi;
    return out;
}

LatticeGrid shifted_lattice_grid(const Eigen::Matrix2d& c, std::span<const double> shifts, std::size_t points) {
    if (shifts.empty()) throw DomainError("need at least one shift");
    LatticeGrid grid;
    for (int axis = 0; axis < 2; ++axis) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (double r : shifts) {
            lo = std::min(lo, shifted_square_quantile(c(axis, axis), r, 0.01));
            hi = std::max(hi, shifted_square_quantile(c(axis, axis), r, 0.99));
        }
        (axis == 0 ? grid.x : grid.y) = geometric_grid(lo, hi, points);
    }
    return grid;
}

namespace {

using Table = std::vector<std::vector<double>>;

Table tabulate(const LogDensity& h, const LatticeGrid& grid) {
    Table t(grid.x.size(), std::vector<double>(grid.y.size()));
    for (std::size_t a = 0; a < grid.x.size(); ++a)
        for (std::size_t b = 0; b < grid.y.size(); ++b) t[a][b] = h(grid.x[a], grid.y[b]);
    return t;
}

Witness lattice_witness(const std::string& reason, const LatticeGrid& grid, std::size_t a1, std::size_t b1,
                        std::size_t a2, std::size_t b2, double lhs, double rhs) {
    return Witness{reason, {a1, b1, a2, b2}, {grid.x[a1], grid.y[b1], grid.x[a2], grid.y[b2], lhs, rhs},
                   std::nullopt, std::nullopt};
}

}  // namespace

Verdict fkg_lattice_test(const LogDensity& log_density, const LatticeGrid& grid, double tolerance) {
    const Table t = tabulate(log_density, grid);
    const double slack = std::log1p(tolerance);
    const std::size_t nx = grid.x.size();
    const std::size_t ny = grid.y.size();
    // Comparable pairs give equality; only x1 < x2, y1 > y2 can fail.
    for (std::size_t a1 = 0; a1 < nx; ++a1)
        for (std::size_t a2 = a1 + 1; a2 < nx; ++a2)
            for (std::size_t b2 = 0; b2 < ny; ++b2)
                for (std::size_t b1 = b2 + 1; b1 < ny; ++b1) {
                    const double lhs = t[a1][b1] + t[a2][b2];
                    const double rhs = t[a1][b2] + t[a2][b1];
                    if (lhs > rhs + slack)
                        return Verdict::fail(lattice_witness("h(x)h(y) > h(x^y)h(xvy)", grid, a1, b1, a2, b2, lhs, rhs));
                }
    return Verdict::pass();
}

Verdict cross_lattice_test(const LogDensity& upper, const LogDensity& lower, const LatticeGrid& grid,
                           double tolerance) {
    const Table f = tabulate(upper, grid);
    const Table g = tabulate(lower, grid);
    const double slack = std::log1p(tolerance);
    const std::size_t nx = grid.x.size();
    const std::size_t ny = grid.y.size();
    for (std::size_t a1 = 0; a1 < nx; ++a1)
        for (std::size_t b1 = 0; b1 < ny; ++b1)
            for (std::size_t a2 = 0; a2 < nx; ++a2)
                for (std::size_t b2 = 0; b2 < ny; ++b2) {
                    const double lhs = f[a1][b1] + g[a2][b2];
                    const double rhs = f[std::max(a1, a2)][std::max(b1, b2)] + g[std::min(a1, a2)][std::min(b1, b2)];
                    if (lhs > rhs + slack)
                        return Verdict::fail(
                            lattice_witness("f(x)g(y) > f(xvy)g(x^y)", grid, a1, b1, a2, b2, lhs, rhs));
                }
    return Verdict::pass();
}

ShiftedOrderReport shifted_strong_order_test(const KernelMatrix& g, std::span<const std::pair<double, double>> r_pairs,
                                             std::size_t points) {
    if (g.dim() != 2 || !g.symmetric()) throw DomainError("shifted order test needs a symmetric 2x2 kernel");
    if (r_pairs.empty()) throw DomainError("need at least one r pair");
    const Eigen::Matrix2d c = g.entries();
    if (!(c(0, 0) > 0.0) || !(c(0, 0) * c(1, 1) - c(0, 1) * c(0, 1) > 0.0)) {
        throw NotPositiveDefiniteError(min_symmetric_eigenvalue(g.entries()), "kernel must be positive definite");
    }
    std::vector<double> shifts;
    for (const auto& [r, rp] : r_pairs) {
        if (!(rp >= 0.0) || !(r >= rp) || !std::isfinite(r)) throw DomainError("r pairs need r >= r' >= 0");
        shifts.push_back(r);
        shifts.push_back(rp);
    }
    const LatticeGrid grid = shifted_lattice_grid(c, shifts, points);

    ShiftedOrderReport report;
    report.r_pairs.assign(r_pairs.begin(), r_pairs.end());
    report.grid_points = points;
    report.green = is_green(g);
    report.verdict = Verdict::pass();
    for (const auto& [r, rp] : r_pairs) {
        const auto fr = [&, r = r](double u, double v) { return shifted_square_log_density(c, r, u, v); };
        const auto frp = [&, rp = rp](double u, double v) { return shifted_square_log_density(c, rp, u, v); };
        Verdict v = r == rp ? fkg_lattice_test(fr, grid) : cross_lattice_test(fr, frp, grid);
        if (v.fails()) {
            v.witness->values.push_back(r);
            v.witness->values.push_back(rp);
            v.note = "r = " + std::to_string(r) + ", r' = " + std::to_string(rp);
            report.failing_pair = std::make_pair(r, rp);
            report.verdict = std::move(v);
            return report;
        }
    }
    return report;
}

}  // namespace permacheck
