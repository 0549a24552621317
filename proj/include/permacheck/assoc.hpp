#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "permacheck/green.hpp"
#include "permacheck/matrix_types.hpp"
#include "permacheck/sampler.hpp"

namespace permacheck {

/// A coordinatewise nondecreasing test function of psi.
struct IncreasingFunction {
    enum class Kind { upper_set, orthant, projection, maximum, minimum, soft_upper_set };

    Kind kind = Kind::projection;
    std::size_t coord = 0;                ///< upper_set, projection, soft_upper_set
    std::vector<double> thresholds;       ///< one per coordinate for orthant; one for upper_set/soft
    double slope = 1.0;                   ///< soft_upper_set: logistic slope
    std::string name;

    double operator()(std::span<const double> x) const;
};

/// Descriptor of a family; thresholds are set from empirical marginal quantiles.
struct IncreasingFunctionFamily {
    std::vector<double> quantile_levels{0.25, 0.5, 0.75};
    bool upper_sets = true;      ///< 1{x_i >= t_i(q)}
    bool orthants = true;        ///< 1{x >= t(q)} over all coordinates
    bool projections = true;
    bool max_min = true;
    std::vector<double> soft_slopes;   ///< logistic 1/(1+exp(-s (x_i - median_i)))
};

/// Instantiates the family on empirical quantiles of the (unweighted) draws.
std::vector<IncreasingFunction> realize_family(const IncreasingFunctionFamily& family, const Eigen::MatrixXd& psi);

struct PairStatistic {
    std::size_t first;
    std::size_t second;
    double covariance;
    double se;
    double z;
};

struct AssociationReport {
    Verdict verdict;
    std::vector<std::string> functions;
    std::vector<PairStatistic> pairs;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    std::size_t jackknife_groups = 0;
};

inline constexpr double association_z_threshold = -3.0;

struct AssociationOptions {
    std::size_t jackknife_groups = 100;
    unsigned threads = 1;
};

/// Covariances of all distinct family pairs over a sampled batch, with
/// delete-a-group jackknife standard errors. Fails with the most negative pair
/// when some z <= -3.
AssociationReport association_mc_test(const SampleBatch& batch, const IncreasingFunctionFamily& family,
                                       const AssociationOptions& options = {});
AssociationReport association_mc_test(const PermanentalSpec& spec, const IncreasingFunctionFamily& family,
                                      std::size_t n, std::uint64_t seed, const AssociationOptions& options = {});

/// E|eta_alpha(i) eta_alpha(j)| under covariance resolvent(G, alpha).
double abs_moment_along_resolvent(const KernelMatrix& g, double alpha, std::size_t i, std::size_t j);

/// Exact alpha-derivative of E|eta_alpha(i) eta_alpha(j)| (uses dG_alpha/dalpha = -G_alpha^2).
double abs_moment_alpha_derivative(const KernelMatrix& g, double alpha, std::size_t i, std::size_t j);

struct MonotonicityWitness {
    std::size_t scaling;        ///< index into the D set
    std::size_t i;
    std::size_t j;
    double alpha_from;
    double alpha_to;
    double value_from;
    double value_to;
};

struct MonotonicityReport {
    Verdict verdict;
    std::size_t scalings_tried = 0;
    std::optional<MonotonicityWitness> witness;
    std::optional<Eigen::VectorXd> witness_scaling;
};

/// For each D and each pair i < j, E|eta_alpha(i) eta_alpha(j)| over the
/// resolvent of D G D along the grid must be nonincreasing within
/// 1e-10 * max(1, value). The first increase is the witness.
MonotonicityReport resolvent_monotonicity_scan(const KernelMatrix& g, std::span<const double> alphas,
                                               std::span<const Eigen::VectorXd> scalings, double tolerance = 1e-10);

/// `count` positive diagonals, log-uniform on [1/spread, spread], identity first.
std::vector<Eigen::VectorXd> random_scalings(std::size_t dim, std::size_t count, std::uint64_t seed,
                                             double spread = 10.0);

/// Log density of ((eta_1 + r)^2, (eta_2 + r)^2) at (u, v) > 0 for a centered
/// 2x2 Gaussian with covariance C: four sign branches of the bivariate normal,
/// divided by the Jacobian 4 sqrt(uv).
double shifted_square_log_density(const Eigen::Matrix2d& c, double r, double u, double v);

/// P((eta_i + r)^2 <= t) for eta_i ~ N(0, var).
double shifted_square_cdf(double var, double r, double t);

/// Quantile of the above by bisection.
double shifted_square_quantile(double var, double r, double p);

/// `points` values geometrically spaced on [lo, hi], lo > 0.
std::vector<double> geometric_grid(double lo, double hi, std::size_t points);

struct LatticeGrid {
    std::vector<double> x;
    std::vector<double> y;
};

/// 40x40 geometric grid covering the 1%..99% marginal quantiles over all shifts.
LatticeGrid shifted_lattice_grid(const Eigen::Matrix2d& c, std::span<const double> shifts, std::size_t points = 40);

using LogDensity = std::function<double(double, double)>;

inline constexpr double lattice_tolerance = 1e-9;

/// h(x) h(y) <= h(x ^ y) h(x v y) (1 + tol) over every pair of grid points,
/// evaluated in logs. Witness values: x1, x2, y1, y2, lhs, rhs (log products).
Verdict fkg_lattice_test(const LogDensity& log_density, const LatticeGrid& grid, double tolerance = lattice_tolerance);

/// f(x) g(y) <= f(x v y) g(x ^ y) (1 + tol): the cross inequality of strong
/// stochastic dominance of f over g.
Verdict cross_lattice_test(const LogDensity& upper, const LogDensity& lower, const LatticeGrid& grid,
                           double tolerance = lattice_tolerance);

struct ShiftedOrderReport {
    Verdict verdict;
    GreenVerdict green;
    std::vector<std::pair<double, double>> r_pairs;
    std::optional<std::pair<double, double>> failing_pair;
    std::size_t grid_points = 0;
};

/// For each (r, r') with r >= r' >= 0, checks f_r(x) f_r'(y) <= f_r(x v y) f_r'(x ^ y)
/// for the shifted squared Gaussian densities of a symmetric PD 2x2 kernel.
/// The report carries is_green(G) alongside.
ShiftedOrderReport shifted_strong_order_test(const KernelMatrix& g, std::span<const std::pair<double, double>> r_pairs,
                                             std::size_t points = 40);

}  // namespace permacheck
