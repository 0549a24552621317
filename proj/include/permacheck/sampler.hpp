#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "permacheck/matrix_types.hpp"

namespace permacheck {

/// SplitMix64 stream keyed by (seed, draw index). Satisfies
/// UniformRandomBitGenerator, so any std distribution can consume it.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::uint64_t state_;
};

/// Kernel and index of a permanental law with Laplace transform
/// |I + alpha G|^{-1/beta}.
struct PermanentalSpec {
    KernelMatrix kernel;
    double index_beta = 2.0;

    /// k with beta = 2/k, or nullopt when beta is not of that form.
    std::optional<int> shape() const;
};

enum class BatchKind { gaussian, permanental };

std::string to_string(BatchKind kind);

/// Draws are eta (gaussian) or psi (permanental), one row per draw. Weights
/// average to 1; untilted batches have all weights 1.
struct SampleBatch {
    Eigen::MatrixXd draws;
    Eigen::VectorXd weights;
    std::uint64_t seed = 0;
    PermanentalSpec spec;
    BatchKind kind = BatchKind::permanental;
    std::optional<double> tilt_alpha;
    /// Empirical mean of exp(-(alpha/2) sum psi) and its standard error.
    double raw_normalizer = 1.0;
    double raw_normalizer_se = 0.0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(draws.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(draws.cols()); }
    bool weighted() const noexcept { return tilt_alpha.has_value(); }

    /// psi of draw r (squares the row for gaussian batches).
    Eigen::VectorXd psi(std::size_t r) const;
};

/// Square root S with S S^T = G from the symmetric eigen-decomposition.
/// Eigenvalues in [-1e-9 ||G||, 0) are clipped; below that NotPositiveDefiniteError.
Eigen::MatrixXd psd_square_root(const KernelMatrix& g);

SampleBatch sample_gaussian(const KernelMatrix& g, std::size_t n, std::uint64_t seed, unsigned threads = 1);

/// Sum of k = 2/beta independent squared Gaussian vectors with covariance G.
/// A nonsymmetric 2x2 kernel is sampled through symmetrize_pair_kernel.
SampleBatch sample_permanental(const PermanentalSpec& spec, std::size_t n, std::uint64_t seed,
                               unsigned threads = 1);

/// Reweights an untilted batch by exp(-(alpha/2) sum psi), normalized to mean
/// 1. Weighted expectations then estimate the law with kernel resolvent(G, alpha).
SampleBatch tilt_resolvent(const SampleBatch& batch, double alpha);

/// E[exp(-(alpha/2) sum psi)] = |I + alpha G|^{-1/beta}, the exact tilt normalizer.
double exact_tilt_normalizer(const KernelMatrix& g, double alpha, double beta);

/// E|X Y| for centered Gaussians with standard deviations s_i, s_j and correlation rho.
double abs_product_moment(double sigma_i, double sigma_j, double rho);

/// E sgn(X Y) = (2/pi) arcsin(rho).
double sign_moment(double rho);

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

/// Self-normalized weighted mean of f(psi) and its delta-method standard error.
Estimate weighted_mean(const SampleBatch& batch, const std::function<double(const Eigen::VectorXd&)>& f);

/// Same, applied to the raw draws (eta for gaussian batches).
Estimate weighted_mean_raw(const SampleBatch& batch, const std::function<double(const Eigen::VectorXd&)>& f);

/// MC estimate of E[exp(-(1/2) sum x_i psi_i)].
Estimate laplace_estimate(const SampleBatch& batch, std::span<const double> x);

/// |I + diag(x) G|^{-1/beta}.
double laplace_exact(const KernelMatrix& g, std::span<const double> x, double beta);

/// (sum w)^2 / sum w^2.
double effective_sample_size(const SampleBatch& batch);

/// One JSON header line, then row-major little-endian doubles, then the
/// weights when the batch is weighted.
void write_batch(std::ostream& os, const SampleBatch& batch);
SampleBatch read_batch(std::istream& is);

}  // namespace permacheck
