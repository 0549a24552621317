#include "permacheck/sampler.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "permacheck/idcheck.hpp"
#include "permacheck/matcore.hpp"
#include "permacheck/matrix_io.hpp"

namespace permacheck {

namespace {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
constexpr std::size_t block_rows = 4096;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

template <class RowFn>
void fill_rows(Eigen::MatrixXd& out, unsigned threads, RowFn&& row_fn) {
    const auto n = static_cast<std::size_t>(out.rows());
    const std::size_t blocks = (n + block_rows - 1) / block_rows;
    detail::parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * block_rows);
        for (std::size_t r = b * block_rows; r < end; ++r) row_fn(r, out.row(static_cast<Eigen::Index>(r)));
    });
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index) : state_(mix64(seed ^ mix64(index + golden))) {}

CounterRng::result_type CounterRng::operator()() {
    state_ += golden;
    return mix64(state_);
}

std::optional<int> PermanentalSpec::shape() const {
    if (!(index_beta > 0.0) || !std::isfinite(index_beta)) return std::nullopt;
    const double k = std::round(2.0 / index_beta);
    if (k < 1.0 || std::abs(2.0 / k - index_beta) > 1e-12 * index_beta) return std::nullopt;
    return static_cast<int>(k);
}

std::string to_string(BatchKind kind) { return kind == BatchKind::gaussian ? "gaussian" : "permanental"; }

Eigen::VectorXd SampleBatch::psi(std::size_t r) const {
    const auto row = draws.row(static_cast<Eigen::Index>(r)).transpose();
    if (kind == BatchKind::gaussian) return row.array().square();
    return row;
}

Eigen::MatrixXd psd_square_root(const KernelMatrix& g) {
    if (!g.symmetric()) throw DomainError("sampling needs a symmetric kernel");
    const Eigen::MatrixXd s = 0.5 * (g.entries() + g.entries().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw NumericError("nonconvergence", "symmetric eigen-decomposition failed");
    const double floor = -tol::psd * inf_norm(s);
    Eigen::VectorXd lambda = es.eigenvalues();
    if (lambda.minCoeff() < floor) {
        std::ostringstream os;
        os << "kernel is not positive semidefinite (smallest eigenvalue " << lambda.minCoeff() << ")";
        throw NotPositiveDefiniteError(lambda.minCoeff(), os.str());
    }
    lambda = lambda.cwiseMax(0.0);
    return es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

SampleBatch sample_gaussian(const KernelMatrix& g, std::size_t n, std::uint64_t seed, unsigned threads) {
    if (n == 0) throw DomainError("sample size must be positive");
    const Eigen::MatrixXd root = psd_square_root(g);
    const auto dim = root.rows();
    SampleBatch batch{Eigen::MatrixXd(static_cast<Eigen::Index>(n), dim),
                      Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)),
                      seed,
                      PermanentalSpec{g, 2.0},
                      BatchKind::gaussian,
                      std::nullopt};
    fill_rows(batch.draws, threads, [&](std::size_t r, auto row) {
        CounterRng rng(seed, r);
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(dim);
        for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(rng);
        row = (root * z).transpose();
    });
    return batch;
}

SampleBatch sample_permanental(const PermanentalSpec& spec, std::size_t n, std::uint64_t seed, unsigned threads) {
    if (n == 0) throw DomainError("sample size must be positive");
    const auto k = spec.shape();
    if (!k) throw DomainError("invalid-index", "direct sampling needs beta = 2/k for an integer k >= 1");
    const KernelMatrix* kernel = &spec.kernel;
    std::optional<KernelMatrix> sym;
    if (!spec.kernel.symmetric()) {
        if (spec.kernel.dim() != 2) throw DomainError("nonsymmetric kernels are sampled only in dimension 2");
        sym = symmetrize_pair_kernel(spec.kernel);
        kernel = &*sym;
    }
    const Eigen::MatrixXd root = psd_square_root(*kernel);
    const auto dim = root.rows();
    SampleBatch batch{Eigen::MatrixXd(static_cast<Eigen::Index>(n), dim),
                      Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)),
                      seed,
                      spec,
                      BatchKind::permanental,
                      std::nullopt};
    fill_rows(batch.draws, threads, [&](std::size_t r, auto row) {
        CounterRng rng(seed, r);
        std::normal_distribution<double> normal;
        Eigen::VectorXd z(dim);
        Eigen::VectorXd psi = Eigen::VectorXd::Zero(dim);
        for (int rep = 0; rep < *k; ++rep) {
            for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(rng);
            psi += (root * z).array().square().matrix();
        }
        row = psi.transpose();
    });
    return batch;
}

SampleBatch tilt_resolvent(const SampleBatch& batch, double alpha) {
    if (batch.weighted()) throw DomainError("batch is already tilted");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be nonnegative");
    SampleBatch out = batch;
    out.tilt_alpha = alpha;
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::VectorXd logw(n);
    for (Eigen::Index r = 0; r < n; ++r) logw(r) = -0.5 * alpha * batch.psi(static_cast<std::size_t>(r)).sum();
    const double shift = logw.maxCoeff();
    const Eigen::VectorXd e = (logw.array() - shift).exp().matrix();
    const double mean = e.mean();
    const double var = (e.array() - mean).square().sum() / static_cast<double>(n);
    out.weights = e / mean;
    out.raw_normalizer = std::exp(shift) * mean;
    out.raw_normalizer_se = std::exp(shift) * std::sqrt(var / static_cast<double>(n));
    return out;
}

double exact_tilt_normalizer(const KernelMatrix& g, double alpha, double beta) {
    const std::vector<double> x(g.dim(), alpha);
    return laplace_exact(g, x, beta);
}

double abs_product_moment(double sigma_i, double sigma_j, double rho) {
    if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
    return 2.0 / std::numbers::pi * sigma_i * sigma_j * (rho * std::asin(rho) + std::sqrt(1.0 - rho * rho));
}

double sign_moment(double rho) {
    if (!(std::abs(rho) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
    return 2.0 / std::numbers::pi * std::asin(rho);
}

namespace {

Estimate weighted_mean_of(const SampleBatch& batch, const std::function<double(const Eigen::VectorXd&)>& f,
                          bool raw) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::VectorXd vals(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto idx = static_cast<std::size_t>(r);
        vals(r) = raw ? f(batch.draws.row(r).transpose()) : f(batch.psi(idx));
    }
    const double wsum = batch.weights.sum();
    const double mu = batch.weights.dot(vals) / wsum;
    const double s = (batch.weights.array().square() * (vals.array() - mu).square()).sum();
    return {mu, std::sqrt(s) / wsum};
}

}  // namespace

Estimate weighted_mean(const SampleBatch& batch, const std::function<double(const Eigen::VectorXd&)>& f) {
    return weighted_mean_of(batch, f, false);
}

Estimate weighted_mean_raw(const SampleBatch& batch, const std::function<double(const Eigen::VectorXd&)>& f) {
    return weighted_mean_of(batch, f, true);
}

Estimate laplace_estimate(const SampleBatch& batch, std::span<const double> x) {
    if (x.size() != batch.dim()) throw DomainError("Laplace point has the wrong dimension");
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    return weighted_mean(batch, [&](const Eigen::VectorXd& psi) { return std::exp(-0.5 * xv.dot(psi)); });
}

double laplace_exact(const KernelMatrix& g, std::span<const double> x, double beta) {
    if (!(beta > 0.0)) throw DomainError("index beta must be positive");
    const double d = det_i_plus_diag(g.entries(), x);
    if (!(d > 0.0)) throw NumericError("nonpositive-determinant", "|I + xG| is not positive");
    return std::pow(d, -1.0 / beta);
}

double effective_sample_size(const SampleBatch& batch) {
    const double s = batch.weights.sum();
    return s * s / batch.weights.squaredNorm();
}

namespace {

constexpr const char* batch_format = "permacheck-batch";

void write_doubles(std::ostream& os, const double* p, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            auto bits = std::bit_cast<std::uint64_t>(p[i]);
            bits = __builtin_bswap64(bits);
            os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
}

void read_doubles(std::istream& is, double* p, std::size_t count) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double)) throw ParseError("batch payload is truncated");
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < count; ++i)
            p[i] = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(p[i])));
    }
}

}  // namespace

void write_batch(std::ostream& os, const SampleBatch& batch) {
    nlohmann::json h;
    h["format"] = batch_format;
    h["version"] = 1;
    h["rows"] = batch.size();
    h["cols"] = batch.dim();
    h["seed"] = batch.seed;
    h["kind"] = to_string(batch.kind);
    h["spec"] = {{"kernel", to_json(batch.spec.kernel)}, {"index_beta", batch.spec.index_beta}};
    h["weighted"] = batch.weighted();
    h["tilt_alpha"] = batch.tilt_alpha ? nlohmann::json(*batch.tilt_alpha) : nlohmann::json(nullptr);
    h["raw_normalizer"] = batch.raw_normalizer;
    h["raw_normalizer_se"] = batch.raw_normalizer_se;
    os << h.dump() << '\n';
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = batch.draws;
    write_doubles(os, rm.data(), static_cast<std::size_t>(rm.size()));
    if (batch.weighted()) write_doubles(os, batch.weights.data(), batch.size());
}

SampleBatch read_batch(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("batch header is missing");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("batch header: ") + ex.what());
    }
    if (h.value("format", "") != batch_format || h.value("version", 0) != 1)
        throw SchemaError("unsupported batch format or version");
    try {
        const auto rows = h.at("rows").get<std::size_t>();
        const auto cols = h.at("cols").get<std::size_t>();
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(rows),
                                                                                   static_cast<Eigen::Index>(cols));
        read_doubles(is, rm.data(), rows * cols);
        Eigen::VectorXd weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows));
        std::optional<double> tilt;
        if (h.at("weighted").get<bool>()) {
            tilt = h.at("tilt_alpha").get<double>();
            read_doubles(is, weights.data(), rows);
        }
        SampleBatch b{rm,
                      std::move(weights),
                      h.at("seed").get<std::uint64_t>(),
                      PermanentalSpec{kernel_from_json(h.at("spec").at("kernel")),
                                      h.at("spec").at("index_beta").get<double>()},
                      h.at("kind").get<std::string>() == "gaussian" ? BatchKind::gaussian : BatchKind::permanental,
                      tilt};
        b.raw_normalizer = h.value("raw_normalizer", 1.0);
        b.raw_normalizer_se = h.value("raw_normalizer_se", 0.0);
        return b;
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("batch header: ") + ex.what());
    }
}

}  // namespace permacheck
