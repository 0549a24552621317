#include <doctest.h>

#include "permacheck/betaperm.hpp"
#include "permacheck/idcheck.hpp"
#include "permacheck/matcore.hpp"
#include "permacheck/sampler.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace permacheck;
using testsupport::Rng;

namespace {

KernelMatrix pair_kernel(double rho) {
    Eigen::MatrixXd g(2, 2);
    g << 1, rho, rho, 1;
    return KernelMatrix(g);
}

bool within(const Estimate& e, double want, double k = 3.0) { return std::abs(e.mean - want) <= k * e.se; }

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("counter rng is keyed by seed and index") {
    CounterRng a(1, 5), b(1, 5), c(1, 6), d(2, 5);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("zero kernel gives zero draws") {
    const auto b = sample_gaussian(KernelMatrix(Eigen::MatrixXd::Zero(3, 3)), 100, 1);
    CHECK(b.draws.cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.weights.isOnes());
}

TEST_CASE("square root rejects indefinite kernels and clips roundoff") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(psd_square_root(KernelMatrix(bad)), NotPositiveDefiniteError);
    Eigen::MatrixXd rank1 = Eigen::MatrixXd::Ones(3, 3);
    const Eigen::MatrixXd s = psd_square_root(KernelMatrix(rank1));
    CHECK((s * s.transpose() - rank1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian variances and correlation") {
    const std::size_t n = 1000000;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d.diagonal() << 1, 4;
    const auto b = sample_gaussian(KernelMatrix(d), n, 11);
    for (int i = 0; i < 2; ++i) {
        const double var = b.draws.col(i).squaredNorm() / static_cast<double>(n);
        CHECK(std::abs(var - d(i, i)) <= 3.0 * std::sqrt(2.0 / n) * d(i, i));
    }
    const auto c = sample_gaussian(pair_kernel(0.5), n, 12);
    const double r = c.draws.col(0).dot(c.draws.col(1)) /
                     std::sqrt(c.draws.col(0).squaredNorm() * c.draws.col(1).squaredNorm());
    // Fisher SE of the correlation coefficient
    CHECK(std::abs(r - 0.5) <= 3.0 * (1.0 - 0.25) / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("squared gaussian marginals and gamma moments") {
    PermanentalSpec k1{pair_kernel(0.3), 2.0};
    const auto b = sample_permanental(k1, 200000, 13);
    CHECK(b.kind == BatchKind::permanental);
    const auto m = weighted_mean(b, [](const Eigen::VectorXd& p) { return p(0); });
    CHECK(within(m, 1.0));

    const double s2 = 2.5;
    PermanentalSpec k2{KernelMatrix(Eigen::MatrixXd::Constant(1, 1, s2)), 1.0};
    REQUIRE(k2.shape() == 2);
    const auto c = sample_permanental(k2, 1000000, 14);
    CHECK(within(weighted_mean(c, [](const Eigen::VectorXd& p) { return p(0); }), 2.0 * s2));
    CHECK(within(weighted_mean(c, [](const Eigen::VectorXd& p) { return p(0) * p(0); }), 8.0 * s2 * s2));
}

TEST_CASE("invalid index") {
    PermanentalSpec s{pair_kernel(0.5), 0.7};
    CHECK_FALSE(s.shape());
    CHECK_THROWS_AS(sample_permanental(s, 10, 1), DomainError);
    PermanentalSpec t{pair_kernel(0.5), 2.0 / 3.0};
    CHECK(t.shape() == 3);
}

TEST_CASE("laplace transform example") {
    PermanentalSpec s{pair_kernel(0.5), 2.0};
    const auto b = sample_permanental(s, 1000000, 15);
    const std::vector<double> x{1.0, 2.0};
    const double exact = laplace_exact(s.kernel, x, 2.0);
    // |I + diag(1,2) G| = 2 * 3 - 0.5 * 1
    CHECK(exact == doctest::Approx(std::pow(5.5, -0.5)));
    CHECK(within(laplace_estimate(b, x), exact));
}

TEST_CASE("laplace transform law on random kernels") {
    Rng rng(16);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + trial % 4;
        const int k = 1 + trial % 3;
        const PermanentalSpec s{KernelMatrix(testsupport::random_correlation(rng, n)), 2.0 / k};
        const auto b = sample_permanental(s, 200000, 100 + trial);
        for (int p = 0; p < 5; ++p) {
            std::vector<double> x(static_cast<std::size_t>(n));
            for (auto& v : x) v = u(rng);
            CHECK(within(laplace_estimate(b, x), laplace_exact(s.kernel, x, s.index_beta), 3.5));
        }
    }
}

TEST_CASE("tilt examples") {
    PermanentalSpec s{pair_kernel(0.5), 2.0};
    const auto base = sample_permanental(s, 1000000, 17);
    const auto zero = tilt_resolvent(base, 0.0);
    CHECK(zero.weights.isOnes());
    CHECK(zero.raw_normalizer == 1.0);

    const auto t = tilt_resolvent(base, 1.0);
    CHECK(t.weights.mean() == doctest::Approx(1.0));
    const KernelMatrix g1 = resolvent(s.kernel, 1.0);
    CHECK(within(weighted_mean(t, [](const Eigen::VectorXd& p) { return p(0); }), g1(0, 0)));
    CHECK(std::abs(t.raw_normalizer - exact_tilt_normalizer(s.kernel, 1.0, 2.0)) <= 3.0 * t.raw_normalizer_se);

    const std::vector<double> x{0.7, 1.3};
    CHECK(within(laplace_estimate(t, x), laplace_exact(g1, x, 2.0)));
    // determinant identity behind the tilted Laplace transform
    const std::vector<double> shifted{1.7, 2.3};
    const std::vector<double> ones{1.0, 1.0};
    CHECK(laplace_exact(g1, x, 2.0) ==
          doctest::Approx(laplace_exact(s.kernel, shifted, 2.0) / laplace_exact(s.kernel, ones, 2.0)));
    CHECK_THROWS_AS(tilt_resolvent(t, 1.0), DomainError);
}

TEST_CASE("abs_product_moment and sign_moment closed forms") {
    CHECK(abs_product_moment(1, 1, 1) == doctest::Approx(1.0));
    CHECK(abs_product_moment(2, 3, 0) == doctest::Approx(6.0 * 2.0 / std::numbers::pi));
    CHECK(sign_moment(0.0) == 0.0);
    CHECK(sign_moment(1.0) == doctest::Approx(1.0));
    CHECK(sign_moment(0.5) == doctest::Approx(1.0 / 3.0));
    CHECK(sign_moment(-0.5) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("closed-form moments agree with Monte Carlo") {
    for (double rho : {-0.8, 0.0, 0.5, 0.95}) {
        const auto b = sample_gaussian(pair_kernel(rho), 1000000, 18);
        const auto a = weighted_mean_raw(b, [](const Eigen::VectorXd& e) { return std::abs(e(0) * e(1)); });
        CHECK(within(a, abs_product_moment(1, 1, rho)));
        const auto s = weighted_mean_raw(b, [](const Eigen::VectorXd& e) { return e(0) * e(1) > 0 ? 1.0 : -1.0; });
        CHECK(within(s, sign_moment(rho)));
    }
}

TEST_CASE("batches are identical across thread counts") {
    Rng rng(19);
    PermanentalSpec s{KernelMatrix(testsupport::random_correlation(rng, 3)), 1.0};
    const auto a = sample_permanental(s, 10001, 20, 1);
    const auto b = sample_permanental(s, 10001, 20, 4);
    CHECK(a.draws == b.draws);
    const auto c = sample_permanental(s, 10001, 21, 1);
    CHECK(a.draws != c.draws);
    // a longer batch extends a shorter one
    const auto d = sample_permanental(s, 500, 20, 3);
    CHECK(d.draws == a.draws.topRows(500));
}

TEST_CASE("batch round trip through the binary format") {
    PermanentalSpec s{pair_kernel(0.25), 2.0};
    for (double alpha : {-1.0, 0.5}) {
        auto b = sample_permanental(s, 257, 22);
        if (alpha > 0) b = tilt_resolvent(b, alpha);
        std::stringstream ss;
        write_batch(ss, b);
        const auto r = read_batch(ss);
        CHECK(r.draws == b.draws);
        CHECK(r.weights == b.weights);
        CHECK(r.seed == b.seed);
        CHECK(r.kind == b.kind);
        CHECK(r.tilt_alpha == b.tilt_alpha);
        CHECK(r.spec.kernel.entries() == b.spec.kernel.entries());
        CHECK(r.spec.index_beta == b.spec.index_beta);
        CHECK(r.raw_normalizer == b.raw_normalizer);
    }
    std::stringstream junk("{\"format\": \"other\"}\n");
    CHECK_THROWS_AS(read_batch(junk), SchemaError);
}

TEST_CASE("tilted batches keep an effective sample size of at least N/10") {
    Rng rng(23);
    const std::size_t n = 20000;
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = 2 + trial % 3;
        const PermanentalSpec s{KernelMatrix(testsupport::random_correlation(rng, dim)), 2.0};
        const auto b = sample_permanental(s, n, 200 + trial);
        for (double alpha : default_scan_options().alpha_grid) {
            const double ess = effective_sample_size(tilt_resolvent(b, alpha));
            CHECK(ess >= 0.1 * static_cast<double>(n));
        }
    }
}

TEST_CASE("sign-moment inequality holds along resolvents of ID kernels") {
    Rng rng(24);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 3;
        Eigen::MatrixXd g = testsupport::random_inverse_m(rng, n);
        const auto sigma = testsupport::random_signs(rng, n);
        g = Signature(sigma).conjugate(g);
        const KernelMatrix k(g);
        REQUIRE(bapat_test(k).verdict.holds());
        for (double alpha : default_scan_options().alpha_grid) {
            const Eigen::MatrixXd ga = resolvent(k, alpha).entries();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double rho = ga(i, j) / std::sqrt(ga(i, i) * ga(j, j));
                    CHECK(ga(i, j) * sign_moment(rho) >= -1e-12);
                }
        }
    }
}

}  // TEST_SUITE
