#include <doctest.h>

#include "permacheck/betaperm.hpp"
#include "permacheck/idcheck.hpp"
#include "permacheck/matcore.hpp"
#include "support.hpp"

using namespace permacheck;
using testsupport::Rng;

TEST_SUITE("betaperm") {

TEST_CASE("beta-permanent examples") {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    for (double b : {0.3, 1.0, 2.5}) CHECK(beta_permanent(id, b) == doctest::Approx(b * b));
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 3, 4;
    CHECK(beta_permanent(a, 1.0) == 10.0);
    CHECK(beta_permanent(a, -1.0) == -2.0);
    CHECK(beta_permanent(a, -1.0) == doctest::Approx(a.determinant()));
}

TEST_CASE("dimension cap") {
    CHECK_THROWS_AS(beta_permanent(Eigen::MatrixXd::Identity(9, 9), 1.0), DomainError);
    CHECK(beta_permanent(Eigen::MatrixXd::Identity(9, 9), 1.0, ExponentConvention::cycle_count, 9) == 1.0);
}

TEST_CASE("subset recursion equals the naive permutation loop exactly on integer matrices") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 7;
        const Eigen::MatrixXd a = testsupport::integer_matrix(rng, m, -9, 9);
        for (double b : {0.5, 2.0, -1.0, 1.5}) CHECK(beta_permanent(a, b) == testsupport::naive_beta_permanent(a, b));
    }
}

TEST_CASE("real matrices agree with the naive loop to roundoff") {
    Rng rng(22);
    for (int trial = 0; trial < 60; ++trial) {
        const int m = 1 + trial % 7;
        const Eigen::MatrixXd a = testsupport::uniform_matrix(rng, m, -1, 1);
        for (double b : {0.1, 0.7, 1.9}) {
            const double want = testsupport::naive_beta_permanent(a, b);
            const double scale = testsupport::naive_beta_permanent(a.cwiseAbs(), std::abs(b));
            CHECK(std::abs(beta_permanent(a, b) - want) <= 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST_CASE("beta = -1 gives the signed determinant, beta = 1 the permanent") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 6;
        const Eigen::MatrixXd a = testsupport::uniform_matrix(rng, m, -2, 2);
        const double det = (m % 2 == 0 ? 1.0 : -1.0) * a.determinant();
        CHECK(std::abs(beta_permanent(a, -1.0) - det) <= 1e-9 * std::max(1.0, std::abs(det)));
        const double per = testsupport::ryser_permanent(a);
        CHECK(std::abs(beta_permanent(a, 1.0) - per) <= 1e-9 * std::max(1.0, std::abs(per)));
    }
}

TEST_CASE("per_beta is a degree-m polynomial in beta") {
    Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + trial % 6;
        const Eigen::MatrixXd a = testsupport::uniform_matrix(rng, m, -1, 1);
        // Lagrange interpolation through m+1 nodes, evaluated at fresh points.
        std::vector<double> nodes, values;
        for (int k = 0; k <= m; ++k) {
            nodes.push_back(-1.0 + 2.0 * k / m);
            values.push_back(beta_permanent(a, nodes.back()));
        }
        for (double x : {-0.77, 0.13, 0.91, 1.4}) {
            double p = 0.0;
            for (int k = 0; k <= m; ++k) {
                double l = 1.0;
                for (int j = 0; j <= m; ++j)
                    if (j != k) l *= (x - nodes[j]) / (nodes[k] - nodes[j]);
                p += values[k] * l;
            }
            CHECK(std::abs(p - beta_permanent(a, x)) < 1e-8);
        }
        const auto poly = cycle_polynomial(a);
        CHECK(poly.size() == static_cast<std::size_t>(m + 1));
        CHECK(poly[0] == 0.0);
    }
}

TEST_CASE("signature convention mixes permanent and determinant") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 3, 4;
    // identity has sgn +1 (weight beta), transposition sgn -1 (weight 1/beta)
    CHECK(beta_permanent(a, 2.0, ExponentConvention::signature) == doctest::Approx(2.0 * 4 + 6.0 / 2.0));
    CHECK(beta_permanent(a, 1.0, ExponentConvention::signature) == 10.0);
    CHECK_THROWS_AS(beta_permanent(a, 0.0, ExponentConvention::signature), DomainError);
}

TEST_CASE("small principal submatrices of a PSD kernel are 2-positive") {
    Rng rng(25);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd g = testsupport::random_correlation(rng, 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(beta_permanent(g.block(i, i, 1, 1), 2.0) == doctest::Approx(2.0 * g(i, i)));
            for (int j = i + 1; j < 4; ++j) {
                Eigen::Matrix2d s;
                s << g(i, i), g(i, j), g(j, i), g(j, j);
                CHECK(beta_permanent(s, 2.0) >= 0.0);
            }
        }
    }
}

TEST_CASE("scan examples") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d.diagonal() << 1, 2, 3;
    CHECK(beta_positivity_scan(KernelMatrix(d), default_scan_options()).verdict.holds());

    Eigen::MatrixXd g(2, 2);
    g << 1, 0.5, 0.5, 1;
    ScanOptions o = default_scan_options();
    o.beta_grid = {0.5, 1, 2};
    o.m_max = 4;
    const auto r = beta_positivity_scan(KernelMatrix(g), o);
    CHECK(r.verdict.holds());
    CHECK(r.scanned == o.alpha_grid.size() * 3 * (2 + 3 + 4 + 5));
    CHECK_FALSE(r.witness);
}

TEST_CASE("scan finds the first witness in beta then multiset order") {
    Eigen::MatrixXd g(2, 2);
    g << 1, -1, 1, 1;  // per_beta on {1,2} is beta^2 - beta
    ScanOptions o = default_scan_options();
    o.alpha_grid = {0.0};
    const auto r = beta_positivity_scan(KernelMatrix(g), o);
    REQUIRE(r.verdict.fails());
    REQUIRE(r.witness);
    CHECK(r.witness->value < 0.0);
    // first witness in (beta, multiset) order
    CHECK(r.witness->beta == doctest::Approx(0.1));
    CHECK(r.witness->indices.indices() == std::vector<std::size_t>{0, 1});
    CHECK(r.witness->value == doctest::Approx(0.01 - 0.1));
}

TEST_CASE("scan on the tridiagonal kernel is its own oracle") {
    Eigen::MatrixXd g(3, 3);
    g << 1, 0.6, 0, 0.6, 1, 0.6, 0, 0.6, 1;
    const auto r = beta_positivity_scan(KernelMatrix(g), default_scan_options());
    if (r.witness) {
        const auto sub = r.witness->indices.submatrix(resolvent(KernelMatrix(g), r.witness->alpha).entries());
        CHECK(testsupport::naive_beta_permanent(sub, r.witness->beta) == doctest::Approx(r.witness->value));
    } else {
        CHECK(r.verdict.holds());
    }
}

TEST_CASE("scan monotonicity: enlarging ranges never loses a witness") {
    Eigen::MatrixXd g(3, 3);
    g << 2, 1, -1, 1, 2, 1, -1, 1, 2;
    ScanOptions small = default_scan_options();
    small.beta_grid = {0.5, 1.0};
    small.alpha_grid = {0.0, 1.0};
    small.m_max = 3;
    const auto a = beta_positivity_scan(KernelMatrix(g), small);
    ScanOptions big = small;
    big.beta_grid = {0.25, 0.5, 1.0, 1.5};
    big.alpha_grid = {0.0, 0.5, 1.0, 2.0};
    big.m_max = 5;
    const auto b = beta_positivity_scan(KernelMatrix(g), big);
    if (a.verdict.fails()) CHECK(b.verdict.fails());
}

TEST_CASE("scan result does not depend on the thread count") {
    Rng rng(26);
    for (int trial = 0; trial < 5; ++trial) {
        const KernelMatrix g(testsupport::uniform_matrix(rng, 3, -0.5, 1.0) + Eigen::MatrixXd::Identity(3, 3));
        ScanOptions o = default_scan_options();
        o.m_max = 4;
        o.threads = 1;
        const auto a = beta_positivity_scan(g, o);
        o.threads = 4;
        const auto b = beta_positivity_scan(g, o);
        CHECK(a.verdict.outcome == b.verdict.outcome);
        CHECK(a.witness.has_value() == b.witness.has_value());
        if (a.witness && b.witness) {
            CHECK(a.witness->alpha == b.witness->alpha);
            CHECK(a.witness->beta == b.witness->beta);
            CHECK(a.witness->indices == b.witness->indices);
            CHECK(a.witness->value == b.witness->value);
        }
    }
}

TEST_CASE("scan rejects bad grids") {
    ScanOptions o = default_scan_options();
    o.m_max = 9;
    CHECK_THROWS_AS(beta_positivity_scan(KernelMatrix::identity(2), o), DomainError);
    o = default_scan_options();
    o.beta_grid.clear();
    CHECK_THROWS_AS(beta_positivity_scan(KernelMatrix::identity(2), o), DomainError);
}

TEST_CASE("necessary battery examples") {
    Rng rng(27);
    const std::vector<double> no_alphas;
    for (int trial = 0; trial < 20; ++trial) {
        const KernelMatrix nonneg(testsupport::uniform_matrix(rng, 4, 0, 1) + Eigen::MatrixXd::Identity(4, 4));
        CHECK(id_necessary_battery(nonneg, no_alphas).holds());
    }
    // resolvents of a nonnegative kernel may still break the pairwise condition
    const KernelMatrix bad(testsupport::uniform_matrix(rng, 4, 0, 1) + 4.0 * Eigen::MatrixXd::Identity(4, 4));
    const Verdict r = id_necessary_battery(bad);
    if (r.fails()) {
        REQUIRE(r.witness->alpha);
        const Eigen::MatrixXd ga = resolvent(bad, *r.witness->alpha).entries();
        const auto i = r.witness->indices[0], j = r.witness->indices[1];
        CHECK(ga(i, j) * ga(j, i) < 0.0);
    }
    CHECK(id_necessary_battery(KernelMatrix(testsupport::random_inverse_m(rng, 4))).holds());
    Eigen::MatrixXd g(3, 3);
    g << 2, 1, 0.5, -1, 2, 0.5, 0.5, 0.5, 2;
    const Verdict v = id_necessary_battery(KernelMatrix(g));
    REQUIRE(v.fails());
    CHECK(v.witness->indices == std::vector<std::size_t>{0, 1});

    Eigen::MatrixXd t(3, 3);
    t << 3, 1, -1, 1, 3, 1, -1, 1, 3;
    REQUIRE(min_symmetric_eigenvalue(t) > 0.0);
    const Verdict w = id_necessary_battery(KernelMatrix(t));
    REQUIRE(w.fails());
    CHECK(w.witness->indices.size() == 3);
    CHECK_FALSE(w.witness->alpha);
}

}  // TEST_SUITE
