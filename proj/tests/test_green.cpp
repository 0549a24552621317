#include <doctest.h>

#include "permacheck/green.hpp"
#include "permacheck/matcore.hpp"
#include "support.hpp"

using namespace permacheck;
using testsupport::Rng;

namespace {

Eigen::MatrixXd pair_q() {
    Eigen::MatrixXd q(2, 2);
    q << 0, 0.5, 0.5, 0;
    return q;
}

IdOptions quick_options() {
    IdOptions o;
    o.scan.m_max = 3;
    o.scan.beta_grid = {0.5, 1.0, 2.0};
    o.scan.alpha_grid = {0.0, 1.0, 3.0};
    return o;
}

}  // namespace

TEST_SUITE("green") {

TEST_CASE("green_from_chain examples") {
    CHECK(green_from_chain(TransientChain(Eigen::MatrixXd::Zero(3, 3))).entries().isApprox(Eigen::MatrixXd::Identity(3, 3)));
    Eigen::MatrixXd want(2, 2);
    want << 4.0 / 3, 2.0 / 3, 2.0 / 3, 4.0 / 3;
    CHECK((green_from_chain(TransientChain(pair_q())).entries() - want).cwiseAbs().maxCoeff() < 1e-15);
    Eigen::MatrixXd stochastic(2, 2);
    stochastic << 0.5, 0.5, 0.3, 0.7;
    CHECK_THROWS_AS(TransientChain{stochastic}, SpectralRadiusError);
    Eigen::MatrixXd negative = pair_q();
    negative(0, 1) = -0.1;
    CHECK_THROWS_AS(TransientChain{negative}, DomainError);
}

TEST_CASE("potential equation G = I + QG and basic bounds") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 7;
        const Eigen::MatrixXd q = testsupport::random_chain(rng, n);
        const Eigen::MatrixXd g = green_from_chain(TransientChain(q)).entries();
        const Eigen::MatrixXd resid = g - Eigen::MatrixXd::Identity(n, n) - q * g;
        CHECK(resid.cwiseAbs().maxCoeff() < 1e-9);
        CHECK(g.minCoeff() >= 0.0);
        CHECK(g.diagonal().minCoeff() >= 1.0 - 1e-12);
    }
}

TEST_CASE("is_green examples") {
    const GreenVerdict a = is_green(green_from_chain(TransientChain(pair_q())));
    CHECK(a.verdict.holds());
    CHECK(a.cls == GreenClass::green);
    CHECK(is_green(KernelMatrix::identity(4)).cls == GreenClass::green);

    Eigen::MatrixXd t(3, 3);
    t << 1, 0.6, 0, 0.6, 1, 0.6, 0, 0.6, 1;
    const GreenVerdict v = is_green(KernelMatrix(t));
    REQUIRE(v.verdict.fails());
    CHECK(v.cls == GreenClass::not_green);
    CHECK(v.verdict.witness->reason.rfind("(c)", 0) == 0);
    CHECK(t.inverse()(0, 2) > 0.0);

    Eigen::MatrixXd neg(2, 2);
    neg << 1, -0.5, -0.5, 1;
    CHECK(is_green(KernelMatrix(neg)).verdict.witness->reason.rfind("(a)", 0) == 0);

    Eigen::MatrixXd sing(2, 2);
    sing << 1, 1, 1, 1;
    CHECK(is_green(KernelMatrix(sing)).verdict.witness->reason.rfind("(b)", 0) == 0);
}

TEST_CASE("is_green up to a density factor") {
    // Inverse M-matrix whose inverse has a negative row sum.
    Eigen::MatrixXd m(2, 2);
    m << 1, -2, -0.1, 1;
    const KernelMatrix g(m.inverse());
    const GreenVerdict v = is_green(g);
    CHECK(v.verdict.holds());
    CHECK(v.cls == GreenClass::green_up_to_density);
    REQUIRE(v.density);
    // the density rescales the inverse into a row-dominant M-matrix
    const Eigen::MatrixXd scaled = v.density->asDiagonal() * m * v.density->asDiagonal();
    CHECK(is_m_matrix(scaled).diagonally_dominant.holds());
}

TEST_CASE("round trip: every chain potential is Green") {
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + trial % 7;
        const auto v = is_green(green_from_chain(TransientChain(testsupport::random_chain(rng, n, trial % 2 == 0))));
        CHECK(v.cls == GreenClass::green);
    }
}

TEST_CASE("excessive reference measure gives a doubly dominant inverse") {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 5;
        const TransientChain chain(testsupport::random_chain(rng, n));
        const Eigen::VectorXd m = excessive_reference_measure(chain);
        CHECK(((m.transpose() * chain.q()).transpose() - m).maxCoeff() <= 1e-9 * m.maxCoeff());
        const Eigen::MatrixXd inv = invert(green_with_reference(chain)).entries();
        CHECK(is_m_matrix(inv).diagonally_dominant.holds());
        CHECK(is_m_matrix(Eigen::MatrixXd(inv.transpose())).diagonally_dominant.holds());
    }
}

TEST_CASE("hadamard_power examples") {
    const KernelMatrix g = green_from_chain(TransientChain(pair_q()));
    const auto one = hadamard_power(g, 1.0);
    CHECK(one.power.entries() == g.entries());
    CHECK(one.green.verdict.holds());
    const auto two = hadamard_power(g, 2.0);
    Eigen::MatrixXd want(2, 2);
    want << 16.0 / 9, 4.0 / 9, 4.0 / 9, 16.0 / 9;
    CHECK((two.power.entries() - want).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(two.green.cls == GreenClass::green);
    CHECK_THROWS_AS(hadamard_power(g, 0.5), DomainError);
    Eigen::MatrixXd neg(2, 2);
    neg << 1, -0.5, -0.5, 1;
    CHECK_THROWS_AS(hadamard_power(KernelMatrix(neg), 2.0), DomainError);
}

TEST_CASE("Hadamard powers of Green matrices stay Green") {
    Rng rng(44);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 5;
        const KernelMatrix g = green_from_chain(TransientChain(testsupport::random_chain(rng, n, trial % 2 == 0)));
        for (double beta : {1.5, 2.0, 3.0}) CHECK(hadamard_power(g, beta).green.cls == GreenClass::green);
    }
}

TEST_CASE("restriction examples and stability") {
    Rng rng(45);
    const KernelMatrix g = green_from_chain(TransientChain(testsupport::random_chain(rng, 3)));
    const std::vector<std::size_t> all{0, 1, 2};
    CHECK(restriction(g, all).entries() == g.entries());
    const std::vector<std::size_t> ends{0, 2};
    CHECK(is_green(restriction(g, ends)).cls == GreenClass::green);
    const std::vector<std::size_t> mid{1};
    const KernelMatrix s = restriction(g, mid);
    CHECK(s(0, 0) == g(1, 1));
    CHECK(is_green(s).verdict.holds());
    CHECK(is_green(KernelMatrix(Eigen::MatrixXd::Constant(1, 1, -1.0))).verdict.fails());
    const std::vector<std::size_t> dup{0, 0};
    CHECK_THROWS_AS(restriction(g, dup), DomainError);
    const std::vector<std::size_t> out{3};
    CHECK_THROWS_AS(restriction(g, out), DomainError);
    CHECK_THROWS_AS(restriction(g, std::vector<std::size_t>{}), DomainError);

    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 5;
        const KernelMatrix h = green_from_chain(TransientChain(testsupport::random_chain(rng, n)));
        for (unsigned mask = 1; mask < (1U << n); ++mask) {
            std::vector<std::size_t> keep;
            for (int i = 0; i < n; ++i)
                if (mask >> i & 1U) keep.push_back(static_cast<std::size_t>(i));
            CHECK(is_green(restriction(h, keep)).cls == GreenClass::green);
        }
    }
}

TEST_CASE("plus_constant_check examples") {
    const std::vector<double> one{1.0};
    const auto id = plus_constant_check(KernelMatrix::identity(2), one);
    CHECK(id.verdict.holds());
    REQUIRE(id.entries.size() == 1);
    CHECK(id.entries[0].id.method == IdMethod::bapat_exact);

    const std::vector<double> grid{0.5, 1.0, 2.0};
    const auto g = plus_constant_check(green_from_chain(TransientChain(pair_q())), grid);
    CHECK(g.verdict.holds());
    for (const auto& e : g.entries) CHECK(e.id.verdict.holds());
}

TEST_CASE("plus_constant_check falsifies a non-Green ID kernel") {
    // symmetric ID kernel whose inverse has row sums of both signs on a zero
    // off-diagonal; the rank-one update of G + cJ turns that zero positive
    Eigen::MatrixXd m(4, 4);
    m << 1, -0.6, -0.6, 0, -0.6, 1, 0, 0, -0.6, 0, 1, 0, 0, 0, 0, 1;
    const KernelMatrix g(m.inverse());
    REQUIRE(bapat_test(g).verdict.holds());
    REQUIRE(is_green(g).cls == GreenClass::green_up_to_density);
    const auto r = plus_constant_check(g, default_c_grid());
    REQUIRE(r.verdict.fails());
    const double c = r.verdict.witness->values.front();
    CHECK(std::find(default_c_grid().begin(), default_c_grid().end(), c) != default_c_grid().end());
}

TEST_CASE("Green kernels pass the full default c grid") {
    Rng rng(46);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4;
        const Eigen::MatrixXd raw = green_from_chain(TransientChain(testsupport::random_symmetric_chain(rng, n))).entries();
        const KernelMatrix sym(0.5 * (raw + raw.transpose()));
        REQUIRE(sym.symmetric());
        CHECK(plus_constant_check(sym, default_c_grid()).verdict.holds());
        const KernelMatrix ref = green_with_reference(TransientChain(testsupport::random_chain(rng, n)));
        CHECK(plus_constant_check(ref, default_c_grid(), 2.0, quick_options()).verdict.holds());
    }
}

TEST_CASE("counting-measure potential of a nonsymmetric chain can break shift stability") {
    // Counterexample recorded in the design notes: G + J is not ID although G
    // is a counting-measure Green matrix, because 1^T G^{-1} has a negative entry.
    Eigen::MatrixXd g1(3, 3);
    g1 << 2, 1, 1, 1, 13.49, 1, 1, 11.77, 2;
    const Eigen::MatrixXd g = g1 - Eigen::MatrixXd::Ones(3, 3);
    const KernelMatrix k(g);
    CHECK(is_green(k).cls == GreenClass::green);
    const Eigen::RowVectorXd col_sums = Eigen::RowVectorXd::Ones(3) * g.inverse();
    CHECK(col_sums.minCoeff() < 0.0);
    const std::vector<double> one{1.0};
    const auto r = plus_constant_check(k, one);
    CHECK(r.verdict.fails());
}

}  // TEST_SUITE
