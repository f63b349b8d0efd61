#include "hdrelay/lp.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <string>

using namespace hdrelay;

TEST_CASE("textbook maximisation") {
    // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
    LinearProgram lp;
    lp.c = Eigen::Vector2d(3, 5);
    lp.a_ub = (Eigen::MatrixXd(3, 2) << 1, 0, 0, 2, 3, 2).finished();
    lp.b_ub = Eigen::Vector3d(4, 12, 18);
    const auto s = solve_lp(lp);
    REQUIRE(s.feasible);
    CHECK(s.value == doctest::Approx(36.0));
    CHECK(s.x(0) == doctest::Approx(2.0));
    CHECK(s.x(1) == doctest::Approx(6.0));
}

TEST_CASE("equality and negative right-hand sides") {
    // max x1 - x2, x1 + x2 = 1, -x1 <= -0.25 (x1 >= 0.25), x1 <= 0.75
    LinearProgram lp;
    lp.c = Eigen::Vector2d(1, -1);
    lp.a_ub = (Eigen::MatrixXd(2, 2) << -1, 0, 1, 0).finished();
    lp.b_ub = Eigen::Vector2d(-0.25, 0.75);
    lp.a_eq = Eigen::MatrixXd::Ones(1, 2);
    lp.b_eq = Eigen::VectorXd::Ones(1);
    const auto s = solve_lp(lp);
    REQUIRE(s.feasible);
    CHECK(s.value == doctest::Approx(0.5));
}

TEST_CASE("infeasible and unbounded programs") {
    LinearProgram inf;
    inf.c = Eigen::VectorXd::Ones(1);
    inf.a_ub = Eigen::MatrixXd::Ones(1, 1);
    inf.b_ub = Eigen::VectorXd::Constant(1, -1.0);
    CHECK_FALSE(solve_lp(inf).feasible);

    LinearProgram unb;
    unb.c = Eigen::VectorXd::Ones(1);
    unb.a_ub = -Eigen::MatrixXd::Ones(1, 1);
    unb.b_ub = Eigen::VectorXd::Zero(1);
    const auto s = solve_lp(unb);
    CHECK(s.feasible);
    CHECK_FALSE(s.bounded);
}

TEST_CASE("maximin over a simplex matches brute force") {
    // max t s.t. t <= a_r . p for all rows, p in simplex; t encoded as x0 - x1
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 3, ns = 4;
        Eigen::MatrixXd a(rows, ns);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < ns; ++j) a(i, j) = u(rng);
        LinearProgram lp;
        lp.c = Eigen::VectorXd::Zero(ns + 2);
        lp.c(ns) = 1.0;
        lp.c(ns + 1) = -1.0;
        lp.a_ub = Eigen::MatrixXd::Zero(rows, ns + 2);
        lp.a_ub.leftCols(ns) = -a;
        lp.a_ub.col(ns).setOnes();
        lp.a_ub.col(ns + 1).setConstant(-1.0);
        lp.b_ub = Eigen::VectorXd::Zero(rows);
        lp.a_eq = Eigen::MatrixXd::Zero(1, ns + 2);
        lp.a_eq.leftCols(ns).setOnes();
        lp.b_eq = Eigen::VectorXd::Ones(1);
        const auto s = solve_lp(lp);
        REQUIRE(s.feasible);

        double brute = -1e9;
        const int grid = 40;
        for (int i = 0; i <= grid; ++i)
            for (int j = 0; i + j <= grid; ++j)
                for (int k = 0; i + j + k <= grid; ++k) {
                    Eigen::Vector4d p(i, j, k, grid - i - j - k);
                    p /= grid;
                    brute = std::max(brute, (a * p).minCoeff());
                }
        CHECK(s.value >= brute - 1e-9);
        CHECK(s.value <= brute + 0.15);
    }
}

TEST_CASE("degenerate program with tiny coefficients terminates") {
    // many identical and near-zero constraints through the origin
    const int ns = 16;
    LinearProgram lp;
    lp.c = Eigen::VectorXd::LinSpaced(ns, 1.0, 2.0);
    lp.a_ub = Eigen::MatrixXd::Zero(6, ns);
    for (int r = 0; r < 6; ++r)
        for (int j = 0; j < ns; ++j) lp.a_ub(r, j) = ((r + j) % 3 == 0 ? 1e-11 : -1e-10) * (r + 1);
    lp.b_ub = Eigen::VectorXd::Zero(6);
    lp.a_eq = Eigen::MatrixXd::Ones(1, ns);
    lp.b_eq = Eigen::VectorXd::Ones(1);
    const auto s = solve_lp(lp);
    CHECK(s.feasible);
    CHECK(s.value <= 2.0 + 1e-9);
}

TEST_CASE("classic cycling example") {
    // Beale: cycles under the largest-coefficient rule without anti-cycling; optimum 5/4
    LinearProgram lp;
    lp.c = Eigen::Vector4d(0.75, -20.0, 0.5, -6.0);
    lp.a_ub = (Eigen::MatrixXd(3, 4) << 0.25, -8, -1, 9, 0.5, -12, -0.5, 3, 0, 0, 1, 0).finished();
    lp.b_ub = Eigen::Vector3d(0, 0, 1);
    const auto s = solve_lp(lp);
    REQUIRE(s.feasible);
    CHECK(s.value == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("degenerate maximin program from a six relay schedule") {
    // 128 states, six zero right-hand sides; reference optimum from HiGHS
    std::ifstream f(std::string(HDRELAY_TEST_DATA) + "/degenerate_maximin_lp.txt");
    REQUIRE(f.good());
    int n = 0, mu = 0, me = 0;
    f >> n >> mu >> me;
    LinearProgram lp;
    lp.c.resize(n);
    for (int i = 0; i < n; ++i) f >> lp.c(i);
    lp.a_ub.resize(mu, n);
    for (int i = 0; i < mu; ++i)
        for (int j = 0; j < n; ++j) f >> lp.a_ub(i, j);
    lp.b_ub.resize(mu);
    for (int i = 0; i < mu; ++i) f >> lp.b_ub(i);
    lp.a_eq.resize(me, n);
    for (int i = 0; i < me; ++i)
        for (int j = 0; j < n; ++j) f >> lp.a_eq(i, j);
    lp.b_eq.resize(me);
    for (int i = 0; i < me; ++i) f >> lp.b_eq(i);
    REQUIRE(f.good());
    const auto s = solve_lp(lp);
    REQUIRE(s.feasible);
    CHECK(s.value == doctest::Approx(8.917690576294964).epsilon(1e-10));
    CHECK((lp.a_ub * s.x - lp.b_ub).maxCoeff() <= 1e-9);
    CHECK(std::abs(s.x.sum() - 1.0) <= 1e-9);
}
