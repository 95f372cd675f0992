#include <cmath>

#include "doctest.h"
#include "idashaper/errors.hpp"
#include "idashaper/numerics.hpp"

using namespace idashaper;

TEST_CASE("adjugate satisfies adj(M)*M = det(M)*I") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int n : {1, 2, 3, 4}) {
        MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = unit(rng);
        m += 2.0 * n * MatrixXd::Identity(n, n);
        const MatrixXd adj = adjugate(m);
        const double det = m.determinant();
        CHECK((adj * m - det * MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <=
              1e-10 * std::max(1.0, std::abs(det)));
    }
}

TEST_CASE("adjugate of 2x2 closed form") {
    MatrixXd m(2, 2);
    m << 3.0, -1.0, 2.0, 5.0;
    MatrixXd expected(2, 2);
    expected << 5.0, 1.0, -2.0, 3.0;
    CHECK((adjugate(m) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spd_check accepts SPD and rejects indefinite/semidefinite") {
    MatrixXd spd(2, 2);
    spd << 2.0, 1.0, 1.0, 2.0;
    CHECK(spd_check(spd));
    MatrixXd indef(2, 2);
    indef << 1.0, 2.0, 2.0, 1.0;
    CHECK_FALSE(spd_check(indef));
    MatrixXd semi(2, 2);
    semi << 1.0, 1.0, 1.0, 1.0;
    CHECK_FALSE(spd_check(semi));
}

TEST_CASE("leading minors of a diagonal matrix") {
    MatrixXd d = MatrixXd::Zero(3, 3);
    d.diagonal() << 2.0, 3.0, 4.0;
    const auto minors = leading_minors(d);
    REQUIRE(minors.size() == 3);
    CHECK(minors[0] == 2.0);
    CHECK(minors[1] == 6.0);
    CHECK(minors[2] == 24.0);
}

TEST_CASE("finite-difference gradient and Hessian on a smooth field") {
    const auto f = [](const VectorXd& x) {
        return std::sin(x(0)) * x(1) + 0.5 * x(1) * x(1);
    };
    VectorXd x(2);
    x << 0.4, -0.7;
    const VectorXd g = fd_gradient(f, x);
    CHECK(std::abs(g(0) - std::cos(0.4) * (-0.7)) < 1e-9);
    CHECK(std::abs(g(1) - (std::sin(0.4) - 0.7)) < 1e-9);

    const MatrixXd h = fd_hessian(f, x);
    CHECK(std::abs(h(0, 0) - (-std::sin(0.4) * (-0.7))) < 1e-5);
    CHECK(std::abs(h(0, 1) - std::cos(0.4)) < 1e-6);
    CHECK(std::abs(h(1, 1) - 1.0) < 1e-6);
}

TEST_CASE("adaptive Simpson against analytic integrals") {
    const double i1 = adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0);
    CHECK(std::abs(i1 - 1.0 / 3.0) < 1e-12);
    const double i2 = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(std::abs(i2 - 2.0) < 1e-10);
    const double i3 =
        adaptive_simpson([](double x) { return std::exp(-x * x); }, -4.0, 4.0);
    CHECK(std::abs(i3 - std::sqrt(M_PI) * std::erf(4.0)) < 1e-9);
    CHECK(adaptive_simpson([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("rk4_step is fourth order on y' = y") {
    const auto f = [](const VectorXd& x) { return x; };
    const auto run = [&](double dt) {
        VectorXd x = VectorXd::Ones(1);
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        for (int i = 0; i < steps; ++i) x = rk4_step(f, x, dt);
        return std::abs(x(0) - std::exp(1.0));
    };
    const double e1 = run(0.02);
    const double e2 = run(0.01);
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 24.0);
}

TEST_CASE("HermiteTable reproduces a cubic exactly and guards its domain") {
    const int n = 7;
    VectorXd x = VectorXd::LinSpaced(n, -1.0, 2.0);
    VectorXd y(n), dy(n);
    for (int i = 0; i < n; ++i) {
        const double t = x(i);
        y(i) = t * t * t - 2.0 * t + 1.0;
        dy(i) = 3.0 * t * t - 2.0;
    }
    HermiteTable table(x, y, dy);
    for (double t : {-0.93, 0.123, 0.5, 1.99}) {
        CHECK(std::abs(table.value(t) - (t * t * t - 2.0 * t + 1.0)) < 1e-13);
        CHECK(std::abs(table.deriv(t) - (3.0 * t * t - 2.0)) < 1e-12);
    }
    CHECK_THROWS_AS(table.value(2.5), DomainTruncationError);
}

TEST_CASE("CubicSpline interpolates a smooth function") {
    const int n = 101;
    VectorXd x = VectorXd::LinSpaced(n, 0.0, M_PI);
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = std::sin(x(i));
    CubicSpline spline(x, y);
    for (double t : {0.31, 1.0, 2.22, 3.0}) {
        CHECK(std::abs(spline.value(t) - std::sin(t)) < 1e-6);
    }
}

TEST_CASE("sample_box is deterministic under a fixed seed") {
    SampleBox box{VectorXd::Constant(3, -2.0), VectorXd::Constant(3, 2.0)};
    std::mt19937_64 a(99), b(99);
    const auto s1 = sample_box(box, 20, a);
    const auto s2 = sample_box(box, 20, b);
    for (int i = 0; i < 20; ++i) CHECK((s1[i] - s2[i]).cwiseAbs().maxCoeff() == 0.0);
    for (const auto& q : s1) {
        CHECK(q.minCoeff() >= -2.0);
        CHECK(q.maxCoeff() <= 2.0);
    }
}

TEST_CASE("parallel_for touches every index exactly once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
}

TEST_CASE("double formatting round-trips bit-exactly") {
    for (double v : {0.1, 1.0 / 3.0, -1.5e300, 1e-300, M_PI, 0.0, -0.0, 12345.6789}) {
        const std::string s = format_double(v);
        const double back = parse_double(s);
        CHECK(std::memcmp(&back, &v, sizeof(double)) == 0);
    }
}
