#include <cmath>

#include "doctest.h"
#include "idashaper/cases.hpp"
#include "idashaper/errors.hpp"
#include "idashaper/model.hpp"

using namespace idashaper;

namespace {

std::vector<VectorXd> random_grid(int n, int count, std::uint64_t seed,
                                  double lo = -1.0, double hi = 1.0) {
    SampleBox box{VectorXd::Constant(n, lo), VectorXd::Constant(n, hi)};
    std::mt19937_64 rng(seed);
    return sample_box(box, count, rng);
}

}  // namespace

TEST_CASE("hamiltonian: zero momentum reduces to the potential") {
    const SystemModel sys = pendubot_model(PendubotParams{});
    for (const VectorXd& q : random_grid(2, 10, 11)) {
        State s{q, VectorXd::Zero(2)};
        CHECK(hamiltonian(sys, s) == doctest::Approx(sys.potential(q)).epsilon(1e-14));
    }
}

TEST_CASE("hamiltonian: VTOL unit-mass value") {
    const SystemModel sys = vtol_model(VtolParams{});
    State s;
    s.q = VectorXd(3);
    s.q << 0.0, 1.0, 0.0;
    s.p = VectorXd(3);
    s.p << 1.0, 0.0, 0.0;
    CHECK(hamiltonian(sys, s) == doctest::Approx(0.5 + 9.81).epsilon(1e-15));
}

TEST_CASE("hamiltonian: pendubot at the upright equilibrium") {
    PendubotParams p;
    const SystemModel sys = pendubot_model(p);
    State s{VectorXd::Zero(2), VectorXd::Zero(2)};
    CHECK(hamiltonian(sys, s) == doctest::Approx((p.c4 + p.c5) * p.g).epsilon(1e-15));
}

TEST_CASE("derived kinetics: constant inertia gives zero bbM") {
    PendubotParams p;
    p.c3 = 0.0;  // decouples the joints; M becomes constant
    const SystemModel sys = pendubot_model(p);
    for (const VectorXd& q : random_grid(2, 5, 3)) {
        const DerivedKinetics dk = derived_kinetics(sys, q);
        CHECK(dk.bb_m.cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(dk.det_m == doctest::Approx(p.c1 * p.c2).epsilon(1e-14));
    }
}

TEST_CASE("derived kinetics: pendubot determinant and bbM(1,1) zero at pi/2") {
    const SystemModel sys = pendubot_model(PendubotParams{});
    VectorXd q(2);
    q << 0.3, 0.0;
    CHECK(derived_kinetics(sys, q).det_m == doctest::Approx(1.75).epsilon(1e-14));
    q << 0.3, 0.5 * M_PI;
    CHECK(std::abs(derived_kinetics(sys, q).bb_m(0, 0)) < 1e-12);
}

TEST_CASE("derived kinetics: adjugate identity and bbM symmetry on random grids") {
    const SystemModel pend = pendubot_model(PendubotParams{});
    const SystemModel spider = spider_model(SpiderParams{});
    for (const SystemModel* sys : {&pend, &spider}) {
        for (const VectorXd& q : random_grid(sys->n, 100, 17)) {
            const DerivedKinetics dk = derived_kinetics(*sys, q);
            const MatrixXd m = sys->mass_matrix(q);
            const double tol = 1e-10 * std::max(1.0, std::abs(dk.det_m));
            CHECK((dk.adj_m * m - dk.det_m * MatrixXd::Identity(sys->n, sys->n))
                      .cwiseAbs()
                      .maxCoeff() <= tol);
            const double sym = (dk.bb_m - dk.bb_m.transpose()).cwiseAbs().maxCoeff();
            CHECK(sym <= 1e-9 * std::max(1.0, dk.bb_m.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("derived kinetics: finite-difference fallback matches the analytic path") {
    const SystemModel analytic = pendubot_model(PendubotParams{});
    SystemModel fd = analytic;
    fd.mass_matrix_grad_k = nullptr;
    for (const VectorXd& q : random_grid(2, 20, 5)) {
        const MatrixXd a = derived_kinetics(analytic, q).bb_m;
        const MatrixXd b = derived_kinetics(fd, q).bb_m;
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("derived kinetics: general annihilator lacks k") {
    const SystemModel sys = vtol_model(VtolParams{});
    CHECK_THROWS_AS(derived_kinetics(sys, VectorXd::Zero(3)), MissingIndexError);
}

TEST_CASE("singular mass matrix is rejected") {
    SystemModel sys;
    sys.n = 2;
    sys.m = 1;
    sys.k = 1;
    sys.mass_matrix = [](const VectorXd&) {
        MatrixXd m(2, 2);
        m << 1.0, 1.0, 1.0, 1.0 + 1e-15;
        return m;
    };
    sys.potential = [](const VectorXd&) { return 0.0; };
    sys.input_map = [](const VectorXd&) {
        MatrixXd g(2, 1);
        g << 1.0, 0.0;
        return g;
    };
    sys.annihilator = [](const VectorXd&) {
        MatrixXd gp(1, 2);
        gp << 0.0, 1.0;
        return gp;
    };
    State s{VectorXd::Zero(2), VectorXd::Ones(2)};
    CHECK_THROWS_AS(hamiltonian(sys, s), SingularMassError);
    CHECK_THROWS_AS(derived_kinetics(sys, s.q), SingularMassError);
}

TEST_CASE("finite-difference audit across the bundled systems") {
    const SystemModel vtol = vtol_model(VtolParams{});
    VectorXd q0 = VectorXd::Zero(3);
    CHECK(finite_diff_audit(vtol, q0).max_dev() <= 1e-6);

    const SystemModel pend = pendubot_model(PendubotParams{});
    VectorXd qp(2);
    qp << 0.3, 0.7;
    CHECK(finite_diff_audit(pend, qp).max_dev() <= 1e-5);

    const SystemModel spider = spider_model(SpiderParams{});
    VectorXd qs(3);
    qs << 0.0, 0.0, 0.2;
    CHECK(finite_diff_audit(spider, qs).max_dev() <= 1e-5);

    for (const SystemModel* sys : {&vtol, &pend, &spider}) {
        for (const VectorXd& q : random_grid(sys->n, 100, 23)) {
            CHECK(finite_diff_audit(*sys, q).max_dev() <= 1e-5);
        }
    }
}

TEST_CASE("model validation: annihilator and rank checks") {
    const SystemModel vtol = vtol_model(VtolParams{});
    VectorXd q(3);
    q << 0.0, 0.0, 0.7;
    CHECK((vtol.annihilator(q) * vtol.input_map(q)).cwiseAbs().maxCoeff() <= 1e-15);
    validate_model(vtol, random_grid(3, 10, 31));

    const SystemModel pend = pendubot_model(PendubotParams{});
    validate_model(pend, random_grid(2, 10, 37));
    CHECK((pend.annihilator(q.head(2)) * pend.input_map(q.head(2)))
              .cwiseAbs()
              .maxCoeff() == 0.0);

    SystemModel bad = pend;
    bad.m = 2;  // s = 0
    CHECK_THROWS_AS(validate_model(bad, {}), Error);
}
