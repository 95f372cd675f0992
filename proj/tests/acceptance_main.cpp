// Acceptance suite: one line per criterion, nonzero exit when any gating
// check fails. Tolerances and runtime budgets are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "idashaper/cases.hpp"
#include "idashaper/runner.hpp"
#include "idashaper/sim.hpp"

using namespace idashaper;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int g_failures = 0;

void run_criterion(int number, const std::string& title, double budget_seconds,
                   const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed >= budget_seconds) {
        outcome.pass = false;
        outcome.detail += " [runtime budget exceeded]";
    }
    if (!outcome.pass) ++g_failures;
    std::printf("[%s] criterion %d: %s — %s (%.2fs < %.0fs)\n",
                outcome.pass ? "PASS" : "FAIL", number, title.c_str(),
                outcome.detail.c_str(), elapsed, budget_seconds);
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

Outcome criterion1_pendubot_pipeline() {
    Outcome out;
    const Bundle b = demo_bundle("pendubot");
    const auto& md = std::get<StructuredMdInv>(b.md);
    const double a1 = md.diag(0), b1 = md.offdiag(0);

    // Closed-form alphas on 100 points, tolerance 1e-10.
    double alpha_dev = 0.0;
    for (int i = 0; i < 100; ++i) {
        VectorXd q(2);
        q << 0.0, -1.2 + 2.4 * i / 99.0;
        const DerivedKinetics dk = derived_kinetics(b.sys, q);
        const double c1 = -dk.bb_m(0, 0) / (2.0 * a1 * dk.det_m);
        const double c2 = -dk.bb_m(1, 0) / (a1 * dk.det_m) - c1 * b1 / a1;
        const auto solved = b.alphas->solve_at(q);
        alpha_dev = std::max(alpha_dev, std::abs(solved[0](0) - c1));
        alpha_dev = std::max(alpha_dev, std::abs(solved[0](1) - c2));
    }
    if (alpha_dev > 1e-10) {
        out.pass = false;
        out.detail += "alpha closed-form deviation " + fmt(alpha_dev) + "; ";
    }

    // Full matrix residual of the quadratic matching relation with the
    // quadrature a on the domain.
    double kinetic_max = 0.0;
    for (int i = 0; i <= 400; ++i) {
        VectorXd q(2);
        q << 0.3, -1.2 + 2.4 * i / 400.0;
        kinetic_max = std::max(kinetic_max,
                               kinetic_residual_structured(md, *b.j2_param, b.sys, q)
                                   .cwiseAbs()
                                   .maxCoeff());
    }
    if (kinetic_max > 1e-8) {
        out.pass = false;
        out.detail += "kinetic residual " + fmt(kinetic_max) + "; ";
    }

    // Pointwise comparison against the literature closed-form candidate:
    // reported, with the discrepancy documented when above 1e-6 relative.
    double candidate_dev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double qk = -1.2 + 2.4 * i / 100.0;
        const double c = std::cos(qk);
        const double candidate = std::pow(c, -7.0 / 3.0) +
                               std::pow(4.0 - 3.0 * c, 49.0 / 6.0) -
                               std::pow(4.0 + 3.0 * c, -7.0 / 2.0);
        candidate_dev = std::max(candidate_dev,
                                 std::abs(b.a_solution->a(qk) - candidate) /
                                     std::max(1.0, std::abs(candidate)));
    }
    out.detail += "alpha dev " + fmt(alpha_dev) + ", kinetic residual " +
                  fmt(kinetic_max) + ", literature-candidate deviation " +
                  fmt(candidate_dev) +
                  (candidate_dev <= 1e-6
                       ? " (match)"
                       : " (documented discrepancy: determinant-derived phi1/phi2)");
    return out;
}

Outcome criterion2_vtol_design() {
    Outcome out;
    VtolParams p;
    const SystemModel sys = vtol_model(p);
    const MdInv md = vtol_md(p).inverse().eval();

    const double nc = necessary_condition(md, sys, p.q_star);
    const double expected = p.g * p.eps * (1.0 - p.kappa_prime);
    if (std::abs(nc - expected) > 1e-12) {
        out.pass = false;
        out.detail += "necessary-condition scalar off by " + fmt(std::abs(nc - expected)) + "; ";
    }
    const double nc_identity =
        necessary_condition(MdInv{MatrixXd::Identity(3, 3).eval()}, sys, p.q_star);
    if (!(nc_identity <= 1e-12) || nc_identity > kNecessaryConditionMargin) {
        out.pass = false;
        out.detail += "identity M_d not rejected (" + fmt(nc_identity) + "); ";
    }

    DesiredEnergy de;
    de.md_inv = md;
    const VdFunctions vd = vtol_vd(p);
    de.vd = vd.vd;
    de.vd_grad = vd.vd_grad;
    de.q_star = p.q_star;
    double residual = 0.0;
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            VectorXd q(3);
            q << 2.0, -6.0 + 12.0 * i / 49.0, -1.3 + 2.6 * j / 49.0;
            residual = std::max(residual,
                                potential_residual(sys, de, q).cwiseAbs().maxCoeff());
        }
    }
    if (residual > 1e-8) {
        out.pass = false;
        out.detail += "V_d residual " + fmt(residual) + "; ";
    }
    const MinimumReport minimum = certify_minimum(de);
    if (!minimum.shaped) {
        out.pass = false;
        out.detail += "Hessian not positive definite; ";
    }
    out.detail += "necessary condition = " + fmt(nc) + ", identity value " + fmt(nc_identity) +
                  ", V_d residual " + fmt(residual) + ", Hessian min eig " +
                  fmt(minimum.min_eigenvalue);
    return out;
}

Outcome criterion3_vtol_simulation() {
    Outcome out;
    const Bundle b = demo_bundle("vtol");
    State s0;
    s0.q = (VectorXd(3) << 6.0, -5.0, -1.0).finished();
    s0.p = VectorXd::Zero(3);
    const double dt = 1e-3;
    const Trajectory traj = integrate(b.sys, b.de, b.j2, b.kv, s0, 30.0, dt);

    const std::size_t i25 = static_cast<std::size_t>(std::llround(25.0 / dt));
    const double dist = (traj.states[i25].q - b.de.q_star).cwiseAbs().maxCoeff();
    if (!(dist < 0.05)) {
        out.pass = false;
        out.detail += "|q(25s) - q*| = " + fmt(dist) + "; ";
    }
    double worst_increase = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        worst_increase =
            std::max(worst_increase, traj.energies[i + 1] - traj.energies[i]);
    }
    if (!(worst_increase <= 1e-6 * dt)) {
        out.pass = false;
        out.detail += "H_d increase " + fmt(worst_increase) + "; ";
    }
    out.detail += "|q(25s) - q*| = " + fmt(dist) + ", max step dH_d = " +
                  fmt(worst_increase);
    return out;
}

Outcome criterion4_spider() {
    Outcome out;
    SpiderParams p;
    const SystemModel sys = spider_model(p);
    const StructuredMdInv md = spider_md(p);
    const PsiSystem psi = assemble_psi(md, sys, VectorXd::Zero(3));

    MatrixXd printed(5, 6);
    printed << 2 * p.a1, 0, 0, 0, 0, 0,
               0, p.a1, 0, p.a2, 0, 0,
               0, 0, p.a1, 0, 0, 0,
               0, 0, 0, 0, 2 * p.a2, 0,
               0, 0, 0, 0, 0, p.a2;
    const double psi_dev = (psi.psi - printed).cwiseAbs().maxCoeff();
    if (psi_dev > 0.0 || psi.rank != 5) {
        out.pass = false;
        out.detail += "Psi mismatch (dev " + fmt(psi_dev) + ", rank " +
                      std::to_string(psi.rank) + "); ";
    }

    const AlphaSolver alphas(md, sys);
    const J2Param j2 = alphas.j2_param();
    const double r = p.m * p.l3 / (p.mring + p.m);
    std::mt19937_64 rng(414);
    SampleBox box{(VectorXd(3) << -1.0, 1.0, -1.0).finished(),
                  (VectorXd(3) << 1.0, 3.0, 1.0).finished()};
    const auto seeds = sample_box(box, 10, rng);

    // Both flow invariants, conserved along the gamma flow.
    double drift = 0.0;
    for (int which = 0; which < 2; ++which) {
        StructuredMdInv candidate = md;
        if (which == 1) {
            candidate.a_fun = [r](const VectorXd& q) {
                return q(0) + r * std::sin(q(2)) + 2.0;
            };
            candidate.a_grad = [r](const VectorXd& q) {
                return (VectorXd(3) << 1.0, 0.0, r * std::cos(q(2))).finished();
            };
        }
        const CharacteristicReport report = verify_characteristic_solution(
            sys, candidate, j2, {}, seeds);
        drift = std::max(drift, report.max_flow_drift);
    }
    if (drift > 1e-6) {
        out.pass = false;
        out.detail += "invariant drift " + fmt(drift) + "; ";
    }

    // Scalar-PDE residual of a = y - r cos(theta) on a 10^3 lattice.
    double residual = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            for (int k = 0; k < 10; ++k) {
                VectorXd q(3);
                q << -1.0 + 2.0 * i / 9.0, 1.0 + 2.0 * j / 9.0, -1.0 + 2.0 * k / 9.0;
                residual = std::max(residual,
                                    std::abs(scalar_pde_residual(md, j2, sys, q)));
            }
        }
    }
    if (residual > 1e-10) {
        out.pass = false;
        out.detail += "PDE residual " + fmt(residual) + "; ";
    }
    out.detail += "Psi exact, rank 5, invariant drift " + fmt(drift) +
                  ", PDE residual " + fmt(residual);
    return out;
}

Outcome criterion5_match_oracle() {
    Outcome out;
    std::ostringstream detail;
    for (const char* name : {"pendubot", "vtol", "spider"}) {
        const Bundle b = demo_bundle(name);
        const MatchReport report =
            match_certificate(b.sys, b.closed_loop(), sample_states(b, 200, 9090));
        detail << name << " " << fmt(report.max_deviation) << "  ";
        if (!report.pass(1e-8)) {
            out.pass = false;
        }
    }
    out.detail = "max field deviation: " + detail.str();
    return out;
}

Outcome criterion6_property_suites() {
    Outcome out;
    std::ostringstream detail;
    const auto gate = [&](const std::string& name, bool ok, const std::string& info) {
        detail << name << " " << info << (ok ? "" : " FAIL") << "; ";
        if (!ok) out.pass = false;
    };

    // gamma independence of a(q), 1e-12.
    {
        const SystemModel sys = pendubot_model(PendubotParams{});
        StructuredMdInv md;
        md.n = 2;
        md.k = 1;
        md.diag = VectorXd::Constant(1, 1.0);
        md.offdiag = VectorXd::Constant(1, -5.0);
        md.a_fun = [](const VectorXd&) { return 26.0; };
        md.a_grad = [](const VectorXd&) { return VectorXd::Zero(2).eval(); };
        VectorXd q(2);
        q << 0.4, -0.9;
        const VectorXd ref = gamma_and_phis(md, sys).gamma(q);
        double dev = 0.0;
        std::mt19937_64 rng(606);
        std::uniform_real_distribution<double> unit(-10.0, 10.0);
        for (int i = 0; i < 100; ++i) {
            StructuredMdInv perturbed = md;
            const double shift = unit(rng);
            perturbed.a_fun = [shift](const VectorXd&) { return 26.0 + shift; };
            dev = std::max(dev, (gamma_and_phis(perturbed, sys).gamma(q) - ref)
                                    .cwiseAbs()
                                    .maxCoeff());
        }
        gate("gamma-independence", dev <= 1e-12, fmt(dev));
    }

    // J2 skew-symmetry, exact.
    {
        const Bundle b = demo_bundle("spider");
        double worst = 0.0;
        for (const State& s : sample_states(b, 50, 607)) {
            const MatrixXd j2 = b.j2(s.q, s.p);
            worst = std::max(worst, (j2 + j2.transpose()).cwiseAbs().maxCoeff());
        }
        gate("j2-skew", worst == 0.0, fmt(worst));
    }

    // Adjugate identity, 1e-10.
    {
        double worst = 0.0;
        const SystemModel pend = pendubot_model(PendubotParams{});
        const SystemModel spider = spider_model(SpiderParams{});
        std::mt19937_64 rng(608);
        for (const SystemModel* sys : {&pend, &spider}) {
            SampleBox box{VectorXd::Constant(sys->n, -1.0),
                          VectorXd::Constant(sys->n, 1.0)};
            for (const VectorXd& q : sample_box(box, 50, rng)) {
                const DerivedKinetics dk = derived_kinetics(*sys, q);
                const MatrixXd gap =
                    dk.adj_m * sys->mass_matrix(q) -
                    dk.det_m * MatrixXd::Identity(sys->n, sys->n);
                worst = std::max(worst, gap.cwiseAbs().maxCoeff() /
                                            std::max(1.0, std::abs(dk.det_m)));
            }
        }
        gate("adjugate-identity", worst <= 1e-10, fmt(worst));
    }

    // Analytic vs finite-difference derivatives, 1e-5.
    {
        double worst = 0.0;
        const SystemModel vtol = vtol_model(VtolParams{});
        const SystemModel pend = pendubot_model(PendubotParams{});
        const SystemModel spider = spider_model(SpiderParams{});
        std::mt19937_64 rng(609);
        for (const SystemModel* sys : {&vtol, &pend, &spider}) {
            SampleBox box{VectorXd::Constant(sys->n, -1.0),
                          VectorXd::Constant(sys->n, 1.0)};
            for (const VectorXd& q : sample_box(box, 100, rng)) {
                worst = std::max(worst, finite_diff_audit(*sys, q).max_dev());
            }
        }
        gate("derivative-audit", worst <= 1e-5, fmt(worst));
    }

    // RK4 order ratio in [10, 24] on the VTOL run.
    {
        const Bundle b = demo_bundle("vtol");
        State s0;
        s0.q = (VectorXd(3) << 6.0, -5.0, -1.0).finished();
        s0.p = VectorXd::Zero(3);
        const auto terminal = [&](double dt) {
            const Trajectory traj = integrate(b.sys, b.de, b.j2, b.kv, s0, 2.0, dt);
            VectorXd x(6);
            x << traj.states.back().q, traj.states.back().p;
            return x;
        };
        const VectorXd x1 = terminal(8e-3);
        const VectorXd x2 = terminal(4e-3);
        const VectorXd x3 = terminal(2e-3);
        const double ratio = (x1 - x2).norm() / (x2 - x3).norm();
        gate("rk4-order", ratio > 10.0 && ratio < 24.0, fmt(ratio));
    }

    // Undamped energy conservation, 1e-6 per unit time.
    {
        const Bundle b = demo_bundle("vtol");
        State s0;
        s0.q = (VectorXd(3) << 1.0, -0.5, 0.4).finished();
        s0.p = VectorXd::Zero(3);
        const GainConfig undamped{MatrixXd::Zero(2, 2)};
        const double horizon = 2.0;
        const Trajectory traj =
            integrate(b.sys, b.de, b.j2, undamped, s0, horizon, 1e-3);
        double drift = 0.0;
        for (double h : traj.energies) {
            drift = std::max(drift, std::abs(h - traj.energies.front()));
        }
        gate("undamped-drift", drift <= 1e-6 * horizon, fmt(drift));
    }

    // Equation count: n(n+1)/2 - 1 algebraic rows plus the single scalar PDE.
    {
        const PsiSystem psi2 =
            assemble_psi(std::get<StructuredMdInv>(demo_bundle("pendubot").md),
                         pendubot_model(PendubotParams{}), VectorXd::Zero(2));
        const PsiSystem psi3 = assemble_psi(spider_md(SpiderParams{}),
                                            spider_model(SpiderParams{}),
                                            VectorXd::Zero(3));
        const bool ok = psi2.psi.rows() == 2 && psi3.psi.rows() == 5 &&
                        algebraic_equation_count(2) == 2 &&
                        algebraic_equation_count(3) == 5;
        gate("equation-count", ok,
             std::to_string(psi2.psi.rows()) + "/" + std::to_string(psi3.psi.rows()));
    }

    out.detail = detail.str();
    return out;
}

}  // namespace

int main() {
    std::printf("IDA-PBC kinetic-shaping acceptance suite\n");
    run_criterion(1, "pendubot pipeline (alphas + quadrature a)", 5.0,
                  criterion1_pendubot_pipeline);
    run_criterion(2, "VTOL constant design (necessary condition, V_d, Hessian)", 10.0,
                  criterion2_vtol_design);
    run_criterion(3, "VTOL closed-loop simulation (settling + dissipation)", 30.0,
                  criterion3_vtol_simulation);
    run_criterion(4, "crane (reference Psi, flow invariants, PDE residual)", 10.0,
                  criterion4_spider);
    run_criterion(5, "end-to-end matching oracle (open loop vs target)", 60.0,
                  criterion5_match_oracle);
    run_criterion(6, "property suites", 60.0, criterion6_property_suites);
    if (g_failures == 0) {
        std::printf("ACCEPTANCE: PASS (6/6)\n");
        return 0;
    }
    std::printf("ACCEPTANCE: FAIL (%d criterion(s))\n", g_failures);
    return 1;
}
