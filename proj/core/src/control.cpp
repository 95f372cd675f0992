#include "idashaper/control.hpp"

#include <cmath>

#include "idashaper/errors.hpp"

namespace idashaper {

PhiSpec quadratic_phi(double c) {
    PhiSpec spec;
    spec.name = "quadratic";
    spec.phi = [c](double x) { return c * x * x; };
    spec.dphi = [c](double x) { return 2.0 * c * x; };
    spec.ddphi = [c](double) { return 2.0 * c; };
    return spec;
}

PhiSpec zero_phi() {
    PhiSpec spec;
    spec.name = "zero";
    spec.phi = [](double) { return 0.0; };
    spec.dphi = [](double) { return 0.0; };
    spec.ddphi = [](double) { return 0.0; };
    return spec;
}

double hd(const DesiredEnergy& de, const State& s) {
    const MatrixXd mdinv = md_inv_matrix(de.md_inv, s.q);
    return 0.5 * s.p.dot(mdinv * s.p) + de.vd(s.q);
}

VectorXd grad_q_hd(const DesiredEnergy& de, const State& s) {
    return 0.5 * grad_q_p_mdinv_p(de.md_inv, s.q, s.p) + de.vd_grad(s.q);
}

VectorXd grad_p_hd(const DesiredEnergy& de, const State& s) {
    return md_inv_matrix(de.md_inv, s.q) * s.p;
}

MinimumReport certify_minimum(const DesiredEnergy& de, double grad_tol) {
    MinimumReport report;
    report.grad_norm = de.vd_grad(de.q_star).cwiseAbs().maxCoeff();
    report.hessian = fd_hessian(de.vd, de.q_star, 1e-4);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(report.hessian);
    report.min_eigenvalue = eig.eigenvalues().minCoeff();
    report.shaped = report.grad_norm <= grad_tol && report.min_eigenvalue > 0.0;
    return report;
}

GainConfig diagonal_gains(const VectorXd& diag) {
    GainConfig g;
    g.kv = diag.asDiagonal();
    if ((diag.array() < 0.0).any()) {
        throw Error("GainConfig: negative damping gain");
    }
    return g;
}

namespace {

VectorXd grad_q_kinetic_open(const SystemModel& sys, const VectorXd& q,
                             const VectorXd& p) {
    const auto kinetic = [&sys, &p](const VectorXd& qq) {
        return 0.5 * p.dot(sys.mass_matrix(qq).inverse() * p);
    };
    return fd_gradient(kinetic, q);
}

}  // namespace

VectorXd control_law(const SystemModel& sys, const DesiredEnergy& de,
                     const J2Fn& j2, const GainConfig& kv, const State& s) {
    const MatrixXd g = sys.input_map(s.q);
    const MatrixXd gtg = g.transpose() * g;
    Eigen::JacobiSVD<MatrixXd> svd(gtg);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0)) ||
        sv(0) / sv(sv.size() - 1) > 1e12) {
        throw SingularInputMapError("G^T G ill-conditioned");
    }

    const MatrixXd m = sys.mass_matrix(s.q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);

    const VectorXd grad_h = grad_q_kinetic_open(sys, s.q, s.p) + sys.grad_v(s.q);
    const VectorXd grad_hd = grad_q_hd(de, s);
    const MatrixXd mdinv = md_inv_matrix(de.md_inv, s.q);
    const MatrixXd md_mat = mdinv.inverse();
    const VectorXd mdinv_p = mdinv * s.p;

    const VectorXd inner = grad_h - md_mat * m.inverse() * grad_hd + j2(s.q, s.p) * mdinv_p;
    const VectorXd u_es = gtg.ldlt().solve(g.transpose() * inner);
    const VectorXd u_di = -kv.kv * g.transpose() * mdinv_p;
    return u_es + u_di;
}

VectorXd potential_residual(const SystemModel& sys, const DesiredEnergy& de,
                            const VectorXd& q) {
    const MatrixXd m = sys.mass_matrix(q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);
    const MatrixXd mdinv = md_inv_matrix(de.md_inv, q);
    const MatrixXd md_mat = mdinv.inverse();
    return sys.annihilator(q) *
           (sys.grad_v(q) - md_mat * m.inverse() * de.vd_grad(q));
}

HarmonicVdSolution solve_pendubot_vd(const SystemModel& sys,
                                     const StructuredMdInv& md,
                                     double domain_lo, double domain_hi,
                                     const PhiSpec& phi, double forcing_scale,
                                     double rk_step) {
    if (sys.n != 2 || md.k != 1) {
        throw Error("solve_pendubot_vd expects a 2-DOF system with k = 2");
    }
    const GammaData gd = gamma_and_phis(md, sys);
    const SystemModel sys_c = sys;
    const StructuredMdInv md_c = md;
    const double fscale = forcing_scale;

    const auto embed = [](double q2) {
        VectorXd q(2);
        q << 0.0, q2;
        return q;
    };
    // f3 = gamma^(1), f4 = gamma^(2); both depend on q2 only in this regime.
    const auto f3 = [gd, embed](double q2) { return gd.gamma(embed(q2))(0); };
    const auto f4 = [gd, embed](double q2) { return gd.gamma(embed(q2))(1); };
    // Forcing rhs(q1, q2) = G_perp grad V * det M * det M_d^{-1}; harmonic in
    // q1, so f1 = rhs(pi/2, .) and f2 = rhs(0, .).
    const auto rhs = [sys_c, md_c, fscale](double q1, double q2) {
        VectorXd q(2);
        q << q1, q2;
        const double det_m = sys_c.mass_matrix(q).determinant();
        const double det_mdinv = realize(md_c, q).determinant();
        return fscale * sys_c.grad_v(q)(1) * det_m * det_mdinv;
    };
    const auto f1 = [rhs](double q2) { return rhs(0.5 * M_PI, q2); };
    const auto f2 = [rhs](double q2) { return rhs(0.0, q2); };

    if (!(domain_lo < 0.0 && domain_hi > 0.0)) {
        throw Error("solve_pendubot_vd: domain must contain q2 = 0");
    }
    const int checks = 512;
    for (int i = 0; i <= checks; ++i) {
        const double q2 = domain_lo + (domain_hi - domain_lo) * i / checks;
        if (std::abs(f4(q2)) < 1e-9) {
            throw DomainTruncationError(
                "gamma^(2) crosses zero inside the requested domain near q2 = " +
                format_double(q2));
        }
    }

    // Coupled linear pair: g1' = (f1 + f3 g2)/f4, g2' = (f2 - f3 g1)/f4.
    const auto ode = [&](double q2, const Eigen::Vector2d& g) {
        Eigen::Vector2d d;
        d(0) = (f1(q2) + f3(q2) * g(1)) / f4(q2);
        d(1) = (f2(q2) - f3(q2) * g(0)) / f4(q2);
        return d;
    };

    const double record_spacing = 1e-3;
    std::vector<double> xs{0.0};
    std::vector<Eigen::Vector2d> gs{Eigen::Vector2d::Zero()};
    const auto sweep = [&](double target) {
        const double dir = target > 0.0 ? 1.0 : -1.0;
        double x = 0.0;
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        double next_record = record_spacing;
        while (dir * x < dir * target - 1e-15) {
            const double h = dir * std::min(rk_step, dir * (target - x));
            const Eigen::Vector2d k1 = ode(x, g);
            const Eigen::Vector2d k2 = ode(x + 0.5 * h, g + 0.5 * h * k1);
            const Eigen::Vector2d k3 = ode(x + 0.5 * h, g + 0.5 * h * k2);
            const Eigen::Vector2d k4 = ode(x + h, g + h * k3);
            g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += h;
            if (dir * x >= next_record - 1e-12 || dir * x >= dir * target - 1e-15) {
                xs.push_back(x);
                gs.push_back(g);
                next_record += record_spacing;
            }
        }
    };
    sweep(domain_hi);
    sweep(domain_lo);

    // Sort the recorded nodes and attach exact ODE derivatives.
    std::vector<int> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return xs[a] < xs[b]; });
    const int count = static_cast<int>(order.size());
    VectorXd nx(count), g1v(count), g2v(count), dg1(count), dg2(count);
    for (int i = 0; i < count; ++i) {
        nx(i) = xs[order[i]];
        const Eigen::Vector2d& g = gs[order[i]];
        g1v(i) = g(0);
        g2v(i) = g(1);
        const Eigen::Vector2d d = ode(nx(i), g);
        dg1(i) = d(0);
        dg2(i) = d(1);
    }

    HarmonicVdSolution sol;
    sol.g1 = HermiteTable(nx, g1v, dg1);
    sol.g2 = HermiteTable(nx, g2v, dg2);

    // Homogeneous invariant z(q2) = int_0^{q2} f3/f4.
    const int z_nodes = 1201;
    VectorXd zx = VectorXd::LinSpaced(z_nodes, domain_lo, domain_hi);
    VectorXd zv(z_nodes), zd(z_nodes);
    const auto z_integrand = [&](double q2) { return f3(q2) / f4(q2); };
    int anchor = 0;
    for (int i = 1; i < z_nodes; ++i) {
        if (std::abs(zx(i)) < std::abs(zx(anchor))) anchor = i;
    }
    zv(anchor) = adaptive_simpson(z_integrand, 0.0, zx(anchor));
    for (int i = anchor + 1; i < z_nodes; ++i) {
        zv(i) = zv(i - 1) + adaptive_simpson(z_integrand, zx(i - 1), zx(i));
    }
    for (int i = anchor - 1; i >= 0; --i) {
        zv(i) = zv(i + 1) - adaptive_simpson(z_integrand, zx(i), zx(i + 1));
    }
    for (int i = 0; i < z_nodes; ++i) zd(i) = z_integrand(zx(i));
    sol.z = HermiteTable(zx, zv, zd);

    const HermiteTable g1t = sol.g1;
    const HermiteTable g2t = sol.g2;
    const HermiteTable zt = sol.z;
    const PhiSpec phi_copy = phi;
    sol.vd.vd = [g1t, g2t, zt, phi_copy](const VectorXd& q) {
        const double w = zt.value(q(1)) - q(0);
        return g1t.value(q(1)) * std::sin(q(0)) + g2t.value(q(1)) * std::cos(q(0)) +
               phi_copy.phi(w);
    };
    // q2-derivatives through the ODE relations and z' = f3/f4, so the only
    // interpolation error left is in the g values themselves.
    sol.vd.vd_grad = [g1t, g2t, zt, phi_copy, f1, f2, f3, f4](const VectorXd& q) {
        const double q2 = q(1);
        const double w = zt.value(q2) - q(0);
        const double dphi = phi_copy.dphi(w);
        const double g1 = g1t.value(q2);
        const double g2 = g2t.value(q2);
        const double dg1 = (f1(q2) + f3(q2) * g2) / f4(q2);
        const double dg2 = (f2(q2) - f3(q2) * g1) / f4(q2);
        const double dz = f3(q2) / f4(q2);
        VectorXd g(2);
        g(0) = g1 * std::cos(q(0)) - g2 * std::sin(q(0)) - dphi;
        g(1) = dg1 * std::sin(q(0)) + dg2 * std::cos(q(0)) + dphi * dz;
        return g;
    };

    // Certification sweep of the potential residual.
    DesiredEnergy de;
    de.md_inv = md;
    de.vd = sol.vd.vd;
    de.vd_grad = sol.vd.vd_grad;
    de.q_star = VectorXd::Zero(2);
    const int nq1 = 21, nq2 = 41;
    for (int i = 0; i < nq1; ++i) {
        for (int j = 0; j < nq2; ++j) {
            VectorXd q(2);
            q << -M_PI + 2.0 * M_PI * i / (nq1 - 1),
                domain_lo + (domain_hi - domain_lo) * j / (nq2 - 1);
            const double r = potential_residual(sys, de, q).cwiseAbs().maxCoeff();
            sol.max_residual = std::max(sol.max_residual, r);
        }
    }
    return sol;
}

SpiderVdReport spider_vd_candidate(const SystemModel& sys, const MdInv& md,
                                   double beta1, double beta2, const PhiSpec& phi,
                                   const std::vector<VectorXd>& grid) {
    if (sys.n != 3) throw Error("spider_vd_candidate expects a 3-DOF system");
    if (beta1 == 0.0) throw Error("spider_vd_candidate: beta1 must be nonzero");

    const PhiSpec phi_copy = phi;
    SpiderVdReport report;
    report.vd.vd = [beta1, beta2, phi_copy](const VectorXd& q) {
        const double y = q(1), t = q(2);
        const double w = beta2 * y - beta1 * std::cos(t);
        return phi_copy.phi(w) + y * std::cos(t) / beta1 -
               (beta1 + beta2) * y * y / (2.0 * beta1 * beta1);
    };
    report.vd.vd_grad = [beta1, beta2, phi_copy](const VectorXd& q) {
        const double y = q(1), t = q(2);
        const double w = beta2 * y - beta1 * std::cos(t);
        const double dphi = phi_copy.dphi(w);
        VectorXd g(3);
        g(0) = 0.0;
        g(1) = dphi * beta2 + std::cos(t) / beta1 - (beta1 + beta2) * y / (beta1 * beta1);
        g(2) = dphi * beta1 * std::sin(t) - y * std::sin(t) / beta1;
        return g;
    };

    DesiredEnergy de;
    de.md_inv = md;
    de.vd = report.vd.vd;
    de.vd_grad = report.vd.vd_grad;
    de.q_star = VectorXd::Zero(3);
    double sum = 0.0;
    for (const VectorXd& q : grid) {
        const double r = potential_residual(sys, de, q).cwiseAbs().maxCoeff();
        report.max_residual = std::max(report.max_residual, r);
        sum += r;
    }
    if (!grid.empty()) report.mean_residual = sum / static_cast<double>(grid.size());
    return report;
}

}  // namespace idashaper
