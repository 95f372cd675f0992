#include "idashaper/cases.hpp"

#include <cmath>

#include "idashaper/errors.hpp"

namespace idashaper {

SystemModel pendubot_model(const PendubotParams& p) {
    if (!p.valid()) throw Error("pendubot: need c1*c2 > c3^2");
    SystemModel sys;
    sys.n = 2;
    sys.m = 1;
    sys.k = 1;  // second coordinate unactuated
    sys.mass_matrix = [p](const VectorXd& q) {
        const double c = std::cos(q(1));
        MatrixXd m(2, 2);
        m << p.c1 + p.c2 + 2.0 * p.c3 * c, p.c2 + p.c3 * c,
             p.c2 + p.c3 * c, p.c2;
        return m;
    };
    sys.mass_matrix_grad_k = [p](const VectorXd& q) {
        const double s = std::sin(q(1));
        MatrixXd dm(2, 2);
        dm << -2.0 * p.c3 * s, -p.c3 * s,
              -p.c3 * s, 0.0;
        return dm;
    };
    sys.potential = [p](const VectorXd& q) {
        return p.c4 * p.g * std::cos(q(0)) + p.c5 * p.g * std::cos(q(0) + q(1));
    };
    sys.potential_grad = [p](const VectorXd& q) {
        VectorXd g(2);
        g(0) = -p.c4 * p.g * std::sin(q(0)) - p.c5 * p.g * std::sin(q(0) + q(1));
        g(1) = -p.c5 * p.g * std::sin(q(0) + q(1));
        return g;
    };
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
    return sys;
}

SystemModel vtol_model(const VtolParams& p) {
    if (!p.valid()) throw Error("vtol: need kappa, kappa' > 0 and kappa*kappa' > 1");
    SystemModel sys;
    sys.n = 3;
    sys.m = 2;
    sys.mass_matrix = [](const VectorXd&) { return MatrixXd::Identity(3, 3).eval(); };
    sys.potential = [p](const VectorXd& q) { return p.g * q(1); };
    sys.potential_grad = [p](const VectorXd&) {
        VectorXd g(3);
        g << 0.0, p.g, 0.0;
        return g;
    };
    sys.input_map = [p](const VectorXd& q) {
        const double t = q(2);
        MatrixXd g(3, 2);
        g << -std::sin(t), p.eps * std::cos(t),
             std::cos(t), p.eps * std::sin(t),
             0.0, 1.0;
        return g;
    };
    sys.annihilator = [p](const VectorXd& q) {
        const double t = q(2);
        MatrixXd gp(1, 3);
        gp << std::cos(t), std::sin(t), -p.eps;
        return gp;
    };
    return sys;
}

MatrixXd vtol_md(const VtolParams& p) {
    MatrixXd md(3, 3);
    md << p.kappa * p.eps * p.eps, 0.0, p.eps,
          0.0, 1.0, 0.0,
          p.eps, 0.0, p.kappa_prime;
    return md;
}

VdFunctions vtol_vd(const VtolParams& p) {
    if (p.q_star.size() != 3 || p.q_star(2) != 0.0) {
        throw Error("vtol_vd: q_star must have theta* = 0");
    }
    const double eps = p.eps;
    const double g = p.g;
    const double kappa = p.kappa;
    const double kp = p.kappa_prime;
    const double xs = p.q_star(0);
    const double ys = p.q_star(1);
    // Exact constants of the flow invariants; any truncation here leaves a
    // first-order hole in the matching residual.
    const double beta = std::sqrt((1.0 + kp) / (1.0 - kp));
    const double cc = 2.0 * (kappa * kp - 1.0) / (kappa * std::sqrt(1.0 - kp * kp));
    const double theta_max = 2.0 * std::atan(1.0 / beta);
    const double lnc = std::log(eps * (1.0 - kp));  // w1 at q_star
    const double w1_weight = p.vd_w1;
    const double w2_weight = p.vd_w2;
    const double a_lin = -2.0 * w1_weight * eps * lnc;
    const double b_lin = (a_lin - g) / eps;

    const auto parts = [=](const VectorXd& q, double& w1, double& w2, double& lg) {
        const double t = q(2);
        if (!(std::abs(t) < theta_max)) {
            throw DomainTruncationError("vtol V_d evaluated outside |theta| < " +
                                        format_double(theta_max));
        }
        lg = std::log(eps * (std::cos(t) - kp));
        w1 = eps * (q(1) - ys) + lg;
        w2 = (q(0) - xs) / (kappa * eps) - t - cc * std::atanh(beta * std::tan(0.5 * t));
    };

    VdFunctions out;
    out.vd = [=](const VectorXd& q) {
        double w1, w2, lg;
        parts(q, w1, w2, lg);
        return w1_weight * w1 * w1 + w2_weight * w2 * w2 + a_lin * (q(1) - ys) +
               b_lin * (lg - lnc) - w1_weight * lnc * lnc;
    };
    out.vd_grad = [=](const VectorXd& q) {
        double w1, w2, lg;
        parts(q, w1, w2, lg);
        const double t = q(2);
        const double dlg = -std::sin(t) / (std::cos(t) - kp);
        const double dw2 = -1.0 - (kappa * kp - 1.0) / (kappa * (std::cos(t) - kp));
        VectorXd grad(3);
        grad(0) = 2.0 * w2_weight * w2 / (kappa * eps);
        grad(1) = 2.0 * w1_weight * w1 * eps + a_lin;
        grad(2) = 2.0 * w1_weight * w1 * dlg + 2.0 * w2_weight * w2 * dw2 + b_lin * dlg;
        return grad;
    };
    return out;
}

SystemModel spider_model(const SpiderParams& p) {
    if (!p.valid()) throw Error("spider: invalid parameters");
    const double mm = p.mring + p.m;
    SystemModel sys;
    sys.n = 3;
    sys.m = 2;
    sys.k = 2;  // theta unactuated
    sys.mass_matrix = [p, mm](const VectorXd& q) {
        const double t = q(2);
        const double ml = p.m * p.l3;
        MatrixXd m(3, 3);
        m << mm, 0.0, ml * std::cos(t),
             0.0, mm, ml * std::sin(t),
             ml * std::cos(t), ml * std::sin(t), p.m * p.l3 * p.l3;
        return m;
    };
    sys.mass_matrix_grad_k = [p](const VectorXd& q) {
        const double t = q(2);
        const double ml = p.m * p.l3;
        MatrixXd dm = MatrixXd::Zero(3, 3);
        dm(0, 2) = dm(2, 0) = -ml * std::sin(t);
        dm(1, 2) = dm(2, 1) = ml * std::cos(t);
        return dm;
    };
    sys.potential = [p, mm](const VectorXd& q) {
        return mm * p.g * q(1) - p.m * p.g * p.l3 * std::cos(q(2));
    };
    sys.potential_grad = [p, mm](const VectorXd& q) {
        VectorXd g(3);
        g << 0.0, mm * p.g, p.m * p.g * p.l3 * std::sin(q(2));
        return g;
    };
    sys.input_map = [](const VectorXd&) {
        MatrixXd g = MatrixXd::Zero(3, 2);
        g(0, 0) = 1.0;
        g(1, 1) = 1.0;
        return g;
    };
    sys.annihilator = [](const VectorXd&) {
        MatrixXd gp = MatrixXd::Zero(1, 3);
        gp(0, 2) = 1.0;
        return gp;
    };
    return sys;
}

StructuredMdInv spider_md(const SpiderParams& p, double a_offset) {
    const double r = p.m * p.l3 / (p.mring + p.m);
    StructuredMdInv md;
    md.n = 3;
    md.k = 2;
    md.diag = VectorXd(2);
    md.diag << p.a1, p.a2;
    md.offdiag = VectorXd(2);
    md.offdiag << p.b1, p.b2;
    md.a_fun = [r, a_offset](const VectorXd& q) {
        return q(1) - r * std::cos(q(2)) + a_offset;
    };
    md.a_grad = [r](const VectorXd& q) {
        VectorXd g(3);
        g << 0.0, 1.0, r * std::sin(q(2));
        return g;
    };
    return md;
}

VdFunctions spider_invariant_vd(const SpiderParams& p, const VectorXd& q_star,
                                double a_offset, double weight_c1,
                                double weight_c2) {
    const double mm = p.mring + p.m;
    const double r = p.m * p.l3 / mm;
    const double det_m = mm * p.mring * p.m * p.l3 * p.l3;
    const double big_k = det_m * p.m * p.g * p.l3 / (mm * mm);

    const double c1s = q_star(0) + r * std::sin(q_star(2));
    const double c2s = q_star(1) - r * std::cos(q_star(2));
    const double a_star = c2s + a_offset;

    VdFunctions out;
    out.vd = [=](const VectorXd& q) {
        const double t = q(2);
        const double c1 = q(0) + r * std::sin(t);
        const double c2 = q(1) - r * std::cos(t);
        const double a = c2 + a_offset;
        return -big_k * a * std::cos(t) + big_k * (c2 - c2s) +
               weight_c1 * (c1 - c1s) * (c1 - c1s) +
               weight_c2 * (c2 - c2s) * (c2 - c2s) + big_k * a_star;
    };
    out.vd_grad = [=](const VectorXd& q) {
        const double t = q(2);
        const double c1 = q(0) + r * std::sin(t);
        const double c2 = q(1) - r * std::cos(t);
        const double a = c2 + a_offset;
        const VectorXd dc1 = (VectorXd(3) << 1.0, 0.0, r * std::cos(t)).finished();
        const VectorXd dc2 = (VectorXd(3) << 0.0, 1.0, r * std::sin(t)).finished();
        VectorXd g = -big_k * std::cos(t) * dc2 + big_k * dc2 +
                     2.0 * weight_c1 * (c1 - c1s) * dc1 +
                     2.0 * weight_c2 * (c2 - c2s) * dc2;
        g(2) += big_k * a * std::sin(t);
        return g;
    };
    return out;
}

namespace {

template <typename Fn>
auto stage(const std::string& tag, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(tag, e.what());
    }
}

}  // namespace

Bundle pendubot_bundle(const PendubotParams& p, const BundleOptions& opts) {
    Bundle bundle;
    bundle.name = "pendubot";
    bundle.sys = pendubot_model(p);

    StructuredMdInv md = stage("mdstruct", [&] {
        StructuredMdInv m;
        m.n = 2;
        m.k = 1;
        m.diag = opts.md_diag.size() == 1 ? opts.md_diag : VectorXd::Constant(1, 1.0);
        m.offdiag =
            opts.md_offdiag.size() == 1 ? opts.md_offdiag : VectorXd::Constant(1, -5.0);
        m.a_fun = [](const VectorXd&) { return 26.0; };  // placeholder until solved
        m.a_grad = [](const VectorXd&) { return VectorXd::Zero(2).eval(); };
        return m;
    });

    bundle.alphas = stage("matcher", [&] { return AlphaSolver(md, bundle.sys); });
    bundle.regime = stage("pdesolve", [&] {
        const MdInv probe = md;
        return classify(bundle.sys, probe, &*bundle.alphas);
    });
    bundle.a_solution = stage("pdesolve", [&] {
        return solve_ode(bundle.sys, md, *bundle.alphas, -opts.pendubot_domain,
                         opts.pendubot_domain, opts.lambda);
    });
    md.a_fun = bundle.a_solution->a_fun();
    md.a_grad = bundle.a_solution->a_grad(2);
    bundle.md = md;
    bundle.gamma = gamma_and_phis(md, bundle.sys);
    bundle.alphas = AlphaSolver(md, bundle.sys);
    bundle.psi_rank = bundle.alphas->rank();
    bundle.j2_param = bundle.alphas->j2_param();
    bundle.j2 = j2_fn(*bundle.j2_param, bundle.sys);

    const HarmonicVdSolution vd = stage("control", [&] {
        return solve_pendubot_vd(bundle.sys, md, -opts.pendubot_domain,
                                 opts.pendubot_domain,
                                 quadratic_phi(opts.phi_coefficient));
    });
    bundle.de.md_inv = md;
    bundle.de.vd = vd.vd.vd;
    bundle.de.vd_grad = vd.vd.vd_grad;
    bundle.de.q_star = VectorXd::Zero(2);
    bundle.kv = diagonal_gains(opts.kv_diag.size() == 1 ? opts.kv_diag
                                                        : VectorXd::Constant(1, 1.0));
    bundle.necessary_condition_value =
        necessary_condition(bundle.md, bundle.sys, bundle.de.q_star);
    bundle.minimum = certify_minimum(bundle.de);

    bundle.q_box.lo = VectorXd(2);
    bundle.q_box.lo << -1.0, -1.1;
    bundle.q_box.hi = VectorXd(2);
    bundle.q_box.hi << 1.0, 1.1;
    return bundle;
}

Bundle vtol_bundle(const VtolParams& p, const BundleOptions& opts) {
    Bundle bundle;
    bundle.name = "vtol";
    bundle.sys = vtol_model(p);
    bundle.md = stage("mdstruct", [&] { return vtol_md(p).inverse().eval(); });
    bundle.j2 = zero_j2(3);
    bundle.regime = stage("pdesolve", [&] {
        return classify(bundle.sys, bundle.md, nullptr);
    });
    stage("pdesolve", [&] {
        SampleBox box{VectorXd::Constant(3, -1.0), VectorXd::Constant(3, 1.0)};
        return constant_md(bundle.sys, bundle.md, box);
    });
    const VdFunctions vd = stage("control", [&] { return vtol_vd(p); });
    bundle.de.md_inv = bundle.md;
    bundle.de.vd = vd.vd;
    bundle.de.vd_grad = vd.vd_grad;
    bundle.de.q_star = p.q_star;
    VectorXd kv_default(2);
    kv_default << 1.0, 0.5;
    bundle.kv = diagonal_gains(opts.kv_diag.size() == 2 ? opts.kv_diag : kv_default);
    bundle.necessary_condition_value =
        necessary_condition(bundle.md, bundle.sys, bundle.de.q_star);
    bundle.minimum = certify_minimum(bundle.de);

    bundle.q_box.lo = VectorXd(3);
    bundle.q_box.lo << -2.0, -2.0, -1.2;
    bundle.q_box.hi = VectorXd(3);
    bundle.q_box.hi << 2.0, 2.0, 1.2;
    return bundle;
}

Bundle spider_bundle(const SpiderParams& p, const BundleOptions& opts) {
    Bundle bundle;
    bundle.name = "spider";
    bundle.sys = spider_model(p);
    const StructuredMdInv md = stage("mdstruct", [&] { return spider_md(p); });
    bundle.md = md;
    bundle.gamma = gamma_and_phis(md, bundle.sys);
    bundle.alphas = stage("matcher", [&] { return AlphaSolver(md, bundle.sys); });
    bundle.psi_rank = bundle.alphas->rank();
    bundle.j2_param = bundle.alphas->j2_param();
    bundle.j2 = j2_fn(*bundle.j2_param, bundle.sys);
    bundle.regime = stage("pdesolve", [&] {
        ProbeOptions probe;
        probe.box.lo = VectorXd(3);
        probe.box.lo << -1.0, 1.0, -1.0;
        probe.box.hi = VectorXd(3);
        probe.box.hi << 1.0, 3.0, 1.0;
        return classify(bundle.sys, bundle.md, &*bundle.alphas, probe);
    });

    VectorXd q_star(3);
    q_star << 0.0, 2.0, 0.0;
    const VdFunctions vd = stage("control", [&] {
        return spider_invariant_vd(p, q_star);
    });
    bundle.de.md_inv = bundle.md;
    bundle.de.vd = vd.vd;
    bundle.de.vd_grad = vd.vd_grad;
    bundle.de.q_star = q_star;
    VectorXd kv_default = VectorXd::Ones(2);
    bundle.kv = diagonal_gains(opts.kv_diag.size() == 2 ? opts.kv_diag : kv_default);
    bundle.necessary_condition_value =
        necessary_condition(bundle.md, bundle.sys, q_star);
    bundle.minimum = certify_minimum(bundle.de);

    bundle.q_box.lo = VectorXd(3);
    bundle.q_box.lo << -1.0, 1.0, -1.0;
    bundle.q_box.hi = VectorXd(3);
    bundle.q_box.hi << 1.0, 3.0, 1.0;
    return bundle;
}

Bundle demo_bundle(const std::string& name, const BundleOptions& opts) {
    if (name == "pendubot") return pendubot_bundle(PendubotParams{}, opts);
    if (name == "vtol") return vtol_bundle(VtolParams{}, opts);
    if (name == "spider") return spider_bundle(SpiderParams{}, opts);
    throw Error("unknown bundle '" + name + "'");
}

std::vector<State> sample_states(const Bundle& bundle, int count,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<VectorXd> qs = sample_box(bundle.q_box, count, rng);
    SampleBox pbox{VectorXd::Constant(bundle.sys.n, -bundle.p_scale),
                   VectorXd::Constant(bundle.sys.n, bundle.p_scale)};
    const std::vector<VectorXd> ps = sample_box(pbox, count, rng);
    std::vector<State> states(count);
    for (int i = 0; i < count; ++i) states[i] = State{qs[i], ps[i]};
    return states;
}

}  // namespace idashaper
