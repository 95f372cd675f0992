#include "idashaper/pdesolve.hpp"

#include <cmath>
#include <fstream>

#include "idashaper/errors.hpp"

namespace idashaper {

const char* to_string(RegimeTag tag) {
    switch (tag) {
        case RegimeTag::kOdeInQk: return "ode-in-qk";
        case RegimeTag::kConstantA: return "constant-a";
        case RegimeTag::kCharacteristic: return "characteristic";
    }
    return "?";
}

Regime classify(const SystemModel& sys, const MdInv& md, const AlphaSolver* alphas,
                const ProbeOptions& opts) {
    SampleBox box = opts.box;
    if (box.lo.size() == 0) {
        box.lo = VectorXd::Constant(sys.n, -1.0);
        box.hi = VectorXd::Constant(sys.n, 1.0);
    }
    std::mt19937_64 rng(opts.seed);
    const std::vector<VectorXd> grid = sample_box(box, opts.count, rng);

    Regime regime;
    const double h = 1e-6;
    for (const VectorXd& q : grid) {
        for (int i = 0; i < sys.n; ++i) {
            VectorXd qp = q;
            qp(i) = q(i) + h;
            const MatrixXd mp = sys.mass_matrix(qp);
            qp(i) = q(i) - h;
            const MatrixXd mm = sys.mass_matrix(qp);
            const double dm = ((mp - mm) / (2.0 * h)).cwiseAbs().maxCoeff();
            regime.max_dm_dq_all = std::max(regime.max_dm_dq_all, dm);
            if (!sys.has_k() || i != sys.k_index()) {
                regime.max_dm_dq_other = std::max(regime.max_dm_dq_other, dm);
            }
        }
    }
    if (regime.max_dm_dq_all <= opts.tol) {
        regime.tag = RegimeTag::kConstantA;
        regime.source_zero = true;
        return regime;
    }

    if (!sys.has_k() || !std::holds_alternative<StructuredMdInv>(md) ||
        alphas == nullptr) {
        regime.tag = RegimeTag::kCharacteristic;
        return regime;
    }
    const StructuredMdInv& smd = std::get<StructuredMdInv>(md);
    for (const VectorXd& q : grid) {
        const DerivedKinetics dk = derived_kinetics(sys, q);
        regime.max_bbm_kk = std::max(regime.max_bbm_kk, std::abs(dk.bb_m(smd.k, smd.k)));
        const std::vector<VectorXd> a = alphas->solve_at(q);
        double source = dk.bb_m(smd.k, smd.k) / dk.det_m;
        for (int i = 0; i < smd.n - 1; ++i) {
            source += 2.0 * smd.offdiag(i) * a[i](smd.k);
        }
        regime.max_source = std::max(regime.max_source, std::abs(source));
    }
    regime.source_zero = regime.max_source <= opts.tol;

    if (regime.max_dm_dq_other <= opts.tol && !regime.source_zero) {
        regime.tag = RegimeTag::kOdeInQk;
    } else {
        regime.tag = RegimeTag::kCharacteristic;
    }
    return regime;
}

double OdeSolution::a(double qk) const {
    return (lambda * std::exp(phi1 * F(qk)) - phi2) / phi1;
}

double OdeSolution::a_deriv(double qk) const {
    return lambda * std::exp(phi1 * F(qk)) * f(qk) / gamma_k(qk);
}

std::function<double(const VectorXd&)> OdeSolution::a_fun() const {
    const OdeSolution self = *this;
    return [self](const VectorXd& q) { return self.a(q(self.k)); };
}

std::function<VectorXd(const VectorXd&)> OdeSolution::a_grad(int n) const {
    const OdeSolution self = *this;
    return [self, n](const VectorXd& q) {
        VectorXd g = VectorXd::Zero(n);
        g(self.k) = self.a_deriv(q(self.k));
        return g;
    };
}

void OdeSolution::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << "qk,a,F\n";
    const VectorXd& nodes = f_table.nodes();
    for (int i = 0; i < nodes.size(); ++i) {
        const double qk = nodes(i);
        out << format_double(qk) << ',' << format_double(a(qk)) << ','
            << format_double(F(qk)) << '\n';
    }
}

OdeSolutionTable load_ode_solution_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("qk,a,F", 0) != 0) {
        throw Error("bad a-table header in " + path);
    }
    std::vector<double> qk, a, f;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw Error("bad a-table row in " + path);
        }
        qk.push_back(parse_double(line.substr(0, c1)));
        a.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
        f.push_back(parse_double(line.substr(c2 + 1)));
    }
    const int n = static_cast<int>(qk.size());
    VectorXd x = Eigen::Map<VectorXd>(qk.data(), n);
    VectorXd ya = Eigen::Map<VectorXd>(a.data(), n);
    VectorXd yf = Eigen::Map<VectorXd>(f.data(), n);
    OdeSolutionTable table;
    table.a = CubicSpline(x, ya);
    table.F = CubicSpline(x, yf);
    table.min_qk = x(0);
    table.max_qk = x(n - 1);
    return table;
}

OdeSolution solve_ode(const SystemModel& sys, const StructuredMdInv& md,
                      const AlphaSolver& alphas, double domain_lo,
                      double domain_hi, double lambda, int nodes) {
    if (!(domain_hi > domain_lo)) throw Error("solve_ode: empty domain");
    const int k = md.k;
    const int n = md.n;
    const GammaData gd = gamma_and_phis(md, sys);

    // In this regime every coefficient depends on q_k alone; other
    // coordinates are pinned at zero for evaluation.
    const auto embed = [n, k](double qk) {
        VectorXd q = VectorXd::Zero(n);
        q(k) = qk;
        return q;
    };
    const SystemModel sys_copy = sys;
    const StructuredMdInv md_copy = md;
    const AlphaSolver alphas_copy = alphas;
    const GammaData gd_copy = gd;

    const auto gamma_k = [gd_copy, embed, k](double qk) {
        return gd_copy.gamma(embed(qk))(k);
    };
    const auto source = [sys_copy, md_copy, alphas_copy, embed, k](double qk) {
        const VectorXd q = embed(qk);
        const DerivedKinetics dk = derived_kinetics(sys_copy, q);
        const std::vector<VectorXd> a = alphas_copy.solve_at(q);
        double f = dk.bb_m(k, k) / dk.det_m;
        for (int i = 0; i < md_copy.n - 1; ++i) {
            f += 2.0 * md_copy.offdiag(i) * a[i](k);
        }
        return f;
    };
    const auto integrand = [gamma_k, source](double qk) {
        return source(qk) / gamma_k(qk);
    };

    VectorXd grid = VectorXd::LinSpaced(nodes, domain_lo, domain_hi);
    double prev = gamma_k(grid(0));
    for (int i = 0; i < nodes; ++i) {
        const double g = gamma_k(grid(i));
        if (std::abs(g) < 1e-12 || g * prev < 0.0) {
            throw GammaZeroError("gamma^(k) vanishes on the domain near q_k = " +
                                 format_double(grid(i)));
        }
        prev = g;
    }

    // Cumulative quadrature from the domain midpoint outwards.
    const double mid = 0.5 * (domain_lo + domain_hi);
    VectorXd f_values(nodes);
    VectorXd f_derivs(nodes);
    int anchor = 0;
    double best = std::abs(grid(0) - mid);
    for (int i = 1; i < nodes; ++i) {
        const double d = std::abs(grid(i) - mid);
        if (d < best) {
            best = d;
            anchor = i;
        }
    }
    f_values(anchor) = adaptive_simpson(integrand, mid, grid(anchor));
    for (int i = anchor + 1; i < nodes; ++i) {
        f_values(i) = f_values(i - 1) + adaptive_simpson(integrand, grid(i - 1), grid(i));
    }
    for (int i = anchor - 1; i >= 0; --i) {
        f_values(i) = f_values(i + 1) - adaptive_simpson(integrand, grid(i), grid(i + 1));
    }
    for (int i = 0; i < nodes; ++i) f_derivs(i) = integrand(grid(i));

    OdeSolution sol;
    sol.lambda = lambda;
    sol.phi1 = gd.phi1;
    sol.phi2 = gd.phi2;
    sol.k = k;
    sol.f_table = HermiteTable(grid, f_values, f_derivs);
    sol.f = source;
    sol.gamma_k = gamma_k;

    for (int i = 0; i < nodes; ++i) {
        const double det = lambda * std::exp(sol.phi1 * f_values(i));
        if (!(det > 0.0) || !std::isfinite(det)) {
            throw PositivityError("lambda*exp(phi1*F) fails the sign requirement at q_k = " +
                                  format_double(grid(i)));
        }
    }
    return sol;
}

MatrixXd constant_md(const SystemModel& sys, const MdInv& md,
                     const SampleBox& box, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::vector<VectorXd> qs = sample_box(box, 100, rng);
    SampleBox pbox{VectorXd::Constant(sys.n, -1.0), VectorXd::Constant(sys.n, 1.0)};
    const std::vector<VectorXd> ps = sample_box(pbox, 100, rng);

    const VectorXd q0 = qs.front();
    const MatrixXd mdinv = md_inv_matrix(md, q0);
    const J2Fn j2 = zero_j2(sys.n);
    double worst = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const VectorXd r = kinetic_residual_general(sys, md, j2, qs[i], ps[i]);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    if (worst > 1e-10) {
        throw Error("constant M_d does not close the kinetic matching equation; "
                    "max residual " + format_double(worst));
    }
    return mdinv;
}

CharacteristicReport verify_characteristic_solution(
    const SystemModel& sys, const StructuredMdInv& md, const J2Param& j2,
    const std::vector<VectorXd>& grid, const std::vector<VectorXd>& flow_seeds,
    double horizon, double step) {
    CharacteristicReport report;
    for (const VectorXd& q : grid) {
        report.max_pde_residual = std::max(
            report.max_pde_residual, std::abs(scalar_pde_residual(md, j2, sys, q)));
    }

    const GammaData gd = gamma_and_phis(md, sys);
    const auto flow = [&](const VectorXd& q) -> VectorXd {
        return gd.gamma(q) / realize(md, q).determinant();
    };
    const auto source = [&](const VectorXd& q) {
        const DerivedKinetics dk = derived_kinetics(sys, q);
        const std::vector<VectorXd> a = j2.row_alphas(q);
        double f = dk.bb_m(md.k, md.k) / dk.det_m;
        for (int i = 0; i < md.n - 1; ++i) {
            f += 2.0 * md.offdiag(i) * a[i](md.k);
        }
        return f;
    };

    for (const VectorXd& seed : flow_seeds) {
        VectorXd q = seed;
        const double a0 = md.a_fun(seed);
        double accumulated = 0.0;  // int_0^s source(q(s')) ds'
        double t = 0.0;
        while (t < horizon - 0.5 * step) {
            // Advance the state and the source integral with one RK4 stage set.
            const VectorXd k1 = flow(q);
            const double s1 = source(q);
            const VectorXd k2 = flow(q + 0.5 * step * k1);
            const double s2 = source(q + 0.5 * step * k1);
            const VectorXd k3 = flow(q + 0.5 * step * k2);
            const double s3 = source(q + 0.5 * step * k2);
            const VectorXd k4 = flow(q + step * k3);
            const double s4 = source(q + step * k3);
            q += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            accumulated += (step / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
            t += step;
            const double drift = std::abs(md.a_fun(q) - a0 - accumulated);
            report.max_flow_drift = std::max(report.max_flow_drift, drift / horizon);
        }
    }
    return report;
}

}  // namespace idashaper
