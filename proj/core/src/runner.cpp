#include "idashaper/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "idashaper/errors.hpp"

namespace idashaper {

namespace {

double param_or(const Scenario& sc, const std::string& name, double fallback) {
    const auto it = sc.system_params.find(name);
    return it == sc.system_params.end() ? fallback : it->second;
}

BundleOptions options_from(const Scenario& sc) {
    BundleOptions opts;
    opts.lambda = sc.lambda;
    if (sc.domain) {
        opts.pendubot_domain = std::max(std::abs(sc.domain->first), std::abs(sc.domain->second));
    }
    opts.phi_coefficient = sc.phi_c;
    if (sc.kv_diag) opts.kv_diag = *sc.kv_diag;
    if (sc.md_a) opts.md_diag = *sc.md_a;
    if (sc.md_b) opts.md_offdiag = *sc.md_b;
    return opts;
}

struct CheckLine {
    std::string name;
    bool pass = false;
    bool gating = true;
    std::string detail;
};

class ReportBuilder {
public:
    void add(const std::string& name, bool pass, const std::string& detail,
             bool gating = true) {
        lines_.push_back({name, pass, gating, detail});
    }
    void info(const std::string& name, const std::string& detail) {
        lines_.push_back({name, true, false, detail});
    }
    bool all_pass() const {
        for (const auto& l : lines_) {
            if (l.gating && !l.pass) return false;
        }
        return true;
    }
    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw Error("cannot open " + path + " for writing");
        for (const auto& l : lines_) {
            out << (l.gating ? (l.pass ? "[PASS] " : "[FAIL] ") : "[INFO] ")
                << l.name << ": " << l.detail << '\n';
        }
        out << (all_pass() ? "RESULT: PASS\n" : "RESULT: FAIL\n");
    }

private:
    std::vector<CheckLine> lines_;
};

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

SampleBox grid_box(const Scenario& sc, const Bundle& bundle) {
    SampleBox box = bundle.q_box;
    if (sc.q_min && sc.q_max) {
        if (sc.q_min->size() != bundle.sys.n || sc.q_max->size() != bundle.sys.n) {
            throw SchemaError("grids.q_min/q_max must have n entries");
        }
        box.lo = *sc.q_min;
        box.hi = *sc.q_max;
    }
    return box;
}

void write_residual_csv(std::ofstream& out, const std::string& kind,
                        const VectorXd& q, double residual) {
    out << kind;
    for (int i = 0; i < q.size(); ++i) out << ',' << format_double(q(i));
    out << ',' << format_double(residual) << '\n';
}

}  // namespace

Bundle bundle_from_scenario(const Scenario& sc) {
    const BundleOptions opts = options_from(sc);
    Bundle bundle;
    if (sc.system_name == "pendubot") {
        PendubotParams p;
        p.c1 = param_or(sc, "c1", p.c1);
        p.c2 = param_or(sc, "c2", p.c2);
        p.c3 = param_or(sc, "c3", p.c3);
        p.c4 = param_or(sc, "c4", p.c4);
        p.c5 = param_or(sc, "c5", p.c5);
        p.g = param_or(sc, "g", p.g);
        BundleOptions o = opts;
        bundle = pendubot_bundle(p, o);
    } else if (sc.system_name == "vtol") {
        VtolParams p;
        p.eps = param_or(sc, "eps", p.eps);
        p.g = param_or(sc, "g", p.g);
        p.kappa = param_or(sc, "kappa", p.kappa);
        p.kappa_prime = param_or(sc, "kappa_prime", p.kappa_prime);
        p.vd_w1 = param_or(sc, "vd_w1", p.vd_w1);
        p.vd_w2 = param_or(sc, "vd_w2", p.vd_w2);
        bundle = vtol_bundle(p, opts);
    } else if (sc.system_name == "spider") {
        SpiderParams p;
        p.mring = param_or(sc, "mring", p.mring);
        p.m = param_or(sc, "m", p.m);
        p.l3 = param_or(sc, "l3", p.l3);
        p.g = param_or(sc, "g", p.g);
        p.a1 = param_or(sc, "a1", p.a1);
        p.a2 = param_or(sc, "a2", p.a2);
        p.b1 = param_or(sc, "b1", p.b1);
        p.b2 = param_or(sc, "b2", p.b2);
        if (sc.md_a && sc.md_a->size() == 2) {
            p.a1 = (*sc.md_a)(0);
            p.a2 = (*sc.md_a)(1);
        }
        if (sc.md_b && sc.md_b->size() == 2) {
            p.b1 = (*sc.md_b)(0);
            p.b2 = (*sc.md_b)(1);
        }
        bundle = spider_bundle(p, opts);
    } else {
        throw SchemaError("unknown system '" + sc.system_name + "'");
    }

    if (sc.md_matrix) {
        // Keep the solved V_d; swapping the desired inertia underneath it is
        // exactly what verification is meant to catch.
        if (sc.md_matrix->rows() != bundle.sys.n) {
            throw SchemaError("md.matrix has wrong dimension for this system");
        }
        const MatrixXd mdinv = sc.md_matrix->inverse();
        bundle.md = mdinv;
        bundle.de.md_inv = mdinv;
        bundle.necessary_condition_value =
            necessary_condition(bundle.md, bundle.sys, bundle.de.q_star);
        bundle.minimum = certify_minimum(bundle.de);
    }
    return bundle;
}

int cmd_verify(const Scenario& sc, const std::string& out_dir) {
    const auto dir = prepare_out_dir(out_dir);
    const Bundle bundle = bundle_from_scenario(sc);
    ReportBuilder report;
    report.info("scenario", sc.system_name + " seed=" + std::to_string(sc.seed));
    report.info("regime", to_string(bundle.regime.tag));

    // Necessary condition on the desired inertia.
    const double nc = bundle.necessary_condition_value;
    report.add("necessary-condition", nc > kNecessaryConditionMargin,
               "value=" + format_double(nc) + " margin=" +
                   format_double(kNecessaryConditionMargin));

    // Positive definiteness of M_d^{-1} over the grid.
    const SampleBox box = grid_box(sc, bundle);
    std::mt19937_64 rng(sc.seed);
    const std::vector<VectorXd> grid = sample_box(box, sc.grid_count, rng);
    const PdGridReport pd = positive_definite_on_grid(bundle.md, grid);
    report.add("md-positive-definite", pd.all_positive(),
               "min leading minor=" + format_double(pd.min_minor) + " over " +
                   std::to_string(grid.size()) + " points");

    // Psi rank for k-type systems.
    if (bundle.alphas) {
        const int expected = algebraic_equation_count(bundle.sys.n);
        report.add("psi-rank", bundle.psi_rank == expected,
                   "rank=" + std::to_string(bundle.psi_rank) + " expected=" +
                       std::to_string(expected));
    } else {
        report.info("psi-rank", "skipped (general annihilator)");
    }

    std::ofstream csv(dir / "residuals.csv");
    if (!csv) throw Error("cannot open residuals.csv for writing");
    csv << "kind";
    for (int i = 1; i <= bundle.sys.n; ++i) csv << ",q" << i;
    csv << ",residual_inf\n";

    // Kinetic matching residual.
    double kinetic_max = 0.0;
    if (bundle.j2_param && std::holds_alternative<StructuredMdInv>(bundle.md)) {
        const auto& md = std::get<StructuredMdInv>(bundle.md);
        for (const VectorXd& q : grid) {
            const double r = kinetic_residual_structured(md, *bundle.j2_param,
                                                         bundle.sys, q)
                                 .cwiseAbs()
                                 .maxCoeff();
            kinetic_max = std::max(kinetic_max, r);
            write_residual_csv(csv, "kinetic", q, r);
        }
    } else {
        const std::vector<State> states = sample_states(bundle, sc.grid_count, sc.seed + 1);
        for (const State& s : states) {
            const double r = kinetic_residual_general(bundle.sys, bundle.md,
                                                      bundle.j2, s.q, s.p)
                                 .cwiseAbs()
                                 .maxCoeff();
            kinetic_max = std::max(kinetic_max, r);
            write_residual_csv(csv, "kinetic", s.q, r);
        }
    }
    report.add("kinetic-residual", kinetic_max <= 1e-8,
               "max=" + format_double(kinetic_max) + " tol=1e-08");

    // Scalar PDE residual for k-type systems.
    if (bundle.j2_param && std::holds_alternative<StructuredMdInv>(bundle.md)) {
        const auto& md = std::get<StructuredMdInv>(bundle.md);
        double pde_max = 0.0;
        for (const VectorXd& q : grid) {
            const double r = std::abs(scalar_pde_residual(md, *bundle.j2_param,
                                                          bundle.sys, q));
            pde_max = std::max(pde_max, r);
            write_residual_csv(csv, "pde", q, r);
        }
        report.add("scalar-pde-residual", pde_max <= 1e-8,
                   "max=" + format_double(pde_max) + " tol=1e-08");
    }

    // Potential matching residual.
    double potential_max = 0.0;
    for (const VectorXd& q : grid) {
        const double r =
            potential_residual(bundle.sys, bundle.de, q).cwiseAbs().maxCoeff();
        potential_max = std::max(potential_max, r);
        write_residual_csv(csv, "potential", q, r);
    }
    report.add("potential-residual", potential_max <= 1e-8,
               "max=" + format_double(potential_max) + " tol=1e-08");

    // Minimum shaping (report only; an unshaped bundle is not rejected).
    report.info("vd-minimum",
                std::string(bundle.minimum.shaped ? "shaped" : "unshaped") +
                    " grad=" + format_double(bundle.minimum.grad_norm) +
                    " min_eig=" + format_double(bundle.minimum.min_eigenvalue));

    // Decisive end-to-end check.
    const std::vector<State> states = sample_states(bundle, sc.grid_count, sc.seed + 2);
    const MatchReport match = match_certificate(bundle.sys, bundle.closed_loop(), states);
    report.add("match-certificate", match.pass(),
               "max deviation=" + format_double(match.max_deviation) + " tol=1e-08 over " +
                   std::to_string(states.size()) + " states");

    report.write((dir / "report.txt").string());
    return report.all_pass() ? kExitOk : kExitCertificationFailure;
}

int cmd_solve(const Scenario& sc, const std::string& out_dir) {
    const auto dir = prepare_out_dir(out_dir);
    const Bundle bundle = bundle_from_scenario(sc);
    ReportBuilder report;
    report.info("scenario", sc.system_name + " seed=" + std::to_string(sc.seed));
    report.info("regime", to_string(bundle.regime.tag));

    switch (bundle.regime.tag) {
        case RegimeTag::kOdeInQk: {
            if (!bundle.a_solution || !bundle.j2_param) {
                throw StageError("pdesolve", "ODE regime without a solved a(q_k)");
            }
            const OdeSolution& sol = *bundle.a_solution;
            const auto& md = std::get<StructuredMdInv>(bundle.md);
            const std::string table = (dir / ("a_of_q" + std::to_string(md.k + 1) +
                                              ".csv")).string();
            // Table with the per-sample scalar-PDE residual column.
            std::ofstream out(table);
            if (!out) throw Error("cannot open " + table);
            out << "qk,a,F,residual\n";
            const VectorXd& nodes = sol.f_table.nodes();
            double res_max = 0.0;
            for (int i = 0; i < nodes.size(); ++i) {
                VectorXd q = VectorXd::Zero(bundle.sys.n);
                q(md.k) = nodes(i);
                const double r =
                    std::abs(scalar_pde_residual(md, *bundle.j2_param, bundle.sys, q));
                res_max = std::max(res_max, r);
                out << format_double(nodes(i)) << ',' << format_double(sol.a(nodes(i)))
                    << ',' << format_double(sol.F(nodes(i))) << ',' << format_double(r)
                    << '\n';
            }
            report.add("ode-residual", res_max <= 1e-8,
                       "max=" + format_double(res_max) + " tol=1e-08");
            report.info("phi", "phi1=" + format_double(sol.phi1) +
                                   " phi2=" + format_double(sol.phi2) +
                                   " lambda=" + format_double(sol.lambda));
            break;
        }
        case RegimeTag::kConstantA: {
            const MatrixXd mdinv = md_inv_matrix(bundle.md, VectorXd::Zero(bundle.sys.n));
            std::ofstream out(dir / "md_inverse.csv");
            if (!out) throw Error("cannot open md_inverse.csv");
            for (int i = 0; i < mdinv.rows(); ++i) {
                for (int j = 0; j < mdinv.cols(); ++j) {
                    out << (j ? "," : "") << format_double(mdinv(i, j));
                }
                out << '\n';
            }
            report.add("constant-md", spd_check(mdinv),
                       "verified constant M_d^{-1}, SPD");
            break;
        }
        case RegimeTag::kCharacteristic: {
            if (!bundle.j2_param || !std::holds_alternative<StructuredMdInv>(bundle.md)) {
                throw StageError("pdesolve", "characteristic regime needs a structured M_d");
            }
            const auto& md = std::get<StructuredMdInv>(bundle.md);
            std::mt19937_64 rng(sc.seed);
            const SampleBox box = grid_box(sc, bundle);
            const std::vector<VectorXd> grid = sample_box(box, sc.grid_count, rng);
            const std::vector<VectorXd> seeds = sample_box(box, 10, rng);
            const CharacteristicReport cr = verify_characteristic_solution(
                bundle.sys, md, *bundle.j2_param, grid, seeds);
            report.add("characteristic-residual", cr.max_pde_residual <= 1e-8,
                       "max=" + format_double(cr.max_pde_residual) + " tol=1e-08");
            report.add("characteristic-flow-drift", cr.max_flow_drift <= 1e-6,
                       "max=" + format_double(cr.max_flow_drift) + " tol=1e-06");
            break;
        }
    }
    report.write((dir / "solve_report.txt").string());
    return report.all_pass() ? kExitOk : kExitCertificationFailure;
}

int cmd_simulate(const Scenario& sc, const std::string& out_dir) {
    const auto dir = prepare_out_dir(out_dir);
    const Bundle bundle = bundle_from_scenario(sc);
    if (!sc.q0 || !sc.p0) throw SchemaError("simulate requires sim.q0 and sim.p0");
    if (sc.q0->size() != bundle.sys.n || sc.p0->size() != bundle.sys.n) {
        throw SchemaError("sim.q0/p0 must have n entries");
    }

    const State s0{*sc.q0, *sc.p0};
    const Trajectory traj = integrate(bundle.sys, bundle.de, bundle.j2, bundle.kv,
                                      s0, sc.t_final, sc.dt);
    save_trajectory_csv(traj, (dir / "trajectory.csv").string());

    const EnergyAuditReport audit = energy_audit(traj, bundle.closed_loop());
    const VectorXd q_final = traj.states.back().q;
    const double dist = (q_final - bundle.de.q_star).cwiseAbs().maxCoeff();

    ReportBuilder report;
    report.info("scenario", sc.system_name + " seed=" + std::to_string(sc.seed));
    report.info("final-state", "|q(T)-q*|_inf=" + format_double(dist));
    report.add("energy-monotone", audit.monotone,
               "max step increase=" + format_double(audit.max_step_increase));
    report.info("dissipation-rate",
                "max relative mismatch=" + format_double(audit.max_rate_mismatch));
    report.write((dir / "sim_report.txt").string());

    std::ofstream plot(dir / "plot.gp");
    if (!plot) throw Error("cannot open plot.gp");
    plot << "set datafile separator ','\n"
         << "set key autotitle columnhead\n"
         << "set xlabel 't [s]'\n"
         << "set terminal pngcairo size 1200,800\n"
         << "set output 'trajectory.png'\n"
         << "set multiplot layout 2,1\n"
         << "plot";
    for (int i = 0; i < bundle.sys.n; ++i) {
        plot << (i ? "," : "") << " 'trajectory.csv' using 1:" << (2 + i)
             << " with lines";
    }
    plot << "\nplot 'trajectory.csv' using 1:" << (2 + 2 * bundle.sys.n +
                                                   bundle.sys.m)
         << " with lines title 'Hd'\n"
         << "unset multiplot\n";

    return report.all_pass() ? kExitOk : kExitCertificationFailure;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    const std::string usage =
        "usage: ida-shaper {verify|solve|simulate} <scenario-file> [--out DIR] [--seed N]";
    if (args.empty()) {
        std::cerr << usage << '\n';
        return kExitSchemaError;
    }
    const std::string command = args[0];
    if (command != "verify" && command != "solve" && command != "simulate") {
        std::cerr << "unknown command '" << command << "'\n" << usage << '\n';
        return kExitSchemaError;
    }
    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--out") {
            if (i + 1 >= args.size()) {
                std::cerr << "--out needs a directory\n";
                return kExitSchemaError;
            }
            out_dir = args[++i];
        } else if (args[i] == "--seed") {
            if (i + 1 >= args.size()) {
                std::cerr << "--seed needs a value\n";
                return kExitSchemaError;
            }
            seed_override = std::stoull(args[++i]);
        } else if (scenario_path.empty()) {
            scenario_path = args[i];
        } else {
            std::cerr << "unexpected argument '" << args[i] << "'\n" << usage << '\n';
            return kExitSchemaError;
        }
    }
    if (scenario_path.empty()) {
        std::cerr << usage << '\n';
        return kExitSchemaError;
    }

    try {
        Scenario sc = load_scenario(scenario_path);
        if (seed_override) sc.seed = *seed_override;
        if (command == "verify") return cmd_verify(sc, out_dir);
        if (command == "solve") return cmd_solve(sc, out_dir);
        return cmd_simulate(sc, out_dir);
    } catch (const SchemaError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitSchemaError;
    } catch (const StageError& e) {
        std::cerr << "stage failure " << e.what() << '\n';
        return kExitCertificationFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCertificationFailure;
    }
}

}  // namespace idashaper
