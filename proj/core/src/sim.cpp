#include "idashaper/sim.hpp"

#include <cmath>
#include <fstream>

namespace idashaper {

State vector_field_open_loop(const SystemModel& sys, const DesiredEnergy& de,
                             const J2Fn& j2, const GainConfig& kv, const State& s) {
    return open_loop_field_with_u(sys, s, control_law(sys, de, j2, kv, s));
}

State open_loop_field_with_u(const SystemModel& sys, const State& s,
                             const VectorXd& u) {
    const MatrixXd m = sys.mass_matrix(s.q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);

    const auto kinetic = [&sys, &s](const VectorXd& qq) {
        return 0.5 * s.p.dot(sys.mass_matrix(qq).inverse() * s.p);
    };
    const VectorXd grad_h = fd_gradient(kinetic, s.q) + sys.grad_v(s.q);

    State field;
    field.q = m.llt().solve(s.p);
    field.p = -grad_h + sys.input_map(s.q) * u;
    return field;
}

State vector_field_target(const ClosedLoopForm& cl, const State& s) {
    const MatrixXd m = cl.sys.mass_matrix(s.q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);
    const MatrixXd mdinv = md_inv_matrix(cl.de.md_inv, s.q);
    const MatrixXd md_mat = mdinv.inverse();
    const MatrixXd g = cl.sys.input_map(s.q);

    const VectorXd dp_hd = mdinv * s.p;
    const VectorXd dq_hd = grad_q_hd(cl.de, s);

    State field;
    field.q = m.inverse() * md_mat * dp_hd;
    field.p = -md_mat * m.inverse() * dq_hd +
              (cl.j2(s.q, s.p) - g * cl.kv.kv * g.transpose()) * dp_hd;
    return field;
}

MatchReport match_certificate(const SystemModel& sys, const ClosedLoopForm& cl,
                              const std::vector<State>& samples) {
    MatchReport report;
    std::vector<double> devs(samples.size(), 0.0);
    parallel_for(samples.size(), [&](std::size_t i) {
        const State open = vector_field_open_loop(sys, cl.de, cl.j2, cl.kv, samples[i]);
        const State target = vector_field_target(cl, samples[i]);
        const double dq = (open.q - target.q).cwiseAbs().maxCoeff();
        const double dp = (open.p - target.p).cwiseAbs().maxCoeff();
        devs[i] = std::max(dq, dp);
    });
    for (const double d : devs) report.max_deviation = std::max(report.max_deviation, d);
    return report;
}

Trajectory integrate(const SystemModel& sys, const DesiredEnergy& de,
                     const J2Fn& j2, const GainConfig& kv, const State& s0,
                     double t_final, double dt) {
    if (!(dt > 0.0) || t_final < dt) throw Error("integrate: need t_final >= dt > 0");
    const int n = sys.n;
    const auto pack = [n](const State& s) {
        VectorXd x(2 * n);
        x.head(n) = s.q;
        x.tail(n) = s.p;
        return x;
    };
    const auto unpack = [n](const VectorXd& x) {
        State s;
        s.q = x.head(n);
        s.p = x.tail(n);
        return s;
    };
    const auto field = [&](const VectorXd& x) {
        const State ds = vector_field_open_loop(sys, de, j2, kv, unpack(x));
        return pack(ds);
    };

    Trajectory traj;
    const std::size_t steps = static_cast<std::size_t>(std::llround(t_final / dt));
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.inputs.reserve(steps + 1);
    traj.energies.reserve(steps + 1);

    VectorXd x = pack(s0);
    for (std::size_t step = 0; step <= steps; ++step) {
        const State s = unpack(x);
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6) {
            throw DivergenceError("trajectory diverged at t = " +
                                      format_double(step * dt),
                                  std::move(traj));
        }
        traj.times.push_back(step * dt);
        traj.states.push_back(s);
        traj.inputs.push_back(control_law(sys, de, j2, kv, s));
        traj.energies.push_back(hd(de, s));
        if (step < steps) x = rk4_step(field, x, dt);
    }
    return traj;
}

EnergyAuditReport energy_audit(const Trajectory& traj, const ClosedLoopForm& cl) {
    EnergyAuditReport report;
    report.monotone = true;
    report.rate_consistent = true;
    if (traj.size() < 2) return report;

    const auto dissipation = [&](const State& s) {
        const VectorXd gp_hd =
            cl.sys.input_map(s.q).transpose() * grad_p_hd(cl.de, s);
        return gp_hd.dot(cl.kv.kv * gp_hd);
    };

    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        const double dh = traj.energies[i + 1] - traj.energies[i];
        const double allowance = 1e-6 * dt * (1.0 + std::abs(traj.energies[i]));
        report.max_step_increase = std::max(report.max_step_increase, dh - allowance);
        if (dh > allowance) report.monotone = false;

        const double rate = dh / dt;
        const State mid{0.5 * (traj.states[i].q + traj.states[i + 1].q),
                        0.5 * (traj.states[i].p + traj.states[i + 1].p)};
        const double target = -dissipation(mid);
        const double mismatch = std::abs(rate - target) / (1.0 + std::abs(target));
        report.max_rate_mismatch = std::max(report.max_rate_mismatch, mismatch);
        if (mismatch > 1e-4) report.rate_consistent = false;
    }
    return report;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().q.size());
    const int m = traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs.front().size());
    out << 't';
    for (int i = 1; i <= n; ++i) out << ",q" << i;
    for (int i = 1; i <= n; ++i) out << ",p" << i;
    for (int i = 1; i <= m; ++i) out << ",u" << i;
    out << ",Hd\n";
    for (std::size_t row = 0; row < traj.size(); ++row) {
        out << format_double(traj.times[row]);
        for (int i = 0; i < n; ++i) out << ',' << format_double(traj.states[row].q(i));
        for (int i = 0; i < n; ++i) out << ',' << format_double(traj.states[row].p(i));
        for (int i = 0; i < m; ++i) out << ',' << format_double(traj.inputs[row](i));
        out << ',' << format_double(traj.energies[row]) << '\n';
    }
}

}  // namespace idashaper
