#pragma once

#include "idashaper/control.hpp"
#include "idashaper/errors.hpp"

namespace idashaper {

/// Everything needed to evaluate the target Hamiltonian form with damping
/// block G K_v G^T.
struct ClosedLoopForm {
    SystemModel sys;
    DesiredEnergy de;
    J2Fn j2;
    GainConfig kv;
};

/// Time-stamped closed-loop records on a uniform grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<VectorXd> inputs;
    std::vector<double> energies;  ///< H_d from the bundle actually in use

    std::size_t size() const { return times.size(); }
};

/// Non-finite or unbounded state during integration; carries the partial
/// trajectory recorded up to the failure.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, Trajectory partial)
        : Error(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

/// Open-loop field under the IDA-PBC law: qdot = M^{-1} p,
/// pdot = -grad_q H + G u.
State vector_field_open_loop(const SystemModel& sys, const DesiredEnergy& de,
                             const J2Fn& j2, const GainConfig& kv, const State& s);

/// Open-loop field with an explicitly supplied input.
State open_loop_field_with_u(const SystemModel& sys, const State& s,
                             const VectorXd& u);

/// Target closed-loop field: qdot = M^{-1} M_d grad_p H_d,
/// pdot = -M_d M^{-1} grad_q H_d + (J_2 - G K_v G^T) grad_p H_d.
State vector_field_target(const ClosedLoopForm& cl, const State& s);

/// Max infinity-norm gap between the controlled open-loop field and the
/// target field over the samples; the decisive end-to-end matching check.
struct MatchReport {
    double max_deviation = 0.0;
    bool pass(double tol = 1e-8) const { return max_deviation <= tol; }
};

MatchReport match_certificate(const SystemModel& sys, const ClosedLoopForm& cl,
                              const std::vector<State>& samples);

/// Fixed-step RK4 integration of the controlled open loop; records u and
/// H_d at every sample time. Aborts with DivergenceError when the state
/// leaves |.|_inf <= 1e6 or turns non-finite.
Trajectory integrate(const SystemModel& sys, const DesiredEnergy& de,
                     const J2Fn& j2, const GainConfig& kv, const State& s0,
                     double t_final, double dt);

/// Per-step energy bookkeeping along a recorded trajectory.
struct EnergyAuditReport {
    double max_step_increase = 0.0;   ///< max of dH - 1e-6*dt*(1+|H|) over steps
    double max_rate_mismatch = 0.0;   ///< |dH/dt + dissipation|, midpoint rule, relative
    bool monotone = false;            ///< every step passed the increase bound
    bool rate_consistent = false;     ///< every step within 1e-4 relative
    bool pass() const { return monotone && rate_consistent; }
};

EnergyAuditReport energy_audit(const Trajectory& traj, const ClosedLoopForm& cl);

/// Trajectory CSV with header t,q1..qn,p1..pn,u1..um,Hd and round-trip
/// decimal formatting.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace idashaper
