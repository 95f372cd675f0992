#pragma once

#include "idashaper/matcher.hpp"

namespace idashaper {

/// Free scalar shaping function with first and second derivatives.
struct PhiSpec {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    std::function<double(double)> ddphi;
};

/// phi(x) = c x^2, the default preset.
PhiSpec quadratic_phi(double c);
/// phi identically zero.
PhiSpec zero_phi();

/// Candidate desired potential as callables.
struct VdFunctions {
    std::function<double(const VectorXd&)> vd;
    std::function<VectorXd(const VectorXd&)> vd_grad;
};

/// Desired total energy H_d = 1/2 p^T M_d^{-1}(q) p + V_d(q) with its
/// target equilibrium.
struct DesiredEnergy {
    MdInv md_inv;
    std::function<double(const VectorXd&)> vd;
    std::function<VectorXd(const VectorXd&)> vd_grad;
    VectorXd q_star;
};

double hd(const DesiredEnergy& de, const State& s);
VectorXd grad_q_hd(const DesiredEnergy& de, const State& s);
VectorXd grad_p_hd(const DesiredEnergy& de, const State& s);

/// Minimum-shaping certificate at q_star: gradient below tolerance and the
/// finite-difference Hessian (step 1e-4) positive definite. A failing bundle
/// is reported as unshaped, not rejected.
struct MinimumReport {
    double grad_norm = 0.0;
    MatrixXd hessian;
    double min_eigenvalue = 0.0;
    bool shaped = false;
};

MinimumReport certify_minimum(const DesiredEnergy& de, double grad_tol = 1e-9);

/// Damping-injection gains.
struct GainConfig {
    MatrixXd kv;  ///< m x m, symmetric positive semidefinite; > 0 for certified bundles
};

GainConfig diagonal_gains(const VectorXd& diag);

/// IDA-PBC control u = u_es + u_di:
///   u_es = (G^T G)^{-1} G^T (grad_q H - M_d M^{-1} grad_q H_d + J_2 M_d^{-1} p)
///   u_di = -K_v G^T M_d^{-1} p
/// grad_q H_d uses the analytic a-gradient and V_d-gradient.
VectorXd control_law(const SystemModel& sys, const DesiredEnergy& de,
                     const J2Fn& j2, const GainConfig& kv, const State& s);

/// Potential matching residual G_perp (grad V - M_d M^{-1} grad V_d), an
/// s-vector.
VectorXd potential_residual(const SystemModel& sys, const DesiredEnergy& de,
                            const VectorXd& q);

/// Desired potential of the harmonic ansatz V_d = g1(q_k) sin(q_1) +
/// g2(q_k) cos(q_1) + phi(z(q_k) - q_1), with (g1, g2) integrated from the
/// coupled linear ODE pair induced by the potential matching equation and z
/// the homogeneous invariant int gamma_1/gamma_2.
struct HarmonicVdSolution {
    VdFunctions vd;
    HermiteTable g1, g2, z;
    double max_residual = 0.0;  ///< potential residual on the certification grid
};

/// Integrates the coupled ODE pair for a 2-DOF k=2 system (RK4, step
/// `rk_step`, from g(0) = (0,0)), assembles V_d and certifies it against the
/// potential residual on a (q1, q2) grid. `forcing_scale` multiplies the
/// inhomogeneous term; zero keeps only the homogeneous part.
/// Throws DomainTruncationError when gamma^(2) crosses zero on the domain.
HarmonicVdSolution solve_pendubot_vd(const SystemModel& sys,
                                     const StructuredMdInv& md,
                                     double domain_lo, double domain_hi,
                                     const PhiSpec& phi,
                                     double forcing_scale = 1.0,
                                     double rk_step = 1e-4);

/// Candidate V_d = phi(beta2 y - beta1 cos t) + y cos t / beta1
/// - (beta1+beta2) y^2 / (2 beta1^2) for the crane-type 3-DOF system, with
/// beta1, beta2 free scalars. The residual over the grid is reported, never
/// asserted.
struct SpiderVdReport {
    VdFunctions vd;
    double max_residual = 0.0;
    double mean_residual = 0.0;
};

SpiderVdReport spider_vd_candidate(const SystemModel& sys, const MdInv& md,
                                   double beta1, double beta2, const PhiSpec& phi,
                                   const std::vector<VectorXd>& grid);

}  // namespace idashaper
