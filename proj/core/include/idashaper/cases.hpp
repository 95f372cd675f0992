#pragma once

#include <optional>

#include "idashaper/pdesolve.hpp"
#include "idashaper/sim.hpp"

namespace idashaper {

/// 2R planar robot, first joint actuated (k = 2).
/// M = [c1+c2+2c3 cos(q2), c2+c3 cos(q2); ., c2],
/// V = c4 g cos(q1) + c5 g cos(q1+q2), G = [1; 0].
struct PendubotParams {
    double c1 = 4.0;
    double c2 = 1.0;
    double c3 = 1.5;
    // c5 is pinned so that c5*g matches the demo forcing coefficient 15 of
    // the potential matching equation; c4 is a fixture choice (it never
    // enters the matching equations).
    double c4 = 2.5;
    double c5 = 15.0 / 9.81;
    double g = 9.81;

    bool valid() const { return c1 * c2 > c3 * c3; }
};

SystemModel pendubot_model(const PendubotParams& p);

/// Planar VTOL aircraft with slopped-wing coupling eps; q = (x, y, theta),
/// M = I, V = g y, general state-dependent annihilator [cos t, sin t, -eps].
struct VtolParams {
    double eps = 0.3;
    double g = 9.81;
    double kappa = 20.0;
    double kappa_prime = 0.1;
    // Weights of the two squared flow invariants in V_d. The construction
    // fixes the structure but not the scale of the homogeneous part; these
    // defaults settle the demo initial condition well inside 25 s.
    double vd_w1 = 8.0;
    double vd_w2 = 16.0;
    VectorXd q_star = VectorXd::Zero(3);

    bool valid() const {
        return kappa > 0.0 && kappa_prime > 0.0 && kappa * kappa_prime > 1.0;
    }
};

SystemModel vtol_model(const VtolParams& p);

/// Constant desired inertia M_d = [k e^2, 0, e; 0, 1, 0; e, 0, k'].
MatrixXd vtol_md(const VtolParams& p);

/// Closed-form V_d for the constant-M_d VTOL design, built from the exact
/// flow invariants of the potential matching equation and centered at
/// q_star.
/// Defined for |theta| < 2 atan(sqrt((1-k')/(1+k'))).
VdFunctions vtol_vd(const VtolParams& p);

/// Ring-and-load crane, planar; q = (x_r, y_r, theta), cables actuate the
/// ring (k = 3).
struct SpiderParams {
    double mring = 1.0;
    double m = 0.5;
    double l3 = 1.0;
    double g = 9.81;
    double a1 = 1.0;
    double a2 = 1.0;
    double b1 = 0.0;
    double b2 = 0.0;

    bool valid() const {
        return mring > 0.0 && m > 0.0 && l3 > 0.0 &&
               b1 * m * l3 + a2 * (mring + m) > 0.0;
    }
};

SystemModel spider_model(const SpiderParams& p);

/// Structured M_d^{-1} with a(q) = y - (m l3/(M+m)) cos(theta) + a_offset,
/// a composition of the characteristic-flow invariant.
StructuredMdInv spider_md(const SpiderParams& p, double a_offset = 0.0);

/// V_d integrated along the characteristic flow of the potential matching
/// equation: a closed form -K a(q) cos(theta) + K (c2 - c2*) plus quadratic
/// invariant penalties; certified by the residual, minimum at q_star when
/// a(q_star) > 0.
VdFunctions spider_invariant_vd(const SpiderParams& p, const VectorXd& q_star,
                                double a_offset = 0.0, double weight_c1 = 0.5,
                                double weight_c2 = 0.5);

/// A fully-assembled controller bundle with its certificates.
struct Bundle {
    std::string name;
    SystemModel sys;
    MdInv md;
    J2Fn j2;
    std::optional<J2Param> j2_param;
    std::optional<AlphaSolver> alphas;
    std::optional<GammaData> gamma;
    std::optional<OdeSolution> a_solution;
    DesiredEnergy de;
    GainConfig kv;
    Regime regime;

    double necessary_condition_value = 0.0;
    int psi_rank = -1;
    MinimumReport minimum;

    /// Sampling region on which the bundle is certified.
    SampleBox q_box;
    double p_scale = 1.0;

    ClosedLoopForm closed_loop() const { return {sys, de, j2, kv}; }
};

/// Tuning knobs for the pipeline; defaults reproduce the bundled demo
/// parameter choices.
struct BundleOptions {
    double lambda = 1.0;
    double pendubot_domain = 1.2;   ///< q2 in [-d, d]
    double phi_coefficient = 10.0;  ///< quadratic phi weight
    VectorXd kv_diag;               ///< empty -> per-system default
    VectorXd md_diag;               ///< a_i constants; empty -> per-system default
    VectorXd md_offdiag;            ///< b_i constants; empty -> per-system default
};

/// Runs the full construction (desired-inertia structure, algebraic solve,
/// scalar-PDE solve, desired potential) for one of the bundled systems
/// ("pendubot", "vtol", "spider"). Stage failures surface as StageError
/// with the failing stage tag.
Bundle demo_bundle(const std::string& name, const BundleOptions& opts = {});

Bundle pendubot_bundle(const PendubotParams& p, const BundleOptions& opts = {});
Bundle vtol_bundle(const VtolParams& p, const BundleOptions& opts = {});
Bundle spider_bundle(const SpiderParams& p, const BundleOptions& opts = {});

/// Deterministic random states inside the bundle's certified box.
std::vector<State> sample_states(const Bundle& bundle, int count,
                                 std::uint64_t seed);

}  // namespace idashaper
