#pragma once

#include "idashaper/matcher.hpp"

namespace idashaper {

/// Solution regimes of the remaining scalar PDE.
enum class RegimeTag {
    kOdeInQk,        ///< M varies only with q_k and the a-free source is nonzero
    kConstantA,      ///< M constant; a constant M_d closes the kinetic equation
    kCharacteristic  ///< general case, handled along the gamma flow
};

const char* to_string(RegimeTag tag);

/// Classification outcome with the probe evidence behind it.
struct Regime {
    RegimeTag tag = RegimeTag::kCharacteristic;
    double max_dm_dq_all = 0.0;    ///< max |dM/dq_i| over all i
    double max_dm_dq_other = 0.0;  ///< max |dM/dq_i| over i != k
    double max_bbm_kk = 0.0;       ///< max |bbM_kk| (k-type systems)
    double max_source = 0.0;       ///< max |a-free source of the scalar PDE|
    bool source_zero = false;      ///< source vanished on the whole probe grid
};

/// Probe settings for classification.
struct ProbeOptions {
    SampleBox box;       ///< defaults to [-1, 1]^n when lo/hi empty
    int count = 200;
    std::uint64_t seed = 20240915;
    double tol = 1e-10;
};

/// Probes dM/dq_i and the a-free source terms on a random grid.
/// Constant M tags kConstantA. A nonconstant M depending only on q_k with a
/// nonvanishing source tags kOdeInQk (the PDE collapses to an ODE in q_k).
/// Everything else, including a source that vanishes identically, tags
/// kCharacteristic. The alpha solver may be null only when M is constant.
Regime classify(const SystemModel& sys, const MdInv& md, const AlphaSolver* alphas,
                const ProbeOptions& opts = {});

/// a(q_k) produced by quadrature of the regime-1 ODE:
/// a = (lambda * exp(phi1 * F) - phi2) / phi1 with F = int f / gamma_k.
struct OdeSolution {
    double lambda = 1.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    int k = 0;
    HermiteTable f_table;  ///< cumulative quadrature F(q_k), base point = domain midpoint

    /// Source f(q_k) = bbM_kk/detM + 2 sum b_i alpha_i^(k), evaluated fresh.
    std::function<double(double)> f;
    /// gamma^(k)(q_k).
    std::function<double(double)> gamma_k;

    double F(double qk) const { return f_table.value(qk); }
    double a(double qk) const;
    /// da/dq_k through the ODE relation lambda * exp(phi1 F) * f / gamma_k.
    double a_deriv(double qk) const;

    /// Callbacks evaluating a and grad a on full configurations, suitable
    /// for the a_fun / a_grad slots of a StructuredMdInv.
    std::function<double(const VectorXd&)> a_fun() const;
    std::function<VectorXd(const VectorXd&)> a_grad(int n) const;

    /// Sampled table (q_k, a, F) written with round-trip formatting.
    void save_csv(const std::string& path) const;
};

/// Reloaded table with the cubic interpolation contract.
struct OdeSolutionTable {
    CubicSpline a;
    CubicSpline F;
    double min_qk = 0.0;
    double max_qk = 0.0;
};

OdeSolutionTable load_ode_solution_csv(const std::string& path);

/// Solves the regime-1 ODE on [domain_lo, domain_hi] for a given lambda.
/// F by adaptive Simpson (abs tol 1e-10) from the domain midpoint; the
/// quadrature base point shifts F by a constant that lambda absorbs.
/// Throws GammaZeroError when |gamma_k| < 1e-12 anywhere on the domain and
/// PositivityError when lambda * exp(phi1 F) is not positive.
OdeSolution solve_ode(const SystemModel& sys, const StructuredMdInv& md,
                      const AlphaSolver& alphas, double domain_lo,
                      double domain_hi, double lambda, int nodes = 1201);

/// Verifies that a constant M_d closes the kinetic matching equation with
/// J_2 = 0: kinetic_residual_general at 100 seeded random states must stay
/// below 1e-10. Returns the verified constant M_d^{-1}.
MatrixXd constant_md(const SystemModel& sys, const MdInv& md,
                     const SampleBox& box, std::uint64_t seed = 20240915);

/// Report from verifying a candidate a(q) in the characteristic regime.
struct CharacteristicReport {
    double max_pde_residual = 0.0;  ///< max |scalar_pde_residual| over the grid
    double max_flow_drift = 0.0;    ///< max |a - a0 - int source| along flows, per unit time
    bool pass(double pde_tol = 1e-8, double drift_tol = 1e-6) const {
        return max_pde_residual <= pde_tol && max_flow_drift <= drift_tol;
    }
};

/// Evaluates the scalar PDE residual on the grid, then integrates the
/// characteristic flow dq/ds = gamma / det M_d^{-1} from the given seeds
/// (RK4, step 1e-3, horizon 1) and checks that a evolves by the source
/// term along each flow.
CharacteristicReport verify_characteristic_solution(
    const SystemModel& sys, const StructuredMdInv& md, const J2Param& j2,
    const std::vector<VectorXd>& grid, const std::vector<VectorXd>& flow_seeds,
    double horizon = 1.0, double step = 1e-3);

}  // namespace idashaper
