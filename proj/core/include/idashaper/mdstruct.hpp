#pragma once

#include <functional>
#include <variant>

#include "idashaper/model.hpp"

namespace idashaper {

/// Sparse desired-inertia inverse: zero everywhere except the diagonal and
/// row/column k. Diagonal entries other than (k,k) are the constants a_i
/// (indexed skipping position k), the off-diagonal entries of row/column k
/// are the constants b_i, and the (k,k) entry is the state-dependent a(q).
struct StructuredMdInv {
    int n = 0;
    int k = 0;         ///< 0-based row/column carrying the b entries
    VectorXd diag;     ///< a_1..a_{n-1}
    VectorXd offdiag;  ///< b_1..b_{n-1}
    std::function<double(const VectorXd&)> a_fun;
    std::function<VectorXd(const VectorXd&)> a_grad;

    /// Position of a_i / b_i for matrix row j != k.
    int slot(int j) const { return j < k ? j : j - 1; }
};

/// Dense realization of the structured matrix at q.
MatrixXd realize(const StructuredMdInv& md, const VectorXd& q);

/// Realization with the (k,k) entry overridden (used for a-independence).
MatrixXd realize_with_a(const StructuredMdInv& md, double a);

/// gamma(q) = e_k^T adj(M_d^{-1}) frak{M}(q) together with the affine
/// determinant coefficients: det M_d^{-1}(q) = phi1 * a(q) + phi2.
struct GammaData {
    std::function<VectorXd(const VectorXd&)> gamma;
    double phi1 = 0.0;
    double phi2 = 0.0;
    VectorXd adj_row_k;  ///< row k of adj(M_d^{-1}); constant in a(q)
};

/// Builds GammaData for a k-type system. Row k of adj(M_d^{-1}) does not
/// depend on a(q), so it is extracted once at a = 0; phi1 = prod a_i and
/// phi2 = det M_d^{-1}|_{a=0} by cofactor expansion along row k.
GammaData gamma_and_phis(const StructuredMdInv& md, const SystemModel& sys);

/// Desired inertia inverse: either the sparse row/column-k structure or a
/// constant matrix.
using MdInv = std::variant<StructuredMdInv, MatrixXd>;

/// Dense M_d^{-1}(q) for either variant.
MatrixXd md_inv_matrix(const MdInv& md, const VectorXd& q);

/// Dense M_d(q) (inverse of the above).
MatrixXd md_matrix(const MdInv& md, const VectorXd& q);

/// Gradient of p^T M_d^{-1}(q) p with respect to q. Only the (k,k) entry of
/// the structured variant is state dependent, so this is p_k^2 * grad a(q);
/// zero for the constant variant.
VectorXd grad_q_p_mdinv_p(const MdInv& md, const VectorXd& q, const VectorXd& p);

/// Necessary-condition scalar (G_perp M_d M^{-1} d(G_perp grad V)/dq)|_{q*}:
/// positive whenever some V_d with a positive-definite Hessian at q_star
/// solves the potential matching equation.
/// The Jacobian of G_perp grad V is taken by central differences with step
/// 1e-6 (analytic grad V is used inside when available). The caller requires
/// the value strictly positive; "positive" means > 1e-9.
double necessary_condition(const MdInv& md, const SystemModel& sys,
                           const VectorXd& q_star);

/// Margin used to call the necessary-condition scalar strictly positive.
inline constexpr double kNecessaryConditionMargin = 1e-9;

/// Positive definiteness of M_d^{-1} over a grid of configurations.
struct PdGridReport {
    double min_minor = 0.0;             ///< smallest leading principal minor seen
    std::vector<VectorXd> violations;   ///< configurations with a minor <= 0
    bool all_positive() const { return violations.empty(); }
};

PdGridReport positive_definite_on_grid(const MdInv& md,
                                       const std::vector<VectorXd>& grid);

}  // namespace idashaper
