#pragma once

#include <functional>
#include <optional>

#include "idashaper/numerics.hpp"

namespace idashaper {

/// Phase-space point of a simple mechanical system.
struct State {
    VectorXd q;  ///< generalized positions [rad or m]
    VectorXd p;  ///< generalized momenta
};

/// Simple mechanical system in port-controlled Hamiltonian form:
/// H(q,p) = 1/2 p^T M^{-1}(q) p + V(q), actuated through G(q) with one
/// degree of underactuation (s = n - m = 1).
///
/// When the input map is a permutation of [I_m, 0]^T the unactuated
/// coordinate index k is set and the annihilator is exactly e_k^T;
/// otherwise k is empty and `annihilator` supplies a general G_perp(q).
struct SystemModel {
    int n = 0;  ///< degrees of freedom
    int m = 0;  ///< actuator count
    std::optional<int> k;  ///< unactuated coordinate, 0-based; empty for general annihilator

    std::function<MatrixXd(const VectorXd&)> mass_matrix;           // n x n, SPD
    std::function<MatrixXd(const VectorXd&)> mass_matrix_grad_k;    // dM/dq_k, optional
    std::function<double(const VectorXd&)> potential;               // V(q) [energy]
    std::function<VectorXd(const VectorXd&)> potential_grad;        // optional
    std::function<MatrixXd(const VectorXd&)> input_map;             // G(q), n x m
    std::function<MatrixXd(const VectorXd&)> annihilator;           // G_perp(q), s x n

    int s() const { return n - m; }
    bool has_k() const { return k.has_value(); }
    int k_index() const;  ///< throws MissingIndexError when k is empty

    /// Gradient of V, analytic when supplied, else central differences.
    VectorXd grad_v(const VectorXd& q) const;
};

/// Structural checks at construction time (dimensions, s == 1) plus
/// pointwise checks at the given configurations: M(q) SPD, rank G = m,
/// and G_perp(q) G(q) = 0 to 1e-12.
void validate_model(const SystemModel& sys, const std::vector<VectorXd>& probe_points);

/// det M, the adjugate of M, and the numerator matrix of d(M^{-1})/dq_k:
/// M^{-1} = adj_m / det_m and d(M^{-1})/dq_k = bb_m / det_m^2.
struct DerivedKinetics {
    double det_m = 0.0;
    MatrixXd adj_m;
    MatrixXd bb_m;
};

/// Total energy H(q,p). Throws SingularMassError when |det M| falls below
/// 1e-12 * (trace M / n)^n.
double hamiltonian(const SystemModel& sys, const State& s);

/// Kinetic derived quantities at q. Uses the analytic dM/dq_k when the
/// callback is present, else central differences with step 1e-6.
DerivedKinetics derived_kinetics(const SystemModel& sys, const VectorXd& q);

/// Analytic-vs-finite-difference comparison; report only.
struct DerivativeAuditReport {
    double potential_grad_dev = 0.0;  ///< max |analytic - FD| over grad V
    double minv_grad_dev = 0.0;       ///< max |analytic - FD| over d(M^{-1})/dq_k
    double max_dev() const { return std::max(potential_grad_dev, minv_grad_dev); }
};

/// Compares whichever analytic callbacks are present against central
/// differences at q. Fields for absent callbacks stay zero.
DerivativeAuditReport finite_diff_audit(const SystemModel& sys, const VectorXd& q);

namespace detail {
/// Singularity threshold |det M| < 1e-12 * (trace M / n)^n.
void require_nonsingular(const MatrixXd& m, double det_m);
}  // namespace detail

}  // namespace idashaper
