#pragma once

#include <Eigen/SVD>

#include "idashaper/mdstruct.hpp"

namespace idashaper {

/// Parameterization of the free skew-symmetric interconnection block
/// J_2(q,p), linear in p. Only row k (and the mirroring column, negated)
/// carries the solved alpha vectors; all other entries stay zero.
struct J2Param {
    int n = 0;
    int k = 0;
    /// The n-1 row-k coefficient vectors, ordered like the columns of B(q)
    /// with the zero column at position k removed.
    std::function<std::vector<VectorXd>(const VectorXd&)> row_alphas;
};

/// B(q): column j != k holds the alpha vector of J_2 entry (k,j); column k
/// is zero.
MatrixXd build_b(const J2Param& j2, const VectorXd& q);

/// Dense J_2(q,p) = (1/det M) * (row-k/column-k skew completion).
MatrixXd realize_j2(const J2Param& j2, const SystemModel& sys, const VectorXd& q,
                    const VectorXd& p);

/// Momentum-dependent interconnection block as a plain map; zero when absent.
using J2Fn = std::function<MatrixXd(const VectorXd& q, const VectorXd& p)>;

J2Fn j2_fn(const J2Param& j2, const SystemModel& sys);
J2Fn zero_j2(int n);

/// Linear system Psi * alpha_stack = rhs collecting the off-(k,k)
/// upper-triangular entries of the quadratic matching relation. Psi depends
/// only on the constants
/// a_i, b_i; rhs carries -bbM/detM at the assembly configuration.
struct PsiSystem {
    MatrixXd psi;   // (n(n+1)/2 - 1) x n(n-1)
    VectorXd rhs;
    int rank = 0;
};

/// Builds Psi by probing the linear map alpha -> entries of
/// (B M_d^{-1} + M_d^{-1} B^T) with unit alpha vectors, and the rhs from
/// the derived kinetics at q. Rank via singular values with threshold
/// 1e-10 * sigma_max.
PsiSystem assemble_psi(const StructuredMdInv& md, const SystemModel& sys,
                       const VectorXd& q);

/// Minimum-norm least-squares solution of a PsiSystem, returned as the n-1
/// alpha vectors in B-column order. Throws InconsistentSystemError when the
/// system is rank-deficient and the residual exceeds 1e-8.
std::vector<VectorXd> solve_alphas(const PsiSystem& psi);

/// Residual norm ||Psi x - rhs|| of the minimum-norm solution.
double alpha_residual(const PsiSystem& psi);

/// Pointwise alpha solver with the Psi factorization precomputed (Psi does
/// not depend on q or on a(q), only the rhs does).
class AlphaSolver {
public:
    AlphaSolver(StructuredMdInv md, SystemModel sys);

    std::vector<VectorXd> solve_at(const VectorXd& q) const;
    double residual_at(const VectorXd& q) const;
    int rank() const { return rank_; }
    int rows() const { return static_cast<int>(psi_.rows()); }
    const MatrixXd& psi() const { return psi_; }
    J2Param j2_param() const;

private:
    VectorXd rhs_at(const VectorXd& q) const;

    StructuredMdInv md_;
    SystemModel sys_;
    MatrixXd psi_;
    Eigen::JacobiSVD<MatrixXd> svd_;
    int rank_ = 0;
};

/// Matrix residual of the momentum-quadratic matching relation (the kinetic
/// matching equation scaled by det M):
/// bbM/detM - (sum_i gamma_i dM_d^{-1}/dq_i)/detM_d^{-1} + (B M_d^{-1} + M_d^{-1} B^T).
/// The middle term only has a (k,k) entry, sum_i gamma_i da/dq_i.
MatrixXd kinetic_residual_structured(const StructuredMdInv& md, const J2Param& j2,
                                     const SystemModel& sys, const VectorXd& q);

/// Kinetic matching residual for arbitrary annihilators:
/// G_perp { grad_q(p^T M^{-1} p) - M_d M^{-1} grad_q(p^T M_d^{-1} p) + 2 J_2 M_d^{-1} p }.
/// Configuration gradients use analytic callbacks where available, else
/// central differences.
VectorXd kinetic_residual_general(const SystemModel& sys,
                                  const std::function<MatrixXd(const VectorXd&)>& md_of_q,
                                  const J2Fn& j2, const VectorXd& q,
                                  const VectorXd& p);

/// Convenience overload taking the MdInv variant (analytic gradient for the
/// structured case).
VectorXd kinetic_residual_general(const SystemModel& sys, const MdInv& md,
                                  const J2Fn& j2, const VectorXd& q,
                                  const VectorXd& p);

/// Scalar remaining-PDE residual (the negated (k,k) entry of the matrix
/// residual above):
/// sum_i gamma_i da/dq_i / detM_d^{-1} - bbM_kk/detM - 2 sum_i b_i alpha_i^(k).
double scalar_pde_residual(const StructuredMdInv& md, const J2Param& j2,
                           const SystemModel& sys, const VectorXd& q);

/// Rows of the algebraic system for dimension n: n(n+1)/2 - 1.
constexpr int algebraic_equation_count(int n) { return n * (n + 1) / 2 - 1; }

}  // namespace idashaper
