#include "idashaper/matcher.hpp"

#include <cmath>

#include "idashaper/errors.hpp"

namespace idashaper {

namespace {

/// Off-(k,k) upper-triangular entries of a symmetric matrix, row-major.
VectorXd vec_upper_skip_kk(const MatrixXd& m, int k) {
    const int n = static_cast<int>(m.rows());
    VectorXd v(algebraic_equation_count(n));
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            if (i == k && j == k) continue;
            v(idx++) = m(i, j);
        }
    }
    return v;
}

MatrixXd b_from_columns(const std::vector<VectorXd>& alphas, int n, int k) {
    MatrixXd b = MatrixXd::Zero(n, n);
    int c = 0;
    for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        b.col(j) = alphas[c++];
    }
    return b;
}

}  // namespace

MatrixXd build_b(const J2Param& j2, const VectorXd& q) {
    return b_from_columns(j2.row_alphas(q), j2.n, j2.k);
}

MatrixXd realize_j2(const J2Param& j2, const SystemModel& sys, const VectorXd& q,
                    const VectorXd& p) {
    const MatrixXd m = sys.mass_matrix(q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);
    const std::vector<VectorXd> alphas = j2.row_alphas(q);
    MatrixXd out = MatrixXd::Zero(j2.n, j2.n);
    int c = 0;
    for (int j = 0; j < j2.n; ++j) {
        if (j == j2.k) continue;
        const double entry = p.dot(alphas[c++]) / det_m;
        out(j2.k, j) = entry;
        out(j, j2.k) = -entry;
    }
    return out;
}

J2Fn j2_fn(const J2Param& j2, const SystemModel& sys) {
    return [j2, sys](const VectorXd& q, const VectorXd& p) {
        return realize_j2(j2, sys, q, p);
    };
}

J2Fn zero_j2(int n) {
    return [n](const VectorXd&, const VectorXd&) { return MatrixXd::Zero(n, n); };
}

PsiSystem assemble_psi(const StructuredMdInv& md, const SystemModel& sys,
                       const VectorXd& q) {
    const int n = md.n;
    const int k = md.k;
    const int slots = n * (n - 1);
    const MatrixXd a0 = realize_with_a(md, 0.0);  // entries feeding Psi never see a(q)

    PsiSystem out;
    out.psi = MatrixXd(algebraic_equation_count(n), slots);
    std::vector<VectorXd> unit(n - 1, VectorXd::Zero(n));
    for (int col = 0; col < slots; ++col) {
        const int vec = col / n;
        const int comp = col % n;
        unit[vec](comp) = 1.0;
        const MatrixXd b = b_from_columns(unit, n, k);
        const MatrixXd sym = b * a0 + a0 * b.transpose();
        out.psi.col(col) = vec_upper_skip_kk(sym, k);
        unit[vec](comp) = 0.0;
    }

    const DerivedKinetics dk = derived_kinetics(sys, q);
    out.rhs = -vec_upper_skip_kk(dk.bb_m, k) / dk.det_m;

    Eigen::JacobiSVD<MatrixXd> svd(out.psi);
    const auto& sv = svd.singularValues();
    const double thresh = 1e-10 * sv(0);
    out.rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > thresh) ++out.rank;
    }
    return out;
}

namespace {

std::vector<VectorXd> split_alpha_stack(const VectorXd& stack, int n) {
    std::vector<VectorXd> alphas;
    alphas.reserve(n - 1);
    for (int v = 0; v < n - 1; ++v) {
        alphas.push_back(stack.segment(v * n, n));
    }
    return alphas;
}

VectorXd min_norm_solve(const PsiSystem& psi) {
    Eigen::JacobiSVD<MatrixXd> svd(psi.psi,
                                   Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const VectorXd x = svd.solve(psi.rhs);
    if (psi.rank < psi.psi.rows()) {
        const double residual = (psi.psi * x - psi.rhs).norm();
        if (residual > 1e-8) {
            throw InconsistentSystemError(
                "algebraic system rank " + std::to_string(psi.rank) + " of " +
                std::to_string(psi.psi.rows()) +
                " rows, least-squares residual " + format_double(residual));
        }
    }
    return x;
}

}  // namespace

std::vector<VectorXd> solve_alphas(const PsiSystem& psi) {
    const int n = static_cast<int>(std::round(
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * psi.psi.cols()))));
    return split_alpha_stack(min_norm_solve(psi), n);
}

double alpha_residual(const PsiSystem& psi) {
    return (psi.psi * min_norm_solve(psi) - psi.rhs).norm();
}

AlphaSolver::AlphaSolver(StructuredMdInv md, SystemModel sys)
    : md_(std::move(md)), sys_(std::move(sys)) {
    const VectorXd q0 = VectorXd::Zero(md_.n);
    const PsiSystem system = assemble_psi(md_, sys_, q0);
    psi_ = system.psi;
    rank_ = system.rank;
    svd_ = Eigen::JacobiSVD<MatrixXd>(psi_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd_.setThreshold(1e-10);
}

VectorXd AlphaSolver::rhs_at(const VectorXd& q) const {
    const DerivedKinetics dk = derived_kinetics(sys_, q);
    return -vec_upper_skip_kk(dk.bb_m, md_.k) / dk.det_m;
}

std::vector<VectorXd> AlphaSolver::solve_at(const VectorXd& q) const {
    const VectorXd rhs = rhs_at(q);
    const VectorXd x = svd_.solve(rhs);
    if (rank_ < psi_.rows()) {
        const double residual = (psi_ * x - rhs).norm();
        if (residual > 1e-8) {
            throw InconsistentSystemError("alpha solve inconsistent, residual " +
                                          format_double(residual));
        }
    }
    return split_alpha_stack(x, md_.n);
}

double AlphaSolver::residual_at(const VectorXd& q) const {
    const VectorXd rhs = rhs_at(q);
    return (psi_ * svd_.solve(rhs) - rhs).norm();
}

J2Param AlphaSolver::j2_param() const {
    J2Param j2;
    j2.n = md_.n;
    j2.k = md_.k;
    const AlphaSolver solver = *this;
    j2.row_alphas = [solver](const VectorXd& q) { return solver.solve_at(q); };
    return j2;
}

MatrixXd kinetic_residual_structured(const StructuredMdInv& md, const J2Param& j2,
                                     const SystemModel& sys, const VectorXd& q) {
    const DerivedKinetics dk = derived_kinetics(sys, q);
    const GammaData gd = gamma_and_phis(md, sys);
    const MatrixXd mdinv = realize(md, q);
    const double det_mdinv = mdinv.determinant();

    MatrixXd residual = dk.bb_m / dk.det_m;
    residual(md.k, md.k) -= gd.gamma(q).dot(md.a_grad(q)) / det_mdinv;
    const MatrixXd b = build_b(j2, q);
    residual += b * mdinv + mdinv * b.transpose();
    return residual;
}

VectorXd kinetic_residual_general(const SystemModel& sys,
                                  const std::function<MatrixXd(const VectorXd&)>& md_of_q,
                                  const J2Fn& j2, const VectorXd& q,
                                  const VectorXd& p) {
    const MatrixXd m = sys.mass_matrix(q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);

    const auto kinetic_open = [&sys, &p](const VectorXd& qq) {
        return p.dot(sys.mass_matrix(qq).inverse() * p);
    };
    const auto kinetic_desired = [&md_of_q, &p](const VectorXd& qq) {
        return p.dot(md_of_q(qq) * p);
    };
    const VectorXd grad_open = fd_gradient(kinetic_open, q);
    const VectorXd grad_desired = fd_gradient(kinetic_desired, q);

    const MatrixXd mdinv = md_of_q(q);
    const MatrixXd md_mat = mdinv.inverse();
    const VectorXd inner =
        grad_open - md_mat * m.inverse() * grad_desired + 2.0 * j2(q, p) * mdinv * p;
    return sys.annihilator(q) * inner;
}

VectorXd kinetic_residual_general(const SystemModel& sys, const MdInv& md,
                                  const J2Fn& j2, const VectorXd& q,
                                  const VectorXd& p) {
    const MatrixXd m = sys.mass_matrix(q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);

    const auto kinetic_open = [&sys, &p](const VectorXd& qq) {
        return p.dot(sys.mass_matrix(qq).inverse() * p);
    };
    const VectorXd grad_open = fd_gradient(kinetic_open, q);
    const VectorXd grad_desired = grad_q_p_mdinv_p(md, q, p);

    const MatrixXd mdinv = md_inv_matrix(md, q);
    const MatrixXd md_mat = mdinv.inverse();
    const VectorXd inner =
        grad_open - md_mat * m.inverse() * grad_desired + 2.0 * j2(q, p) * mdinv * p;
    return sys.annihilator(q) * inner;
}

double scalar_pde_residual(const StructuredMdInv& md, const J2Param& j2,
                           const SystemModel& sys, const VectorXd& q) {
    const DerivedKinetics dk = derived_kinetics(sys, q);
    const GammaData gd = gamma_and_phis(md, sys);
    const double det_mdinv = realize(md, q).determinant();
    const std::vector<VectorXd> alphas = j2.row_alphas(q);
    double source = 0.0;
    for (int i = 0; i < md.n - 1; ++i) {
        source += md.offdiag(i) * alphas[i](md.k);
    }
    return gd.gamma(q).dot(md.a_grad(q)) / det_mdinv -
           dk.bb_m(md.k, md.k) / dk.det_m - 2.0 * source;
}

}  // namespace idashaper
