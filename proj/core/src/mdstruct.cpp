#include "idashaper/mdstruct.hpp"

#include <cmath>

#include "idashaper/errors.hpp"

namespace idashaper {

MatrixXd realize_with_a(const StructuredMdInv& md, double a) {
    MatrixXd m = MatrixXd::Zero(md.n, md.n);
    for (int j = 0; j < md.n; ++j) {
        if (j == md.k) continue;
        m(j, j) = md.diag(md.slot(j));
        m(j, md.k) = md.offdiag(md.slot(j));
        m(md.k, j) = md.offdiag(md.slot(j));
    }
    m(md.k, md.k) = a;
    return m;
}

MatrixXd realize(const StructuredMdInv& md, const VectorXd& q) {
    return realize_with_a(md, md.a_fun(q));
}

GammaData gamma_and_phis(const StructuredMdInv& md, const SystemModel& sys) {
    if (!sys.has_k()) {
        throw MissingIndexError("gamma_and_phis requires an e_k annihilator");
    }
    if (sys.k_index() != md.k) {
        throw Error("gamma_and_phis: unactuated index mismatch between system and M_d^{-1}");
    }
    GammaData data;
    const MatrixXd a0 = realize_with_a(md, 0.0);
    data.adj_row_k = adjugate(a0).row(md.k).transpose();
    data.phi1 = md.diag.prod();
    // Expansion along row/column k at a = 0; entry (k,k) contributes nothing.
    data.phi2 = a0.col(md.k).dot(data.adj_row_k);
    const VectorXd adj_row = data.adj_row_k;
    const SystemModel sys_copy = sys;
    data.gamma = [adj_row, sys_copy](const VectorXd& q) -> VectorXd {
        const DerivedKinetics dk = derived_kinetics(sys_copy, q);
        return dk.adj_m.transpose() * adj_row;
    };
    return data;
}

MatrixXd md_inv_matrix(const MdInv& md, const VectorXd& q) {
    if (const auto* structured = std::get_if<StructuredMdInv>(&md)) {
        return realize(*structured, q);
    }
    return std::get<MatrixXd>(md);
}

MatrixXd md_matrix(const MdInv& md, const VectorXd& q) {
    return md_inv_matrix(md, q).inverse();
}

VectorXd grad_q_p_mdinv_p(const MdInv& md, const VectorXd& q, const VectorXd& p) {
    if (const auto* structured = std::get_if<StructuredMdInv>(&md)) {
        const double pk = p(structured->k);
        return pk * pk * structured->a_grad(q);
    }
    return VectorXd::Zero(q.size());
}

double necessary_condition(const MdInv& md, const SystemModel& sys,
                           const VectorXd& q_star) {
    const MatrixXd m = sys.mass_matrix(q_star);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);

    const SystemModel& sys_ref = sys;
    const auto h = [&sys_ref](const VectorXd& q) -> VectorXd {
        return sys_ref.annihilator(q) * sys_ref.grad_v(q);
    };
    const MatrixXd jac = fd_jacobian(h, q_star, 1e-6);  // s x n

    const MatrixXd g_perp = sys.annihilator(q_star);
    const MatrixXd md_mat = md_matrix(md, q_star);
    const MatrixXd row = g_perp * md_mat * m.inverse();  // 1 x n
    return (row * jac.row(0).transpose())(0, 0);
}

PdGridReport positive_definite_on_grid(const MdInv& md,
                                       const std::vector<VectorXd>& grid) {
    PdGridReport report;
    bool first = true;
    for (const VectorXd& q : grid) {
        const MatrixXd m = md_inv_matrix(md, q);
        double local_min = 0.0;
        bool local_first = true;
        for (const double minor : leading_minors(m)) {
            if (local_first || minor < local_min) local_min = minor;
            local_first = false;
        }
        if (first || local_min < report.min_minor) report.min_minor = local_min;
        first = false;
        if (!(local_min > 0.0)) report.violations.push_back(q);
    }
    return report;
}

}  // namespace idashaper
