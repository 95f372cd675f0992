#include "idashaper/model.hpp"

#include <cmath>

#include "idashaper/errors.hpp"

namespace idashaper {

int SystemModel::k_index() const {
    if (!k.has_value()) {
        throw MissingIndexError(
            "operation requires the unactuated coordinate index k, but the "
            "system uses a general annihilator");
    }
    return *k;
}

VectorXd SystemModel::grad_v(const VectorXd& q) const {
    if (potential_grad) return potential_grad(q);
    return fd_gradient(potential, q);
}

namespace detail {

void require_nonsingular(const MatrixXd& m, double det_m) {
    const int n = static_cast<int>(m.rows());
    const double scale = std::pow(m.trace() / n, n);
    if (std::abs(det_m) < 1e-12 * std::abs(scale)) {
        throw SingularMassError("mass matrix singular: det = " +
                                format_double(det_m));
    }
}

}  // namespace detail

void validate_model(const SystemModel& sys, const std::vector<VectorXd>& probe_points) {
    if (sys.s() != 1) {
        throw Error("SystemModel: exactly one degree of underactuation required, got s = " +
                    std::to_string(sys.s()));
    }
    if (!sys.mass_matrix || !sys.potential || !sys.input_map || !sys.annihilator) {
        throw Error("SystemModel: mass_matrix, potential, input_map and annihilator are required");
    }
    if (sys.has_k() && (sys.k_index() < 0 || sys.k_index() >= sys.n)) {
        throw Error("SystemModel: k out of range");
    }
    for (const VectorXd& q : probe_points) {
        const MatrixXd m = sys.mass_matrix(q);
        if (m.rows() != sys.n || m.cols() != sys.n) {
            throw Error("SystemModel: mass matrix has wrong shape");
        }
        if (!spd_check(m)) {
            throw Error("SystemModel: mass matrix not positive definite at a probe point");
        }
        const MatrixXd g = sys.input_map(q);
        if (g.rows() != sys.n || g.cols() != sys.m) {
            throw Error("SystemModel: input map has wrong shape");
        }
        Eigen::JacobiSVD<MatrixXd> svd(g);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 1e-12 * sv(0)) {
            throw Error("SystemModel: input map rank deficient at a probe point");
        }
        const MatrixXd gp = sys.annihilator(q);
        if (gp.rows() != sys.s() || gp.cols() != sys.n) {
            throw Error("SystemModel: annihilator has wrong shape");
        }
        if ((gp * g).cwiseAbs().maxCoeff() > 1e-12) {
            throw Error("SystemModel: annihilator does not annihilate G at a probe point");
        }
    }
}

double hamiltonian(const SystemModel& sys, const State& s) {
    const MatrixXd m = sys.mass_matrix(s.q);
    const double det_m = m.determinant();
    detail::require_nonsingular(m, det_m);
    const VectorXd minv_p = m.llt().solve(s.p);
    return 0.5 * s.p.dot(minv_p) + sys.potential(s.q);
}

DerivedKinetics derived_kinetics(const SystemModel& sys, const VectorXd& q) {
    const int k = sys.k_index();
    const MatrixXd m = sys.mass_matrix(q);
    DerivedKinetics dk;
    dk.det_m = m.determinant();
    detail::require_nonsingular(m, dk.det_m);
    dk.adj_m = adjugate(m);
    if (sys.mass_matrix_grad_k) {
        // bbM = det^2 * d(M^-1)/dq_k = -adj(M) dM/dq_k adj(M) / 1, since
        // d(M^-1)/dq_k = -M^-1 (dM/dq_k) M^-1 and M^-1 = adj(M)/det.
        const MatrixXd dm = sys.mass_matrix_grad_k(q);
        dk.bb_m = -dk.adj_m * dm * dk.adj_m;
    } else {
        const double h = 1e-6;
        VectorXd qp = q;
        qp(k) = q(k) + h;
        const MatrixXd minv_p = sys.mass_matrix(qp).inverse();
        qp(k) = q(k) - h;
        const MatrixXd minv_m = sys.mass_matrix(qp).inverse();
        dk.bb_m = dk.det_m * dk.det_m * (minv_p - minv_m) / (2.0 * h);
    }
    return dk;
}

DerivativeAuditReport finite_diff_audit(const SystemModel& sys, const VectorXd& q) {
    DerivativeAuditReport report;
    if (sys.potential_grad) {
        const VectorXd analytic = sys.potential_grad(q);
        const VectorXd fd = fd_gradient(sys.potential, q);
        report.potential_grad_dev = (analytic - fd).cwiseAbs().maxCoeff();
    }
    if (sys.mass_matrix_grad_k && sys.has_k()) {
        const int k = sys.k_index();
        const MatrixXd m = sys.mass_matrix(q);
        const MatrixXd minv = m.inverse();
        const MatrixXd analytic = -minv * sys.mass_matrix_grad_k(q) * minv;
        const double h = 1e-6;
        VectorXd qp = q;
        qp(k) = q(k) + h;
        const MatrixXd minv_p = sys.mass_matrix(qp).inverse();
        qp(k) = q(k) - h;
        const MatrixXd minv_m = sys.mass_matrix(qp).inverse();
        const MatrixXd fd = (minv_p - minv_m) / (2.0 * h);
        report.minv_grad_dev = (analytic - fd).cwiseAbs().maxCoeff();
    }
    return report;
}

}  // namespace idashaper
