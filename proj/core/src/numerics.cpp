#include "idashaper/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "idashaper/errors.hpp"

namespace idashaper {

namespace {

MatrixXd minor_matrix(const MatrixXd& m, int row, int col) {
    const int n = static_cast<int>(m.rows());
    MatrixXd out(n - 1, n - 1);
    for (int i = 0, oi = 0; i < n; ++i) {
        if (i == row) continue;
        for (int j = 0, oj = 0; j < n; ++j) {
            if (j == col) continue;
            out(oi, oj) = m(i, j);
            ++oj;
        }
        ++oi;
    }
    return out;
}

double det_small(const MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 0) return 1.0;
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    double det = 0.0;
    for (int j = 0; j < n; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        det += sign * m(0, j) * det_small(minor_matrix(m, 0, j));
    }
    return det;
}

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                            double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth, int force) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, flm);
    const double right = simpson(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    // A minimum forced depth guards against accidental cancellations in the
    // refinement estimate (symmetric integrands can zero out delta early).
    if (depth <= 0 || (force <= 0 && std::abs(delta) <= 15.0 * tol)) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                                depth - 1, force - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                                depth - 1, force - 1);
}

}  // namespace

MatrixXd adjugate(const MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    if (n != m.cols()) throw Error("adjugate: matrix must be square");
    MatrixXd adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            // adj(i,j) = cofactor(j,i)
            adj(i, j) = sign * det_small(minor_matrix(m, j, i));
        }
    }
    return adj;
}

bool spd_check(const MatrixXd& m, double pivot_tol) {
    const int n = static_cast<int>(m.rows());
    if (n != m.cols()) return false;
    const double scale = std::max(1.0, m.diagonal().maxCoeff());
    MatrixXd l = MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > pivot_tol * scale)) return false;
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double v = m(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return true;
}

std::vector<double> leading_minors(const MatrixXd& m) {
    std::vector<double> minors;
    minors.reserve(m.rows());
    for (int i = 1; i <= m.rows(); ++i) {
        minors.push_back(det_small(m.topLeftCorner(i, i)));
    }
    return minors;
}

VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                     const VectorXd& x, double h) {
    VectorXd g(x.size());
    VectorXd xp = x;
    for (int i = 0; i < x.size(); ++i) {
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                     const VectorXd& x, double h) {
    VectorXd xp = x;
    xp(0) = x(0) + h;
    VectorXd f0 = f(xp);
    MatrixXd jac(f0.size(), x.size());
    for (int i = 0; i < x.size(); ++i) {
        xp = x;
        xp(i) = x(i) + h;
        const VectorXd fp = f(xp);
        xp(i) = x(i) - h;
        const VectorXd fm = f(xp);
        jac.col(i) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f,
                    const VectorXd& x, double h) {
    const int n = static_cast<int>(x.size());
    MatrixXd hess(n, n);
    const double f0 = f(x);
    VectorXd xp = x;
    for (int i = 0; i < n; ++i) {
        xp = x;
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            xp = x;
            xp(i) += h;
            xp(j) += h;
            const double fpp = f(xp);
            xp(j) -= 2.0 * h;
            const double fpm = f(xp);
            xp(i) -= 2.0 * h;
            const double fmm = f(xp);
            xp(j) += 2.0 * h;
            const double fmp = f(xp);
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    return hess;
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = simpson(f, a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, 48, 4);
}

VectorXd rk4_step(const std::function<VectorXd(const VectorXd&)>& f,
                  const VectorXd& x, double dt) {
    const VectorXd k1 = f(x);
    const VectorXd k2 = f(x + 0.5 * dt * k1);
    const VectorXd k3 = f(x + 0.5 * dt * k2);
    const VectorXd k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

HermiteTable::HermiteTable(VectorXd x, VectorXd y, VectorXd dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != dy_.size()) {
        throw Error("HermiteTable: inconsistent node arrays");
    }
    for (int i = 1; i < x_.size(); ++i) {
        if (!(x_(i) > x_(i - 1))) {
            throw Error("HermiteTable: nodes must be strictly increasing");
        }
    }
}

int HermiteTable::segment(double x) const {
    if (!contains(x)) {
        throw DomainTruncationError("HermiteTable: query " + format_double(x) +
                                    " outside [" + format_double(min_x()) + ", " +
                                    format_double(max_x()) + "]");
    }
    const double* begin = x_.data();
    const double* end = begin + x_.size();
    int i = static_cast<int>(std::upper_bound(begin, end, x) - begin) - 1;
    return std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
}

bool HermiteTable::contains(double x) const {
    return x_.size() >= 2 && x >= x_(0) && x <= x_(x_.size() - 1);
}

double HermiteTable::value(double x) const {
    const int i = segment(x);
    const double h = x_(i + 1) - x_(i);
    const double t = (x - x_(i)) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_(i) + h10 * h * dy_(i) + h01 * y_(i + 1) + h11 * h * dy_(i + 1);
}

double HermiteTable::deriv(double x) const {
    const int i = segment(x);
    const double h = x_(i + 1) - x_(i);
    const double t = (x - x_(i)) / h;
    const double t2 = t * t;
    const double d00 = (6 * t2 - 6 * t) / h;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = (-6 * t2 + 6 * t) / h;
    const double d11 = 3 * t2 - 2 * t;
    return d00 * y_(i) + d10 * dy_(i) + d01 * y_(i + 1) + d11 * dy_(i + 1);
}

CubicSpline::CubicSpline(VectorXd x, VectorXd y) : x_(std::move(x)), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    if (n < 3 || y_.size() != n) throw Error("CubicSpline: need >= 3 nodes");
    // Natural spline: tridiagonal solve for second derivatives.
    VectorXd a = VectorXd::Zero(n), b = VectorXd::Zero(n), c = VectorXd::Zero(n),
             d = VectorXd::Zero(n);
    b(0) = 1.0;
    b(n - 1) = 1.0;
    for (int i = 1; i < n - 1; ++i) {
        const double hl = x_(i) - x_(i - 1);
        const double hr = x_(i + 1) - x_(i);
        a(i) = hl;
        b(i) = 2.0 * (hl + hr);
        c(i) = hr;
        d(i) = 6.0 * ((y_(i + 1) - y_(i)) / hr - (y_(i) - y_(i - 1)) / hl);
    }
    // Thomas algorithm.
    for (int i = 1; i < n; ++i) {
        const double w = a(i) / b(i - 1);
        b(i) -= w * c(i - 1);
        d(i) -= w * d(i - 1);
    }
    m_ = VectorXd::Zero(n);
    m_(n - 1) = d(n - 1) / b(n - 1);
    for (int i = n - 2; i >= 0; --i) {
        m_(i) = (d(i) - c(i) * m_(i + 1)) / b(i);
    }
}

double CubicSpline::value(double x) const {
    const int n = static_cast<int>(x_.size());
    if (x < x_(0) || x > x_(n - 1)) {
        throw DomainTruncationError("CubicSpline: query outside table domain");
    }
    const double* begin = x_.data();
    int i = static_cast<int>(std::upper_bound(begin, begin + n, x) - begin) - 1;
    i = std::clamp(i, 0, n - 2);
    const double h = x_(i + 1) - x_(i);
    const double u = x - x_(i);
    const double v = x_(i + 1) - x;
    return (m_(i) * v * v * v + m_(i + 1) * u * u * u) / (6.0 * h) +
           (y_(i) / h - m_(i) * h / 6.0) * v + (y_(i + 1) / h - m_(i + 1) * h / 6.0) * u;
}

std::vector<VectorXd> sample_box(const SampleBox& box, int count,
                                 std::mt19937_64& rng) {
    const int n = static_cast<int>(box.lo.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<VectorXd> samples;
    samples.reserve(count);
    for (int s = 0; s < count; ++s) {
        VectorXd q(n);
        for (int i = 0; i < n; ++i) {
            q(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
        }
        samples.push_back(std::move(q));
    }
    return samples;
}

int worker_count() {
    if (const char* env = std::getenv("IDA_SHAPER_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b != e && (*b == ' ' || *b == '\t')) ++b;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{}) throw Error("parse_double: bad number '" + s + "'");
    return v;
}

}  // namespace idashaper
