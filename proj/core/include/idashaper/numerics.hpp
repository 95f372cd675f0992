#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace idashaper {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Adjugate (transpose of the cofactor matrix) by cofactor expansion.
/// Intended for the small dense matrices of this library (n <= 4).
MatrixXd adjugate(const MatrixXd& m);

/// Symmetric positive definiteness via Cholesky pivots.
/// Pivots must exceed pivot_tol * max(1, max diagonal).
bool spd_check(const MatrixXd& m, double pivot_tol = 1e-10);

/// Leading principal minors det(M[0:i,0:i]), i = 1..n.
std::vector<double> leading_minors(const MatrixXd& m);

/// Central-difference gradient of a scalar field.
VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f,
                     const VectorXd& x, double h = 1e-6);

/// Central-difference Jacobian of a vector field, one column per coordinate.
MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                     const VectorXd& x, double h = 1e-6);

/// Central second-difference Hessian of a scalar field.
MatrixXd fd_hessian(const std::function<double(const VectorXd&)>& f,
                    const VectorXd& x, double h = 1e-4);

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-10);

/// One fixed step of the classical fourth-order Runge-Kutta scheme.
VectorXd rk4_step(const std::function<VectorXd(const VectorXd&)>& f,
                  const VectorXd& x, double dt);

/// Sampled function on a strictly increasing grid with exact nodal
/// derivatives; evaluated by piecewise cubic Hermite interpolation.
class HermiteTable {
public:
    HermiteTable() = default;
    HermiteTable(VectorXd x, VectorXd y, VectorXd dy);

    double value(double x) const;
    double deriv(double x) const;
    bool contains(double x) const;
    double min_x() const { return x_(0); }
    double max_x() const { return x_(x_.size() - 1); }
    const VectorXd& nodes() const { return x_; }
    const VectorXd& values() const { return y_; }
    const VectorXd& derivs() const { return dy_; }

private:
    int segment(double x) const;
    VectorXd x_, y_, dy_;
};

/// Natural cubic spline through (x, y); used to honor the cubic
/// interpolation contract when reloading sampled tables from CSV.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(VectorXd x, VectorXd y);
    double value(double x) const;

private:
    VectorXd x_, y_, m_;  // m_: second derivatives at nodes
};

/// Axis-aligned sampling box for random grids.
struct SampleBox {
    VectorXd lo;
    VectorXd hi;
};

/// Deterministic uniform samples in a box (row per sample).
std::vector<VectorXd> sample_box(const SampleBox& box, int count,
                                 std::mt19937_64& rng);

/// Number of workers for grid sweeps; honors IDA_SHAPER_THREADS.
int worker_count();

/// Index-partitioned parallel loop. Deterministic: each index is processed
/// exactly once and writers must target disjoint slots.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Shortest decimal string that round-trips the IEEE-754 double.
std::string format_double(double v);

/// Parse a double previously written by format_double.
double parse_double(const std::string& s);

}  // namespace idashaper
