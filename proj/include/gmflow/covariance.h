#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gmflow/time_grid.h"

namespace gmflow {

enum class KernelKind { Brownian, FractionalBrownian, UserTable };

/// Rectangular table of covariance samples, bilinear in between.
/// The table must be symmetric: same axis for s and t, value(s,t) == value(t,s).
struct KernelTable {
  std::vector<double> axis;
  std::vector<double> values;  // row-major, values[i * axis.size() + j] = R(axis[i], axis[j])
};

/// Covariance function R(s,t) of the entry processes.
///
/// Objects are immutable after construction; every member is a pure function
/// of its arguments and safe to call from concurrent workers.
class CovarianceKernel {
 public:
  static CovarianceKernel brownian();
  static CovarianceKernel fractional_brownian(double hurst);
  static CovarianceKernel table(KernelTable table);
  /// Reads a long-format CSV with header "s,t,value".
  static CovarianceKernel table_from_csv(const std::string& path);

  KernelKind kind() const { return kind_; }
  double hurst() const { return hurst_; }
  std::string describe() const;

  /// R(s,t). Bit-identical under argument exchange. Throws std::domain_error
  /// for negative times or points outside a table.
  double eval(double s, double t) const;

  /// Partial derivative of R with respect to its first argument.
  double partial_s(double s, double t) const;

  /// Analytic d/ds R(s,s) when the kernel has one.
  std::optional<double> analytic_diag_derivative(double s) const;

  /// R(b,b) - R(a,a): the exact integral of d/ds R(s,s) over [a,b].
  double diag_increment(double a, double b) const { return eval(b, b) - eval(a, a); }

  /// Upper end of the time domain (infinity for analytic kernels).
  double domain_max() const;

  // Declared regularity metadata (Hoelder and integrability); unset for tables.
  std::optional<double> holder_exponent() const { return gamma_; }
  std::optional<double> holder_constant() const { return kappa_; }
  std::optional<double> integrability_exponent() const { return alpha_; }

 private:
  CovarianceKernel() = default;
  double table_eval(double lo, double hi) const;
  double table_partial_first(double a, double b) const;
  double table_partial_second(double a, double b) const;

  KernelKind kind_ = KernelKind::Brownian;
  double hurst_ = 0.5;
  std::shared_ptr<const KernelTable> table_;
  std::optional<double> gamma_;
  std::optional<double> kappa_;
  std::optional<double> alpha_;
};

double eval_kernel(const CovarianceKernel& kernel, double s, double t);

/// d/ds R(s,s). Uses the analytic derivative when present, otherwise a
/// symmetric finite difference with step max(1e-6, 1e-6 s). Throws
/// std::domain_error where the derivative diverges (fBm with H < 1/2 at s = 0).
double diag_variance_derivative(const CovarianceKernel& kernel, double s);

/// Gram matrix [R(t_i, t_j)] on the grid.
Eigen::MatrixXd gram_matrix(const CovarianceKernel& kernel, const TimeGrid& grid);

/// Smallest eigenvalue >= -tol * largest eigenvalue, tol = 1e-10 by default.
bool is_psd(const Eigen::MatrixXd& gram, double rel_tol = 1e-10);

/// Trapezoid integral of a grid function against d R(s,s):
///   sum_k (g_k + g_{k+1})/2 * (R(t_{k+1},t_{k+1}) - R(t_k,t_k)).
/// The measure increments are exact, so an endpoint singularity of
/// d/ds R(s,s) never enters a quadrature.
double integrate_against_diag_variance(const CovarianceKernel& kernel, const TimeGrid& grid,
                                       std::span<const double> values, std::size_t upto);

struct H2Check {
  double kappa_hat = 0.0;
  double gamma_hat = 0.0;  // +infinity when V vanishes identically
  bool pass = false;
};

/// Least-squares fit of log V(s,t) = log kappa + gamma log|t-s| over grid
/// pairs, V(s,t) = R(s,s) - 2R(s,t) + R(t,t). Needs at least 3 grid points.
H2Check check_h2(const CovarianceKernel& kernel, const TimeGrid& grid);

struct H1Check {
  double sup_integral = 0.0;
  bool pass = false;
};

/// Estimates sup_t int_0^T |dR/ds(s,t)|^alpha ds over grid t (T = grid end).
/// Each integral is split at t and computed by composite midpoint after a
/// double-ended power map that clusters nodes at both endpoints; pass is true
/// when two refinement levels agree to 1e-3 relative.
H1Check check_h1(const CovarianceKernel& kernel, const TimeGrid& grid, double alpha);

}  // namespace gmflow
