#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "gmflow/covariance.h"
#include "gmflow/spectral_measure.h"

namespace gmflow {

/// Finitely supported initial law sum_j w_j delta_{a_j}.
struct AtomicMeasure {
  std::vector<double> atoms;    // ascending, distinct
  std::vector<double> weights;  // positive, summing to 1

  static AtomicMeasure point_mass(double at = 0.0);
  /// Merges repeated atoms of an empirical measure into weighted atoms.
  static AtomicMeasure from_empirical(const EmpiricalMeasure& mu);

  /// F_0(w) = sum_j w_j / (a_j - w).
  std::complex<double> cauchy(std::complex<double> w) const;
  std::complex<double> cauchy_derivative(std::complex<double> w) const;
};

/// F_tau(z) = (sqrt(z^2 - 4 tau) - z) / (2 tau), with sqrt(z^2 - 4 tau) taken as
/// sqrt(z - 2 sqrt(tau)) sqrt(z + 2 sqrt(tau)) (principal roots). tau = 0 gives
/// -1/z. Throws std::domain_error for Im z <= 0 or tau < 0.
std::complex<double> semicircle_stieltjes(double tau, std::complex<double> z);

struct BurgersSolution {
  std::complex<double> value;
  double residual = 0.0;  // |F - F_0(z + tau F)|
  int iterations = 0;
};

/// Solves F = F_0(z + tau F) by damped Newton iteration from F_0(z), halving
/// steps that would leave Im F > 0 or Im(z + tau F) > 0. If the direct
/// iteration stalls, continues in Im z from a far point down to z. Throws
/// NumericalError after 200 iterations per stage or on a branch violation.
BurgersSolution burgers_solve_detailed(const AtomicMeasure& mu0, double tau, std::complex<double> z);
std::complex<double> burgers_solve(const AtomicMeasure& mu0, double tau, std::complex<double> z);

/// G_t(z) = F_{R(t,t)}(z); closed form when mu0 is a single atom.
std::complex<double> limit_at_time(const CovarianceKernel& kernel, const AtomicMeasure& mu0, double t,
                                   std::complex<double> z);

/// The deterministic limit law at one time.
class LimitLaw {
 public:
  enum class Kind { Semicircle, BurgersEvolved };

  static LimitLaw semicircle(double center, double variance);
  static LimitLaw burgers_evolved(AtomicMeasure initial, double tau);
  /// Law with variance parameter R(t,t) started from mu0; single-atom mu0 with
  /// positive variance gives a semicircle.
  static LimitLaw at_time(const CovarianceKernel& kernel, const AtomicMeasure& mu0, double t);

  Kind kind() const { return kind_; }
  double center() const { return center_; }
  double tau() const { return tau_; }
  const AtomicMeasure& initial() const { return initial_; }

  std::complex<double> stieltjes(std::complex<double> z) const;
  double pdf(double x) const;
  double cdf(double x) const;
  /// lim_{y -> x-} cdf(y); differs from cdf only for an atomic (tau = 0) law.
  double cdf_left(double x) const;
  /// Atoms carrying positive mass (only for tau = 0).
  std::vector<double> atoms() const;
  /// Interval containing the support.
  std::pair<double, double> support() const;

 private:
  struct CdfTable;
  LimitLaw() = default;
  const CdfTable& table() const;

  Kind kind_ = Kind::Semicircle;
  double center_ = 0.0;
  double tau_ = 1.0;
  AtomicMeasure initial_;
  std::shared_ptr<CdfTable> table_;
};

struct DensityAndCdf {
  double pdf = 0.0;
  double cdf = 0.0;
};

/// Semicircle: closed forms. BurgersEvolved: Im F(x + i eps)/pi at eps = 1e-6
/// with one Richardson step to eps/2; CDF by adaptive quadrature of the density.
DensityAndCdf density_and_cdf(const LimitLaw& law, double x);

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth = 40);

}  // namespace gmflow
