#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gmflow/covariance.h"
#include "gmflow/limit_law.h"
#include "gmflow/matrix_flow.h"
#include "gmflow/sampler.h"
#include "gmflow/spectral_measure.h"
#include "gmflow/stats.h"

namespace gmflow {

/// Shared ensemble settings: every path p uses the entry streams
/// (seed, i, j, p), so results do not depend on the worker count.
struct Ensemble {
  const PathSampler* sampler = nullptr;
  Eigen::MatrixXd shift;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Spectrum of the shift as an atomic law (the initial law mu_0).
AtomicMeasure initial_law(const Eigen::MatrixXd& shift);

/// G = <mu_t,f> - <mu_0,f> - int_0^t g(s) dR(s,s), with
/// g = DDF(mu_s, f)/2 + (1/(2n^2)) sum_i f''(lambda_i(s)). The time integral is
/// a trapezoid in g against exact increments of R(s,s). `t` must be a grid time.
double weak_equation_residual(const SpectralFlow& spectra, const TimeGrid& grid, const CovarianceKernel& kernel,
                              const TestFunction& f, double t);

struct ResidualReport {
  std::size_t n = 0;
  std::size_t paths = 0;
  std::string test_function;
  double t = 0.0;
  std::vector<double> residuals;  // one per path
  MeanSe mean;
  MeanSe mean_square;
  std::size_t degenerate_times = 0;  // (path, time) pairs with a gap below 1e-8
};
ResidualReport residual_study(const Ensemble& ensemble, const CovarianceKernel& kernel, const TestFunction& f,
                              double t);
/// One report per test function, all from the same simulated paths.
std::vector<ResidualReport> residual_study(const Ensemble& ensemble, const CovarianceKernel& kernel,
                                           const std::vector<TestFunction>& fs, double t);

struct ConvergenceRow {
  std::size_t n = 0;
  double t = 0.0;
  MeanSe distance;
  std::size_t paths = 0;
};
struct CauchyRow {
  std::size_t n = 0;
  double t = 0.0;
  std::complex<double> z;
  std::complex<double> mean;  // mean over paths of G^(n)_t(z)
  double stderr_re = 0.0, stderr_im = 0.0;
  std::complex<double> limit;  // F_{R(t,t)}(z)
  std::size_t paths = 0;
};
struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // one per grid time
  MeanSe sup_distance;               // mean over paths of sup over grid times
  std::vector<CauchyRow> cauchy;     // one per (grid time in `cauchy_times`, z)
};
/// Kolmogorov distance of mu_t^(n) to the limit law started from the shift's
/// spectrum, at every grid time; Cauchy transforms at the requested times.
ConvergenceReport convergence_study(const Ensemble& ensemble, const CovarianceKernel& kernel,
                                    const std::vector<double>& cauchy_times,
                                    const std::vector<std::complex<double>>& z_points);

struct HolderReport {
  std::size_t n = 0;
  std::size_t paths = 0;
  std::string test_function;
  double p = 0.0;
  std::vector<std::pair<double, double>> pairs;
  std::vector<MeanSe> moments;  // E|<mu_t2,f> - <mu_t1,f>|^p per pair
  double q_hat = 0.0;           // NaN when degenerate
  bool degenerate = false;
  std::size_t hw_checks = 0;
  std::size_t hw_violations = 0;
};
/// Increment moments over the given pairs of grid times, the log-log slope
/// against the lag, and a Hoffman-Wielandt check on every pair of every path.
HolderReport holder_increments(const Ensemble& ensemble, const TestFunction& f,
                               const std::vector<std::pair<double, double>>& pairs, double p);
std::vector<HolderReport> holder_increments(const Ensemble& ensemble, const std::vector<TestFunction>& fs,
                                            const std::vector<std::pair<double, double>>& pairs, double p);

struct HwTerms {
  double eigen_side = 0.0;   // sum_i (lambda_i(t2) - lambda_i(t1))^2
  double matrix_side = 0.0;  // ||Y(t2) - Y(t1)||_F^2
  // slack covers eigensolver rounding, relative to the size of the matrices
  double slack = 0.0;
  bool holds() const { return eigen_side <= matrix_side + slack; }
};
HwTerms hoffman_wielandt_terms(const Eigen::MatrixXd& y1, std::span<const double> l1, const Eigen::MatrixXd& y2,
                               std::span<const double> l2);

struct CollisionRow {
  double t = 0.0;
  double min_gap = 0.0;
  double q01 = 0.0, q10 = 0.0, q50 = 0.0;
  double degenerate_fraction = 0.0;
  std::size_t count = 0;
};
/// Quantiles of a sample of minimum gaps and the fraction below `threshold`.
/// Gaps of +infinity (n = 1) stay +infinity.
CollisionRow summarize_gaps(double t, std::vector<double> gaps, double threshold = 1e-8);
std::vector<CollisionRow> collision_proximity(const std::vector<SpectralFlow>& ensemble, const TimeGrid& grid,
                                              double threshold = 1e-8);
/// Same report computed path by path without keeping the ensemble.
std::vector<CollisionRow> collision_study(const Ensemble& ensemble, const std::vector<double>& times,
                                          double threshold = 1e-8);

struct DysonSettings {
  Eigen::MatrixXd shift;
  double t = 1.0;
  double dt = 1e-3;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::uint32_t stream_level = 0;  // separates independent SDE runs sharing a seed
};
struct DysonPathResult {
  std::vector<double> spectrum;  // descending
  std::size_t rejections = 0;
};
/// One Euler-Maruyama path of
///   d lambda_i = sqrt(2/n) dW_i + (1/n) sum_{j != i} dt / (lambda_i - lambda_j)
/// from the spectrum of the shift. A degenerate start takes an exact first
/// step through the matrix model. Steps that would bring two eigenvalues
/// within 0.01 sqrt(h/n) are split with a Brownian bridge.
DysonPathResult dyson_path(const DysonSettings& settings, std::uint32_t path_id);

struct DysonReport {
  std::vector<double> sde_mean;     // mean sorted spectrum, descending
  std::vector<double> matrix_mean;  // same from the matrix model
  double w1 = 0.0;
  double w1_stderr = 0.0;
  std::size_t rejections = 0;
};
/// Wasserstein-1 between mean sorted spectra of the SDE and of the Brownian
/// matrix model at time settings.t.
struct MeanSpectrum {
  std::vector<double> mean;    // descending
  std::vector<double> stderr_;  // per index
};
/// Mean sorted spectrum of the Brownian matrix model at settings.t.
MeanSpectrum matrix_mean_spectrum(const DysonSettings& settings);
/// Pass a precomputed matrix-side spectrum to reuse it across step sizes.
DysonReport dyson_crosscheck(const DysonSettings& settings, const MeanSpectrum* matrix_side = nullptr);

/// |dF/dtau - F dF/dz| by central differences of step h at (tau, z).
double burgers_pde_residual(const AtomicMeasure& mu0, double tau, std::complex<double> z, double h = 1e-4);

}  // namespace gmflow
