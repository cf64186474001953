#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gmflow/sampler.h"
#include "gmflow/symmetric_eigen.h"
#include "gmflow/time_grid.h"

namespace gmflow {

/// One realization of Y(t_k) = A + n^{-1/2} X(t_k) (off-diagonal) and
/// A + sqrt(2/n) X(t_k) (diagonal), stored per grid time.
struct MatrixFlowSample {
  std::size_t n = 0;
  TimeGrid grid{std::vector<double>{0.0}};
  Eigen::MatrixXd shift;
  std::vector<Eigen::MatrixXd> values;
};

/// Eigenvalues (descending) per grid time, plus optional eigenvector frames.
struct SpectralFlow {
  std::vector<std::vector<double>> eigenvalues;
  std::vector<Eigen::MatrixXd> eigenvectors;  // empty unless requested
};

/// Position of the pair (k, h), k <= h, in the packed upper triangle of an
/// n x n matrix (row-major).
inline std::size_t upper_index(std::size_t n, std::size_t k, std::size_t h) {
  return k * n - k * (k + 1) / 2 + h;
}

/// Builds the scaled symmetric process from entry paths, one per 0 <= i <= j < n,
/// all on `grid`. Throws std::invalid_argument on a missing path or a
/// dimension mismatch.
MatrixFlowSample assemble_flow(std::span<const EntryPath> entries, const Eigen::MatrixXd& shift, std::size_t n,
                               const TimeGrid& grid);

/// Samples every entry path for `path_id` and assembles the flow. Equal to
/// assemble_flow over sampler.sample(seed, {i, j, path_id}).
MatrixFlowSample simulate_flow(const PathSampler& sampler, const Eigen::MatrixXd& shift, std::uint64_t seed,
                               std::uint32_t path_id);

SpectralFlow eigendecompose(const MatrixFlowSample& flow, bool want_vectors,
                            EigenMethod method = EigenMethod::Auto);

/// Thrown when a derivative is requested at an eigenvalue whose gap to the
/// rest of the spectrum is below the threshold.
class DegenerateEigenvalueError : public std::domain_error {
 public:
  DegenerateEigenvalueError(std::size_t index, double gap);
  std::size_t index() const { return index_; }
  double gap() const { return gap_; }

 private:
  std::size_t index_;
  double gap_;
};

struct SpectralDerivatives {
  std::vector<double> grad;       // d lambda_i / d y_{kh}, packed over k <= h
  std::vector<double> hess_diag;  // d^2 lambda_i / d y_{kh}^2, packed over k <= h
};

/// First and second derivatives of the i-th eigenvalue (descending order)
/// with respect to the Gaussian coordinates y_{kh}, k <= h. Off-diagonal
/// coordinates move Y_kh and Y_hk together; the diagonal coordinate enters as
/// Y_kk = sqrt(2) y_kk, matching the diagonal scaling of the flow.
SpectralDerivatives spectral_derivatives(std::span<const double> eigenvalues, const Eigen::MatrixXd& eigenvectors,
                                         std::size_t i, double gap_threshold = 1e-8);

/// Smallest gap between distinct positions of a sorted spectrum
/// (+infinity for fewer than two eigenvalues).
double min_spectral_gap(std::span<const double> sorted_eigenvalues);

/// Gap between eigenvalue i and its nearest neighbour.
double eigenvalue_gap(std::span<const double> sorted_eigenvalues, std::size_t i);

}  // namespace gmflow
