#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gmflow/covariance.h"
#include "gmflow/time_grid.h"

namespace gmflow {

/// Lower-triangular L with L L^T = [R(t_i, t_j)] on a grid.
struct PathFactor {
  TimeGrid grid;
  Eigen::MatrixXd lower;
  double jitter_used = 0.0;
};

struct EntryId {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint32_t path = 0;
};

struct EntryPath {
  std::vector<double> values;  // one per grid time
  EntryId id;
};

/// Cholesky factor of the Gram matrix. Rows/columns with R(t,t) = 0 are
/// zeroed before factorization. On failure retries with jitter 1e-12, 1e-10,
/// 1e-8 times the identity; throws NumericalError naming the grid if none
/// reconstructs the Gram matrix within 1e-8 (1 + max diag).
PathFactor factor_grid(const CovarianceKernel& kernel, const TimeGrid& grid);

/// L zeta with zeta drawn from the counter stream keyed by (seed, id).
EntryPath sample_entry_path(const PathFactor& factor, std::uint64_t seed, EntryId id);
void sample_entry_path_into(const PathFactor& factor, std::uint64_t seed, EntryId id, std::span<double> out);

/// Exact fBm sampler on a uniform grid: fractional Gaussian noise by circulant
/// embedding of the increment covariance, summed into a path. Falls back to a
/// Cholesky factor (with a notice on stderr) if the embedding has a negative
/// eigenvalue.
class CirculantFbm {
 public:
  CirculantFbm(double hurst, const TimeGrid& grid);
  ~CirculantFbm();
  CirculantFbm(const CirculantFbm&) = delete;
  CirculantFbm& operator=(const CirculantFbm&) = delete;

  void sample_into(std::uint64_t seed, EntryId id, std::span<double> out) const;
  EntryPath sample(std::uint64_t seed, EntryId id) const;

  bool uses_fallback() const { return fallback_ != nullptr; }
  /// Eigenvalues of the circulant embedding (length 2K).
  const std::vector<double>& embedding_spectrum() const { return spectrum_; }

 private:
  double hurst_;
  TimeGrid grid_;
  std::vector<double> spectrum_;
  std::unique_ptr<PathFactor> fallback_;
  void* plan_ = nullptr;  // fftw_plan
};

EntryPath circulant_fbm_sampler(double hurst, const TimeGrid& grid, std::uint64_t seed, EntryId id);

enum class SamplerMethod { Cholesky, Circulant };

/// Either sampler behind one interface; immutable and shareable across workers.
class PathSampler {
 public:
  PathSampler(const CovarianceKernel& kernel, const TimeGrid& grid, SamplerMethod method);

  const TimeGrid& grid() const { return grid_; }
  SamplerMethod method() const { return method_; }
  double jitter_used() const { return factor_ ? factor_->jitter_used : 0.0; }
  void sample_into(std::uint64_t seed, EntryId id, std::span<double> out) const;
  EntryPath sample(std::uint64_t seed, EntryId id) const;

 private:
  TimeGrid grid_;
  SamplerMethod method_;
  std::shared_ptr<const PathFactor> factor_;
  std::shared_ptr<const CirculantFbm> circulant_;
};

/// Autocovariance of fractional Gaussian noise with unit spacing at lag k.
double fgn_autocovariance(double hurst, double lag);

}  // namespace gmflow
