#include "gmflow/sampler.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "gmflow/errors.h"
#include "gmflow/random.h"

namespace gmflow {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::string describe_grid(const TimeGrid& grid) {
  std::ostringstream os;
  os.precision(17);
  os << "grid{";
  for (std::size_t k = 0; k < grid.size(); ++k) os << (k ? "," : "") << grid[k];
  os << "}";
  return os.str();
}

}  // namespace

PathFactor factor_grid(const CovarianceKernel& kernel, const TimeGrid& grid) {
  Eigen::MatrixXd gram = gram_matrix(kernel, grid);
  const Eigen::Index n = gram.rows();
  if (!is_psd(gram)) throw std::invalid_argument("Gram matrix is not positive semidefinite on " + describe_grid(grid));

  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gram(i, i) == 0.0) {
      gram.row(i).setZero();
      gram.col(i).setZero();
    } else {
      active.push_back(i);
    }
  }
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = gram(active[a], active[b]);

  const double tol = 1e-8 * (1.0 + gram.diagonal().maxCoeff());
  const double ladder[] = {0.0, 1e-12, 1e-10, 1e-8};
  for (double jitter : ladder) {
    Eigen::LLT<Eigen::MatrixXd> llt(sub + jitter * Eigen::MatrixXd::Identity(m, m));
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lsub = llt.matrixL();
    if (!lsub.allFinite()) continue;
    PathFactor f{grid, Eigen::MatrixXd::Zero(n, n), jitter};
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) f.lower(active[a], active[b]) = lsub(a, b);
    const double err = (f.lower * f.lower.transpose() - gram).cwiseAbs().maxCoeff();
    if (err <= tol) return f;
  }
  throw NumericalError("Cholesky factorization failed after maximal jitter 1e-8", describe_grid(grid));
}

void sample_entry_path_into(const PathFactor& factor, std::uint64_t seed, EntryId id, std::span<double> out) {
  const Eigen::Index n = factor.lower.rows();
  if (static_cast<Eigen::Index>(out.size()) != n) throw std::invalid_argument("output span does not match grid size");
  NormalStream stream(seed, StreamDomain::EntryPath, id.i, id.j, id.path);
  Eigen::Map<Eigen::VectorXd> y(out.data(), n);
  y.setZero();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double z = stream.next();
    y.segment(j, n - j) += factor.lower.col(j).segment(j, n - j) * z;
  }
}

EntryPath sample_entry_path(const PathFactor& factor, std::uint64_t seed, EntryId id) {
  EntryPath p{std::vector<double>(factor.grid.size()), id};
  sample_entry_path_into(factor, seed, id, p.values);
  return p;
}

double fgn_autocovariance(double hurst, double lag) {
  const double e = 2.0 * hurst;
  const double k = std::abs(lag);
  return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e));
}

CirculantFbm::CirculantFbm(double hurst, const TimeGrid& grid) : hurst_(hurst), grid_(grid) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("hurst must lie in (0,1)");
  if (!grid.is_uniform() || grid.size() < 2) throw std::invalid_argument("circulant sampler needs a uniform grid");
  const std::size_t K = grid.size() - 1;
  const std::size_t m = 2 * K;
  std::vector<std::complex<double>> c(m), lam(m);
  for (std::size_t k = 0; k <= K; ++k) c[k] = fgn_autocovariance(hurst, static_cast<double>(k));
  for (std::size_t k = 1; k < K; ++k) c[m - k] = c[k];
  {
    std::lock_guard lock(fftw_planner_mutex());
    auto* in = reinterpret_cast<fftw_complex*>(c.data());
    auto* out = reinterpret_cast<fftw_complex*>(lam.data());
    fftw_plan once = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(once);
    fftw_destroy_plan(once);
    plan_ = fftw_plan_dft_1d(static_cast<int>(m), in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  spectrum_.resize(m);
  double largest = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    spectrum_[k] = lam[k].real();
    largest = std::max(largest, spectrum_[k]);
  }
  const double smallest = *std::min_element(spectrum_.begin(), spectrum_.end());
  if (smallest < -1e-12 * largest) {
    std::cerr << "notice: circulant embedding for H=" << hurst << " has eigenvalue " << smallest
              << "; using Cholesky sampling instead\n";
    fallback_ = std::make_unique<PathFactor>(factor_grid(CovarianceKernel::fractional_brownian(hurst), grid));
  }
  for (auto& v : spectrum_) v = std::max(v, 0.0);
}

CirculantFbm::~CirculantFbm() {
  if (plan_) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  }
}

void CirculantFbm::sample_into(std::uint64_t seed, EntryId id, std::span<double> out) const {
  if (out.size() != grid_.size()) throw std::invalid_argument("output span does not match grid size");
  if (fallback_) {
    sample_entry_path_into(*fallback_, seed, id, out);
    return;
  }
  const std::size_t K = grid_.size() - 1;
  const std::size_t m = 2 * K;
  NormalStream stream(seed, StreamDomain::Circulant, id.i, id.j, id.path);
  std::vector<std::complex<double>> w(m), y(m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = stream.next();
    const double b = stream.next();
    w[k] = std::sqrt(spectrum_[k] * inv_m) * std::complex<double>(a, b);
  }
  fftw_execute_dft(static_cast<fftw_plan>(plan_), reinterpret_cast<fftw_complex*>(w.data()),
                   reinterpret_cast<fftw_complex*>(y.data()));
  const double scale = std::pow(grid_[1] - grid_[0], hurst_);
  out[0] = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    acc += scale * y[k].real();
    out[k + 1] = acc;
  }
}

EntryPath CirculantFbm::sample(std::uint64_t seed, EntryId id) const {
  EntryPath p{std::vector<double>(grid_.size()), id};
  sample_into(seed, id, p.values);
  return p;
}

EntryPath circulant_fbm_sampler(double hurst, const TimeGrid& grid, std::uint64_t seed, EntryId id) {
  return CirculantFbm(hurst, grid).sample(seed, id);
}

PathSampler::PathSampler(const CovarianceKernel& kernel, const TimeGrid& grid, SamplerMethod method)
    : grid_(grid), method_(method) {
  if (method == SamplerMethod::Circulant) {
    if (kernel.kind() == KernelKind::UserTable)
      throw std::invalid_argument("sampler.method = circulant needs a brownian or fbm kernel");
    circulant_ = std::make_shared<const CirculantFbm>(kernel.hurst(), grid);
  } else {
    factor_ = std::make_shared<const PathFactor>(factor_grid(kernel, grid));
  }
}

void PathSampler::sample_into(std::uint64_t seed, EntryId id, std::span<double> out) const {
  if (circulant_) circulant_->sample_into(seed, id, out);
  else sample_entry_path_into(*factor_, seed, id, out);
}

EntryPath PathSampler::sample(std::uint64_t seed, EntryId id) const {
  EntryPath p{std::vector<double>(grid_.size()), id};
  sample_into(seed, id, p.values);
  return p;
}

}  // namespace gmflow
