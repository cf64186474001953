#include "gmflow/matrix_flow.h"

#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace gmflow {

namespace {

void check_shift(const Eigen::MatrixXd& shift, std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (shift.rows() != nn || shift.cols() != nn)
    throw std::invalid_argument("shift matrix is " + std::to_string(shift.rows()) + "x" +
                                std::to_string(shift.cols()) + ", expected " + std::to_string(n) + "x" +
                                std::to_string(n));
  if ((shift - shift.transpose()).cwiseAbs().maxCoeff() > 0.0) throw std::invalid_argument("shift matrix is not symmetric");
}

}  // namespace

MatrixFlowSample assemble_flow(std::span<const EntryPath> entries, const Eigen::MatrixXd& shift, std::size_t n,
                               const TimeGrid& grid) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  check_shift(shift, n);
  std::map<std::pair<std::uint32_t, std::uint32_t>, const EntryPath*> by_index;
  for (const auto& e : entries) {
    if (e.values.size() != grid.size()) throw std::invalid_argument("entry path length does not match the grid");
    if (e.id.i > e.id.j || e.id.j >= n) throw std::invalid_argument("entry index outside the upper triangle");
    by_index[{e.id.i, e.id.j}] = &e;
  }
  MatrixFlowSample flow;
  flow.n = n;
  flow.grid = grid;
  flow.shift = shift;
  flow.values.assign(grid.size(), shift);
  const double off = 1.0 / std::sqrt(static_cast<double>(n));
  const double diag = std::sqrt(2.0) / std::sqrt(static_cast<double>(n));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i; j < n; ++j) {
      auto it = by_index.find({i, j});
      if (it == by_index.end())
        throw std::invalid_argument("missing entry path (" + std::to_string(i) + "," + std::to_string(j) + ")");
      const auto& x = it->second->values;
      const double scale = i == j ? diag : off;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double y = shift(i, j) + scale * x[k];
        flow.values[k](i, j) = y;
        flow.values[k](j, i) = y;
      }
    }
  }
  return flow;
}

MatrixFlowSample simulate_flow(const PathSampler& sampler, const Eigen::MatrixXd& shift, std::uint64_t seed,
                               std::uint32_t path_id) {
  const auto n = static_cast<std::size_t>(shift.rows());
  if (n == 0) throw std::invalid_argument("matrix dimension must be positive");
  check_shift(shift, n);
  const TimeGrid& grid = sampler.grid();
  MatrixFlowSample flow;
  flow.n = n;
  flow.grid = grid;
  flow.shift = shift;
  flow.values.assign(grid.size(), shift);
  const double off = 1.0 / std::sqrt(static_cast<double>(n));
  const double diag = std::sqrt(2.0) / std::sqrt(static_cast<double>(n));
  std::vector<double> x(grid.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i; j < n; ++j) {
      sampler.sample_into(seed, {i, j, path_id}, x);
      const double scale = i == j ? diag : off;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double y = shift(i, j) + scale * x[k];
        flow.values[k](i, j) = y;
        flow.values[k](j, i) = y;
      }
    }
  }
  return flow;
}

SpectralFlow eigendecompose(const MatrixFlowSample& flow, bool want_vectors, EigenMethod method) {
  SpectralFlow out;
  out.eigenvalues.reserve(flow.values.size());
  if (want_vectors) out.eigenvectors.reserve(flow.values.size());
  for (const auto& y : flow.values) {
    auto dec = symmetric_eigen(y, want_vectors, method);
    out.eigenvalues.push_back(std::move(dec.values));
    if (want_vectors) out.eigenvectors.push_back(std::move(dec.vectors));
  }
  return out;
}

DegenerateEigenvalueError::DegenerateEigenvalueError(std::size_t index, double gap)
    : std::domain_error("eigenvalue " + std::to_string(index) + " is degenerate (gap " + std::to_string(gap) + ")"),
      index_(index),
      gap_(gap) {}

double min_spectral_gap(std::span<const double> v) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < v.size(); ++k) gap = std::min(gap, std::abs(v[k] - v[k + 1]));
  return gap;
}

double eigenvalue_gap(std::span<const double> v, std::size_t i) {
  double gap = std::numeric_limits<double>::infinity();
  if (i > 0) gap = std::min(gap, std::abs(v[i - 1] - v[i]));
  if (i + 1 < v.size()) gap = std::min(gap, std::abs(v[i] - v[i + 1]));
  return gap;
}

SpectralDerivatives spectral_derivatives(std::span<const double> lambda, const Eigen::MatrixXd& u, std::size_t i,
                                         double gap_threshold) {
  const std::size_t n = lambda.size();
  if (i >= n) throw std::out_of_range("eigenvalue index out of range");
  if (u.rows() != static_cast<Eigen::Index>(n) || u.cols() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("eigenvector frame missing or of the wrong size");
  const double gap = eigenvalue_gap(lambda, i);
  if (gap <= gap_threshold) throw DegenerateEigenvalueError(i, gap);

  const auto ii = static_cast<Eigen::Index>(i);
  std::vector<double> inv_gap(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) inv_gap[j] = 1.0 / (lambda[i] - lambda[j]);

  SpectralDerivatives d;
  d.grad.resize(n * (n + 1) / 2);
  d.hess_diag.resize(n * (n + 1) / 2);
  const double root2 = std::sqrt(2.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    for (std::size_t h = k; h < n; ++h) {
      const auto hh = static_cast<Eigen::Index>(h);
      const std::size_t idx = upper_index(n, k, h);
      double second = 0.0;
      if (k == h) {
        d.grad[idx] = root2 * u(kk, ii) * u(kk, ii);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const double c = u(kk, ii) * u(kk, static_cast<Eigen::Index>(j));
          second += c * c * inv_gap[j];
        }
        d.hess_diag[idx] = 4.0 * second;
      } else {
        d.grad[idx] = 2.0 * u(kk, ii) * u(hh, ii);
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const auto jj = static_cast<Eigen::Index>(j);
          const double c = u(kk, ii) * u(hh, jj) + u(hh, ii) * u(kk, jj);
          second += c * c * inv_gap[j];
        }
        d.hess_diag[idx] = 2.0 * second;
      }
    }
  }
  return d;
}

}  // namespace gmflow
