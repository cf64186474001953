#include "gmflow/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gmflow/errors.h"
#include "gmflow/random.h"

namespace gmflow {

namespace {

constexpr double kDegenerateGap = 1e-8;

std::size_t grid_index(const TimeGrid& grid, double t) {
  const std::size_t k = grid.index_of(t);
  if (k == grid.size()) throw std::invalid_argument("time " + std::to_string(t) + " is not a grid time");
  return k;
}

void check_ensemble(const Ensemble& e) {
  if (e.sampler == nullptr) throw std::invalid_argument("ensemble has no sampler");
  if (e.paths == 0) throw std::invalid_argument("ensemble needs at least one path");
  if (e.shift.rows() == 0) throw std::invalid_argument("ensemble needs a shift matrix");
}

SpectralFlow path_spectra(const Ensemble& e, std::size_t p, MatrixFlowSample* keep = nullptr) {
  auto flow = simulate_flow(*e.sampler, e.shift, e.seed, static_cast<std::uint32_t>(p));
  auto spectra = eigendecompose(flow, false);
  if (keep) *keep = std::move(flow);
  return spectra;
}

double real_integral(const std::vector<double>& descending, const TestFunction& f) {
  std::vector<double> v(descending.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f.real_derivative(descending[i], 0);
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  if (std::isinf(sorted[lo]) || std::isinf(sorted[hi])) return pos - static_cast<double>(lo) == 0.0 ? sorted[lo] : sorted[hi];
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

AtomicMeasure initial_law(const Eigen::MatrixXd& shift) {
  const auto dec = symmetric_eigen(shift, false);
  return AtomicMeasure::from_empirical(EmpiricalMeasure(dec.values));
}

double weak_equation_residual(const SpectralFlow& spectra, const TimeGrid& grid, const CovarianceKernel& kernel,
                              const TestFunction& f, double t) {
  if (!f.is_real()) throw std::invalid_argument("the weak-equation residual needs a real test function");
  if (spectra.eigenvalues.size() != grid.size()) throw std::invalid_argument("spectra do not match the grid");
  const std::size_t upto = grid_index(grid, t);
  std::vector<double> g(upto + 1);
  for (std::size_t k = 0; k <= upto; ++k) {
    const auto& lam = spectra.eigenvalues[k];
    const std::size_t n = lam.size();
    std::vector<double> fp(n), fpp(n);
    for (std::size_t i = 0; i < n; ++i) {
      fp[i] = f.real_derivative(lam[i], 1);
      fpp[i] = f.real_derivative(lam[i], 2);
    }
    const double nn = static_cast<double>(n);
    const double ddf = divided_difference_sum(lam, fp, [&](double x) { return f.real_derivative(x, 2); });
    g[k] = 0.5 * ddf + 0.5 * pairwise_sum(fpp) / (nn * nn);
  }
  const double drift = integrate_against_diag_variance(kernel, grid, g, upto);
  return real_integral(spectra.eigenvalues[upto], f) - real_integral(spectra.eigenvalues[0], f) - drift;
}

std::vector<ResidualReport> residual_study(const Ensemble& e, const CovarianceKernel& kernel,
                                           const std::vector<TestFunction>& fs, double t) {
  check_ensemble(e);
  const TimeGrid& grid = e.sampler->grid();
  grid_index(grid, t);
  for (const auto& f : fs)
    if (!f.is_real()) throw std::invalid_argument("the weak-equation residual needs real test functions");
  std::vector<std::vector<double>> residuals(fs.size(), std::vector<double>(e.paths));
  std::vector<std::size_t> degenerate(e.paths, 0);
  parallel_for(e.paths, e.threads, [&](std::size_t p) {
    const auto spectra = path_spectra(e, p);
    for (std::size_t a = 0; a < fs.size(); ++a) residuals[a][p] = weak_equation_residual(spectra, grid, kernel, fs[a], t);
    for (const auto& lam : spectra.eigenvalues)
      if (min_spectral_gap(lam) < kDegenerateGap) ++degenerate[p];
  });
  std::size_t degenerate_total = 0;
  for (auto d : degenerate) degenerate_total += d;
  std::vector<ResidualReport> out;
  for (std::size_t a = 0; a < fs.size(); ++a) {
    ResidualReport r;
    r.n = static_cast<std::size_t>(e.shift.rows());
    r.paths = e.paths;
    r.test_function = fs[a].id();
    r.t = t;
    r.residuals = std::move(residuals[a]);
    std::vector<double> squares(e.paths);
    for (std::size_t p = 0; p < e.paths; ++p) squares[p] = r.residuals[p] * r.residuals[p];
    r.mean = mean_and_stderr(r.residuals);
    r.mean_square = mean_and_stderr(squares);
    r.degenerate_times = degenerate_total;
    out.push_back(std::move(r));
  }
  return out;
}

ResidualReport residual_study(const Ensemble& e, const CovarianceKernel& kernel, const TestFunction& f, double t) {
  return residual_study(e, kernel, std::vector<TestFunction>{f}, t).front();
}

ConvergenceReport convergence_study(const Ensemble& e, const CovarianceKernel& kernel,
                                    const std::vector<double>& cauchy_times,
                                    const std::vector<std::complex<double>>& z_points) {
  check_ensemble(e);
  const TimeGrid& grid = e.sampler->grid();
  const std::size_t K = grid.size();
  const auto mu0 = initial_law(e.shift);
  std::vector<LimitLaw> laws;
  laws.reserve(K);
  for (std::size_t k = 0; k < K; ++k) laws.push_back(LimitLaw::at_time(kernel, mu0, grid[k]));
  std::vector<std::size_t> ct;
  for (double t : cauchy_times) ct.push_back(grid_index(grid, t));
  const std::size_t nz = z_points.size();
  for (const auto& z : z_points)
    if (!(z.imag() > 0.0)) throw std::invalid_argument("z points need Im z > 0");

  std::vector<std::vector<double>> dist(K, std::vector<double>(e.paths));
  std::vector<double> sup(e.paths);
  std::vector<std::vector<std::complex<double>>> cauchy(ct.size() * nz, std::vector<std::complex<double>>(e.paths));
  parallel_for(e.paths, e.threads, [&](std::size_t p) {
    const auto spectra = path_spectra(e, p);
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto mu = EmpiricalMeasure::from_descending(spectra.eigenvalues[k]);
      dist[k][p] = kolmogorov_distance(mu, laws[k]);
      s = std::max(s, dist[k][p]);
    }
    sup[p] = s;
    for (std::size_t a = 0; a < ct.size(); ++a) {
      const auto mu = EmpiricalMeasure::from_descending(spectra.eigenvalues[ct[a]]);
      for (std::size_t b = 0; b < nz; ++b) cauchy[a * nz + b][p] = cauchy_transform(mu, z_points[b]);
    }
  });

  ConvergenceReport r;
  const auto n = static_cast<std::size_t>(e.shift.rows());
  for (std::size_t k = 0; k < K; ++k) r.rows.push_back({n, grid[k], mean_and_stderr(dist[k]), e.paths});
  r.sup_distance = mean_and_stderr(sup);
  for (std::size_t a = 0; a < ct.size(); ++a) {
    for (std::size_t b = 0; b < nz; ++b) {
      std::vector<double> re(e.paths), im(e.paths);
      for (std::size_t p = 0; p < e.paths; ++p) {
        re[p] = cauchy[a * nz + b][p].real();
        im[p] = cauchy[a * nz + b][p].imag();
      }
      const auto mr = mean_and_stderr(re), mi = mean_and_stderr(im);
      CauchyRow row;
      row.n = n;
      row.t = grid[ct[a]];
      row.z = z_points[b];
      row.mean = {mr.mean, mi.mean};
      row.stderr_re = mr.stderr_;
      row.stderr_im = mi.stderr_;
      row.limit = limit_at_time(kernel, mu0, row.t, row.z);
      row.paths = e.paths;
      r.cauchy.push_back(row);
    }
  }
  return r;
}

HwTerms hoffman_wielandt_terms(const Eigen::MatrixXd& y1, std::span<const double> l1, const Eigen::MatrixXd& y2,
                               std::span<const double> l2) {
  HwTerms h;
  for (std::size_t i = 0; i < l1.size(); ++i) h.eigen_side += (l2[i] - l1[i]) * (l2[i] - l1[i]);
  h.matrix_side = (y2 - y1).squaredNorm();
  const double scale = std::max(y1.cwiseAbs().maxCoeff(), y2.cwiseAbs().maxCoeff());
  const double n = static_cast<double>(l1.size());
  // eigenvalues carry absolute errors of order n eps scale
  const double err = 64.0 * n * std::numeric_limits<double>::epsilon() * (1.0 + scale);
  h.slack = 2.0 * std::sqrt(n) * err * (std::sqrt(h.eigen_side) + err) + 1e-12 * h.matrix_side;
  return h;
}

std::vector<HolderReport> holder_increments(const Ensemble& e, const std::vector<TestFunction>& fs,
                                            const std::vector<std::pair<double, double>>& pairs, double p) {
  check_ensemble(e);
  for (const auto& f : fs)
    if (!f.is_real()) throw std::invalid_argument("holder increments need real test functions");
  if (!(p > 0.0)) throw std::invalid_argument("moment order p must be positive");
  if (pairs.size() < 2) throw std::invalid_argument("holder increments need at least two time pairs");
  const TimeGrid& grid = e.sampler->grid();
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  double lag_min = std::numeric_limits<double>::infinity(), lag_max = 0.0;
  for (const auto& [t1, t2] : pairs) {
    if (!(t2 > t1)) throw std::invalid_argument("holder pairs need t2 > t1");
    idx.emplace_back(grid_index(grid, t1), grid_index(grid, t2));
    lag_min = std::min(lag_min, t2 - t1);
    lag_max = std::max(lag_max, t2 - t1);
  }
  if (lag_max < 10.0 * lag_min * (1.0 - 1e-12)) throw std::invalid_argument("holder lags must span at least one decade");

  const std::size_t np = pairs.size(), nf = fs.size();
  // incr[a * np + q][path]
  std::vector<std::vector<double>> incr(nf * np, std::vector<double>(e.paths));
  std::vector<std::size_t> hw_bad(e.paths, 0);
  parallel_for(e.paths, e.threads, [&](std::size_t path) {
    MatrixFlowSample flow;
    const auto spectra = path_spectra(e, path, &flow);
    for (std::size_t q = 0; q < np; ++q) {
      const auto [a, b] = idx[q];
      for (std::size_t fi = 0; fi < nf; ++fi) {
        const double d = real_integral(spectra.eigenvalues[b], fs[fi]) - real_integral(spectra.eigenvalues[a], fs[fi]);
        incr[fi * np + q][path] = std::pow(std::abs(d), p);
      }
      if (!hoffman_wielandt_terms(flow.values[a], spectra.eigenvalues[a], flow.values[b], spectra.eigenvalues[b])
               .holds())
        ++hw_bad[path];
    }
  });

  std::size_t violations = 0;
  for (auto v : hw_bad) violations += v;
  std::vector<HolderReport> out;
  for (std::size_t fi = 0; fi < nf; ++fi) {
    HolderReport r;
    r.n = static_cast<std::size_t>(e.shift.rows());
    r.paths = e.paths;
    r.test_function = fs[fi].id();
    r.p = p;
    r.pairs = pairs;
    std::vector<double> lx, ly;
    for (std::size_t q = 0; q < np; ++q) {
      r.moments.push_back(mean_and_stderr(incr[fi * np + q]));
      if (r.moments.back().mean > 0.0) {
        lx.push_back(std::log(pairs[q].second - pairs[q].first));
        ly.push_back(std::log(r.moments.back().mean));
      }
    }
    r.hw_checks = np * e.paths;
    r.hw_violations = violations;
    if (lx.size() < np) {
      r.degenerate = true;
      r.q_hat = std::numeric_limits<double>::quiet_NaN();
    } else {
      r.q_hat = linear_fit(lx, ly).slope;
    }
    out.push_back(std::move(r));
  }
  return out;
}

HolderReport holder_increments(const Ensemble& e, const TestFunction& f,
                               const std::vector<std::pair<double, double>>& pairs, double p) {
  return holder_increments(e, std::vector<TestFunction>{f}, pairs, p).front();
}

CollisionRow summarize_gaps(double t, std::vector<double> gaps, double threshold) {
  CollisionRow row;
  row.t = t;
  row.count = gaps.size();
  if (gaps.empty()) return row;
  std::sort(gaps.begin(), gaps.end());
  row.min_gap = gaps.front();
  row.q01 = quantile(gaps, 0.01);
  row.q10 = quantile(gaps, 0.10);
  row.q50 = quantile(gaps, 0.50);
  const auto below = std::lower_bound(gaps.begin(), gaps.end(), threshold) - gaps.begin();
  row.degenerate_fraction = static_cast<double>(below) / static_cast<double>(gaps.size());
  return row;
}

std::vector<CollisionRow> collision_proximity(const std::vector<SpectralFlow>& ensemble, const TimeGrid& grid,
                                              double threshold) {
  std::vector<CollisionRow> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> gaps;
    for (const auto& s : ensemble) gaps.push_back(min_spectral_gap(s.eigenvalues.at(k)));
    rows.push_back(summarize_gaps(grid[k], std::move(gaps), threshold));
  }
  return rows;
}

std::vector<CollisionRow> collision_study(const Ensemble& e, const std::vector<double>& times, double threshold) {
  check_ensemble(e);
  const TimeGrid& grid = e.sampler->grid();
  std::vector<std::size_t> idx;
  for (double t : times) idx.push_back(grid_index(grid, t));
  std::vector<std::vector<double>> gaps(idx.size(), std::vector<double>(e.paths));
  parallel_for(e.paths, e.threads, [&](std::size_t p) {
    const auto spectra = path_spectra(e, p);
    for (std::size_t a = 0; a < idx.size(); ++a) gaps[a][p] = min_spectral_gap(spectra.eigenvalues[idx[a]]);
  });
  std::vector<CollisionRow> rows;
  for (std::size_t a = 0; a < idx.size(); ++a) rows.push_back(summarize_gaps(grid[idx[a]], gaps[a], threshold));
  return rows;
}

namespace {

struct DysonStepper {
  double n;
  std::size_t rejections = 0;

  std::vector<double> drift(const std::vector<double>& l) const {
    std::vector<double> d(l.size(), 0.0);
    for (std::size_t i = 0; i < l.size(); ++i)
      for (std::size_t j = 0; j < l.size(); ++j)
        if (j != i) d[i] += 1.0 / (l[i] - l[j]);
    for (auto& v : d) v /= n;
    return d;
  }

  // Advances l over a step of length h with Brownian increments dw.
  void step(std::vector<double>& l, double h, const std::vector<double>& dw, NormalStream& bridge, int depth) {
    const auto d = drift(l);
    const double sigma = std::sqrt(2.0 / n);
    std::vector<double> next(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) next[i] = l[i] + sigma * dw[i] + h * d[i];
    const double guard = 0.01 * std::sqrt(h / n);
    bool ok = true;
    for (std::size_t i = 0; i + 1 < next.size(); ++i)
      if (!(next[i] - next[i + 1] > guard)) ok = false;
    if (ok) {
      l = std::move(next);
      return;
    }
    if (depth >= 40) throw NumericalError("Dyson step could not avoid a collision", "step=" + std::to_string(h));
    ++rejections;
    // Brownian bridge midpoint of the increment
    std::vector<double> first(l.size()), second(l.size());
    const double s = std::sqrt(0.25 * h);
    for (std::size_t i = 0; i < l.size(); ++i) {
      first[i] = 0.5 * dw[i] + s * bridge.next();
      second[i] = dw[i] - first[i];
    }
    step(l, 0.5 * h, first, bridge, depth + 1);
    step(l, 0.5 * h, second, bridge, depth + 1);
  }
};

}  // namespace

DysonPathResult dyson_path(const DysonSettings& s, std::uint32_t path_id) {
  const auto n = static_cast<std::size_t>(s.shift.rows());
  if (n == 0) throw std::invalid_argument("Dyson check needs a shift matrix");
  if (!(s.dt > 0.0) || !(s.t >= 0.0)) throw std::invalid_argument("Dyson check needs dt > 0 and t >= 0");
  DysonPathResult out;
  std::vector<double> l = symmetric_eigen(s.shift, false).values;
  if (s.t == 0.0) {
    out.spectrum = l;
    return out;
  }
  const double nd = static_cast<double>(n);
  auto steps = static_cast<std::size_t>(std::ceil(s.t / s.dt - 1e-9));
  steps = std::max<std::size_t>(steps, 1);
  const double h = s.t / static_cast<double>(steps);
  NormalStream noise(s.seed, StreamDomain::Dyson, path_id, s.stream_level, 0);
  NormalStream bridge(s.seed, StreamDomain::Dyson, path_id, s.stream_level, 1);
  std::size_t k = 0;
  if (n > 1 && min_spectral_gap(l) <= 0.01 * std::sqrt(h / nd)) {
    // exact first step through the matrix model: Y(h) = A + sqrt(h) W
    NormalStream start(s.seed, StreamDomain::Dyson, path_id, s.stream_level, 2);
    Eigen::MatrixXd y = s.shift;
    const double off = std::sqrt(h / nd), diag = std::sqrt(2.0 * h / nd);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double x = start.next();
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        y(ii, jj) += (i == j ? diag : off) * x;
        y(jj, ii) = y(ii, jj);
      }
    }
    l = symmetric_eigen(y, false).values;
    k = 1;
  }
  DysonStepper stepper{nd};
  std::vector<double> dw(n);
  for (; k < steps; ++k) {
    for (auto& w : dw) w = std::sqrt(h) * noise.next();
    stepper.step(l, h, dw, bridge, 0);
  }
  out.spectrum = std::move(l);
  out.rejections = stepper.rejections;
  return out;
}

MeanSpectrum matrix_mean_spectrum(const DysonSettings& s) {
  const auto n = static_cast<std::size_t>(s.shift.rows());
  if (s.paths == 0) throw std::invalid_argument("Dyson check needs at least one path");
  std::vector<std::vector<double>> per_index(n, std::vector<double>(s.paths));
  if (s.t == 0.0) {
    const auto l = symmetric_eigen(s.shift, false).values;
    for (std::size_t i = 0; i < n; ++i) std::fill(per_index[i].begin(), per_index[i].end(), l[i]);
  } else {
    const PathSampler sampler(CovarianceKernel::brownian(), TimeGrid({0.0, s.t}), SamplerMethod::Cholesky);
    parallel_for(s.paths, s.threads, [&](std::size_t p) {
      const auto flow = simulate_flow(sampler, s.shift, s.seed, static_cast<std::uint32_t>(p));
      const auto l = symmetric_eigen(flow.values[1], false).values;
      for (std::size_t i = 0; i < n; ++i) per_index[i][p] = l[i];
    });
  }
  MeanSpectrum m;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ms = mean_and_stderr(per_index[i]);
    m.mean.push_back(ms.mean);
    m.stderr_.push_back(ms.stderr_);
  }
  return m;
}

DysonReport dyson_crosscheck(const DysonSettings& s, const MeanSpectrum* matrix_side) {
  const auto n = static_cast<std::size_t>(s.shift.rows());
  const MeanSpectrum computed = matrix_side ? MeanSpectrum{} : matrix_mean_spectrum(s);
  const MeanSpectrum& mat = matrix_side ? *matrix_side : computed;
  if (mat.mean.size() != n) throw std::invalid_argument("matrix-side spectrum has the wrong size");
  std::vector<std::vector<double>> per_index(n, std::vector<double>(s.paths));
  std::vector<std::size_t> rejections(s.paths, 0);
  parallel_for(s.paths, s.threads, [&](std::size_t p) {
    const auto r = dyson_path(s, static_cast<std::uint32_t>(p));
    for (std::size_t i = 0; i < n; ++i) per_index[i][p] = r.spectrum[i];
    rejections[p] = r.rejections;
  });
  DysonReport rep;
  rep.matrix_mean = mat.mean;
  double var = 0.0;
  std::vector<double> diffs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ms = mean_and_stderr(per_index[i]);
    rep.sde_mean.push_back(ms.mean);
    diffs[i] = std::abs(ms.mean - mat.mean[i]);
    var += ms.stderr_ * ms.stderr_ + mat.stderr_[i] * mat.stderr_[i];
  }
  const double nd = static_cast<double>(n);
  rep.w1 = pairwise_sum(diffs) / nd;
  rep.w1_stderr = std::sqrt(var) / nd;
  for (auto r : rejections) rep.rejections += r;
  return rep;
}

double burgers_pde_residual(const AtomicMeasure& mu0, double tau, std::complex<double> z, double h) {
  if (!(tau > h)) throw std::invalid_argument("PDE check needs tau > h");
  const auto F = burgers_solve(mu0, tau, z);
  const auto dtau = (burgers_solve(mu0, tau + h, z) - burgers_solve(mu0, tau - h, z)) / (2.0 * h);
  const auto dz = (burgers_solve(mu0, tau, z + h) - burgers_solve(mu0, tau, z - h)) / (2.0 * h);
  return std::abs(dtau - F * dz);
}

}  // namespace gmflow
