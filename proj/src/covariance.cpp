#include "gmflow/covariance.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gmflow/errors.h"
#include "gmflow/symmetric_eigen.h"

namespace gmflow {

namespace {

void require_time(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw std::domain_error("covariance evaluated at a negative or non-finite time");
}

// Cell index c with axis[c] <= x <= axis[c+1].
std::size_t locate(const std::vector<double>& axis, double x) {
  if (x < axis.front() || x > axis.back())
    throw std::domain_error("time " + std::to_string(x) + " outside tabulated kernel domain");
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  std::size_t c = static_cast<std::size_t>(it - axis.begin());
  c = c == 0 ? 0 : c - 1;
  return std::min(c, axis.size() - 2);
}

}  // namespace

CovarianceKernel CovarianceKernel::brownian() {
  CovarianceKernel k;
  k.kind_ = KernelKind::Brownian;
  k.hurst_ = 0.5;
  k.gamma_ = 1.0;
  k.kappa_ = 1.0;
  k.alpha_ = 2.0;
  return k;
}

CovarianceKernel CovarianceKernel::fractional_brownian(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("kernel.hurst must lie in (0,1)");
  CovarianceKernel k;
  k.kind_ = KernelKind::FractionalBrownian;
  k.hurst_ = hurst;
  k.gamma_ = 2.0 * hurst;
  k.kappa_ = 1.0;
  // any alpha with alpha * (1 - 2H) < 1 works; take the midpoint below 2
  k.alpha_ = hurst < 0.5 ? std::min(2.0, 0.5 * (1.0 + 1.0 / (1.0 - 2.0 * hurst))) : 2.0;
  return k;
}

CovarianceKernel CovarianceKernel::table(KernelTable table) {
  const std::size_t m = table.axis.size();
  if (m < 2) throw std::invalid_argument("kernel table needs at least 2 axis points");
  if (table.values.size() != m * m) throw std::invalid_argument("kernel table is not rectangular");
  if (table.axis.front() < 0.0) throw std::invalid_argument("kernel table axis must be non-negative");
  for (std::size_t i = 1; i < m; ++i)
    if (!(table.axis[i] > table.axis[i - 1])) throw std::invalid_argument("kernel table axis must be increasing");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double a = table.values[i * m + j], b = table.values[j * m + i];
      if (std::abs(a - b) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)))
        throw std::invalid_argument("kernel table is not symmetric");
    }
  }
  CovarianceKernel k;
  k.kind_ = KernelKind::UserTable;
  k.table_ = std::make_shared<const KernelTable>(std::move(table));
  return k;
}

CovarianceKernel CovarianceKernel::table_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel table " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("kernel table " + path + " is empty");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "s,t,value") throw std::invalid_argument("kernel table header must be \"s,t,value\"");
  std::map<std::pair<double, double>, double> samples;
  std::vector<double> axis;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double s, t, v;
    if (!(row >> s >> t >> v))
      throw std::invalid_argument("kernel table " + path + ": bad row at line " + std::to_string(lineno));
    samples[{s, t}] = v;
    axis.push_back(s);
    axis.push_back(t);
  }
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  KernelTable tab;
  tab.axis = axis;
  tab.values.resize(axis.size() * axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i) {
    for (std::size_t j = 0; j < axis.size(); ++j) {
      auto it = samples.find({axis[i], axis[j]});
      if (it == samples.end()) it = samples.find({axis[j], axis[i]});
      if (it == samples.end()) throw std::invalid_argument("kernel table " + path + " is not a rectangular grid");
      tab.values[i * axis.size() + j] = it->second;
    }
  }
  return table(std::move(tab));
}

std::string CovarianceKernel::describe() const {
  switch (kind_) {
    case KernelKind::Brownian: return "brownian";
    case KernelKind::FractionalBrownian: {
      std::ostringstream os;
      os.precision(17);
      os << "fbm(H=" << hurst_ << ")";
      return os.str();
    }
    case KernelKind::UserTable: return "table";
  }
  return "unknown";
}

double CovarianceKernel::domain_max() const {
  return kind_ == KernelKind::UserTable ? table_->axis.back() : std::numeric_limits<double>::infinity();
}

double CovarianceKernel::table_eval(double lo, double hi) const {
  const auto& ax = table_->axis;
  const std::size_t m = ax.size();
  const std::size_t i = locate(ax, lo), j = locate(ax, hi);
  const double u = (lo - ax[i]) / (ax[i + 1] - ax[i]);
  const double v = (hi - ax[j]) / (ax[j + 1] - ax[j]);
  const auto& R = table_->values;
  return (1 - u) * (1 - v) * R[i * m + j] + u * (1 - v) * R[(i + 1) * m + j] + (1 - u) * v * R[i * m + j + 1] +
         u * v * R[(i + 1) * m + j + 1];
}

double CovarianceKernel::table_partial_first(double a, double b) const {
  const auto& ax = table_->axis;
  const std::size_t m = ax.size();
  const std::size_t i = locate(ax, a), j = locate(ax, b);
  const double v = (b - ax[j]) / (ax[j + 1] - ax[j]);
  const auto& R = table_->values;
  const double lo = (1 - v) * R[i * m + j] + v * R[i * m + j + 1];
  const double hi = (1 - v) * R[(i + 1) * m + j] + v * R[(i + 1) * m + j + 1];
  return (hi - lo) / (ax[i + 1] - ax[i]);
}

double CovarianceKernel::table_partial_second(double a, double b) const {
  // symmetric table: d/db R(a,b) = d/db R(b,a)
  return table_partial_first(b, a);
}

double CovarianceKernel::eval(double s, double t) const {
  require_time(s);
  require_time(t);
  const double lo = std::min(s, t), hi = std::max(s, t);
  switch (kind_) {
    case KernelKind::Brownian: return lo;
    case KernelKind::FractionalBrownian: {
      const double e = 2.0 * hurst_;
      return 0.5 * ((std::pow(lo, e) + std::pow(hi, e)) - std::pow(hi - lo, e));
    }
    case KernelKind::UserTable: return table_eval(lo, hi);
  }
  return 0.0;
}

double CovarianceKernel::partial_s(double s, double t) const {
  require_time(s);
  require_time(t);
  switch (kind_) {
    case KernelKind::Brownian: return s < t ? 1.0 : 0.0;
    case KernelKind::FractionalBrownian: {
      const double e = 2.0 * hurst_ - 1.0;
      const double d = t - s;
      const double first = s > 0.0 ? hurst_ * std::pow(s, e) : (e > 0 ? 0.0 : (e == 0 ? hurst_ : INFINITY));
      if (d == 0.0) return first - (e > 0 ? 0.0 : (e == 0 ? 0.0 : INFINITY));
      const double second = hurst_ * std::pow(std::abs(d), e) * (d > 0 ? 1.0 : -1.0);
      return first + second;
    }
    case KernelKind::UserTable:
      return s <= t ? table_partial_first(s, t) : table_partial_second(t, s);
  }
  return 0.0;
}

std::optional<double> CovarianceKernel::analytic_diag_derivative(double s) const {
  switch (kind_) {
    case KernelKind::Brownian: return 1.0;
    case KernelKind::FractionalBrownian: {
      const double e = 2.0 * hurst_ - 1.0;
      if (s == 0.0) {
        if (e < 0) return std::numeric_limits<double>::infinity();
        return e == 0 ? 1.0 : 0.0;
      }
      return 2.0 * hurst_ * std::pow(s, e);
    }
    case KernelKind::UserTable: return std::nullopt;
  }
  return std::nullopt;
}

double eval_kernel(const CovarianceKernel& kernel, double s, double t) { return kernel.eval(s, t); }

double diag_variance_derivative(const CovarianceKernel& kernel, double s) {
  require_time(s);
  if (auto d = kernel.analytic_diag_derivative(s)) {
    if (!std::isfinite(*d))
      throw std::domain_error("d/ds R(s,s) diverges at s = 0; integrate R(s,s) increments instead");
    return *d;
  }
  const double h = std::max(1e-6, 1e-6 * s);
  const double hi = std::min(s + h, kernel.domain_max());
  const double lo = std::max(0.0, s - h);
  return (kernel.eval(hi, hi) - kernel.eval(lo, lo)) / (hi - lo);
}

Eigen::MatrixXd gram_matrix(const CovarianceKernel& kernel, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) G(i, j) = G(j, i) = kernel.eval(grid[i], grid[j]);
  return G;
}

bool is_psd(const Eigen::MatrixXd& gram, double rel_tol) {
  const auto ev = symmetric_eigenvalues(gram);
  if (ev.empty()) return true;
  const double largest = std::max(ev.front(), 0.0);
  return ev.back() >= -rel_tol * largest;
}

double integrate_against_diag_variance(const CovarianceKernel& kernel, const TimeGrid& grid,
                                       std::span<const double> values, std::size_t upto) {
  if (values.size() < upto + 1 || upto >= grid.size()) throw std::invalid_argument("integrand shorter than grid range");
  double acc = 0.0;
  for (std::size_t k = 0; k < upto; ++k)
    acc += 0.5 * (values[k] + values[k + 1]) * kernel.diag_increment(grid[k], grid[k + 1]);
  return acc;
}

H2Check check_h2(const CovarianceKernel& kernel, const TimeGrid& grid) {
  if (grid.size() < 3) throw std::invalid_argument("check_h2 needs at least 3 grid points");
  const double min_gap = grid.min_spacing() * (1.0 - 1e-9);
  struct Pair {
    double lag, v;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double s = grid[i], t = grid[j];
      const double v = kernel.eval(s, s) - 2.0 * kernel.eval(s, t) + kernel.eval(t, t);
      pairs.push_back({t - s, v});
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (const auto& p : pairs) {
    if (p.v <= 0.0 || p.lag < min_gap) continue;
    const double x = std::log(p.lag), y = std::log(p.v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  H2Check out;
  if (m == 0) {
    out.gamma_hat = std::numeric_limits<double>::infinity();
    out.kappa_hat = 0.0;
    out.pass = true;
    return out;
  }
  const double mm = static_cast<double>(m);
  const double det = mm * sxx - sx * sx;
  if (m < 2 || det <= 1e-14 * mm * sxx) {
    // single lag: cannot separate gamma from kappa
    out.gamma_hat = 1.0;
    out.kappa_hat = std::exp((sy - sx) / mm);
  } else {
    out.gamma_hat = (mm * sxy - sx * sy) / det;
    out.kappa_hat = std::exp((sy - out.gamma_hat * sx) / mm);
  }
  out.pass = true;
  for (const auto& p : pairs) {
    if (p.v > out.kappa_hat * std::pow(p.lag, out.gamma_hat) * (1.0 + 1e-6)) {
      out.pass = false;
      break;
    }
  }
  return out;
}

namespace {

// Composite midpoint after s = a + (b-a) phi(u), phi(u) = u^q / (u^q + (1-u)^q).
template <class F>
double clustered_midpoint(F&& f, double a, double b, std::size_t panels) {
  constexpr double q = 3.0;
  const double h = 1.0 / static_cast<double>(panels);
  double acc = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double u = (static_cast<double>(k) + 0.5) * h;
    const double uq = std::pow(u, q), vq = std::pow(1.0 - u, q);
    const double den = uq + vq;
    const double dphi = q * std::pow(u, q - 1.0) * std::pow(1.0 - u, q - 1.0) / (den * den);
    // measure from the nearer end so nodes never round onto an endpoint
    const double s = u < 0.5 ? a + (b - a) * (uq / den) : b - (b - a) * (vq / den);
    acc += f(s) * dphi;
  }
  return acc * h * (b - a);
}

double h1_integral(const CovarianceKernel& kernel, double t, double T, double alpha, std::size_t panels) {
  auto integrand = [&](double s) { return std::pow(std::abs(kernel.partial_s(s, t)), alpha); };
  double total = 0.0;
  if (t > 0.0) total += clustered_midpoint(integrand, 0.0, std::min(t, T), panels);
  if (t < T) total += clustered_midpoint(integrand, t, T, panels);
  return total;
}

}  // namespace

H1Check check_h1(const CovarianceKernel& kernel, const TimeGrid& grid, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("check_h1 needs alpha > 1");
  const double T = grid.t_max();
  constexpr std::size_t coarse = 4096;
  H1Check out;
  out.pass = true;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double lo = h1_integral(kernel, grid[k], T, alpha, coarse);
    const double hi = h1_integral(kernel, grid[k], T, alpha, 2 * coarse);
    if (!std::isfinite(hi) || std::abs(hi - lo) > 1e-3 * std::max(std::abs(hi), 1e-300)) out.pass = false;
    if (std::isfinite(hi)) out.sup_integral = std::max(out.sup_integral, hi);
    else out.sup_integral = std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace gmflow
