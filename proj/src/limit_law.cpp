#include "gmflow/limit_law.h"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gmflow/errors.h"

namespace gmflow {

using cd = std::complex<double>;

AtomicMeasure AtomicMeasure::point_mass(double at) { return AtomicMeasure{{at}, {1.0}}; }

AtomicMeasure AtomicMeasure::from_empirical(const EmpiricalMeasure& mu) {
  AtomicMeasure out;
  const auto atoms = mu.atoms();
  for (std::size_t i = 0; i < atoms.size();) {
    std::size_t j = i;
    while (j < atoms.size() && atoms[j] == atoms[i]) ++j;
    out.atoms.push_back(atoms[i]);
    out.weights.push_back(static_cast<double>(j - i) * mu.weight());
    i = j;
  }
  return out;
}

cd AtomicMeasure::cauchy(cd w) const {
  cd acc = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) acc += weights[j] / (atoms[j] - w);
  return acc;
}

cd AtomicMeasure::cauchy_derivative(cd w) const {
  cd acc = 0.0;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const cd r = 1.0 / (atoms[j] - w);
    acc += weights[j] * r * r;
  }
  return acc;
}

cd semicircle_stieltjes(double tau, cd z) {
  if (!(z.imag() > 0.0)) throw std::domain_error("Stieltjes transform needs Im z > 0");
  if (!(tau >= 0.0)) throw std::domain_error("semicircle variance must be nonnegative");
  if (tau == 0.0) return -1.0 / z;
  const double r = 2.0 * std::sqrt(tau);
  const cd s = std::sqrt(z - r) * std::sqrt(z + r);
  // (s - z)/(2 tau) rewritten without cancellation
  return -2.0 / (z + s);
}

namespace {

std::string describe_call(const AtomicMeasure& mu0, double tau, cd z, cd last) {
  std::ostringstream os;
  os.precision(17);
  os << "tau=" << tau << " z=" << z.real() << (z.imag() >= 0 ? "+" : "") << z.imag() << "i last=" << last.real()
     << (last.imag() >= 0 ? "+" : "") << last.imag() << "i atoms=[";
  for (std::size_t j = 0; j < mu0.atoms.size(); ++j)
    os << (j ? "," : "") << mu0.atoms[j] << ":" << mu0.weights[j];
  os << "]";
  return os.str();
}

bool admissible(cd F, cd z, double tau) { return F.imag() > 0.0 && (z + tau * F).imag() > 0.0; }

double residual_of(const AtomicMeasure& mu0, double tau, cd z, cd F) { return std::abs(F - mu0.cauchy(z + tau * F)); }

// Damped Newton from `start`; returns true on convergence.
bool newton(const AtomicMeasure& mu0, double tau, cd z, cd& F, int& iterations, int max_iter) {
  double res = residual_of(mu0, tau, z, F);
  for (int it = 0; it < max_iter; ++it) {
    if (res <= 1e-12 * (1.0 + std::abs(F))) return true;
    ++iterations;
    const cd w = z + tau * F;
    const cd h = F - mu0.cauchy(w);
    const cd dh = 1.0 - tau * mu0.cauchy_derivative(w);
    if (dh == 0.0) return false;
    const cd step = -h / dh;
    double lambda = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, lambda *= 0.5) {
      const cd trial = F + lambda * step;
      if (!admissible(trial, z, tau)) continue;
      const double trial_res = residual_of(mu0, tau, z, trial);
      // accept any decrease; accept the full step regardless when already tiny
      if (trial_res < res || halving >= 30) {
        F = trial;
        res = trial_res;
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return res <= 1e-12 * (1.0 + std::abs(F));
}

}  // namespace

BurgersSolution burgers_solve_detailed(const AtomicMeasure& mu0, double tau, cd z) {
  if (!(z.imag() > 0.0)) throw std::domain_error("burgers_solve needs Im z > 0");
  if (!(tau >= 0.0)) throw std::domain_error("burgers_solve needs tau >= 0");
  if (mu0.atoms.empty() || mu0.atoms.size() != mu0.weights.size())
    throw std::invalid_argument("initial measure needs matching atoms and weights");
  BurgersSolution out;
  if (tau == 0.0) {
    out.value = mu0.cauchy(z);
    return out;
  }
  constexpr int kMaxIter = 200;
  cd F = mu0.cauchy(z);
  bool ok = newton(mu0, tau, z, F, out.iterations, kMaxIter);
  if (!ok) {
    // continuation in Im z from a point where F_0(z) is already a good guess
    double spread = 0.0;
    for (double a : mu0.atoms) spread = std::max(spread, std::abs(a - z.real()));
    const double y_far = z.imag() + 4.0 * (1.0 + std::sqrt(tau) + spread);
    cd zc(z.real(), y_far);
    F = mu0.cauchy(zc);
    ok = true;
    for (double y = y_far;; y = std::max(z.imag(), 0.5 * y)) {
      zc = cd(z.real(), y);
      if (!newton(mu0, tau, zc, F, out.iterations, kMaxIter)) {
        ok = false;
        break;
      }
      if (y == z.imag()) break;
    }
  }
  if (!ok) throw NumericalError("burgers_solve did not converge", describe_call(mu0, tau, z, F));
  // one polishing step; kept only if it does not increase the residual
  {
    const cd w = z + tau * F;
    const cd polished = F - (F - mu0.cauchy(w)) / (1.0 - tau * mu0.cauchy_derivative(w));
    if (admissible(polished, z, tau) && residual_of(mu0, tau, z, polished) <= residual_of(mu0, tau, z, F))
      F = polished;
  }
  if (!admissible(F, z, tau)) throw NumericalError("branch violation", describe_call(mu0, tau, z, F));
  out.value = F;
  out.residual = residual_of(mu0, tau, z, F);
  return out;
}

cd burgers_solve(const AtomicMeasure& mu0, double tau, cd z) { return burgers_solve_detailed(mu0, tau, z).value; }

cd limit_at_time(const CovarianceKernel& kernel, const AtomicMeasure& mu0, double t, cd z) {
  if (!(z.imag() > 0.0)) throw std::domain_error("limit_at_time needs Im z > 0");
  const double tau = kernel.eval(t, t);
  if (mu0.atoms.size() == 1) return semicircle_stieltjes(tau, z - mu0.atoms[0]);
  return burgers_solve(mu0, tau, z);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
  struct Rec {
    const std::function<double(double)>& f;
    double step(double a, double fa, double m, double fm, double b, double fb, double whole, double tol,
                int depth) const {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      return step(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
             step(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
    }
  };
  if (a == b) return 0.0;
  const Rec rec{f};
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec.step(a, fa, m, fm, b, fb, whole, tol, max_depth);
}

struct LimitLaw::CdfTable {
  std::once_flag once;
  double lo = 0.0, hi = 0.0, h = 0.0;
  std::vector<double> cumulative;  // integral of the density from lo to node k
  double total = 1.0;
};

namespace {
constexpr std::size_t kTablePanels = 64;
constexpr double kTableTol = 1e-12;
}  // namespace

LimitLaw LimitLaw::semicircle(double center, double variance) {
  if (!(variance > 0.0)) throw std::domain_error("semicircle variance must be positive");
  LimitLaw law;
  law.kind_ = Kind::Semicircle;
  law.center_ = center;
  law.tau_ = variance;
  law.initial_ = AtomicMeasure::point_mass(center);
  return law;
}

LimitLaw LimitLaw::burgers_evolved(AtomicMeasure initial, double tau) {
  if (!(tau >= 0.0)) throw std::domain_error("tau must be nonnegative");
  if (initial.atoms.empty() || initial.atoms.size() != initial.weights.size())
    throw std::invalid_argument("initial measure needs matching atoms and weights");
  LimitLaw law;
  law.kind_ = Kind::BurgersEvolved;
  law.tau_ = tau;
  law.initial_ = std::move(initial);
  law.table_ = std::make_shared<CdfTable>();
  return law;
}

LimitLaw LimitLaw::at_time(const CovarianceKernel& kernel, const AtomicMeasure& mu0, double t) {
  const double tau = kernel.eval(t, t);
  if (mu0.atoms.size() == 1 && tau > 0.0) return semicircle(mu0.atoms[0], tau);
  return burgers_evolved(mu0, tau);
}

cd LimitLaw::stieltjes(cd z) const {
  if (kind_ == Kind::Semicircle) return semicircle_stieltjes(tau_, z - center_);
  return burgers_solve(initial_, tau_, z);
}

double LimitLaw::pdf(double x) const {
  if (kind_ == Kind::Semicircle) {
    const double u = x - center_;
    const double d = 4.0 * tau_ - u * u;
    return d > 0.0 ? std::sqrt(d) / (2.0 * std::numbers::pi * tau_) : 0.0;
  }
  if (tau_ == 0.0) return 0.0;
  constexpr double eps = 1e-6;
  const double coarse = burgers_solve(initial_, tau_, cd(x, eps)).imag() / std::numbers::pi;
  const double fine = burgers_solve(initial_, tau_, cd(x, 0.5 * eps)).imag() / std::numbers::pi;
  return std::max(0.0, 2.0 * fine - coarse);
}

const LimitLaw::CdfTable& LimitLaw::table() const {
  std::call_once(table_->once, [this] {
    auto& t = *table_;
    const auto [lo, hi] = support();
    t.lo = lo;
    t.hi = hi;
    t.h = (hi - lo) / static_cast<double>(kTablePanels);
    t.cumulative.assign(kTablePanels + 1, 0.0);
    const auto density = [this](double x) { return pdf(x); };
    for (std::size_t k = 0; k < kTablePanels; ++k) {
      const double a = lo + t.h * static_cast<double>(k);
      t.cumulative[k + 1] = t.cumulative[k] + adaptive_simpson(density, a, a + t.h, kTableTol);
    }
    t.total = t.cumulative.back();
  });
  return *table_;
}

double LimitLaw::cdf(double x) const {
  if (kind_ == Kind::Semicircle) {
    const double u = (x - center_) / (2.0 * std::sqrt(tau_));
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / std::numbers::pi;
  }
  if (tau_ == 0.0) {
    double acc = 0.0;
    for (std::size_t j = 0; j < initial_.atoms.size(); ++j)
      if (initial_.atoms[j] <= x) acc += initial_.weights[j];
    return std::min(1.0, acc);
  }
  const auto& t = table();
  if (x <= t.lo) return 0.0;
  if (x >= t.hi) return 1.0;
  const std::size_t k = std::min(kTablePanels - 1, static_cast<std::size_t>((x - t.lo) / t.h));
  const double node = t.lo + t.h * static_cast<double>(k);
  const double partial = adaptive_simpson([this](double y) { return pdf(y); }, node, x, kTableTol);
  return std::clamp((t.cumulative[k] + partial) / t.total, 0.0, 1.0);
}

double LimitLaw::cdf_left(double x) const {
  if (kind_ == Kind::BurgersEvolved && tau_ == 0.0) {
    double acc = 0.0;
    for (std::size_t j = 0; j < initial_.atoms.size(); ++j)
      if (initial_.atoms[j] < x) acc += initial_.weights[j];
    return std::min(1.0, acc);
  }
  return cdf(x);
}

std::vector<double> LimitLaw::atoms() const {
  if (kind_ == Kind::BurgersEvolved && tau_ == 0.0) return initial_.atoms;
  return {};
}

std::pair<double, double> LimitLaw::support() const {
  const double r = 2.0 * std::sqrt(tau_);
  if (kind_ == Kind::Semicircle) return {center_ - r, center_ + r};
  const auto [mn, mx] = std::minmax_element(initial_.atoms.begin(), initial_.atoms.end());
  return {*mn - r, *mx + r};
}

DensityAndCdf density_and_cdf(const LimitLaw& law, double x) { return {law.pdf(x), law.cdf(x)}; }

}  // namespace gmflow
