#include "gmflow/spectral_measure.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gmflow/limit_law.h"

namespace gmflow {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("empirical measure needs at least one atom");
  std::sort(atoms_.begin(), atoms_.end());
}

EmpiricalMeasure EmpiricalMeasure::from_descending(std::span<const double> eigenvalues) {
  return EmpiricalMeasure(std::vector<double>(eigenvalues.rbegin(), eigenvalues.rend()));
}

TestFunction TestFunction::resolvent(std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw std::domain_error("resolvent test function needs Im z > 0");
  TestFunction f;
  f.kind_ = Kind::Resolvent;
  f.z_ = z;
  return f;
}

TestFunction TestFunction::smooth_bump(double half_width, double steepness) {
  if (!(half_width > 0.0) || !(steepness > 0.0)) throw std::invalid_argument("tanh bump needs positive width and steepness");
  TestFunction f;
  f.kind_ = Kind::SmoothBump;
  f.width_ = half_width;
  f.steepness_ = steepness;
  return f;
}

TestFunction TestFunction::gaussian_bump() {
  TestFunction f;
  f.kind_ = Kind::GaussianBump;
  return f;
}

TestFunction TestFunction::polynomial(std::vector<double> coefficients, double cutoff, double steepness) {
  if (coefficients.empty() || coefficients.size() > 5) throw std::invalid_argument("polynomial test function needs degree 0..4");
  if (!(cutoff > 0.0) || !(steepness > 0.0)) throw std::invalid_argument("polynomial cutoff needs positive parameters");
  TestFunction f;
  f.kind_ = Kind::PolynomialTruncated;
  f.coefficients_ = std::move(coefficients);
  f.width_ = cutoff;
  f.steepness_ = steepness;
  return f;
}

TestFunction TestFunction::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "gaussian" && rest.empty()) return gaussian_bump();
  if (head == "tanh_bump") {
    if (rest.empty()) return smooth_bump();
    std::string r = rest;
    std::replace(r.begin(), r.end(), ':', ' ');
    std::istringstream in(r);
    double w, s;
    if (in >> w >> s && (in >> std::ws).eof()) return smooth_bump(w, s);
  }
  if (head == "poly") {
    std::istringstream in(rest);
    std::vector<double> c;
    double v;
    while (in >> v) c.push_back(v);
    if (!c.empty() && (in.eof())) return polynomial(std::move(c));
  }
  if (head == "resolvent") {
    std::string r = rest;
    r.erase(std::remove(r.begin(), r.end(), ' '), r.end());
    if (!r.empty() && r.back() == 'i') {
      r.pop_back();
      const auto split = r.find_first_of("+-", 1);
      if (split != std::string::npos) {
        try {
          std::size_t used_re = 0, used_im = 0;
          const double re = std::stod(r.substr(0, split), &used_re);
          const double im = std::stod(r.substr(split), &used_im);
          if (used_re == split && used_im == r.size() - split) return resolvent({re, im});
        } catch (const std::logic_error&) {
        }
      }
    }
  }
  throw std::invalid_argument("unknown test function \"" + spec + "\"");
}

std::string TestFunction::id() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::GaussianBump: return "gaussian";
    case Kind::SmoothBump: os << "tanh_bump:" << width_ << ":" << steepness_; break;
    case Kind::PolynomialTruncated:
      os << "poly:";
      for (std::size_t k = 0; k < coefficients_.size(); ++k) os << (k ? " " : "") << coefficients_[k];
      break;
    case Kind::Resolvent: os << "resolvent:" << z_.real() << (z_.imag() >= 0 ? "+" : "") << z_.imag() << "i"; break;
  }
  return os.str();
}

namespace {

// derivatives 0..3 of tanh(s u), returned in d[0..3]
void tanh_derivatives(double s, double u, double d[4]) {
  const double t = std::tanh(s * u);
  const double sech2 = 1.0 - t * t;
  d[0] = t;
  d[1] = s * sech2;
  d[2] = s * s * (-2.0 * t * sech2);
  d[3] = s * s * s * (sech2 * (6.0 * t * t - 2.0));
}

// derivatives 0..3 of (tanh(s(x+w)) - tanh(s(x-w)))/2
void bump_derivatives(double w, double s, double x, double d[4]) {
  double a[4], b[4];
  tanh_derivatives(s, x + w, a);
  tanh_derivatives(s, x - w, b);
  for (int k = 0; k < 4; ++k) d[k] = 0.5 * (a[k] - b[k]);
}

}  // namespace

double TestFunction::real_derivative(double x, int order) const {
  if (order < 0 || order > 3) throw std::invalid_argument("test function derivatives go up to order 3");
  switch (kind_) {
    case Kind::GaussianBump: {
      const double e = std::exp(-x * x);
      switch (order) {
        case 0: return e;
        case 1: return -2.0 * x * e;
        case 2: return (4.0 * x * x - 2.0) * e;
        default: return (12.0 * x - 8.0 * x * x * x) * e;
      }
    }
    case Kind::SmoothBump: {
      double d[4];
      bump_derivatives(width_, steepness_, x, d);
      return d[order];
    }
    case Kind::PolynomialTruncated: {
      double p[4] = {0, 0, 0, 0};
      // p and its derivatives by Horner on each derivative polynomial
      for (int k = 0; k <= 3; ++k) {
        double acc = 0.0;
        for (std::size_t m = coefficients_.size(); m-- > static_cast<std::size_t>(k);) {
          double falling = 1.0;
          for (int r = 0; r < k; ++r) falling *= static_cast<double>(m - static_cast<std::size_t>(r));
          acc = acc * x + falling * coefficients_[m];
        }
        p[k] = acc;
      }
      double c[4];
      bump_derivatives(width_, steepness_, x, c);
      static constexpr double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
      double acc = 0.0;
      for (int r = 0; r <= order; ++r) acc += binom[order][r] * p[r] * c[order - r];
      return acc;
    }
    case Kind::Resolvent: break;
  }
  throw std::logic_error("resolvent test function is complex-valued");
}

std::complex<double> TestFunction::derivative(double x, int order) const {
  if (kind_ != Kind::Resolvent) return real_derivative(x, order);
  if (order < 0 || order > 3) throw std::invalid_argument("test function derivatives go up to order 3");
  const std::complex<double> r = 1.0 / (x - z_);
  switch (order) {
    case 0: return r;
    case 1: return -r * r;
    case 2: return 2.0 * r * r * r;
    default: return -6.0 * r * r * r * r;
  }
}

std::complex<double> integrate(const EmpiricalMeasure& mu, const TestFunction& f) {
  std::complex<double> acc = 0.0;
  for (double x : mu.atoms()) acc += f.derivative(x, 0);
  return acc * mu.weight();
}

std::complex<double> cauchy_transform(const EmpiricalMeasure& mu, std::complex<double> z) {
  if (!(z.imag() > 0.0)) throw std::domain_error("Cauchy transform needs Im z > 0");
  std::complex<double> acc = 0.0;
  for (double x : mu.atoms()) acc += 1.0 / (x - z);
  return acc * mu.weight();
}

double divided_difference_form(const EmpiricalMeasure& mu, const TestFunction& f, double switch_scale) {
  if (!f.is_real()) throw std::invalid_argument("divided_difference_form needs a real test function");
  const auto atoms = mu.atoms();
  std::vector<double> fp(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) fp[i] = f.real_derivative(atoms[i], 1);
  return divided_difference_sum(atoms, fp, [&](double x) { return f.real_derivative(x, 2); }, switch_scale);
}

std::complex<double> divided_difference_form_complex(const EmpiricalMeasure& mu, const TestFunction& f,
                                                     double switch_scale) {
  const auto atoms = mu.atoms();
  const std::size_t n = atoms.size();
  std::vector<std::complex<double>> fp(n);
  for (std::size_t i = 0; i < n; ++i) fp[i] = f.derivative(atoms[i], 1);
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = atoms[i], y = atoms[j];
      const double thresh = switch_scale * (1.0 + std::abs(x) + std::abs(y));
      acc += std::abs(x - y) > thresh ? (fp[i] - fp[j]) / (x - y) : f.derivative(0.5 * (x + y), 2);
    }
  }
  const double nn = static_cast<double>(n);
  return acc / (nn * nn);
}

namespace {

// Empirical CDF F(x) and F(x-) on a sorted sample.
double ecdf(std::span<const double> sorted, double x) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         static_cast<double>(sorted.size());
}
double ecdf_left(std::span<const double> sorted, double x) {
  return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

}  // namespace

double kolmogorov_distance(const EmpiricalMeasure& mu, const LimitLaw& law) {
  std::vector<double> points(mu.atoms().begin(), mu.atoms().end());
  for (double a : law.atoms()) points.push_back(a);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double d = 0.0;
  for (double p : points) {
    d = std::max(d, std::abs(ecdf(mu.atoms(), p) - law.cdf(p)));
    d = std::max(d, std::abs(ecdf_left(mu.atoms(), p) - law.cdf_left(p)));
  }
  return d;
}

double kolmogorov_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  std::vector<double> points(mu.atoms().begin(), mu.atoms().end());
  points.insert(points.end(), nu.atoms().begin(), nu.atoms().end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double d = 0.0;
  for (double p : points) d = std::max(d, std::abs(ecdf(mu.atoms(), p) - ecdf(nu.atoms(), p)));
  return d;
}

double wasserstein1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const auto a = mu.atoms(), b = nu.atoms();
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  // quantile functions are step functions with breakpoints at i/n and j/m
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double u = 0.0, acc = 0.0;
  while (i < a.size() && j < b.size()) {
    const double next = std::min((static_cast<double>(i) + 1.0) / na, (static_cast<double>(j) + 1.0) / nb);
    acc += (next - u) * std::abs(a[i] - b[j]);
    u = next;
    if ((static_cast<double>(i) + 1.0) / na <= u) ++i;
    if ((static_cast<double>(j) + 1.0) / nb <= u) ++j;
  }
  return acc;
}

}  // namespace gmflow
