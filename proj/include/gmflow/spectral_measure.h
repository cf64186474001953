#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace gmflow {

class LimitLaw;

/// Uniform probability measure on n atoms, stored ascending.
class EmpiricalMeasure {
 public:
  /// Atoms in any order; they are sorted ascending.
  explicit EmpiricalMeasure(std::vector<double> atoms);
  /// From eigenvalues sorted descending (the SpectralFlow convention).
  static EmpiricalMeasure from_descending(std::span<const double> eigenvalues);

  std::span<const double> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double weight() const { return 1.0 / static_cast<double>(atoms_.size()); }

 private:
  std::vector<double> atoms_;
};

/// Closed family of C_b^3 test functions with derivatives up to order 3.
class TestFunction {
 public:
  enum class Kind { Resolvent, SmoothBump, GaussianBump, PolynomialTruncated };

  /// f(x) = 1/(x - z), Im z > 0.
  static TestFunction resolvent(std::complex<double> z);
  /// f(x) = (tanh(s(x + w)) - tanh(s(x - w))) / 2.
  static TestFunction smooth_bump(double half_width = 1.0, double steepness = 1.0);
  /// f(x) = exp(-x^2).
  static TestFunction gaussian_bump();
  /// p(x) * chi(x), deg p <= 4, chi(x) = (tanh(s(x + L)) - tanh(s(x - L))) / 2.
  static TestFunction polynomial(std::vector<double> coefficients, double cutoff = 8.0, double steepness = 4.0);

  /// Parses "gaussian", "tanh_bump", "tanh_bump:<w>:<s>", "poly:<c0> <c1> ...",
  /// or "resolvent:<re>+<im>i".
  static TestFunction parse(const std::string& spec);

  Kind kind() const { return kind_; }
  bool is_real() const { return kind_ != Kind::Resolvent; }
  std::string id() const;

  /// f^{(order)}(x), order in 0..3.
  std::complex<double> derivative(double x, int order) const;
  /// Same for real families; throws std::logic_error for the resolvent.
  double real_derivative(double x, int order) const;
  double operator()(double x) const { return real_derivative(x, 0); }

 private:
  TestFunction() = default;
  Kind kind_ = Kind::GaussianBump;
  std::complex<double> z_{0.0, 1.0};
  double width_ = 1.0;
  double steepness_ = 1.0;
  std::vector<double> coefficients_;
};

/// <mu, f> = (1/n) sum_i f(atom_i).
std::complex<double> integrate(const EmpiricalMeasure& mu, const TestFunction& f);

/// G(z) = (1/n) sum_i 1/(atom_i - z); throws std::domain_error unless Im z > 0.
std::complex<double> cauchy_transform(const EmpiricalMeasure& mu, std::complex<double> z);

/// (1/n^2) sum_{i,j} D(x_i, x_j) with D(x,y) = (f'(x) - f'(y))/(x - y), replaced
/// by f''((x+y)/2) when |x - y| <= switch_scale * (1 + |x| + |y|).
double divided_difference_form(const EmpiricalMeasure& mu, const TestFunction& f, double switch_scale = 1e-6);
std::complex<double> divided_difference_form_complex(const EmpiricalMeasure& mu, const TestFunction& f,
                                                     double switch_scale = 1e-6);

/// Same sum from precomputed values f'(x_i), f''(x_i) and a second-derivative
/// evaluator for near-coincident pairs. Atoms need not be sorted.
template <class SecondDerivative>
double divided_difference_sum(std::span<const double> atoms, std::span<const double> fprime,
                              SecondDerivative&& fsecond_at, double switch_scale = 1e-6);

/// sup_x |F_mu(x) - F_law(x)| with both one-sided limits at every jump.
double kolmogorov_distance(const EmpiricalMeasure& mu, const LimitLaw& law);

/// Kolmogorov distance between two atomic measures.
double kolmogorov_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// W1 = (1/n) sum |sorted mu - sorted nu| for equal sizes; otherwise the
/// integral of |F_mu^{-1}(u) - F_nu^{-1}(u)| over u in (0,1).
double wasserstein1_distance(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

template <class SecondDerivative>
double divided_difference_sum(std::span<const double> atoms, std::span<const double> fprime,
                              SecondDerivative&& fsecond_at, double switch_scale) {
  const std::size_t n = atoms.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = atoms[i];
    double row = fsecond_at(x);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double y = atoms[j];
      const double dx = x - y;
      const double thresh = switch_scale * (1.0 + std::abs(x) + std::abs(y));
      row += 2.0 * (std::abs(dx) > thresh ? (fprime[i] - fprime[j]) / dx : fsecond_at(0.5 * (x + y)));
    }
    acc += row;
  }
  const double nn = static_cast<double>(n);
  return acc / (nn * nn);
}

}  // namespace gmflow
