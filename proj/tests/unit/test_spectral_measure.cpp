#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gmflow/limit_law.h"
#include "gmflow/spectral_measure.h"

using namespace gmflow;
using cd = std::complex<double>;

namespace {

std::vector<TestFunction> families() {
  return {TestFunction::gaussian_bump(), TestFunction::smooth_bump(), TestFunction::smooth_bump(0.5, 3.0),
          TestFunction::polynomial({0.5, -1.0, 0.25, 0.1, -0.02}), TestFunction::resolvent({0.3, 0.7})};
}

// Richardson-extrapolated central difference
cd fd(const TestFunction& f, double x, int order) {
  auto central = [&](double h) { return (f.derivative(x + h, order - 1) - f.derivative(x - h, order - 1)) / (2 * h); };
  const double h = 1e-3;
  return (4.0 * central(h / 2) - central(h)) / 3.0;
}

// semicircle quantile by bisection on the closed-form CDF
double semicircle_quantile(double u) {
  double lo = -2, hi = 2;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double v = 0.5 + (mid / 2 * std::sqrt(1 - mid * mid / 4) + std::asin(mid / 2)) / std::numbers::pi;
    (v < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("integrate examples") {
  const EmpiricalMeasure two({-1, 1});
  CHECK(integrate(two, TestFunction::polynomial({0, 0, 1})).real() == doctest::Approx(1.0).epsilon(1e-12));
  const auto r = integrate(EmpiricalMeasure({0}), TestFunction::resolvent({0, 1}));
  CHECK(r.real() == doctest::Approx(0.0));
  CHECK(r.imag() == doctest::Approx(1.0));
  // eigenvalues of the 2x2 exchange matrix are +-1
  CHECK(integrate(two, TestFunction::gaussian_bump()).real() == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("cauchy_transform examples") {
  const auto g = cauchy_transform(EmpiricalMeasure({0}), {0, 1});
  CHECK(g.real() == doctest::Approx(0.0));
  CHECK(g.imag() == doctest::Approx(1.0));
  const cd z(0, 2);
  const cd expected = 0.5 * (1.0 / (-1.0 - z) + 1.0 / (1.0 - z));
  const auto g2 = cauchy_transform(EmpiricalMeasure({-1, 1}), z);
  CHECK(std::abs(g2 - expected) < 1e-15);
  CHECK(g2.imag() == doctest::Approx(0.4));
  const auto far = cauchy_transform(EmpiricalMeasure({-3, 0.5, 2}), {0, 1e6});
  CHECK(far.imag() == doctest::Approx(1e-6).epsilon(1e-5));
  CHECK_THROWS_AS(cauchy_transform(EmpiricalMeasure({0}), {1, 0}), std::domain_error);
}

TEST_CASE("Herglotz property and resolvent integration") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.01, 3);
  for (int m = 0; m < 20; ++m) {
    std::vector<double> atoms(1 + m * 3);
    for (auto& a : atoms) a = z(rng);
    const EmpiricalMeasure mu(atoms);
    for (int k = 0; k < 100; ++k) {
      const cd w(3 * z(rng), u(rng));
      const auto g = cauchy_transform(mu, w);
      CHECK(g.imag() > 0);
      CHECK(integrate(mu, TestFunction::resolvent(w)) == g);
    }
  }
}

TEST_CASE("test-function derivatives agree with finite differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4, 4);
  for (const auto& f : families()) {
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng);
      for (int order = 1; order <= 3; ++order) {
        const cd exact = f.derivative(x, order);
        CHECK(std::abs(fd(f, x, order) - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
      }
    }
  }
}

TEST_CASE("test functions are bounded with bounded derivatives") {
  for (const auto& f : families()) {
    for (double x = -50; x <= 50; x += 0.25)
      for (int order = 0; order <= 3; ++order) {
        const double v = std::abs(f.derivative(x, order));
        CHECK(std::isfinite(v));
        if (std::abs(x) >= 20) CHECK(v < 0.1);
      }
  }
  CHECK_THROWS_AS(TestFunction::resolvent({0, 0}), std::domain_error);
  CHECK_THROWS_AS(TestFunction::resolvent({0, 1}).real_derivative(0, 0), std::logic_error);
}

TEST_CASE("test function ids round-trip through parse") {
  for (const auto& f : families()) CHECK(TestFunction::parse(f.id()).id() == f.id());
  CHECK(TestFunction::parse("gaussian").kind() == TestFunction::Kind::GaussianBump);
  CHECK(TestFunction::parse("tanh_bump").kind() == TestFunction::Kind::SmoothBump);
  CHECK(TestFunction::parse("tanh_bump:2:0.5").real_derivative(0, 0) == doctest::Approx(std::tanh(1.0)));
  CHECK_THROWS(TestFunction::parse("resolvent:1-0.5i"));
  CHECK(TestFunction::parse("resolvent:-1+2i").derivative(0, 0) == 1.0 / (0.0 - cd(-1, 2)));
  CHECK(TestFunction::parse("poly:1 2").real_derivative(0.5, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK_THROWS(TestFunction::parse("cosine"));
  CHECK_THROWS(TestFunction::parse("poly:1 2 3 4 5 6"));
}

TEST_CASE("divided_difference_form examples") {
  const auto g = TestFunction::gaussian_bump();
  CHECK(divided_difference_form(EmpiricalMeasure({0.3}), g) == doctest::Approx(g.real_derivative(0.3, 2)));
  // x^2 with a far cutoff: every divided difference of f' is 2
  CHECK(divided_difference_form(EmpiricalMeasure({0, 1}), TestFunction::polynomial({0, 0, 1})) ==
        doctest::Approx(2.0).epsilon(1e-9));
  // brute-force double loop oracle
  const double a = 0.7;
  const EmpiricalMeasure mu({-a, a});
  double brute = 0;
  for (double x : {-a, a})
    for (double y : {-a, a})
      brute += x == y ? g.real_derivative(x, 2) : (g.real_derivative(x, 1) - g.real_derivative(y, 1)) / (x - y);
  CHECK(divided_difference_form(mu, g) == doctest::Approx(brute / 4).epsilon(1e-14));
}

TEST_CASE("divided_difference_form symmetry and switch invariance") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> atoms(30);
  for (auto& a : atoms) a = z(rng);
  atoms[5] = atoms[4] + 1e-9;  // near collision falls under the switch rule
  const auto f = TestFunction::smooth_bump(1.0, 2.0);
  const double base = divided_difference_form(EmpiricalMeasure(atoms), f);
  std::vector<double> shuffled = atoms;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<double> fp(shuffled.size());
  for (std::size_t i = 0; i < fp.size(); ++i) fp[i] = f.real_derivative(shuffled[i], 1);
  const double perm = divided_difference_sum(shuffled, fp, [&](double x) { return f.real_derivative(x, 2); });
  CHECK(perm == doctest::Approx(base).epsilon(1e-12));
  CHECK(std::abs(divided_difference_form(EmpiricalMeasure(atoms), f, 0.5e-6) - base) <= 1e-8);
  const auto c = divided_difference_form_complex(EmpiricalMeasure(atoms), f);
  CHECK(c.real() == doctest::Approx(base).epsilon(1e-12));
  CHECK(std::abs(c.imag()) == 0.0);
}

TEST_CASE("kolmogorov_distance examples") {
  const auto law = LimitLaw::semicircle(0, 1);
  for (std::size_t n : {1u, 10u, 100u}) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = semicircle_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    CHECK(kolmogorov_distance(EmpiricalMeasure(q), law) == doctest::Approx(0.5 / static_cast<double>(n)).epsilon(1e-9));
  }
  CHECK(kolmogorov_distance(EmpiricalMeasure(std::vector<double>(7, 0.0)), law) == doctest::Approx(0.5));
  const EmpiricalMeasure mu({-1, 0, 0, 2});
  CHECK(kolmogorov_distance(mu, EmpiricalMeasure({2, 0, -1, 0})) == 0.0);
  CHECK(kolmogorov_distance(mu, EmpiricalMeasure({-1, 2})) == doctest::Approx(0.25));
  // atomic law: both one-sided limits are compared
  const auto atomic = LimitLaw::burgers_evolved(AtomicMeasure::point_mass(0), 0.0);
  CHECK(kolmogorov_distance(EmpiricalMeasure({0, 0}), atomic) == 0.0);
  CHECK(kolmogorov_distance(EmpiricalMeasure({1e-9}), atomic) == 1.0);
}

TEST_CASE("wasserstein1_distance examples") {
  CHECK(wasserstein1_distance(EmpiricalMeasure({1, 3}), EmpiricalMeasure({3, 1})) == 0.0);
  CHECK(wasserstein1_distance(EmpiricalMeasure({0}), EmpiricalMeasure({1})) == 1.0);
  CHECK(wasserstein1_distance(EmpiricalMeasure({0, 1}), EmpiricalMeasure({1, 2})) == 1.0);
  // unequal sizes: quantile functions {0 on (0,1/2), 1 on (1/2,1)} vs {0.5}
  CHECK(wasserstein1_distance(EmpiricalMeasure({0, 1}), EmpiricalMeasure({0.5})) == doctest::Approx(0.5));
  CHECK(wasserstein1_distance(EmpiricalMeasure({0, 1, 2}), EmpiricalMeasure({0, 2})) == doctest::Approx(1.0 / 3));
}

TEST_CASE("from_descending sorts ascending") {
  const std::vector<double> desc{3, 1, -2};
  const auto mu = EmpiricalMeasure::from_descending(desc);
  CHECK(mu.atoms()[0] == -2);
  CHECK(mu.atoms()[2] == 3);
  CHECK(mu.weight() == doctest::Approx(1.0 / 3));
  CHECK_THROWS(EmpiricalMeasure(std::vector<double>{}));
}
