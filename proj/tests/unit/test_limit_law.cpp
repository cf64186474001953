#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gmflow/diagnostics.h"
#include "gmflow/limit_law.h"

using namespace gmflow;
using cd = std::complex<double>;

namespace {

// int rho_sc(x)/(x - z) dx by adaptive quadrature in the angle x = 2 sqrt(tau) sin(theta)
cd semicircle_quadrature(double tau, cd z) {
  const double r = 2 * std::sqrt(tau);
  auto part = [&](bool imag) {
    return adaptive_simpson(
        [&](double th) {
          const double x = r * std::sin(th);
          const double rho = r * std::cos(th) / (2 * std::numbers::pi * tau);
          const cd v = rho * r * std::cos(th) / (x - z);
          return imag ? v.imag() : v.real();
        },
        -std::numbers::pi / 2, std::numbers::pi / 2, 1e-13);
  };
  return {part(false), part(true)};
}

const AtomicMeasure two_atoms{{-1, 1}, {0.5, 0.5}};

}  // namespace

TEST_CASE("semicircle_stieltjes examples") {
  const auto f = semicircle_stieltjes(1, {0, 1});
  CHECK(f.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.imag() == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-14));
  CHECK(std::abs(f - semicircle_quadrature(1, {0, 1})) < 1e-8);
  const cd zfar(0, 2e3);
  const auto g = semicircle_stieltjes(1, zfar);
  CHECK(std::abs(g - (-1.0 / zfar)) <= 1e-5 * std::abs(1.0 / zfar));
  CHECK(std::abs(semicircle_stieltjes(1e-12, {0, 1}) - cd(0, 1)) < 1e-10);
  CHECK(semicircle_stieltjes(0, {0, 1}) == cd(0, 1));
  CHECK_THROWS_AS(semicircle_stieltjes(1, {0, 0}), std::domain_error);
  CHECK_THROWS_AS(semicircle_stieltjes(-1, {0, 1}), std::domain_error);
}

TEST_CASE("closed form matches quadrature across the upper half-plane") {
  for (double tau : {0.3, 1.0, 4.0})
    for (double x : {-3.0, -1.0, 0.0, 0.5, 2.5})
      for (double y : {0.2, 1.0, 3.0}) CHECK(std::abs(semicircle_stieltjes(tau, {x, y}) - semicircle_quadrature(tau, {x, y})) < 1e-8);
}

TEST_CASE("burgers_solve against the closed form") {
  const auto delta0 = AtomicMeasure::point_mass(0);
  for (double tau : {0.1, 1.0, 10.0}) {
    for (double x : {-4.0, -1.0, 0.0, 0.3, 2.0}) {
      for (double y : {0.01, 0.5, 2.0}) {
        const cd z(x, y);
        const auto s = burgers_solve_detailed(delta0, tau, z);
        CHECK(std::abs(s.value - semicircle_stieltjes(tau, z)) <= 1e-10);
        CHECK(s.residual <= 1e-12);
        const auto shifted = burgers_solve(AtomicMeasure::point_mass(1.7), tau, z);
        CHECK(std::abs(shifted - semicircle_stieltjes(tau, z - 1.7)) <= 1e-10);
      }
    }
  }
  CHECK(burgers_solve(two_atoms, 0.0, {0.2, 0.3}) == two_atoms.cauchy({0.2, 0.3}));
  CHECK_THROWS_AS(burgers_solve(delta0, 1, {0, -1}), std::domain_error);
}

TEST_CASE("burgers_solve near the real axis") {
  const auto delta0 = AtomicMeasure::point_mass(0);
  for (double x = -2.5; x <= 2.5; x += 0.125) {
    const cd z(x, 1e-6);
    const auto s = burgers_solve_detailed(delta0, 1.0, z);
    CHECK(std::abs(s.value - semicircle_stieltjes(1.0, z)) <= 1e-9);
    CHECK(s.residual <= 1e-12);
    const auto t = burgers_solve_detailed(two_atoms, 0.7, z);
    CHECK(t.residual <= 1e-12);
    CHECK(t.value.imag() > 0);
  }
}

TEST_CASE("Herglotz property on a grid") {
  const AtomicMeasure starts[] = {AtomicMeasure::point_mass(0), two_atoms};
  for (const auto& mu0 : starts) {
    for (double tau : {0.1, 1.0, 10.0}) {
      for (int a = 0; a < 20; ++a) {
        for (int b = 0; b < 20; ++b) {
          const cd z(-5 + 0.5 * a, 0.05 + 0.25 * b);
          const auto s = burgers_solve_detailed(mu0, tau, z);
          CHECK(s.value.imag() > 0);
          CHECK(s.residual <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("Burgers PDE holds for the characteristic solution") {
  for (double tau = 0.2; tau < 2.1; tau += 0.2)
    for (int k = 0; k < 10; ++k) {
      const cd z(-2 + 0.45 * k, 0.3 + 0.1 * k);
      CHECK(burgers_pde_residual(two_atoms, tau, z) <= 1e-6);
      CHECK(burgers_pde_residual(AtomicMeasure::point_mass(0), tau, z) <= 1e-6);
    }
}

TEST_CASE("limit_at_time examples") {
  const auto delta0 = AtomicMeasure::point_mass(0);
  const auto a = limit_at_time(CovarianceKernel::fractional_brownian(0.75), delta0, 1, {0, 1});
  CHECK(a.imag() == doctest::Approx(0.61803).epsilon(1e-5));
  const auto b = limit_at_time(CovarianceKernel::brownian(), delta0, 4, {0, 2});
  CHECK(std::abs(b - semicircle_quadrature(4, {0, 2})) < 1e-8);
  CHECK(limit_at_time(CovarianceKernel::brownian(), two_atoms, 0, {0.5, 1}) == two_atoms.cauchy({0.5, 1}));
  CHECK(limit_at_time(CovarianceKernel::brownian(), delta0, 0, {0.5, 1}) == -1.0 / cd(0.5, 1));
}

TEST_CASE("density_and_cdf examples") {
  const auto sc = LimitLaw::semicircle(0, 1);
  const auto d0 = density_and_cdf(sc, 0);
  CHECK(d0.pdf == doctest::Approx(1 / std::numbers::pi).epsilon(1e-14));
  CHECK(d0.cdf == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(density_and_cdf(sc, 2).pdf == 0.0);
  CHECK(density_and_cdf(sc, 2).cdf == 1.0);
  CHECK(density_and_cdf(sc, -2).cdf == 0.0);
  const auto ev = LimitLaw::burgers_evolved(AtomicMeasure::point_mass(0), 1.0);
  CHECK(std::abs(density_and_cdf(ev, 0).pdf - 1 / std::numbers::pi) <= 1e-5);
  for (double x : {-1.9, -1.0, -0.3, 0.0, 0.8, 1.5})
    CHECK(std::abs(ev.cdf(x) - sc.cdf(x)) <= 1e-5);
}

TEST_CASE("semicircle support and moments") {
  for (double var : {0.25, 1.0, 3.0}) {
    const auto law = LimitLaw::semicircle(0, var);
    const double s = std::sqrt(var);
    CHECK(law.support().first == doctest::Approx(-2 * s));
    CHECK(law.support().second == doctest::Approx(2 * s));
    auto moment = [&](int k) {
      return adaptive_simpson([&](double x) { return std::pow(x, k) * law.pdf(x); }, -2 * s, 2 * s, 1e-13);
    };
    CHECK(std::abs(moment(0) - 1) <= 1e-8);
    CHECK(moment(2) == doctest::Approx(var).epsilon(1e-7));
    CHECK(moment(4) == doctest::Approx(2 * var * var).epsilon(1e-7));
    CHECK(law.cdf(2 * s) - law.cdf(-2 * s) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("Burgers-evolved moments from the recovered density") {
  for (double tau : {0.5, 1.0}) {
    const auto law = LimitLaw::burgers_evolved(AtomicMeasure::point_mass(0), tau);
    const auto [lo, hi] = law.support();
    auto moment = [&](int k) {
      return adaptive_simpson([&](double x) { return std::pow(x, k) * law.pdf(x); }, lo, hi, 1e-11);
    };
    CHECK(std::abs(moment(0) - 1) <= 1e-6);
    CHECK(std::abs(moment(2) - tau) <= 1e-6);
    CHECK(std::abs(moment(4) - 2 * tau * tau) <= 1e-5);
  }
}

TEST_CASE("Burgers-evolved two-atom law") {
  const auto law = LimitLaw::burgers_evolved(two_atoms, 0.3);
  CHECK(law.cdf(0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(law.cdf(law.support().second) == 1.0);
  CHECK(law.cdf(law.support().first) == 0.0);
  double prev = 0;
  for (double x = -2.2; x <= 2.2; x += 0.05) {
    const double c = law.cdf(x);
    CHECK(c >= prev - 1e-9);
    prev = c;
  }
  // second moment of the free convolution: 1 + tau
  const auto [lo, hi] = law.support();
  const double m2 = adaptive_simpson([&](double x) { return x * x * law.pdf(x); }, lo, hi, 1e-11);
  CHECK(std::abs(m2 - 1.3) <= 1e-5);
}

TEST_CASE("atomic limit law at tau = 0") {
  const auto law = LimitLaw::at_time(CovarianceKernel::brownian(), two_atoms, 0);
  CHECK(law.kind() == LimitLaw::Kind::BurgersEvolved);
  CHECK(law.atoms() == std::vector<double>{-1, 1});
  CHECK(law.cdf(-1) == 0.5);
  CHECK(law.cdf_left(-1) == 0.0);
  CHECK(law.cdf(1) == 1.0);
  CHECK(law.pdf(0) == 0.0);
  CHECK(LimitLaw::at_time(CovarianceKernel::brownian(), AtomicMeasure::point_mass(2), 1).kind() ==
        LimitLaw::Kind::Semicircle);
}

TEST_CASE("from_empirical merges repeated atoms") {
  const auto a = AtomicMeasure::from_empirical(EmpiricalMeasure({1, 0, 1, 1}));
  CHECK(a.atoms == std::vector<double>{0, 1});
  CHECK(a.weights == std::vector<double>{0.25, 0.75});
}
