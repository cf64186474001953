#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "gmflow/errors.h"
#include "gmflow/matrix_flow.h"

using namespace gmflow;

namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = z(rng);
  return a;
}

std::vector<EntryPath> constant_entries(std::size_t n, const TimeGrid& grid, double value) {
  std::vector<EntryPath> e;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i; j < n; ++j) e.push_back({std::vector<double>(grid.size(), value), {i, j, 0}});
  return e;
}

}  // namespace

TEST_CASE("assemble_flow examples") {
  const TimeGrid grid({0.0, 1.0});
  {
    auto e = constant_entries(1, grid, 0.7);
    const auto f = assemble_flow(e, Eigen::MatrixXd::Zero(1, 1), 1, grid);
    CHECK(f.values[1](0, 0) == doctest::Approx(std::sqrt(2.0) * 0.7));
  }
  {
    auto e = constant_entries(2, grid, 1.0);
    const auto f = assemble_flow(e, Eigen::MatrixXd::Zero(2, 2), 2, grid);
    CHECK(f.values[1](0, 0) == doctest::Approx(1.0));
    CHECK(f.values[1](1, 1) == doctest::Approx(1.0));
    CHECK(f.values[1](0, 1) == doctest::Approx(0.70711).epsilon(1e-5));
    CHECK(f.values[1](1, 0) == f.values[1](0, 1));
  }
  {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 5;
    a(1, 1) = -5;
    const PathSampler sampler(CovarianceKernel::brownian(), TimeGrid::uniform(1.0, 4), SamplerMethod::Cholesky);
    const auto f = simulate_flow(sampler, a, 3, 0);
    CHECK(f.values[0] == a);
    for (const auto& y : f.values) CHECK((y - y.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("assemble_flow errors") {
  const TimeGrid grid({0.0, 1.0});
  auto e = constant_entries(2, grid, 1.0);
  e.pop_back();
  CHECK_THROWS_AS(assemble_flow(e, Eigen::MatrixXd::Zero(2, 2), 2, grid), std::invalid_argument);
  auto full = constant_entries(2, grid, 1.0);
  CHECK_THROWS_AS(assemble_flow(full, Eigen::MatrixXd::Zero(3, 3), 2, grid), std::invalid_argument);
  full[0].values.push_back(1.0);
  CHECK_THROWS_AS(assemble_flow(full, Eigen::MatrixXd::Zero(2, 2), 2, grid), std::invalid_argument);
}

TEST_CASE("simulate_flow equals assembling sampled entries") {
  const PathSampler sampler(CovarianceKernel::fractional_brownian(0.4), TimeGrid::uniform(1.0, 5),
                            SamplerMethod::Cholesky);
  const std::size_t n = 4;
  std::vector<EntryPath> e;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i; j < n; ++j) e.push_back(sampler.sample(21, {i, j, 6}));
  const auto a = assemble_flow(e, Eigen::MatrixXd::Identity(4, 4), n, sampler.grid());
  const auto b = simulate_flow(sampler, Eigen::MatrixXd::Identity(4, 4), 21, 6);
  for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] == b.values[k]);
}

TEST_CASE("eigendecomposition examples") {
  for (auto method : {EigenMethod::Jacobi, EigenMethod::TridiagonalQL}) {
    Eigen::MatrixXd x(2, 2);
    x << 0, 1, 1, 0;
    const auto d = symmetric_eigen(x, true, method);
    CHECK(d.values[0] == doctest::Approx(1.0));
    CHECK(d.values[1] == doctest::Approx(-1.0));

    Eigen::MatrixXd dg = Eigen::Vector4d(3, 2, 2, 1).asDiagonal();
    const auto e = symmetric_eigen(dg, true, method);
    CHECK(e.values == std::vector<double>{3, 2, 2, 1});
    // columns are a permutation of the identity
    for (int c = 0; c < 4; ++c) {
      CHECK(e.vectors.col(c).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
      CHECK(e.vectors.col(c).cwiseAbs().sum() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("2x2 closed form oracle") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (auto method : {EigenMethod::Jacobi, EigenMethod::TridiagonalQL}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const double a = z(rng), b = z(rng), c = z(rng);
      Eigen::MatrixXd y(2, 2);
      y << a, b, b, c;
      const double mid = 0.5 * (a + c), rad = std::hypot(0.5 * (a - c), b);
      const auto l = symmetric_eigenvalues(y, method);
      CHECK(std::abs(l[0] - (mid + rad)) <= 1e-12);
      CHECK(std::abs(l[1] - (mid - rad)) <= 1e-12);
    }
  }
}

TEST_CASE("both eigensolvers match Eigen's solver and the spectral invariants") {
  std::mt19937_64 rng(2);
  for (int n : {1, 3, 8, 17, 33, 60}) {
    const auto y = random_symmetric(rng, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(y);
    std::vector<double> expected(ref.eigenvalues().data(), ref.eigenvalues().data() + n);
    std::reverse(expected.begin(), expected.end());
    const double scale = 1 + y.cwiseAbs().maxCoeff();
    for (auto method : {EigenMethod::Jacobi, EigenMethod::TridiagonalQL}) {
      const auto d = symmetric_eigen(y, true, method);
      const auto v = symmetric_eigenvalues(y, method);
      double trace = 0, sq = 0;
      for (int i = 0; i < n; ++i) {
        CHECK(std::abs(d.values[static_cast<std::size_t>(i)] - expected[static_cast<std::size_t>(i)]) < 1e-11 * scale);
        CHECK(std::abs(v[static_cast<std::size_t>(i)] - expected[static_cast<std::size_t>(i)]) < 1e-11 * scale);
        if (i > 0) CHECK(d.values[static_cast<std::size_t>(i - 1)] >= d.values[static_cast<std::size_t>(i)]);
        trace += d.values[static_cast<std::size_t>(i)];
        sq += d.values[static_cast<std::size_t>(i)] * d.values[static_cast<std::size_t>(i)];
      }
      CHECK(std::abs(trace - y.trace()) <= 1e-9 * n * scale);
      CHECK(sq == doctest::Approx(y.squaredNorm()).epsilon(1e-8));
      const Eigen::MatrixXd& u = d.vectors;
      CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9);
      const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(d.values.data(), n);
      CHECK((u * lam.asDiagonal() * u.transpose() - y).cwiseAbs().maxCoeff() <= 1e-8 * scale);
      for (int c = 0; c < n; ++c) {
        int first = 0;
        while (std::abs(u(first, c)) <= 1e-12) ++first;
        CHECK(u(first, c) > 0);
      }
    }
  }
}

TEST_CASE("eigensolver reports non-finite input") {
  Eigen::MatrixXd y = Eigen::MatrixXd::Identity(3, 3);
  y(1, 0) = y(0, 1) = std::nan("");
  CHECK_THROWS_AS(symmetric_eigen(y, true, EigenMethod::Jacobi), NumericalError);
  CHECK_THROWS_AS(symmetric_eigen(y, true, EigenMethod::TridiagonalQL), NumericalError);
}

TEST_CASE("spectral derivative identities and finite differences") {
  std::mt19937_64 rng(4);
  const int n = 8;
  for (int trial = 0; trial < 50; ++trial) {
    const auto y = random_symmetric(rng, n);
    const auto d = symmetric_eigen(y, true);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      const auto s = spectral_derivatives(d.values, d.vectors, i);
      double g2 = 0, hs = 0, expect = 0;
      for (double g : s.grad) g2 += g * g;
      for (double h : s.hess_diag) hs += h;
      for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
        if (j != i) expect += 2.0 / (d.values[i] - d.values[j]);
      CHECK(std::abs(g2 - 2.0) <= 1e-10);
      CHECK(std::abs(hs - expect) <= 1e-8 * std::max(1.0, std::abs(expect)));
      if (trial < 5) {
        const double eps = 1e-6;
        for (int k = 0; k < n; ++k) {
          for (int h = k; h < n; ++h) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
            if (k == h) e(k, k) = std::sqrt(2.0);
            else e(k, h) = e(h, k) = 1.0;
            const double fd = (symmetric_eigenvalues(y + eps * e)[i] - symmetric_eigenvalues(y - eps * e)[i]) / (2 * eps);
            const double g = s.grad[upper_index(n, static_cast<std::size_t>(k), static_cast<std::size_t>(h))];
            CHECK(std::abs(fd - g) <= 1e-4 * std::max(std::abs(g), 1e-3));
          }
        }
      }
    }
  }
}

TEST_CASE("second derivative matches a finite-difference oracle") {
  std::mt19937_64 rng(5);
  const int n = 5;
  const auto y = random_symmetric(rng, n);
  const auto d = symmetric_eigen(y, true);
  const double eps = 1e-4;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const auto s = spectral_derivatives(d.values, d.vectors, i);
    for (int k = 0; k < n; ++k) {
      for (int h = k; h < n; ++h) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
        if (k == h) e(k, k) = std::sqrt(2.0);
        else e(k, h) = e(h, k) = 1.0;
        const double fd = (symmetric_eigenvalues(y + eps * e)[i] - 2 * d.values[i] +
                           symmetric_eigenvalues(y - eps * e)[i]) / (eps * eps);
        CHECK(std::abs(fd - s.hess_diag[upper_index(n, static_cast<std::size_t>(k), static_cast<std::size_t>(h))]) <
              1e-4);
      }
    }
  }
}

TEST_CASE("degenerate eigenvalue is reported with its gap") {
  Eigen::MatrixXd y = Eigen::Vector3d(3, 2, 2).asDiagonal();
  const auto d = symmetric_eigen(y, true);
  CHECK_NOTHROW(spectral_derivatives(d.values, d.vectors, 0));
  try {
    spectral_derivatives(d.values, d.vectors, 1);
    FAIL("expected DegenerateEigenvalueError");
  } catch (const DegenerateEigenvalueError& e) {
    CHECK(e.index() == 1);
    CHECK(e.gap() == 0.0);
  }
}

TEST_CASE("Hoffman-Wielandt on sampled flows") {
  const PathSampler sampler(CovarianceKernel::fractional_brownian(0.3), TimeGrid::uniform(1.0, 10),
                            SamplerMethod::Cholesky);
  std::mt19937_64 rng(6);
  int checks = 0;
  for (std::uint32_t p = 0; p < 50; ++p) {
    const int n = 2 + static_cast<int>(p % 7) * 7;
    const auto flow = simulate_flow(sampler, random_symmetric(rng, n), 9, p);
    const auto spec = eigendecompose(flow, false);
    for (std::size_t a = 0; a < flow.values.size(); ++a) {
      for (std::size_t b = a + 1; b < flow.values.size(); b += 3) {
        double lhs = 0;
        for (int i = 0; i < n; ++i)
          lhs += std::pow(spec.eigenvalues[b][static_cast<std::size_t>(i)] - spec.eigenvalues[a][static_cast<std::size_t>(i)], 2);
        CHECK(lhs <= (flow.values[b] - flow.values[a]).squaredNorm() * (1 + 1e-10) + 1e-12);
        ++checks;
      }
    }
  }
  CHECK(checks >= 1000);
}

TEST_CASE("gap helpers") {
  const std::vector<double> v{3, 2.5, 1};
  CHECK(min_spectral_gap(v) == 0.5);
  CHECK(eigenvalue_gap(v, 2) == 1.5);
  CHECK(std::isinf(min_spectral_gap(std::vector<double>{1.0})));
  CHECK(upper_index(3, 0, 0) == 0);
  CHECK(upper_index(3, 1, 1) == 3);
  CHECK(upper_index(3, 2, 2) == 5);
}
