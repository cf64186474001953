#include "gmflow/symmetric_eigen.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gmflow/errors.h"

namespace gmflow {

namespace {

std::string dump_matrix(const Eigen::MatrixXd& a) {
  std::ostringstream os;
  os.precision(17);
  os << "n=" << a.rows() << '\n';
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) os << (j ? "," : "") << a(i, j);
    os << '\n';
  }
  return os.str();
}

// Cyclic Jacobi with Rutishauser's rotation update.
void jacobi(Eigen::MatrixXd& a, Eigen::VectorXd& d, Eigen::MatrixXd* v) {
  const Eigen::Index n = a.rows();
  d = a.diagonal();
  Eigen::VectorXd b = d, z = Eigen::VectorXd::Zero(n);
  if (v) v->setIdentity(n, n);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  constexpr int max_sweeps = 30;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off <= 1e-300 || off < 1e-17 * scale) return;
    const double thresh = sweep < 3 ? 0.2 * off / static_cast<double>(n * n) : 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double g = 100.0 * std::abs(apq);
        if (sweep > 3 && std::abs(d(p)) + g == std::abs(d(p)) && std::abs(d(q)) + g == std::abs(d(q))) {
          a(p, q) = 0.0;
          continue;
        }
        if (std::abs(apq) <= thresh) continue;
        const double h = d(q) - d(p);
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c, tau = s / (1.0 + c);
        const double dh = t * apq;
        z(p) -= dh;
        z(q) += dh;
        d(p) -= dh;
        d(q) += dh;
        a(p, q) = 0.0;
        auto rotate = [&](double& x, double& y) {
          const double gx = x, hy = y;
          x = gx - s * (hy + gx * tau);
          y = hy + s * (gx - hy * tau);
        };
        for (Eigen::Index j = 0; j < p; ++j) rotate(a(j, p), a(j, q));
        for (Eigen::Index j = p + 1; j < q; ++j) rotate(a(p, j), a(j, q));
        for (Eigen::Index j = q + 1; j < n; ++j) rotate(a(p, j), a(q, j));
        if (v)
          for (Eigen::Index j = 0; j < n; ++j) rotate((*v)(j, p), (*v)(j, q));
      }
    }
    b += z;
    d = b;
    z.setZero();
  }
  double off = 0.0;
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = p + 1; q < n; ++q) off += std::abs(a(p, q));
  if (off >= 1e-14 * scale) throw NumericalError("Jacobi eigensolver did not converge in 30 sweeps", "");
}

// Householder reduction to tridiagonal form. On exit d holds the diagonal and
// e(1..n-1) the subdiagonal; v holds the accumulated transform when requested.
void tridiagonalize(Eigen::MatrixXd& v, Eigen::VectorXd& d, Eigen::VectorXd& e, bool accumulate) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index j = 0; j < n; ++j) d(j) = v(n - 1, j);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (Eigen::Index k = 0; k < i; ++k) scale += std::abs(d(k));
    if (scale == 0.0) {
      e(i) = d(i - 1);
      for (Eigen::Index j = 0; j < i; ++j) {
        d(j) = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d(k) /= scale;
        h += d(k) * d(k);
      }
      double f = d(i - 1);
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e(i) = scale * g;
      h -= f * g;
      d(i - 1) = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e(j) = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        v(j, i) = f;
        g = e(j) + v(j, j) * f;
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d(k);
          e(k) += v(k, j) * f;
        }
        e(j) = g;
      }
      f = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        e(j) /= h;
        f += e(j) * d(j);
      }
      const double hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e(j) -= hh * d(j);
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        g = e(j);
        for (Eigen::Index k = j; k <= i - 1; ++k) v(k, j) -= (f * e(k) + g * d(k));
        d(j) = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d(i) = h;
  }
  if (!accumulate) {
    for (Eigen::Index j = 0; j < n; ++j) d(j) = v(j, j);
    e(0) = 0.0;
    return;
  }
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d(i + 1);
    if (h != 0.0) {
      for (Eigen::Index k = 0; k <= i; ++k) d(k) = v(k, i + 1) / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        double g = 0.0;
        for (Eigen::Index k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (Eigen::Index k = 0; k <= i; ++k) v(k, j) -= g * d(k);
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j) = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e(0) = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e).
void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd* v) {
  const Eigen::Index n = d.size();
  for (Eigen::Index i = 1; i < n; ++i) e(i - 1) = e(i);
  e(n - 1) = 0.0;
  double f = 0.0, tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  const long max_iter = 50L * static_cast<long>(n);
  long total_iter = 0;
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d(l)) + std::abs(e(l)));
    Eigen::Index m = l;
    while (m < n - 1) {
      if (std::abs(e(m)) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      do {
        if (++total_iter > max_iter) throw NumericalError("tridiagonal QL did not converge in 50n iterations", "");
        double g = d(l);
        double p = (d(l + 1) - g) / (2.0 * e(l));
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d(l) = e(l) / (p + r);
        d(l + 1) = e(l) * (p + r);
        const double dl1 = d(l + 1);
        double h = g - d(l);
        for (Eigen::Index i = l + 2; i < n; ++i) d(i) -= h;
        f += h;
        p = d(m);
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e(l + 1);
        double s = 0.0, s2 = 0.0;
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e(i);
          h = c * p;
          r = std::hypot(p, e(i));
          e(i + 1) = s * r;
          s = e(i) / r;
          c = p / r;
          p = c * d(i) - s * g;
          d(i + 1) = h + s * (c * g + s * d(i));
          if (v) {
            for (Eigen::Index k = 0; k < n; ++k) {
              h = (*v)(k, i + 1);
              (*v)(k, i + 1) = s * (*v)(k, i) + c * h;
              (*v)(k, i) = c * (*v)(k, i) - s * h;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e(l) / dl1;
        e(l) = s * p;
        d(l) = c * p;
      } while (std::abs(e(l)) > eps * tst1);
    }
    d(l) += f;
    e(l) = 0.0;
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a, bool want_vectors, EigenMethod method) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("symmetric_eigen needs a square matrix");
  SymmetricEigen out;
  if (n == 0) return out;
  if (!a.allFinite()) throw NumericalError("eigensolver input has non-finite entries", dump_matrix(a));
  if (method == EigenMethod::Auto) method = n <= 32 ? EigenMethod::Jacobi : EigenMethod::TridiagonalQL;

  Eigen::MatrixXd work = a.selfadjointView<Eigen::Lower>();
  Eigen::VectorXd d(n);
  Eigen::MatrixXd vec;
  try {
    if (method == EigenMethod::Jacobi) {
      if (want_vectors) vec.resize(n, n);
      jacobi(work, d, want_vectors ? &vec : nullptr);
    } else {
      Eigen::VectorXd e(n);
      tridiagonalize(work, d, e, want_vectors);
      tridiagonal_ql(d, e, want_vectors ? &work : nullptr);
      if (want_vectors) vec = std::move(work);
    }
  } catch (const NumericalError& err) {
    throw NumericalError(err.what(), dump_matrix(a));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return d(x) > d(y); });
  out.values.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = d(order[static_cast<std::size_t>(i)]);
  if (want_vectors) {
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      auto col = out.vectors.col(i);
      col = vec.col(order[static_cast<std::size_t>(i)]);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(col(k)) > 1e-12) {
          if (col(k) < 0) col = -col;
          break;
        }
      }
    }
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a, EigenMethod method) {
  return symmetric_eigen(a, false, method).values;
}

}  // namespace gmflow
