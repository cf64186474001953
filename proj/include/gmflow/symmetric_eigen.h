#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gmflow {

enum class EigenMethod {
  Auto,         // Jacobi for n <= 32, tridiagonal QL above
  Jacobi,       // cyclic Jacobi, at most 30 sweeps
  TridiagonalQL // Householder reduction + implicit-shift QL, at most 50 n iterations
};

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Eigen::MatrixXd vectors;     // column i pairs with values[i]; empty if not requested
};

/// Eigen-decomposition of a real symmetric matrix (only the lower triangle is
/// read). Eigenvalues are sorted descending by a stable sort, and each
/// eigenvector column is signed so that its first component with magnitude
/// above 1e-12 is positive. Throws NumericalError on non-convergence.
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& a, bool want_vectors,
                               EigenMethod method = EigenMethod::Auto);

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a, EigenMethod method = EigenMethod::Auto);

}  // namespace gmflow
