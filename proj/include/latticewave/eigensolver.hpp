#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace latticewave {

struct SymmetricEigs {
  Eigen::VectorXd values;   // sorted by distance from the shift
  Eigen::MatrixXd vectors;  // orthonormal columns
};

// Eigenpairs of a sparse symmetric matrix nearest to sigma. Dense solve
// below dense_limit unknowns, shift-invert subspace iteration above.
SymmetricEigs nearest_eigenpairs(const Eigen::SparseMatrix<double>& a, double sigma, int count,
                                 double tol = 1e-12, int dense_limit = 2000);

}  // namespace latticewave
