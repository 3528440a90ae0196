#include "latticewave/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace latticewave {

namespace {

SymmetricEigs sort_by_distance(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                               double sigma, int count) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(values[a] - sigma) < std::abs(values[b] - sigma);
  });
  count = std::min<int>(count, static_cast<int>(order.size()));
  SymmetricEigs out;
  out.values.resize(count);
  out.vectors.resize(vectors.rows(), count);
  for (int i = 0; i < count; ++i) {
    out.values[i] = values[order[i]];
    out.vectors.col(i) = vectors.col(order[i]);
  }
  return out;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

SymmetricEigs nearest_eigenpairs(const Eigen::SparseMatrix<double>& a, double sigma, int count,
                                 double tol, int dense_limit) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw std::invalid_argument("matrix must be square");
  if (count <= 0 || n == 0) return {};
  count = std::min(count, n);

  if (n < dense_limit || count * 3 >= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(a)};
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    return sort_by_distance(es.eigenvalues(), es.eigenvectors(), sigma, count);
  }

  Eigen::SparseMatrix<double> shifted = a;
  {
    Eigen::SparseMatrix<double> id(n, n);
    id.setIdentity();
    shifted -= sigma * id;
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  ldlt.compute(shifted);
  const bool use_lu = ldlt.info() != Eigen::Success;
  if (use_lu) {
    shifted.makeCompressed();
    lu.compute(shifted);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("shift coincides with an eigenvalue; factorization failed");
  }
  auto apply_inverse = [&](const Eigen::MatrixXd& x) -> Eigen::MatrixXd {
    return use_lu ? Eigen::MatrixXd(lu.solve(x)) : Eigen::MatrixXd(ldlt.solve(x));
  };

  const int block = std::min(n, count + std::max(10, count / 2));
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd x(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = gauss(rng);
  x = orthonormalize(x);

  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < a.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  const double scale = std::max({1.0, std::abs(sigma), row_sums.maxCoeff()});
  Eigen::VectorXd theta;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::MatrixXd q = orthonormalize(apply_inverse(x));
    Eigen::MatrixXd aq = a * q;
    Eigen::MatrixXd h = q.transpose() * aq;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    auto sorted = sort_by_distance(es.eigenvalues(), es.eigenvectors(), sigma, block);
    x = q * sorted.vectors;
    theta = sorted.values;
    Eigen::MatrixXd r = aq * sorted.vectors - x * theta.asDiagonal();
    double worst = 0.0;
    for (int j = 0; j < count; ++j) worst = std::max(worst, r.col(j).norm());
    if (worst <= tol * scale) break;
  }
  SymmetricEigs out;
  out.values = theta.head(count);
  out.vectors = x.leftCols(count);
  return out;
}

}  // namespace latticewave
