#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "latticewave/edge_solutions.hpp"
#include "latticewave/graph.hpp"

namespace latticewave {

struct EigenResult {
  double k = 0.0;
  double energy_graph = 0.0;      // k^2
  double energy_continuum = 0.0;  // nu k^2
  Eigen::VectorXd vertex_vector;  // over graph.interior(), unit 2-norm
  double residual = 0.0;          // ||M(k) psi||_inf
  int multiplicity = 1;
  // Orthonormal basis of the eigenspace; vertex_vector is its first column.
  Eigen::MatrixXd subspace;
  double mu = 0.0;  // adjacency eigenvalue, adjacency path only
  int branch = 0;
};

class NotEquilateral : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Adjacency matrix restricted to the interior vertices.
Eigen::SparseMatrix<double> interior_adjacency(const MetricGraph& graph);

// Common interior degree d (boundary neighbours counted). Throws
// NotEquilateral unless the graph is an equilateral free Kirchhoff lattice
// without leads.
int uniform_interior_degree(const MetricGraph& graph);

struct AdjacencyPathOptions {
  // Momentum the search is centred on; unset means the bottom of the
  // spectrum (mu at the band edge d).
  std::optional<double> k_target;
  // Extra branches (2 pi n +- arccos(mu/d))/l for n = 1..max_branch.
  int max_branch = 0;
  double cluster_tol = 1e-10;
};

// Momenta from A_II psi = mu psi with k = arccos(mu/d)/l; mu = +-d dropped.
// Returns `count` distinct eigenvalues (degenerate ones clustered), ordered
// by k.
std::vector<EigenResult> adjacency_eigen_path(const MetricGraph& graph, int count,
                                              const AdjacencyPathOptions& options = {});

struct SecularScan {
  std::vector<double> k_grid;
  std::vector<double> sigma_min;
  std::vector<double> roots;
  std::vector<EigenResult> eigen;
  // Momentum intervals removed by the singular-set guard.
  std::vector<std::pair<double, double>> skipped;
  double threshold = 0.0;
};

struct SecularOptions {
  double threshold_factor = 1e-6;  // times the median of sigma_min
  double root_tol = 1e-12;
  double tau_k = -1.0;
};

// Smallest singular value of the dual matrix at real k.
double dual_sigma_min(const MetricGraph& graph, double k, double tau_k = -1.0);

// Samples sigma_min(M(k)) and refines local minima by golden section.
SecularScan secular_scan(const MetricGraph& graph, double k_min, double k_max, int samples,
                         const SecularOptions& options = {});

// Fermi-surface relation sum_i cos(theta_i l) = nu cos(k l), principal branch.
double bloch_dispersion(std::span<const double> theta, double spacing);

}  // namespace latticewave
