#pragma once

#include <complex>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "latticewave/graph.hpp"

namespace latticewave {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx>;

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BasisMethod { automatic, integrate };

//
// Solutions u, v of -f'' + U f = k^2 f on one edge, in the edge coordinate t
// that runs from 0 at X_n to the edge length at X_j:
//   u(len) = 0, u'(len) = 1,   v(0) = 0, v'(0) = 1.
// Their Wronskian u v' - u' v is W = u(0) = -v(len).
//
class EdgeBasis {
 public:
  cplx k() const { return k_; }
  double length() const { return length_; }
  cplx wronskian() const { return wronskian_; }

  cplx u_at_0() const { return u(0.0); }
  cplx u_deriv_at_0() const { return u_deriv(0.0); }
  cplx v_at_len() const { return v(length_); }
  cplx v_deriv_at_len() const { return v_deriv(length_); }

  cplx u(double t) const;
  cplx u_deriv(double t) const;
  cplx v(double t) const;
  cplx v_deriv(double t) const;

  bool closed_form() const { return mode_ == Mode::closed; }

 private:
  friend EdgeBasis elementary_basis(const Edge& edge, cplx k, BasisMethod method);

  enum class Mode { closed, integrated };
  struct State {
    cplx f;
    cplx df;
  };
  State eval(const std::vector<State>& path, double t) const;

  Mode mode_ = Mode::closed;
  cplx k_;
  double length_ = 0.0;
  cplx q_;  // effective momentum sqrt(k^2 - c) of the closed forms
  cplx wronskian_;
  Potential potential_;
  double step_ = 0.0;
  std::vector<State> u_path_, v_path_;
};

// Closed forms for zero and constant potentials, fixed-step RK4 otherwise.
EdgeBasis elementary_basis(const Edge& edge, cplx k, BasisMethod method = BasisMethod::automatic);

// Distance from k to the momenta of the edge Dirichlet problems.
double singular_set_distance(const MetricGraph& graph, cplx k);

// Dirichlet eigenvalues (energies) of one edge up to e_max, ascending.
std::vector<double> edge_dirichlet_energies(const Edge& edge, double e_max);

// Default guard 1e-6 pi / ell0.
double default_singular_tolerance(const MetricGraph& graph);

//
// Dual system over the non-boundary vertices. Row j reads
//   sum_{n interior} psi_n / W_jn - (sum_n v'_jn(l_jn) / W_jn - alpha_j) psi_j
//     - (lead terms) = rhs_j .
// Each attached lead contributes its junction derivative i k psi_j; an
// incoming lead with unit amplitude also puts -2 i k into rhs_j.
//
struct DualSystem {
  cplx k;
  SparseMatrixC matrix;
  Eigen::VectorXcd rhs;
  double singular_distance = 0.0;
  // Number of derivative terms (edges plus leads) in each row's vertex
  // condition.
  std::vector<int> arity;
  // Per row, sum of the magnitudes of the individual terms before the
  // diagonal contributions are combined.
  std::vector<double> term_sums;
};

DualSystem assemble_dual(const MetricGraph& graph, cplx k, double tau_k = -1.0);

// Equilateral free form, rows scaled by W = -sin(k l)/k:
//   sum_n psi_n - (d_j cos kl + alpha_j sin(kl)/k) psi_j .
// Requires uniform spacing and zero potentials; leads are not included.
SparseMatrixC assemble_equilateral(const MetricGraph& graph, cplx k);

// Coordinate triples (row, col, re, im), sorted by row then column.
void write_dual_csv(const std::filesystem::path& path, const DualSystem& system);

// psi(t) = a u(t) + b v(t) on one edge.
struct EdgeWave {
  int edge = 0;
  cplx a;
  cplx b;
};

struct EdgeField {
  cplx k;
  std::vector<EdgeBasis> bases;
  std::vector<EdgeWave> waves;

  cplx value(int edge, double t) const;
  cplx derivative(int edge, double t) const;
};

// Builds edge functions from interior vertex values (ordered as
// graph.interior()). Rejects inputs whose relative dual residual exceeds
// residual_tol.
EdgeField reconstruct(const MetricGraph& graph, cplx k, const Eigen::VectorXcd& values,
                      double residual_tol = 1e-8);

// Relative residual ||M psi - rhs||_inf / (||M||_inf ||psi||_inf + ||rhs||_inf), with
// ||M|| taken over the uncancelled terms.
double dual_residual(const DualSystem& system, const Eigen::VectorXcd& values);

// Vertex value of every graph vertex (zero on the boundary).
std::vector<cplx> vertex_values(const MetricGraph& graph, const Eigen::VectorXcd& values);

// Per interior vertex: sum of outward derivatives (edges and leads) minus
// alpha psi_j, with the lead ansatz of DualSystem.
std::vector<cplx> kirchhoff_residuals(const MetricGraph& graph, const EdgeField& field,
                                      const Eigen::VectorXcd& values);

// Largest mismatch between edge-function endpoint values and vertex values.
double continuity_error(const MetricGraph& graph, const EdgeField& field,
                        const Eigen::VectorXcd& values);

}  // namespace latticewave
