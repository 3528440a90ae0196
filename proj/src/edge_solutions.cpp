#include "latticewave/edge_solutions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "latticewave/io.hpp"
#include "latticewave/parallel.hpp"

namespace latticewave {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

// sin(q t)/q and its q -> 0 limit.
cplx sin_over(cplx q, double t) {
  if (q == cplx(0.0)) return t;
  return std::sin(q * t) / q;
}

int integration_steps(const Edge& edge, cplx k) {
  double scale = std::abs(k);
  scale = std::max(scale, std::sqrt(std::max(std::abs(edge.potential.min_value()),
                                             std::abs(edge.potential.max_value()))));
  double n = std::ceil(scale * edge.length / 0.004);
  return std::max(256, static_cast<int>(std::min(n, 1e7)));
}

struct Rk4 {
  const Potential& potential;
  double length;
  cplx k2;

  // One classical RK4 step for (f, f')' = (f', (U - k^2) f).
  std::pair<cplx, cplx> step(double t, cplx f, cplx df, double h) const {
    auto acc = [&](double s, cplx y) { return (potential.at(s, length) - k2) * y; };
    cplx k1f = df, k1d = acc(t, f);
    cplx k2f = df + 0.5 * h * k1d, k2d = acc(t + 0.5 * h, f + 0.5 * h * k1f);
    cplx k3f = df + 0.5 * h * k2d, k3d = acc(t + 0.5 * h, f + 0.5 * h * k2f);
    cplx k4f = df + h * k3d, k4d = acc(t + h, f + h * k3f);
    return {f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
            df + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)};
  }
};

void check_momentum(cplx k) {
  if (!std::isfinite(k.real()) || !std::isfinite(k.imag()))
    throw std::invalid_argument("momentum must be finite");
  if (k.imag() < 0.0) throw std::invalid_argument("momentum must satisfy Im k >= 0");
}

}  // namespace

EdgeBasis elementary_basis(const Edge& edge, cplx k, BasisMethod method) {
  check_momentum(k);
  if (!(edge.length > 0.0)) throw std::invalid_argument("edge length must be positive");
  if (!edge.potential.bounded()) throw std::invalid_argument("edge potential is unbounded");

  EdgeBasis b;
  b.k_ = k;
  b.length_ = edge.length;
  const bool closed = method == BasisMethod::automatic &&
                      edge.potential.type != Potential::Type::samples;
  if (k == cplx(0.0) && !edge.potential.is_zero())
    throw std::invalid_argument("k = 0 is only supported on free edges");

  if (closed) {
    b.mode_ = EdgeBasis::Mode::closed;
    double c = edge.potential.type == Potential::Type::constant ? edge.potential.value : 0.0;
    b.q_ = std::sqrt(k * k - c);
    b.wronskian_ = -sin_over(b.q_, edge.length);
    return b;
  }

  b.mode_ = EdgeBasis::Mode::integrated;
  b.potential_ = edge.potential;
  const int n = integration_steps(edge, k);
  const double h = edge.length / n;
  b.step_ = h;
  Rk4 rk{b.potential_, edge.length, k * k};

  b.v_path_.resize(n + 1);
  b.v_path_[0] = {0.0, 1.0};
  for (int i = 0; i < n; ++i) {
    auto [f, df] = rk.step(i * h, b.v_path_[i].f, b.v_path_[i].df, h);
    b.v_path_[i + 1] = {f, df};
  }
  b.u_path_.resize(n + 1);
  b.u_path_[n] = {0.0, 1.0};
  for (int i = n; i > 0; --i) {
    auto [f, df] = rk.step(i * h, b.u_path_[i].f, b.u_path_[i].df, -h);
    b.u_path_[i - 1] = {f, df};
  }
  b.wronskian_ = -b.v_path_[n].f;
  return b;
}

EdgeBasis::State EdgeBasis::eval(const std::vector<State>& path, double t) const {
  const int n = static_cast<int>(path.size()) - 1;
  t = std::clamp(t, 0.0, length_);
  int i = std::min(n - 1, static_cast<int>(t / step_));
  double dt = t - i * step_;
  if (dt == 0.0) return path[i];
  Rk4 rk{potential_, length_, k_ * k_};
  auto [f, df] = rk.step(i * step_, path[i].f, path[i].df, dt);
  return {f, df};
}

cplx EdgeBasis::u(double t) const {
  if (mode_ == Mode::closed) return sin_over(q_, t - length_);
  return eval(u_path_, t).f;
}

cplx EdgeBasis::u_deriv(double t) const {
  if (mode_ == Mode::closed) return std::cos(q_ * (t - length_));
  return eval(u_path_, t).df;
}

cplx EdgeBasis::v(double t) const {
  if (mode_ == Mode::closed) return sin_over(q_, t);
  return eval(v_path_, t).f;
}

cplx EdgeBasis::v_deriv(double t) const {
  if (mode_ == Mode::closed) return std::cos(q_ * t);
  return eval(v_path_, t).df;
}

namespace {

// Number of sign changes of the sine solution on (0, l] at real energy e;
// equals the number of Dirichlet eigenvalues below e.
int count_nodes(const Edge& edge, double e) {
  const auto& pot = edge.potential;
  double scale = std::sqrt(std::max(0.0, e - pot.min_value()));
  int n = std::max(256, static_cast<int>(std::ceil(scale * edge.length / 0.05)));
  double h = edge.length / n;
  Rk4 rk{pot, edge.length, cplx(e)};
  cplx f = 0.0, df = 1.0;
  int count = 0;
  double last_sign = 1.0;
  for (int i = 0; i < n; ++i) {
    std::tie(f, df) = rk.step(i * h, f, df, h);
    double s = f.real();
    if (s != 0.0 && (s > 0.0) != (last_sign > 0.0)) {
      ++count;
      last_sign = s;
    }
  }
  return count;
}

}  // namespace

std::vector<double> edge_dirichlet_energies(const Edge& edge, double e_max) {
  std::vector<double> out;
  const double l = edge.length;
  const auto& pot = edge.potential;
  for (int n = 1;; ++n) {
    double base = (kPi * n / l) * (kPi * n / l);
    double lo = pot.min_value() + base;
    if (lo > e_max) break;
    if (pot.type != Potential::Type::samples) {
      out.push_back(pot.min_value() + base);
      continue;
    }
    double hi = pot.max_value() + base;
    // Bracket widened slightly so that the predicate flips inside it.
    lo -= 1e-9 * std::max(1.0, std::abs(lo));
    hi += 1e-9 * std::max(1.0, std::abs(hi));
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
      double mid = 0.5 * (lo + hi);
      if (count_nodes(edge, mid) >= n)
        hi = mid;
      else
        lo = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

double singular_set_distance(const MetricGraph& graph, cplx k) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& edge : graph.edges()) {
    const double l = edge.length;
    if (!(l > 0.0)) continue;
    const auto& pot = edge.potential;
    if (pot.type != Potential::Type::samples) {
      double c = pot.type == Potential::Type::constant ? pot.value : 0.0;
      double kr = std::sqrt(std::max(0.0, (k * k).real() - c));
      long n0 = std::lround(kr * l / kPi);
      for (long n = std::max(1L, n0 - 2); n <= n0 + 2; ++n) {
        cplx kn = std::sqrt(cplx(c + (kPi * n / l) * (kPi * n / l)));
        best = std::min(best, std::abs(k - kn));
      }
      continue;
    }
    double e_max = std::pow(std::abs(k) + 2.0 * kPi / l, 2) + std::abs(pot.max_value());
    for (double e : edge_dirichlet_energies(edge, e_max))
      best = std::min(best, std::abs(k - std::sqrt(cplx(e))));
  }
  return best;
}

double default_singular_tolerance(const MetricGraph& graph) {
  double ell0 = std::numeric_limits<double>::infinity();
  for (const auto& e : graph.edges()) ell0 = std::min(ell0, e.length);
  if (!std::isfinite(ell0)) return 0.0;
  return 1e-6 * kPi / ell0;
}

namespace {

std::vector<EdgeBasis> all_bases(const MetricGraph& graph, cplx k) {
  std::vector<EdgeBasis> bases(graph.num_edges());
  parallel_for(graph.num_edges(),
               [&](std::size_t e) { bases[e] = elementary_basis(graph.edge(static_cast<int>(e)), k); });
  return bases;
}

DualSystem assemble_from_bases(const MetricGraph& graph, cplx k,
                               const std::vector<EdgeBasis>& bases, double distance) {
  const auto interior = graph.interior();
  const int n = static_cast<int>(interior.size());
  DualSystem sys;
  sys.k = k;
  sys.singular_distance = distance;
  sys.rhs = Eigen::VectorXcd::Zero(n);
  sys.arity.assign(n, 0);

  std::vector<cplx> diagonal(n, 0.0);
  sys.term_sums.assign(n, 0.0);
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(graph.num_edges() * 2 + n);
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    const auto& b = bases[e];
    const cplx w = b.wronskian();
    const int rj = graph.interior_index(edge.j);
    const int rn = graph.interior_index(edge.n);
    if (rj >= 0) {
      diagonal[rj] -= b.v_deriv_at_len() / w;
      sys.term_sums[rj] += std::abs(b.v_deriv_at_len() / w) + std::abs(1.0 / w);
      ++sys.arity[rj];
    }
    if (rn >= 0) {
      diagonal[rn] -= b.u_deriv_at_0() / w;
      sys.term_sums[rn] += std::abs(b.u_deriv_at_0() / w) + std::abs(1.0 / w);
      ++sys.arity[rn];
    }
    if (rj >= 0 && rn >= 0) {
      triplets.emplace_back(rj, rn, 1.0 / w);
      triplets.emplace_back(rn, rj, 1.0 / w);
    }
  }
  for (int r = 0; r < n; ++r) {
    diagonal[r] += graph.vertex(interior[r]).alpha;
    sys.term_sums[r] += std::abs(graph.vertex(interior[r]).alpha);
  }
  for (const auto& lead : graph.leads()) {
    const int r = graph.interior_index(lead.vertex);
    diagonal[r] -= kI * k;
    sys.term_sums[r] += std::abs(k);
    ++sys.arity[r];
    if (lead.direction == LeadDirection::incoming) sys.rhs[r] += -2.0 * kI * k;
  }
  for (int r = 0; r < n; ++r) triplets.emplace_back(r, r, diagonal[r]);
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

}  // namespace

DualSystem assemble_dual(const MetricGraph& graph, cplx k, double tau_k) {
  check_momentum(k);
  if (tau_k < 0.0) tau_k = default_singular_tolerance(graph);
  double distance = singular_set_distance(graph, k);
  if (distance <= tau_k)
    throw NumericError("momentum lies within " + format_double(tau_k) +
                       " of the edge Dirichlet set; the dual system is undefined there");
  return assemble_from_bases(graph, k, all_bases(graph, k), distance);
}

SparseMatrixC assemble_equilateral(const MetricGraph& graph, cplx k) {
  check_momentum(k);
  if (!graph.spacing()) throw std::invalid_argument("equilateral form needs a uniform spacing");
  const double l = *graph.spacing();
  for (const auto& e : graph.edges()) {
    if (std::abs(e.length - l) > 1e-12 * l)
      throw std::invalid_argument("equilateral form needs equal edge lengths");
    if (!e.potential.is_zero()) throw std::invalid_argument("equilateral form needs U = 0");
  }
  const auto interior = graph.interior();
  const int n = static_cast<int>(interior.size());
  const cplx c = std::cos(k * l);
  const cplx s_over_k = k == cplx(0.0) ? cplx(l) : std::sin(k * l) / k;
  std::vector<Eigen::Triplet<cplx>> triplets;
  for (int r = 0; r < n; ++r) {
    const int v = interior[r];
    const auto inc = graph.incident(v);
    for (int e : inc) {
      int w = graph.edge(e).other(v);
      int col = graph.interior_index(w);
      if (col >= 0) triplets.emplace_back(r, col, 1.0);
    }
    const double d = static_cast<double>(inc.size());
    triplets.emplace_back(r, r, -(d * c + graph.vertex(v).alpha * s_over_k));
  }
  SparseMatrixC m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void write_dual_csv(const std::filesystem::path& path, const DualSystem& system) {
  std::vector<std::tuple<int, int, cplx>> entries;
  for (int c = 0; c < system.matrix.outerSize(); ++c)
    for (SparseMatrixC::InnerIterator it(system.matrix, c); it; ++it)
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  CsvWriter csv(path, {"row", "col", "re", "im"});
  for (const auto& [r, c, v] : entries) {
    csv.cell(r).cell(c).cell(v.real()).cell(v.imag());
    csv.end_row();
  }
}

double dual_residual(const DualSystem& system, const Eigen::VectorXcd& values) {
  if (values.size() != system.matrix.rows())
    throw std::invalid_argument("vertex vector has the wrong length");
  Eigen::VectorXcd r = system.matrix * values - system.rhs;
  // Uncancelled term sizes: the assembled diagonal can vanish (cos kl = 0)
  // while its constituents do not.
  double mnorm = 0.0;
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(system.matrix.rows());
  for (int c = 0; c < system.matrix.outerSize(); ++c)
    for (SparseMatrixC::InnerIterator it(system.matrix, c); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  for (std::size_t r = 0; r < system.term_sums.size(); ++r)
    row_sums[static_cast<Eigen::Index>(r)] = std::max(row_sums[static_cast<Eigen::Index>(r)], system.term_sums[r]);
  if (row_sums.size() > 0) mnorm = row_sums.maxCoeff();
  double scale = mnorm * values.cwiseAbs().maxCoeff() + system.rhs.cwiseAbs().maxCoeff();
  double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return res;
  return res / scale;
}

cplx EdgeField::value(int edge, double t) const {
  const auto& w = waves.at(edge);
  const auto& b = bases.at(edge);
  return w.a * b.u(t) + w.b * b.v(t);
}

cplx EdgeField::derivative(int edge, double t) const {
  const auto& w = waves.at(edge);
  const auto& b = bases.at(edge);
  return w.a * b.u_deriv(t) + w.b * b.v_deriv(t);
}

std::vector<cplx> vertex_values(const MetricGraph& graph, const Eigen::VectorXcd& values) {
  if (values.size() != static_cast<Eigen::Index>(graph.interior().size()))
    throw std::invalid_argument("vertex vector has the wrong length");
  std::vector<cplx> out(graph.num_vertices(), 0.0);
  const auto interior = graph.interior();
  for (std::size_t r = 0; r < interior.size(); ++r) out[interior[r]] = values[r];
  return out;
}

EdgeField reconstruct(const MetricGraph& graph, cplx k, const Eigen::VectorXcd& values,
                      double residual_tol) {
  EdgeField field;
  field.k = k;
  field.bases = all_bases(graph, k);
  auto system = assemble_from_bases(graph, k, field.bases, singular_set_distance(graph, k));
  double res = dual_residual(system, values);
  if (res > residual_tol)
    throw NumericError("vertex values do not solve the dual system (relative residual " +
                       format_double(res) + ")");
  auto psi = vertex_values(graph, values);
  field.waves.resize(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    const cplx w = field.bases[e].wronskian();
    field.waves[e] = {static_cast<int>(e), psi[edge.n] / w, -psi[edge.j] / w};
  }
  return field;
}

std::vector<cplx> kirchhoff_residuals(const MetricGraph& graph, const EdgeField& field,
                                      const Eigen::VectorXcd& values) {
  auto psi = vertex_values(graph, values);
  const auto interior = graph.interior();
  std::vector<cplx> out(interior.size(), 0.0);
  for (std::size_t r = 0; r < interior.size(); ++r) {
    const int v = interior[r];
    cplx sum = 0.0;
    for (int e : graph.incident(v)) {
      const auto& edge = graph.edge(e);
      if (edge.j == v)
        sum -= field.derivative(e, edge.length);
      else
        sum += field.derivative(e, 0.0);
    }
    out[r] = sum - graph.vertex(v).alpha * psi[v];
  }
  for (const auto& lead : graph.leads()) {
    const int r = graph.interior_index(lead.vertex);
    out[r] += kI * field.k * psi[lead.vertex];
    if (lead.direction == LeadDirection::incoming) out[r] -= 2.0 * kI * field.k;
  }
  return out;
}

double continuity_error(const MetricGraph& graph, const EdgeField& field,
                        const Eigen::VectorXcd& values) {
  auto psi = vertex_values(graph, values);
  double err = 0.0;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    err = std::max(err, std::abs(field.value(static_cast<int>(e), 0.0) - psi[edge.n]));
    err = std::max(err, std::abs(field.value(static_cast<int>(e), edge.length) - psi[edge.j]));
  }
  return err;
}

}  // namespace latticewave
