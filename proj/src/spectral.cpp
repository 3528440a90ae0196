#include "latticewave/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SparseLU>

#include "latticewave/eigensolver.hpp"
#include "latticewave/parallel.hpp"

namespace latticewave {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kGolden = 0.6180339887498949;

// Deterministic sign: largest-magnitude component positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  if (v[i] < 0.0) v = -v;
}
}  // namespace

Eigen::SparseMatrix<double> interior_adjacency(const MetricGraph& graph) {
  const auto interior = graph.interior();
  const int n = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& e : graph.edges()) {
    int a = graph.interior_index(e.j), b = graph.interior_index(e.n);
    if (a < 0 || b < 0) continue;
    triplets.emplace_back(a, b, 1.0);
    triplets.emplace_back(b, a, 1.0);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

int uniform_interior_degree(const MetricGraph& graph) {
  if (!graph.spacing()) throw NotEquilateral("graph has no uniform spacing");
  if (!graph.leads().empty()) throw NotEquilateral("graph has leads attached");
  const double l = *graph.spacing();
  for (const auto& e : graph.edges()) {
    if (std::abs(e.length - l) > 1e-12 * l) throw NotEquilateral("edge lengths differ");
    if (!e.potential.is_zero()) throw NotEquilateral("edge potentials are not zero");
  }
  int d = -1;
  for (int v : graph.interior()) {
    if (graph.vertex(v).alpha != 0.0) throw NotEquilateral("non-Kirchhoff coupling");
    int deg = static_cast<int>(graph.incident(v).size());
    if (d < 0) d = deg;
    if (deg != d) throw NotEquilateral("interior degrees are not uniform");
  }
  if (d <= 0) throw NotEquilateral("graph has no interior vertex");
  return d;
}

std::vector<EigenResult> adjacency_eigen_path(const MetricGraph& graph, int count,
                                              const AdjacencyPathOptions& options) {
  if (count <= 0) return {};
  const int d = uniform_interior_degree(graph);
  const double l = *graph.spacing();
  const double nu = graph.dimension();
  const double tau = default_singular_tolerance(graph);
  const double sigma = options.k_target ? d * std::cos(*options.k_target * l) : double(d);

  auto adjacency = interior_adjacency(graph);
  const int n = static_cast<int>(adjacency.rows());
  const int want = std::min(n, 2 * count + 8);
  auto eigs = nearest_eigenpairs(adjacency, sigma, want);
  const int got = static_cast<int>(eigs.values.size());

  // Group by mu; a cluster touching the end of the computed window may be
  // incomplete and is only kept when the whole spectrum was computed.
  std::vector<int> order(got);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return eigs.values[a] > eigs.values[b]; });
  std::vector<std::vector<int>> clusters;
  for (int idx : order) {
    if (!clusters.empty() &&
        std::abs(eigs.values[clusters.back().back()] - eigs.values[idx]) <= options.cluster_tol)
      clusters.back().push_back(idx);
    else
      clusters.push_back({idx});
  }
  // Worst distance from sigma among computed values bounds completeness.
  double horizon = 0.0;
  for (int i = 0; i < got; ++i) horizon = std::max(horizon, std::abs(eigs.values[i] - sigma));
  const bool complete_spectrum = got == n;

  struct Candidate {
    std::vector<int> members;
    double distance;
  };
  std::vector<Candidate> candidates;
  for (const auto& c : clusters) {
    double mu = eigs.values[c.front()];
    double dist = std::abs(mu - sigma);
    if (!complete_spectrum && dist >= horizon - options.cluster_tol) continue;
    if (std::abs(mu) >= d * (1.0 - 1e-14)) continue;
    candidates.push_back({c, dist});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
  if (static_cast<int>(candidates.size()) > count) candidates.resize(count);

  std::vector<EigenResult> results;
  for (const auto& c : candidates) {
    double mu = 0.0;
    for (int idx : c.members) mu += eigs.values[idx];
    mu /= static_cast<double>(c.members.size());
    Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(c.members.size()));
    for (std::size_t m = 0; m < c.members.size(); ++m) {
      Eigen::VectorXd v = eigs.vectors.col(c.members[m]).normalized();
      fix_sign(v);
      basis.col(static_cast<Eigen::Index>(m)) = v;
    }
    const double theta = std::acos(std::clamp(mu / d, -1.0, 1.0));
    std::vector<std::pair<double, int>> momenta{{theta / l, 0}};
    for (int b = 1; b <= options.max_branch; ++b) {
      momenta.emplace_back((2.0 * kPi * b - theta) / l, b);
      momenta.emplace_back((2.0 * kPi * b + theta) / l, b);
    }
    for (auto [k, branch] : momenta) {
      if (singular_set_distance(graph, k) <= tau) continue;
      const auto sys = assemble_dual(graph, cplx(k), tau);
      double dual_res = 0.0;
      for (Eigen::Index m = 0; m < basis.cols(); ++m) {
        Eigen::VectorXcd r = sys.matrix * basis.col(m).cast<cplx>();
        dual_res = std::max(dual_res, r.cwiseAbs().maxCoeff());
      }
      EigenResult r;
      r.k = k;
      r.energy_graph = k * k;
      r.energy_continuum = nu * k * k;
      r.vertex_vector = basis.col(0);
      r.subspace = basis;
      r.multiplicity = static_cast<int>(c.members.size());
      r.residual = dual_res;
      r.mu = mu;
      r.branch = branch;
      results.push_back(std::move(r));
    }
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const EigenResult& a, const EigenResult& b) { return a.k < b.k; });
  return results;
}

namespace {

using SparseMatrixR = Eigen::SparseMatrix<double>;

double sigma_min_dense(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().minCoeff();
}

// Power iteration on (M^H M)^{-1}; M is complex symmetric, so
// M^{-H} z = conj(M^{-1} conj(z)).
double sigma_min_sparse(const SparseMatrixC& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::SparseLU<SparseMatrixC> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) return 0.0;
  Eigen::VectorXcd x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + i);
  x.normalize();
  double estimate = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXcd y = lu.solve(x);
    double ny = y.norm();
    if (!std::isfinite(ny) || ny == 0.0) return 0.0;
    double next = 1.0 / ny;
    Eigen::VectorXcd z = lu.solve(Eigen::VectorXcd(y.conjugate())).conjugate();
    x = z / z.norm();
    bool done = std::abs(next - estimate) <= 1e-12 * next;
    estimate = next;
    if (done) break;
  }
  return estimate;
}

double sigma_min_of(const SparseMatrixC& m) {
  if (m.rows() == 0) return 0.0;
  if (m.rows() <= 64) return sigma_min_dense(Eigen::MatrixXcd(m));
  return sigma_min_sparse(m);
}

struct NullSpace {
  Eigen::MatrixXd basis;
  double residual = 0.0;
};

// Block inverse iteration near a root; keeps the directions whose residual
// is below threshold. Real dual matrices give real vectors; complex ones
// are phase-aligned and their real part kept.
NullSpace null_space(const SparseMatrixC& m, double threshold) {
  const int n = static_cast<int>(m.rows());
  const int block = std::min(n, 4);
  Eigen::MatrixXcd x(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = std::sin(1.0 + i * (j + 1) + 0.37 * j);
  Eigen::SparseLU<SparseMatrixC> lu;
  lu.compute(m);
  if (lu.info() == Eigen::Success) {
    for (int it = 0; it < 4; ++it) {
      Eigen::MatrixXcd y = lu.solve(x);
      if (!y.allFinite()) break;
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(y);
      x = qr.householderQ() * Eigen::MatrixXcd::Identity(n, block);
    }
  }
  Eigen::MatrixXcd mx = m * x;
  Eigen::MatrixXcd gram = mx.adjoint() * mx;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  NullSpace out;
  std::vector<Eigen::VectorXd> vecs;
  for (int j = 0; j < block; ++j) {
    double s = std::sqrt(std::max(0.0, es.eigenvalues()[j]));
    if (j > 0 && s > threshold) break;
    Eigen::VectorXcd v = x * es.eigenvectors().col(j);
    Eigen::Index i = 0;
    v.cwiseAbs().maxCoeff(&i);
    v *= std::conj(v[i]) / std::abs(v[i]);
    Eigen::VectorXd re = v.real();
    for (const auto& w : vecs) re -= w.dot(re) * w;
    if (re.norm() < 1e-8) continue;
    re.normalize();
    vecs.push_back(re);
  }
  out.basis.resize(n, static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t j = 0; j < vecs.size(); ++j) {
    Eigen::VectorXd v = vecs[j];
    fix_sign(v);
    out.basis.col(static_cast<Eigen::Index>(j)) = v;
    Eigen::VectorXcd r = m * v.cast<cplx>();
    out.residual = std::max(out.residual, r.cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace

double dual_sigma_min(const MetricGraph& graph, double k, double tau_k) {
  return sigma_min_of(assemble_dual(graph, cplx(k), tau_k).matrix);
}

SecularScan secular_scan(const MetricGraph& graph, double k_min, double k_max, int samples,
                         const SecularOptions& options) {
  if (samples < 2) throw std::invalid_argument("secular scan needs at least 2 samples");
  if (!(k_max > k_min) || !(k_min > 0.0)) throw std::invalid_argument("empty momentum range");
  const double tau = options.tau_k < 0.0 ? default_singular_tolerance(graph) : options.tau_k;
  const double nu = graph.dimension();
  SecularScan scan;

  // Guarded intervals around every edge Dirichlet momentum in range.
  std::vector<double> lengths;
  for (const auto& e : graph.edges()) lengths.push_back(e.length);
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
  bool all_free = std::all_of(graph.edges().begin(), graph.edges().end(),
                              [](const Edge& e) { return e.potential.is_zero(); });
  if (all_free) {
    std::vector<double> poles;
    for (double l : lengths)
      for (long n = std::max(1L, static_cast<long>(std::floor((k_min - tau) * l / kPi)));
           kPi * n / l <= k_max + tau; ++n)
        if (kPi * n / l >= k_min - tau) poles.push_back(kPi * n / l);
    std::sort(poles.begin(), poles.end());
    for (double p : poles) scan.skipped.emplace_back(p - tau, p + tau);
  }

  std::vector<double> grid;
  for (int i = 0; i < samples; ++i) {
    double k = k_min + (k_max - k_min) * i / (samples - 1);
    if (singular_set_distance(graph, k) <= tau) {
      if (!all_free) scan.skipped.emplace_back(k, k);
      continue;
    }
    grid.push_back(k);
  }
  if (grid.empty()) throw std::invalid_argument("no admissible momentum in the scan range");
  scan.k_grid = grid;
  scan.sigma_min.assign(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    scan.sigma_min[i] = dual_sigma_min(graph, grid[i], tau);
  });

  std::vector<double> sorted = scan.sigma_min;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  scan.threshold = options.threshold_factor * sorted[sorted.size() / 2];

  auto f = [&](double k) {
    if (singular_set_distance(graph, k) <= tau) return std::numeric_limits<double>::infinity();
    return dual_sigma_min(graph, k, tau);
  };
  const int g = static_cast<int>(grid.size());
  std::vector<std::pair<int, int>> brackets;
  for (int i = 0; i < g; ++i) {
    double s = scan.sigma_min[i];
    bool left = i == 0 || s <= scan.sigma_min[i - 1];
    bool right = i == g - 1 || s <= scan.sigma_min[i + 1];
    if (left && right) brackets.emplace_back(std::max(0, i - 1), std::min(g - 1, i + 1));
  }

  std::vector<double> roots(brackets.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(brackets.size(), [&](std::size_t b) {
    double a = grid[brackets[b].first], c = grid[brackets[b].second];
    double x1 = c - kGolden * (c - a), x2 = a + kGolden * (c - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 300 && c - a > options.root_tol * std::max(1.0, c); ++it) {
      if (f1 <= f2) {
        c = x2;
        x2 = x1;
        f2 = f1;
        x1 = c - kGolden * (c - a);
        f1 = f(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (c - a);
        f2 = f(x2);
      }
    }
    double k = f1 <= f2 ? x1 : x2;
    if (std::min(f1, f2) < scan.threshold) roots[b] = k;
  });

  for (double k : roots) {
    if (std::isnan(k)) continue;
    if (!scan.roots.empty() && std::abs(k - scan.roots.back()) < 1e-9) continue;
    scan.roots.push_back(k);
  }
  for (double k : scan.roots) {
    auto sys = assemble_dual(graph, cplx(k), tau);
    auto ns = null_space(sys.matrix, std::max(scan.threshold, 1e-8));
    if (ns.basis.cols() == 0) continue;
    EigenResult r;
    r.k = k;
    r.energy_graph = k * k;
    r.energy_continuum = nu * k * k;
    r.subspace = ns.basis;
    r.vertex_vector = ns.basis.col(0);
    r.multiplicity = static_cast<int>(ns.basis.cols());
    r.residual = ns.residual;
    scan.eigen.push_back(std::move(r));
  }
  return scan;
}

double bloch_dispersion(std::span<const double> theta, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  if (theta.empty() || theta.size() > 3) throw std::invalid_argument("quasimomentum must have 1-3 components");
  double sum = 0.0;
  for (double t : theta) sum += std::cos(t * spacing);
  const double nu = static_cast<double>(theta.size());
  if (std::abs(sum) > nu * (1.0 + 1e-15))
    throw std::invalid_argument("quasimomentum outside the band");
  return std::acos(std::clamp(sum / nu, -1.0, 1.0)) / spacing;
}

}  // namespace latticewave
