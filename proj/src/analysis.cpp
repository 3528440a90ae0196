#include "latticewave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latticewave/io.hpp"
#include "latticewave/parallel.hpp"
#include "latticewave/spectral.hpp"

namespace latticewave {

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

NodalPartition nodal_domains(const MetricGraph& graph, const Eigen::VectorXd& values,
                             double zero_tol) {
  const int n = static_cast<int>(graph.interior().size());
  if (values.size() != n) throw std::invalid_argument("vector length differs from interior size");
  if (zero_tol < 0.0) zero_tol = 1e-12 * (n ? values.cwiseAbs().maxCoeff() : 0.0);
  NodalPartition p;
  p.signs.resize(n);
  for (int i = 0; i < n; ++i)
    p.signs[i] = std::abs(values[i]) <= zero_tol ? 0 : (values[i] > 0 ? 1 : -1);
  DisjointSets sets(n);
  for (const auto& e : graph.edges()) {
    if (graph.is_boundary(e.j) || graph.is_boundary(e.n)) continue;
    int a = graph.interior_index(e.j), b = graph.interior_index(e.n);
    if (p.signs[a] != 0 && p.signs[a] == p.signs[b]) sets.unite(a, b);
  }
  p.labels.assign(n, -1);
  std::vector<int> root_label(n, -1);
  for (int i = 0; i < n; ++i) {
    if (p.signs[i] == 0) continue;
    int r = sets.find(i);
    if (root_label[r] < 0) root_label[r] = p.count++;
    p.labels[i] = root_label[r];
  }
  return p;
}

void write_nodal_csv(const std::filesystem::path& path, const MetricGraph& graph,
                     const NodalPartition& partition) {
  CsvWriter out(path, {"id", "x", "y", "sign", "domain"});
  auto interior = graph.interior();
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const auto& v = graph.vertex(interior[i]);
    out.cell(v.id).cell(v.pos[0]).cell(v.pos[1]).cell(partition.signs[i]).cell(partition.labels[i]);
    out.end_row();
  }
}

double field_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("fields differ in length");
  const double n = static_cast<double>(a.size());
  if (a.empty()) return 0.0;
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a[i] - ma, y = b[i] - mb;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double current_alignment(std::span<const std::array<double, 2>> a,
                         std::span<const std::array<double, 2>> b) {
  if (a.size() != b.size()) throw std::invalid_argument("current fields differ in length");
  double amax = 0.0, bmax = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    amax = std::max(amax, std::hypot(a[i][0], a[i][1]));
    bmax = std::max(bmax, std::hypot(b[i][0], b[i][1]));
  }
  double sum = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double na = std::hypot(a[i][0], a[i][1]), nb = std::hypot(b[i][0], b[i][1]);
    if (na <= 1e-12 * amax || nb <= 1e-12 * bmax || na == 0.0 || nb == 0.0) continue;
    sum += (a[i][0] * b[i][0] + a[i][1] * b[i][1]) / (na * nb);
    ++used;
  }
  return used ? sum / used : 0.0;
}

ComparisonReport compare_fields(const MetricGraph& graph, const ScatteringSolution& solution,
                                const BilliardGrid& billiard, const CompareOptions& options) {
  if (graph.dimension() != 2) throw std::invalid_argument("field comparison needs a planar graph");
  const double width = (billiard.nx - 1) * billiard.h, height = (billiard.ny - 1) * billiard.h;
  for (const auto& v : graph.vertices())
    if (v.pos[0] < -1e-9 || v.pos[1] < -1e-9 || v.pos[0] > width + 1e-9 || v.pos[1] > height + 1e-9)
      throw std::invalid_argument("graph and billiard geometries do not match");

  auto current = continuum_current(billiard);
  BilliardGrid jx = billiard, jy = billiard;
  for (std::size_t i = 0; i < current.size(); ++i) {
    jx.values[i] = current[i][0];
    jy.values[i] = current[i][1];
  }

  std::vector<double> gd, bd;
  std::vector<std::array<double, 2>> gj, bj;
  auto interior = graph.interior();
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const auto& v = graph.vertex(interior[i]);
    bool near_port = false;
    for (const auto& lead : graph.leads()) {
      const auto& q = graph.vertex(lead.vertex).pos;
      if (std::hypot(v.pos[0] - q[0], v.pos[1] - q[1]) <= options.port_exclusion) near_port = true;
    }
    if (near_port || v.kind == VertexKind::lead_port) continue;
    gd.push_back(std::norm(solution.vertex_values[static_cast<Eigen::Index>(i)]));
    bd.push_back(std::norm(billiard.sample(v.pos[0], v.pos[1])));
    const auto& gv = solution.vertex_current_field.at(v.id);
    gj.push_back({gv[0], gv[1]});
    bj.push_back({jx.sample(v.pos[0], v.pos[1]).real(), jy.sample(v.pos[0], v.pos[1]).real()});
  }
  ComparisonReport r;
  r.samples = static_cast<int>(gd.size());
  r.graph_max_density = gd.empty() ? 0.0 : *std::max_element(gd.begin(), gd.end());
  r.billiard_max_density = bd.empty() ? 0.0 : *std::max_element(bd.begin(), bd.end());
  if (r.graph_max_density > 0.0)
    for (double& x : gd) x /= r.graph_max_density;
  if (r.billiard_max_density > 0.0)
    for (double& x : bd) x /= r.billiard_max_density;
  r.correlation = field_correlation(gd, bd);
  r.current_alignment = current_alignment(gj, bj);
  for (std::size_t i = 0; i < gj.size(); ++i)
    if (std::hypot(gj[i][0], gj[i][1]) > 0.0 && std::hypot(bj[i][0], bj[i][1]) > 0.0) ++r.current_samples;
  return r;
}

double fit_order(std::span<const double> spacings, std::span<const double> errors) {
  const std::size_t n = spacings.size();
  if (n < 2 || errors.size() != n) throw std::invalid_argument("order fit needs matching data");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(spacings[i]);
    my += std::log(errors[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::log(spacings[i]) - mx;
    sxy += x * (std::log(errors[i]) - my);
    sxx += x * x;
  }
  return sxy / sxx;
}

ConvergenceReport convergence_study(const GraphFamily& build, std::vector<double> spacings,
                                    double reference, int mode_index,
                                    const std::function<double(const Point&)>& reference_field) {
  if (spacings.size() < 3) throw std::invalid_argument("convergence study needs at least 3 spacings");
  for (std::size_t i = 1; i < spacings.size(); ++i)
    if (!(spacings[i] < spacings[i - 1]))
      throw std::invalid_argument("spacings must be strictly decreasing");
  ConvergenceReport rep;
  rep.spacings = spacings;
  rep.reference = reference;
  rep.values.resize(spacings.size());
  if (reference_field) rep.eps_max.resize(spacings.size());
  parallel_for(spacings.size(), [&](std::size_t i) {
    MetricGraph g = build(spacings[i]);
    auto eig = adjacency_eigen_path(g, mode_index + 1);
    if (static_cast<int>(eig.size()) <= mode_index)
      throw NumericError("graph has too few eigenvalues for the tracked mode");
    const auto& e = eig[mode_index];
    rep.values[i] = e.energy_continuum;
    if (reference_field) {
      auto interior = g.interior();
      Eigen::VectorXd ref(static_cast<Eigen::Index>(interior.size()));
      for (std::size_t m = 0; m < interior.size(); ++m) ref[m] = reference_field(g.vertex(interior[m]).pos);
      ref.normalize();
      Eigen::VectorXd psi = e.vertex_vector;
      if (psi.dot(ref) < 0) psi = -psi;
      rep.eps_max[i] = (psi - ref).cwiseAbs().maxCoeff() * std::sqrt(double(interior.size()));
    }
  });
  for (double v : rep.values) rep.errors.push_back(std::abs(v - reference));
  rep.monotone = true;
  for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i) {
    rep.ratios.push_back(rep.errors[i + 1] > 0.0 ? rep.errors[i] / rep.errors[i + 1]
                                                 : std::numeric_limits<double>::infinity());
    if (!(rep.errors[i + 1] < rep.errors[i])) rep.monotone = false;
  }
  if (rep.monotone && rep.errors.back() > 0.0) rep.observed_order = fit_order(rep.spacings, rep.errors);
  return rep;
}

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json j;
  j["spacings"] = r.spacings;
  j["values"] = r.values;
  j["errors"] = r.errors;
  auto ratios = nlohmann::json::array();
  for (double x : r.ratios) ratios.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json());
  j["ratios"] = ratios;
  j["observed_order"] = r.observed_order ? nlohmann::json(*r.observed_order) : nlohmann::json();
  j["monotone"] = r.monotone;
  j["reference"] = r.reference;
  if (!r.eps_max.empty()) j["eps_max"] = r.eps_max;
  return j;
}

nlohmann::json to_json(const ComparisonReport& r) {
  return {{"correlation", r.correlation},
          {"current_alignment", r.current_alignment},
          {"samples", r.samples},
          {"current_samples", r.current_samples},
          {"graph_max_density", r.graph_max_density},
          {"billiard_max_density", r.billiard_max_density}};
}

}  // namespace latticewave
