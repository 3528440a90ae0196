#include "latticewave/scattering.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "latticewave/io.hpp"
#include "latticewave/parallel.hpp"

namespace latticewave {

namespace {
constexpr cplx kI(0.0, 1.0);
}

ScatteringSolution solve_scattering(const MetricGraph& graph, double k, double tau_k) {
  if (!(k > 0.0)) throw std::invalid_argument("scattering needs a positive momentum");
  int incoming = 0;
  for (const auto& lead : graph.leads())
    if (lead.direction == LeadDirection::incoming) ++incoming;
  if (incoming != 1) throw std::invalid_argument("scattering needs exactly one incoming lead");

  auto sys = assemble_dual(graph, cplx(k), tau_k);
  Eigen::SparseLU<SparseMatrixC> lu;
  lu.compute(sys.matrix);
  if (lu.info() != Eigen::Success) throw NumericError("scattering system is singular");
  Eigen::VectorXcd psi = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success || !psi.allFinite())
    throw NumericError("scattering solve failed");

  ScatteringSolution s;
  s.k = k;
  s.vertex_values = psi;
  s.residual = dual_residual(sys, psi);
  if (s.residual > 1e-8) throw NumericError("scattering system is ill-conditioned");

  double out_flux = 0.0;
  bool have_t = false;
  for (const auto& lead : graph.leads()) {
    cplx at = psi[graph.interior_index(lead.vertex)];
    LeadState st{lead.vertex, lead.direction, 0.0, 0.0};
    if (lead.direction == LeadDirection::incoming) {
      st.amplitude_in = 1.0;
      st.amplitude_out = at - 1.0;
      s.r = st.amplitude_out;
    } else {
      st.amplitude_out = at;
      out_flux += std::norm(at);
      if (!have_t) s.t = at;
      have_t = true;
    }
    s.leads.push_back(st);
  }
  s.flux_error = std::abs(1.0 - std::norm(s.r) - out_flux);

  s.field = reconstruct(graph, cplx(k), psi);
  s.edge_currents.resize(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e)
    s.edge_currents[e] = edge_current(graph, s.field, static_cast<int>(e));
  s.vertex_current_field = vertex_current_field(graph, s.edge_currents);
  return s;
}

double edge_current(const MetricGraph& graph, const EdgeField& field, int edge) {
  const auto& b = field.bases.at(edge);
  if (field.k.imag() != 0.0 || b.wronskian().imag() != 0.0)
    return edge_current_at(graph, field, edge, 0.5 * b.length());
  // psi = a u + b v with real u, v: Im(conj psi psi') = Im(conj(a) b) W.
  const auto& w = field.waves.at(edge);
  return -std::imag(std::conj(w.a) * w.b) * b.wronskian().real();
}

double edge_current_at(const MetricGraph&, const EdgeField& field, int edge, double t) {
  // The edge coordinate increases from X_n to X_j.
  return -std::imag(std::conj(field.value(edge, t)) * field.derivative(edge, t));
}

std::vector<Point> vertex_current_field(const MetricGraph& graph,
                                        const std::vector<double>& edge_currents) {
  std::vector<Point> out(graph.num_vertices(), Point{});
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    const auto& pj = graph.vertex(edge.j).pos;
    const auto& pn = graph.vertex(edge.n).pos;
    Point dir{pn[0] - pj[0], pn[1] - pj[1], pn[2] - pj[2]};
    double len = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    if (len == 0.0) continue;
    for (int i = 0; i < 3; ++i) {
      double c = edge_currents[e] * dir[i] / len;
      out[edge.j][i] += c;
      out[edge.n][i] += c;
    }
  }
  return out;
}

std::vector<double> current_imbalance(const MetricGraph& graph, const ScatteringSolution& s) {
  std::vector<double> out(graph.interior().size(), 0.0);
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    double c = s.edge_currents[e];
    if (!graph.is_boundary(edge.j)) out[graph.interior_index(edge.j)] += c;
    if (!graph.is_boundary(edge.n)) out[graph.interior_index(edge.n)] -= c;
  }
  for (const auto& lead : s.leads) {
    // Outward lead current k(|out|^2 - |in|^2).
    out[graph.interior_index(lead.vertex)] +=
        s.k * (std::norm(lead.amplitude_out) - std::norm(lead.amplitude_in));
  }
  return out;
}

std::vector<SweepPoint> transmission_sweep(const MetricGraph& graph, const std::vector<double>& ks,
                                           double tau_k) {
  const double tau = tau_k < 0.0 ? default_singular_tolerance(graph) : tau_k;
  std::vector<double> admissible;
  for (double k : ks)
    if (singular_set_distance(graph, k) > tau) admissible.push_back(k);
  std::vector<SweepPoint> out(admissible.size());
  parallel_for(admissible.size(), [&](std::size_t i) {
    auto s = solve_scattering(graph, admissible[i], tau);
    double t2 = 0.0;
    for (const auto& l : s.leads)
      if (l.direction == LeadDirection::outgoing) t2 += std::norm(l.amplitude_out);
    out[i] = {admissible[i], std::norm(s.r), t2, s.flux_error};
  });
  return out;
}

MetricGraph swap_leads(const MetricGraph& graph) {
  std::vector<Lead> leads(graph.leads().begin(), graph.leads().end());
  for (auto& l : leads)
    l.direction = l.direction == LeadDirection::incoming ? LeadDirection::outgoing
                                                         : LeadDirection::incoming;
  return MetricGraph(graph.dimension(), graph.spacing(),
                     std::vector<Vertex>(graph.vertices().begin(), graph.vertices().end()),
                     std::vector<Edge>(graph.edges().begin(), graph.edges().end()), leads,
                     std::vector<std::string>(graph.warnings().begin(), graph.warnings().end()));
}

void write_scattering_json(const std::filesystem::path& path, const ScatteringSolution& s) {
  nlohmann::json j;
  j["k"] = s.k;
  j["r"] = {s.r.real(), s.r.imag()};
  j["t"] = {s.t.real(), s.t.imag()};
  j["flux_error"] = s.flux_error;
  j["residual"] = s.residual;
  auto leads = nlohmann::json::array();
  for (const auto& l : s.leads)
    leads.push_back({{"vertex", l.vertex},
                     {"direction", to_string(l.direction)},
                     {"amplitude_in", {l.amplitude_in.real(), l.amplitude_in.imag()}},
                     {"amplitude_out", {l.amplitude_out.real(), l.amplitude_out.imag()}}});
  j["leads"] = leads;
  write_json(path, j);
}

void write_vertex_field_csv(const std::filesystem::path& path, const MetricGraph& graph,
                            const ScatteringSolution& s) {
  auto values = vertex_values(graph, s.vertex_values);
  CsvWriter out(path, {"id", "x", "y", "abs", "arg", "jx", "jy"});
  for (const auto& v : graph.vertices()) {
    cplx z = values[v.id];
    out.cell(v.id).cell(v.pos[0]).cell(v.pos[1]).cell(std::abs(z)).cell(std::arg(z));
    out.cell(s.vertex_current_field[v.id][0]).cell(s.vertex_current_field[v.id][1]);
    out.end_row();
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& sweep) {
  CsvWriter out(path, {"k", "r2", "t2", "flux_error"});
  for (const auto& p : sweep) {
    out.cell(p.k).cell(p.reflection).cell(p.transmission).cell(p.flux_error);
    out.end_row();
  }
}

}  // namespace latticewave
