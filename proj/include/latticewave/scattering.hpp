#pragma once

#include <filesystem>
#include <vector>

#include "latticewave/edge_solutions.hpp"
#include "latticewave/graph.hpp"

namespace latticewave {

// On the incoming lead psi = e^{-ikx} + r e^{ikx}, on an outgoing lead
// psi = t e^{ikx}; x = 0 at the junction.
struct LeadState {
  int vertex = 0;
  LeadDirection direction = LeadDirection::incoming;
  cplx amplitude_in;
  cplx amplitude_out;
};

struct ScatteringSolution {
  double k = 0.0;
  Eigen::VectorXcd vertex_values;  // over graph.interior()
  std::vector<LeadState> leads;
  cplx r;  // reflection on the incoming lead
  cplx t;  // transmission into the first outgoing lead (0 without one)
  double flux_error = 0.0;  // |1 - |r|^2 - sum |t|^2|
  double residual = 0.0;    // relative dual residual
  EdgeField field;
  std::vector<double> edge_currents;      // per edge, positive from j to n
  std::vector<Point> vertex_current_field;  // per vertex
};

ScatteringSolution solve_scattering(const MetricGraph& graph, double k, double tau_k = -1.0);

// Current Im(conj(psi) psi') on one edge, positive along j -> n. Exact
// Wronskian form for real k; sampled at the midpoint otherwise.
double edge_current(const MetricGraph& graph, const EdgeField& field, int edge);
// Same quantity evaluated pointwise at edge coordinate t.
double edge_current_at(const MetricGraph& graph, const EdgeField& field, int edge, double t);

// Vector sum over incident edges of current times the unit j -> n direction.
// Leads carry no embedding direction and are left out.
std::vector<Point> vertex_current_field(const MetricGraph& graph,
                                        const std::vector<double>& edge_currents);

// Net outflow (edges and leads) at every non-boundary vertex, in
// graph.interior() order.
std::vector<double> current_imbalance(const MetricGraph& graph, const ScatteringSolution& s);

struct SweepPoint {
  double k = 0.0;
  double reflection = 0.0;    // |r|^2
  double transmission = 0.0;  // |t|^2 summed over outgoing leads
  double flux_error = 0.0;
};

// Momenta inside the singular-set guard are skipped.
std::vector<SweepPoint> transmission_sweep(const MetricGraph& graph, const std::vector<double>& ks,
                                           double tau_k = -1.0);

// Swaps incoming and outgoing roles of a two-lead graph.
MetricGraph swap_leads(const MetricGraph& graph);

void write_scattering_json(const std::filesystem::path& path, const ScatteringSolution& s);
// id, x, y, abs, arg, jx, jy over every vertex.
void write_vertex_field_csv(const std::filesystem::path& path, const MetricGraph& graph,
                            const ScatteringSolution& s);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepPoint>& sweep);

}  // namespace latticewave
