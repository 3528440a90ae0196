#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace latticewave {

// Unused trailing coordinates are zero.
using Point = std::array<double, 3>;
using Site = std::array<int, 3>;

enum class VertexKind { interior, boundary, lead_port };
enum class LeadDirection { incoming, outgoing };

const char* to_string(VertexKind kind);
const char* to_string(LeadDirection direction);
VertexKind vertex_kind_from_string(const std::string& s);
LeadDirection lead_direction_from_string(const std::string& s);

struct Vertex {
  int id = 0;
  Point pos{};
  VertexKind kind = VertexKind::interior;
  double alpha = 0.0;

  bool operator==(const Vertex&) const = default;
};

// Edge potential in the edge coordinate t, which runs from 0 at X_n to the
// edge length at X_j. Samples are uniformly spaced over [0, length] and
// linearly interpolated.
struct Potential {
  enum class Type { zero, constant, samples };

  Type type = Type::zero;
  double value = 0.0;
  std::vector<double> samples;

  static Potential zero() { return {}; }
  static Potential constant(double c);
  static Potential sampled(std::vector<double> values);

  bool is_zero() const { return type == Type::zero; }
  double at(double t, double length) const;
  double min_value() const;
  double max_value() const;
  bool bounded() const;

  bool operator==(const Potential&) const = default;
};

struct Edge {
  int j = 0;
  int n = 0;
  double length = 0.0;
  Potential potential;

  int other(int v) const { return v == j ? n : j; }
  bool operator==(const Edge&) const = default;
};

struct Lead {
  int vertex = 0;
  LeadDirection direction = LeadDirection::incoming;

  bool operator==(const Lead&) const = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

//
// Embedded metric graph. Immutable once constructed; the builders below are
// the usual way to get one.
//
class MetricGraph {
 public:
  MetricGraph() = default;
  MetricGraph(int dimension, std::optional<double> spacing,
              std::vector<Vertex> vertices, std::vector<Edge> edges,
              std::vector<Lead> leads = {},
              std::vector<std::string> warnings = {});

  int dimension() const { return dimension_; }
  std::optional<double> spacing() const { return spacing_; }

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Lead> leads() const { return leads_; }
  const Vertex& vertex(int id) const { return vertices_.at(id); }
  const Edge& edge(int e) const { return edges_.at(e); }
  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  // Edge indices incident to v.
  std::span<const int> incident(int v) const;
  // Kirchhoff arity: incident edges plus attached leads.
  int degree(int v) const;
  int leads_at(int v) const;

  // Non-boundary vertices in id order; these carry the unknowns of the
  // dual system.
  std::span<const int> interior() const { return interior_; }
  int interior_index(int v) const { return interior_index_.at(v); }
  bool is_boundary(int v) const {
    return vertices_.at(v).kind == VertexKind::boundary;
  }

  // Builder diagnostics, e.g. a dropped disconnected component.
  std::span<const std::string> warnings() const { return warnings_; }

  bool operator==(const MetricGraph& other) const;

 private:
  int dimension_ = 2;
  std::optional<double> spacing_;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<Lead> leads_;
  std::vector<std::string> warnings_;

  std::vector<int> incidence_offsets_;
  std::vector<int> incidence_;
  std::vector<int> interior_;
  std::vector<int> interior_index_;
};

using AlphaFn = std::function<double(const Point&)>;
using Indicator = std::function<bool(const Point&)>;

struct Box {
  Point lo{};
  Point hi{};
  int dimension = 2;
};

struct Disc {
  Point center{};
  double radius = 0.0;
};

// Cubic lattice C^nu restricted to a rectangular block of extents[i]
// vertices along axis i; perimeter vertices are Dirichlet endpoints.
MetricGraph build_cubic_lattice(std::span<const int> extents, double spacing,
                                const AlphaFn& alpha = {});

// n_cols vertices along x, n_rows along y, vertex (i, j) at (i*l, j*l).
MetricGraph build_square_lattice(int n_rows, int n_cols, double spacing,
                                 const AlphaFn& alpha = {});

// Lattice points of the closed region {indicator} inside the box. Edges on
// the boundary of the union of lattice cells are deleted and boundary
// vertices are split into one Dirichlet endpoint per remaining edge.
MetricGraph build_domain_lattice(const Indicator& inside, const Box& box,
                                 double spacing, const AlphaFn& alpha = {});

// n x n square lattice with the lattice points strictly inside the disc
// removed.
MetricGraph build_sinai_graph(int n, double spacing, const Disc& disc);

// Equilateral triangular lattice anchored at box.lo, rows along x, with the
// same cell-boundary rule as build_domain_lattice.
MetricGraph build_triangular_lattice(const Indicator& inside, const Box& box,
                                     double spacing, const AlphaFn& alpha = {});

// Hexagon of the given circumradius around center, sides facing +-y.
Indicator hexagon_indicator(const Point& center, double radius);

// Vertex lookup for lead placement; boundary copies are skipped.
std::optional<int> find_vertex(const MetricGraph& graph, const Point& pos,
                               double tol = 1e-9);

MetricGraph attach_lead(const MetricGraph& graph, int vertex,
                        LeadDirection direction);
// Site coordinates are multiplied by the lattice spacing.
MetricGraph attach_lead(const MetricGraph& graph, const Site& site,
                        LeadDirection direction);
MetricGraph detach_leads(const MetricGraph& graph);

struct ValidationReport {
  double ell0 = 0.0;
  double L0 = 0.0;
  int N0 = 0;
  bool connected = false;
  std::vector<std::string> violations;

  bool admissible() const { return violations.empty(); }
};

ValidationReport validate(const MetricGraph& graph);

// Independent connectivity check used by validate and the tests.
std::vector<int> connected_components(const MetricGraph& graph);

}  // namespace latticewave
