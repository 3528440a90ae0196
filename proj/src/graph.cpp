#include "latticewave/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>
#include <utility>

namespace latticewave {

const char* to_string(VertexKind kind) {
  switch (kind) {
    case VertexKind::interior: return "interior";
    case VertexKind::boundary: return "boundary";
    case VertexKind::lead_port: return "lead-port";
  }
  return "?";
}

const char* to_string(LeadDirection direction) {
  return direction == LeadDirection::incoming ? "incoming" : "outgoing";
}

VertexKind vertex_kind_from_string(const std::string& s) {
  if (s == "interior") return VertexKind::interior;
  if (s == "boundary") return VertexKind::boundary;
  if (s == "lead-port") return VertexKind::lead_port;
  throw GraphError("unknown vertex kind '" + s + "'");
}

LeadDirection lead_direction_from_string(const std::string& s) {
  if (s == "incoming") return LeadDirection::incoming;
  if (s == "outgoing") return LeadDirection::outgoing;
  throw GraphError("unknown lead direction '" + s + "'");
}

Potential Potential::constant(double c) {
  Potential p;
  p.type = Type::constant;
  p.value = c;
  return p;
}

Potential Potential::sampled(std::vector<double> values) {
  if (values.size() < 2) throw GraphError("sampled potential needs at least 2 samples");
  Potential p;
  p.type = Type::samples;
  p.samples = std::move(values);
  return p;
}

double Potential::at(double t, double length) const {
  switch (type) {
    case Type::zero: return 0.0;
    case Type::constant: return value;
    case Type::samples: {
      const auto m = samples.size() - 1;
      double s = std::clamp(t / length, 0.0, 1.0) * static_cast<double>(m);
      auto i = std::min(static_cast<std::size_t>(s), m - 1);
      double w = s - static_cast<double>(i);
      return (1.0 - w) * samples[i] + w * samples[i + 1];
    }
  }
  return 0.0;
}

double Potential::min_value() const {
  switch (type) {
    case Type::zero: return 0.0;
    case Type::constant: return value;
    case Type::samples: return *std::min_element(samples.begin(), samples.end());
  }
  return 0.0;
}

double Potential::max_value() const {
  switch (type) {
    case Type::zero: return 0.0;
    case Type::constant: return value;
    case Type::samples: return *std::max_element(samples.begin(), samples.end());
  }
  return 0.0;
}

bool Potential::bounded() const {
  switch (type) {
    case Type::zero: return true;
    case Type::constant: return std::isfinite(value);
    case Type::samples:
      return std::all_of(samples.begin(), samples.end(),
                         [](double x) { return std::isfinite(x); });
  }
  return false;
}

MetricGraph::MetricGraph(int dimension, std::optional<double> spacing,
                         std::vector<Vertex> vertices, std::vector<Edge> edges,
                         std::vector<Lead> leads,
                         std::vector<std::string> warnings)
    : dimension_(dimension),
      spacing_(spacing),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      leads_(std::move(leads)),
      warnings_(std::move(warnings)) {
  if (dimension_ < 1 || dimension_ > 3)
    throw GraphError("dimension must be 1, 2 or 3");
  if (spacing_ && !(*spacing_ > 0.0)) throw GraphError("spacing must be positive");

  const int nv = static_cast<int>(vertices_.size());
  for (int v = 0; v < nv; ++v) {
    const auto& vx = vertices_[v];
    if (vx.id != v) throw GraphError("vertex ids must equal their index");
    if (!std::isfinite(vx.alpha))
      throw GraphError("vertex " + std::to_string(v) +
                       ": coupling constant must be finite");
  }

  std::set<std::pair<int, int>> seen;
  std::vector<int> counts(nv, 0);
  for (const auto& e : edges_) {
    if (e.j < 0 || e.j >= nv || e.n < 0 || e.n >= nv)
      throw GraphError("edge endpoint out of range");
    if (e.j == e.n) throw GraphError("self-loops are not supported");
    if (!seen.emplace(std::min(e.j, e.n), std::max(e.j, e.n)).second)
      throw GraphError("more than one edge between vertices " + std::to_string(e.j) +
                       " and " + std::to_string(e.n));
    ++counts[e.j];
    ++counts[e.n];
  }

  incidence_offsets_.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) incidence_offsets_[v + 1] = incidence_offsets_[v] + counts[v];
  incidence_.assign(incidence_offsets_.back(), 0);
  std::vector<int> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    incidence_[fill[edges_[e].j]++] = e;
    incidence_[fill[edges_[e].n]++] = e;
  }

  std::set<std::pair<int, LeadDirection>> lead_seen;
  for (const auto& lead : leads_) {
    if (lead.vertex < 0 || lead.vertex >= nv) throw GraphError("lead vertex out of range");
    if (vertices_[lead.vertex].kind != VertexKind::lead_port)
      throw GraphError("lead attached to a vertex not marked lead-port");
    if (!lead_seen.emplace(lead.vertex, lead.direction).second)
      throw GraphError("duplicate lead on vertex " + std::to_string(lead.vertex));
  }

  interior_index_.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    const auto& vx = vertices_[v];
    if (vx.kind == VertexKind::boundary) {
      if (counts[v] != 1)
        throw GraphError("boundary vertex " + std::to_string(v) +
                         " must have exactly one incident edge");
      continue;
    }
    if (vx.kind == VertexKind::lead_port && leads_at(v) == 0)
      throw GraphError("lead-port vertex " + std::to_string(v) + " has no lead");
    interior_index_[v] = static_cast<int>(interior_.size());
    interior_.push_back(v);
  }
}

std::span<const int> MetricGraph::incident(int v) const {
  return std::span<const int>(incidence_).subspan(
      incidence_offsets_.at(v), incidence_offsets_.at(v + 1) - incidence_offsets_.at(v));
}

int MetricGraph::leads_at(int v) const {
  return static_cast<int>(std::count_if(leads_.begin(), leads_.end(),
                                        [v](const Lead& l) { return l.vertex == v; }));
}

int MetricGraph::degree(int v) const {
  return static_cast<int>(incident(v).size()) + leads_at(v);
}

bool MetricGraph::operator==(const MetricGraph& other) const {
  return dimension_ == other.dimension_ && spacing_ == other.spacing_ &&
         vertices_ == other.vertices_ && edges_ == other.edges_ &&
         leads_ == other.leads_;
}

namespace {

// Lattice sites with their cells. A site or link counts as interior to the
// cell union only if it has its full complement of cells and all of them
// are present.
struct CellComplex {
  std::vector<Point> pos;
  std::vector<char> present;
  std::vector<std::array<int, 2>> links;
  std::vector<std::vector<int>> cells;
  int cells_per_site = 0;
  int cells_per_link = 0;
};

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

MetricGraph realize(const CellComplex& cx, int dimension, double spacing,
                    const AlphaFn& alpha) {
  const int ns = static_cast<int>(cx.pos.size());
  const int nl = static_cast<int>(cx.links.size());

  std::unordered_map<std::uint64_t, int> link_of;
  link_of.reserve(nl * 2);
  for (int l = 0; l < nl; ++l) link_of.emplace(pair_key(cx.links[l][0], cx.links[l][1]), l);

  std::vector<int> site_cells(ns, 0), site_cells_present(ns, 0);
  std::vector<int> link_cells(nl, 0), link_cells_present(nl, 0);
  for (const auto& cell : cx.cells) {
    bool full = std::all_of(cell.begin(), cell.end(), [&](int s) { return cx.present[s] != 0; });
    for (int s : cell) {
      ++site_cells[s];
      site_cells_present[s] += full;
    }
    for (std::size_t a = 0; a < cell.size(); ++a)
      for (std::size_t b = a + 1; b < cell.size(); ++b) {
        auto it = link_of.find(pair_key(cell[a], cell[b]));
        if (it == link_of.end()) continue;
        ++link_cells[it->second];
        link_cells_present[it->second] += full;
      }
  }

  std::vector<char> interior(ns, 0);
  for (int s = 0; s < ns; ++s)
    interior[s] = cx.present[s] && site_cells[s] == cx.cells_per_site &&
                  site_cells_present[s] == cx.cells_per_site;

  std::vector<char> kept(nl, 0);
  std::vector<std::vector<int>> site_links(ns);
  for (int l = 0; l < nl; ++l) {
    const auto [a, b] = cx.links[l];
    kept[l] = cx.present[a] && cx.present[b] && link_cells[l] == cx.cells_per_link &&
              link_cells_present[l] == cx.cells_per_link;
    if (kept[l]) {
      site_links[a].push_back(l);
      site_links[b].push_back(l);
    }
  }

  // Vertex numbering: sites in order; a boundary site yields one Dirichlet
  // copy per remaining link.
  std::vector<Vertex> vertices;
  std::vector<int> site_vertex(ns, -1);
  std::unordered_map<std::uint64_t, int> copy_vertex;
  for (int s = 0; s < ns; ++s) {
    if (!cx.present[s]) continue;
    if (interior[s]) {
      site_vertex[s] = static_cast<int>(vertices.size());
      vertices.push_back({site_vertex[s], cx.pos[s], VertexKind::interior,
                          alpha ? alpha(cx.pos[s]) : 0.0});
      continue;
    }
    for (int l : site_links[s]) {
      int id = static_cast<int>(vertices.size());
      copy_vertex.emplace((static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(l), id);
      vertices.push_back({id, cx.pos[s], VertexKind::boundary, 0.0});
    }
  }
  auto endpoint = [&](int s, int l) {
    if (interior[s]) return site_vertex[s];
    return copy_vertex.at((static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(l));
  };

  std::vector<Edge> edges;
  for (int l = 0; l < nl; ++l) {
    if (!kept[l]) continue;
    edges.push_back({endpoint(cx.links[l][0], l), endpoint(cx.links[l][1], l), spacing,
                     Potential::zero()});
  }

  bool any_interior = std::any_of(vertices.begin(), vertices.end(), [](const Vertex& v) {
    return v.kind == VertexKind::interior;
  });
  if (!any_interior) throw GraphError("lattice region has no interior vertex");

  MetricGraph whole(dimension, spacing, vertices, edges);
  auto comp = connected_components(whole);
  int ncomp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  if (ncomp <= 1) return whole;

  // Keep the largest component; ties go to the lowest label.
  std::vector<int> sizes(ncomp, 0);
  for (int c : comp) ++sizes[c];
  int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<int> remap(vertices.size(), -1);
  std::vector<Vertex> kept_vertices;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    if (comp[v] != best) continue;
    remap[v] = static_cast<int>(kept_vertices.size());
    Vertex vx = vertices[v];
    vx.id = remap[v];
    kept_vertices.push_back(vx);
  }
  std::vector<Edge> kept_edges;
  for (auto e : edges) {
    if (remap[e.j] < 0) continue;
    e.j = remap[e.j];
    e.n = remap[e.n];
    kept_edges.push_back(e);
  }
  std::vector<std::string> warnings{
      "disconnected lattice: kept the largest of " + std::to_string(ncomp) +
      " components (" + std::to_string(kept_vertices.size()) + " of " +
      std::to_string(vertices.size()) + " vertices)"};
  return MetricGraph(dimension, spacing, std::move(kept_vertices), std::move(kept_edges), {},
                     std::move(warnings));
}

void check_spacing(double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw GraphError("lattice spacing must be positive");
}

// Cubic complex over a block of vertices, padded by one layer so that every
// real site has its full set of neighbouring cells.
CellComplex cubic_complex(const Point& origin, std::span<const int> extents, double spacing,
                          const std::function<bool(const Point&)>& present) {
  const int dim = static_cast<int>(extents.size());
  std::array<int, 3> padded{1, 1, 1};
  for (int a = 0; a < dim; ++a) padded[a] = extents[a] + 2;
  const int ns = padded[0] * padded[1] * padded[2];
  auto index = [&](int x, int y, int z) { return (z * padded[1] + y) * padded[0] + x; };

  CellComplex cx;
  cx.pos.resize(ns);
  cx.present.assign(ns, 0);
  cx.cells_per_site = 1 << dim;
  cx.cells_per_link = 1 << (dim - 1);

  for (int z = 0; z < padded[2]; ++z)
    for (int y = 0; y < padded[1]; ++y)
      for (int x = 0; x < padded[0]; ++x) {
        std::array<int, 3> g{x, y, z};
        Point p{};
        bool inside = true;
        for (int a = 0; a < dim; ++a) {
          int i = g[a] - 1;
          p[a] = origin[a] + i * spacing;
          inside = inside && i >= 0 && i < extents[a];
        }
        int s = index(x, y, z);
        cx.pos[s] = p;
        cx.present[s] = inside && (!present || present(p));
      }

  for (int z = 0; z < padded[2]; ++z)
    for (int y = 0; y < padded[1]; ++y)
      for (int x = 0; x < padded[0]; ++x) {
        std::array<int, 3> g{x, y, z};
        for (int a = 0; a < dim; ++a) {
          auto h = g;
          ++h[a];
          if (h[a] >= padded[a]) continue;
          cx.links.push_back({index(x, y, z), index(h[0], h[1], h[2])});
        }
        bool has_cell = true;
        for (int a = 0; a < dim; ++a) has_cell = has_cell && g[a] + 1 < padded[a];
        if (!has_cell) continue;
        std::vector<int> cell;
        for (int corner = 0; corner < (1 << dim); ++corner) {
          auto h = g;
          for (int a = 0; a < dim; ++a) h[a] += (corner >> a) & 1;
          cell.push_back(index(h[0], h[1], h[2]));
        }
        cx.cells.push_back(std::move(cell));
      }
  return cx;
}

}  // namespace

MetricGraph build_cubic_lattice(std::span<const int> extents, double spacing,
                                const AlphaFn& alpha) {
  check_spacing(spacing);
  if (extents.empty() || extents.size() > 3) throw GraphError("dimension must be 1, 2 or 3");
  for (int e : extents)
    if (e < 2) throw GraphError("lattice needs at least 2 vertices per axis");
  auto cx = cubic_complex(Point{}, extents, spacing, {});
  return realize(cx, static_cast<int>(extents.size()), spacing, alpha);
}

MetricGraph build_square_lattice(int n_rows, int n_cols, double spacing, const AlphaFn& alpha) {
  std::array<int, 2> extents{n_cols, n_rows};
  return build_cubic_lattice(extents, spacing, alpha);
}

MetricGraph build_domain_lattice(const Indicator& inside, const Box& box, double spacing,
                                 const AlphaFn& alpha) {
  check_spacing(spacing);
  if (box.dimension < 1 || box.dimension > 3) throw GraphError("dimension must be 1, 2 or 3");
  std::vector<int> extents(box.dimension);
  for (int a = 0; a < box.dimension; ++a) {
    double span = box.hi[a] - box.lo[a];
    if (!(span > 0.0)) throw GraphError("degenerate bounding box");
    extents[a] = static_cast<int>(std::floor(span / spacing + 1e-9)) + 1;
    if (extents[a] < 2) throw GraphError("bounding box smaller than one lattice cell");
  }
  auto cx = cubic_complex(box.lo, extents, spacing, inside);
  return realize(cx, box.dimension, spacing, alpha);
}

MetricGraph build_sinai_graph(int n, double spacing, const Disc& disc) {
  check_spacing(spacing);
  if (n < 2) throw GraphError("lattice needs at least 2 vertices per axis");
  const double side = (n - 1) * spacing;
  if (!(disc.radius > 0.0)) throw GraphError("disc radius must be positive");
  for (int a = 0; a < 2; ++a) {
    if (disc.center[a] - disc.radius <= 0.0 || disc.center[a] + disc.radius >= side)
      throw GraphError("disc must lie strictly inside the square");
  }
  Box box{{0.0, 0.0, 0.0}, {side, side, 0.0}, 2};
  const Disc d = disc;
  auto outside_disc = [d](const Point& p) {
    return std::hypot(p[0] - d.center[0], p[1] - d.center[1]) >= d.radius;
  };
  return build_domain_lattice(outside_disc, box, spacing);
}

MetricGraph build_triangular_lattice(const Indicator& inside, const Box& box, double spacing,
                                     const AlphaFn& alpha) {
  check_spacing(spacing);
  if (box.dimension != 2) throw GraphError("triangular lattice is two-dimensional");
  const double row = spacing * std::sqrt(3.0) / 2.0;
  const double w = box.hi[0] - box.lo[0];
  const double h = box.hi[1] - box.lo[1];
  if (!(w > 0.0) || !(h >= 0.0)) throw GraphError("degenerate bounding box");
  const double tol = 1e-9 * spacing;
  const int rows = static_cast<int>(std::floor(h / row + 1e-9)) + 1;

  // Sites (a, b) at lo + ((a + b/2) l, b row); one padding layer all round.
  CellComplex cx;
  std::unordered_map<std::uint64_t, int> index;
  auto key = [](int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  };
  for (int b = -1; b <= rows; ++b) {
    int a_lo = static_cast<int>(std::ceil(-b / 2.0 - 1e-9)) - 1;
    int a_hi = static_cast<int>(std::floor(w / spacing - b / 2.0 + 1e-9)) + 1;
    for (int a = a_lo; a <= a_hi; ++a) {
      Point p{box.lo[0] + (a + 0.5 * b) * spacing, box.lo[1] + b * row, 0.0};
      bool in_box = p[0] >= box.lo[0] - tol && p[0] <= box.hi[0] + tol &&
                    p[1] >= box.lo[1] - tol && p[1] <= box.hi[1] + tol;
      index.emplace(key(a, b), static_cast<int>(cx.pos.size()));
      cx.pos.push_back(p);
      cx.present.push_back(in_box && (!inside || inside(p)));
    }
  }
  cx.cells_per_site = 6;
  cx.cells_per_link = 2;
  auto find = [&](int a, int b) {
    auto it = index.find(key(a, b));
    return it == index.end() ? -1 : it->second;
  };
  // Iterate in site order for deterministic numbering.
  std::vector<std::array<int, 2>> coords(cx.pos.size());
  for (const auto& [k, s] : index)
    coords[s] = {static_cast<int>(static_cast<std::int32_t>(k >> 32)),
                 static_cast<int>(static_cast<std::int32_t>(k & 0xffffffffu))};
  for (int s = 0; s < static_cast<int>(coords.size()); ++s) {
    auto [a, b] = coords[s];
    for (auto [da, db] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{-1, 1}}) {
      int t = find(a + da, b + db);
      if (t >= 0) cx.links.push_back({s, t});
    }
    int r = find(a + 1, b), u = find(a, b + 1), ru = find(a + 1, b + 1);
    if (r >= 0 && u >= 0) cx.cells.push_back({s, r, u});
    if (r >= 0 && u >= 0 && ru >= 0) cx.cells.push_back({r, u, ru});
  }
  return realize(cx, 2, spacing, alpha);
}

Indicator hexagon_indicator(const Point& center, double radius) {
  const double apothem = radius * std::sqrt(3.0) / 2.0 * (1.0 + 1e-9);
  return [center, apothem](const Point& p) {
    double dx = p[0] - center[0], dy = p[1] - center[1];
    for (double deg : {30.0, 90.0, 150.0}) {
      double t = deg * M_PI / 180.0;
      if (std::abs(dx * std::cos(t) + dy * std::sin(t)) > apothem) return false;
    }
    return true;
  };
}

std::optional<int> find_vertex(const MetricGraph& graph, const Point& pos, double tol) {
  for (const auto& v : graph.vertices()) {
    if (v.kind == VertexKind::boundary) continue;
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) d2 += (v.pos[a] - pos[a]) * (v.pos[a] - pos[a]);
    if (std::sqrt(d2) <= tol) return v.id;
  }
  return std::nullopt;
}

MetricGraph attach_lead(const MetricGraph& graph, int vertex, LeadDirection direction) {
  if (vertex < 0 || vertex >= static_cast<int>(graph.num_vertices()))
    throw GraphError("lead vertex out of range");
  if (graph.is_boundary(vertex))
    throw GraphError("cannot attach a lead to boundary vertex " + std::to_string(vertex));
  for (const auto& l : graph.leads())
    if (l.vertex == vertex && l.direction == direction)
      throw GraphError("duplicate lead on vertex " + std::to_string(vertex));
  std::vector<Vertex> vertices(graph.vertices().begin(), graph.vertices().end());
  vertices[vertex].kind = VertexKind::lead_port;
  std::vector<Lead> leads(graph.leads().begin(), graph.leads().end());
  leads.push_back({vertex, direction});
  return MetricGraph(graph.dimension(), graph.spacing(), std::move(vertices),
                     {graph.edges().begin(), graph.edges().end()}, std::move(leads),
                     {graph.warnings().begin(), graph.warnings().end()});
}

MetricGraph attach_lead(const MetricGraph& graph, const Site& site, LeadDirection direction) {
  if (!graph.spacing()) throw GraphError("site addressing needs a lattice spacing");
  Point p{};
  for (int a = 0; a < graph.dimension(); ++a) p[a] = site[a] * *graph.spacing();
  auto v = find_vertex(graph, p, 1e-9 * *graph.spacing());
  if (!v) {
    // Distinguish a boundary site from a missing one for the error message.
    for (const auto& vx : graph.vertices()) {
      double d = std::hypot(vx.pos[0] - p[0], vx.pos[1] - p[1], vx.pos[2] - p[2]);
      if (d <= 1e-9 * *graph.spacing())
        throw GraphError("cannot attach a lead to a boundary site");
    }
    throw GraphError("no lattice vertex at the requested site");
  }
  return attach_lead(graph, *v, direction);
}

MetricGraph detach_leads(const MetricGraph& graph) {
  std::vector<Vertex> vertices(graph.vertices().begin(), graph.vertices().end());
  for (auto& v : vertices)
    if (v.kind == VertexKind::lead_port) v.kind = VertexKind::interior;
  return MetricGraph(graph.dimension(), graph.spacing(), std::move(vertices),
                     {graph.edges().begin(), graph.edges().end()}, {},
                     {graph.warnings().begin(), graph.warnings().end()});
}

std::vector<int> connected_components(const MetricGraph& graph) {
  const int nv = static_cast<int>(graph.num_vertices());
  std::vector<int> label(nv, -1);
  int next = 0;
  for (int start = 0; start < nv; ++start) {
    if (label[start] >= 0) continue;
    std::queue<int> todo;
    todo.push(start);
    label[start] = next;
    while (!todo.empty()) {
      int v = todo.front();
      todo.pop();
      for (int e : graph.incident(v)) {
        int w = graph.edge(e).other(v);
        if (label[w] < 0) {
          label[w] = next;
          todo.push(w);
        }
      }
    }
    ++next;
  }
  return label;
}

ValidationReport validate(const MetricGraph& graph) {
  ValidationReport report;
  report.ell0 = std::numeric_limits<double>::infinity();
  report.L0 = 0.0;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(static_cast<int>(e));
    report.ell0 = std::min(report.ell0, edge.length);
    report.L0 = std::max(report.L0, edge.length);
    if (!edge.potential.bounded())
      report.violations.push_back("(i) edge " + std::to_string(e) + ": unbounded potential");
    if (graph.spacing()) {
      const auto& a = graph.vertex(edge.j).pos;
      const auto& b = graph.vertex(edge.n).pos;
      double d = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
      if (std::abs(d - edge.length) > 1e-12 * std::max(1.0, edge.length))
        report.violations.push_back("edge " + std::to_string(e) +
                                    ": length differs from embedded distance");
    }
  }
  if (graph.num_edges() == 0) report.ell0 = 0.0;
  if (!(report.ell0 > 0.0) && graph.num_edges() > 0)
    report.violations.push_back("(ii) minimal edge length is not positive");
  if (!std::isfinite(report.L0)) report.violations.push_back("(iii) edge lengths unbounded");
  for (std::size_t v = 0; v < graph.num_vertices(); ++v)
    report.N0 = std::max(report.N0, graph.degree(static_cast<int>(v)));

  auto comp = connected_components(graph);
  report.connected = std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
  if (!report.connected) report.violations.push_back("graph is not connected");
  if (graph.interior().empty()) report.violations.push_back("graph has no interior vertex");
  return report;
}

}  // namespace latticewave
