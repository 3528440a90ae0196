#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <queue>
#include <set>

#include "latticewave/graph.hpp"
#include "latticewave/graph_io.hpp"

using namespace latticewave;

namespace {

double dist(const Point& a, const Point& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

void check_embedding(const MetricGraph& g) {
  for (const auto& e : g.edges())
    CHECK(std::abs(e.length - dist(g.vertex(e.j).pos, g.vertex(e.n).pos)) <= 1e-12);
}

using Key = std::pair<long, long>;
Key key_of(const Point& p, double l) { return {std::lround(p[0] / l), std::lround(p[1] / l)}; }

// Distinct lattice sites carried by the graph (boundary copies included).
std::set<Key> site_set(const MetricGraph& g, double l) {
  std::set<Key> s;
  for (const auto& v : g.vertices()) s.insert(key_of(v.pos, l));
  return s;
}

// Interior-vertex adjacency of an m x n interior block, built by brute force.
int brute_interior_count(int rows, int cols) { return (rows - 2) * (cols - 2); }

int bfs_components(const MetricGraph& g) {
  std::vector<std::vector<int>> adj(g.num_vertices());
  for (const auto& e : g.edges()) {
    adj[e.j].push_back(e.n);
    adj[e.n].push_back(e.j);
  }
  std::vector<char> seen(g.num_vertices(), 0);
  int comps = 0;
  for (std::size_t s = 0; s < g.num_vertices(); ++s) {
    if (seen[s]) continue;
    ++comps;
    std::queue<int> q;
    q.push(static_cast<int>(s));
    seen[s] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int w : adj[v])
        if (!seen[w]) seen[w] = 1, q.push(w);
    }
  }
  return comps;
}

}  // namespace

TEST_CASE("square lattice with a single interior vertex") {
  auto g = build_square_lattice(3, 3, 1.0);
  REQUIRE(g.interior().size() == 1);
  const int c = g.interior()[0];
  CHECK(g.vertex(c).pos == Point{1, 1, 0});
  CHECK(g.degree(c) == 4);
  for (const auto& v : g.vertices())
    if (v.kind == VertexKind::boundary) CHECK(g.incident(v.id).size() == 1);
  check_embedding(g);
}

TEST_CASE("4x5 lattice matches a brute-force adjacency count") {
  auto g = build_square_lattice(4, 5, 0.5);
  CHECK(static_cast<int>(g.interior().size()) == brute_interior_count(4, 5));
  std::set<Key> interior_sites;
  for (int v : g.interior()) interior_sites.insert(key_of(g.vertex(v).pos, 0.5));
  for (int v : g.interior()) {
    CHECK(g.degree(v) == 4);
    // brute force: 4 lattice neighbours, each an interior site or a boundary copy
    auto [x, y] = key_of(g.vertex(v).pos, 0.5);
    CHECK(x >= 1);
    CHECK(x <= 3);
    CHECK(y >= 1);
    CHECK(y <= 2);
  }
  check_embedding(g);
  auto rep = validate(g);
  CHECK(rep.admissible());
  CHECK(rep.N0 == 4);
}

TEST_CASE("97x97 lattice before disc removal") {
  auto g = build_square_lattice(97, 97, 0.15);
  CHECK(g.interior().size() == 95u * 95u);
  check_embedding(g);
}

TEST_CASE("lattice builders reject bad input") {
  CHECK_THROWS_AS(build_square_lattice(3, 3, 0.0), GraphError);
  CHECK_THROWS_AS(build_square_lattice(1, 3, 1.0), GraphError);
  CHECK_THROWS_AS(build_square_lattice(2, 2, 1.0), GraphError);  // no interior vertex
}

TEST_CASE("domain lattice on the full box reproduces the square lattice") {
  Box box{{0, 0, 0}, {2.0, 1.5, 0}, 2};
  auto full = build_domain_lattice([](const Point&) { return true; }, box, 0.25);
  CHECK(full == build_square_lattice(7, 9, 0.25));
}

TEST_CASE("L-shaped domain splits the re-entrant corner") {
  Box box{{0, 0, 0}, {3, 3, 0}, 2};
  auto g = build_domain_lattice([](const Point& p) { return !(p[0] > 2.0 && p[1] > 2.0); }, box, 1.0);
  std::set<Key> interior;
  for (int v : g.interior()) interior.insert(key_of(g.vertex(v).pos, 1.0));
  CHECK(interior == std::set<Key>{{1, 1}, {1, 2}, {2, 1}});
  int copies = 0;
  std::set<Key> copy_neighbours;
  for (const auto& v : g.vertices()) {
    if (key_of(v.pos, 1.0) != Key{2, 2}) continue;
    ++copies;
    CHECK(v.kind == VertexKind::boundary);
    REQUIRE(g.incident(v.id).size() == 1);
    const auto& e = g.edge(g.incident(v.id)[0]);
    copy_neighbours.insert(key_of(g.vertex(e.other(v.id)).pos, 1.0));
  }
  CHECK(copies == 2);
  CHECK(copy_neighbours == std::set<Key>{{1, 2}, {2, 1}});
  check_embedding(g);
}

TEST_CASE("sinai builder agrees with the domain builder") {
  const int n = 41;
  const double l = 0.25;
  Disc disc{{5.0, 5.0, 0}, 2.0};
  auto sinai = build_sinai_graph(n, l, disc);
  Box box{{0, 0, 0}, {(n - 1) * l, (n - 1) * l, 0}, 2};
  auto domain = build_domain_lattice(
      [&](const Point& p) { return std::hypot(p[0] - 5.0, p[1] - 5.0) >= 2.0; }, box, l);
  CHECK(site_set(sinai, l) == site_set(domain, l));
  CHECK(sinai.interior().size() == domain.interior().size());
}

TEST_CASE("disc example: removed sites match a point-in-disc oracle") {
  auto g = build_sinai_graph(9, 1.0, Disc{{4, 4, 0}, 1.5});
  std::set<Key> removed;
  for (int x = 0; x < 9; ++x)
    for (int y = 0; y < 9; ++y)
      if (std::hypot(x - 4.0, y - 4.0) < 1.5) removed.insert({x, y});
  // (3,3), (3,5), (5,3), (5,5) are at distance sqrt(2) < 1.5.
  CHECK(removed.size() == 9);
  auto present = site_set(g, 1.0);
  for (int x = 0; x < 9; ++x)
    for (int y = 0; y < 9; ++y) {
      bool corner = (x == 0 || x == 8) && (y == 0 || y == 8);
      if (corner) continue;  // perimeter corners have no edge
      CHECK(present.count({x, y}) == (removed.count({x, y}) ? 0u : 1u));
    }
  for (const auto& v : g.vertices())
    if (v.kind == VertexKind::boundary) CHECK(g.incident(v.id).size() == 1);
}

TEST_CASE("tiny disc between lattice points leaves the lattice unchanged") {
  auto g = build_sinai_graph(9, 1.0, Disc{{4.5, 4.5, 0}, 0.3});
  CHECK(g == build_square_lattice(9, 9, 1.0));
}

TEST_CASE("reference sinai graph") {
  auto g = build_sinai_graph(97, 0.15, Disc{{7.2, 7.2, 0}, 2.88});
  auto rep = validate(g);
  CHECK(rep.admissible());
  CHECK(rep.N0 == 4);
  CHECK(rep.connected);
  CHECK(bfs_components(g) == 1);
  CHECK(rep.ell0 == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(rep.L0 == doctest::Approx(0.15).epsilon(1e-12));
  check_embedding(g);
  for (int v : g.interior()) {
    CHECK(g.degree(v) == 4);
    const auto& p = g.vertex(v).pos;
    CHECK(std::hypot(p[0] - 7.2, p[1] - 7.2) >= 2.88);
  }
  CHECK_THROWS_AS(build_sinai_graph(97, 0.15, Disc{{7.2, 7.2, 0}, 8.0}), GraphError);
  CHECK_THROWS_AS(build_sinai_graph(97, 0.15, Disc{{20, 7.2, 0}, 1.0}), GraphError);
}

TEST_CASE("triangular lattice degrees") {
  Box box{{0, 0, 0}, {1, std::sqrt(3.0) / 2, 0}, 2};
  auto up_triangle = [](const Point& p) {
    const double s3 = std::sqrt(3.0);
    return p[1] >= -1e-12 && s3 * p[0] - p[1] >= -1e-12 && s3 * (1 - p[0]) - p[1] >= -1e-12;
  };
  CHECK_THROWS_AS(build_triangular_lattice(up_triangle, box, 1.0), GraphError);

  const double s3 = std::sqrt(3.0);
  Box hb{{0, 0, 0}, {4, 2 * s3, 0}, 2};
  auto hex = build_triangular_lattice(hexagon_indicator({2, s3, 0}, 2.0), hb, 1.0);
  auto centre = find_vertex(hex, {2, s3, 0});
  REQUIRE(centre);
  CHECK(hex.degree(*centre) == 6);
  CHECK(hex.interior().size() == 7);  // centre plus the first ring
  check_embedding(hex);

  auto big = build_triangular_lattice(hexagon_indicator({2, s3, 0}, 2.0), hb, 0.1);
  std::map<int, int> histogram;
  for (int v : big.interior()) histogram[big.degree(v)]++;
  CHECK(histogram.size() == 1);
  CHECK(histogram.begin()->first == 6);
  for (const auto& e : big.edges()) CHECK(e.length == doctest::Approx(0.1).epsilon(1e-12));
  check_embedding(big);
}

TEST_CASE("leads on the sinai graph") {
  auto base = build_sinai_graph(97, 0.15, Disc{{7.2, 7.2, 0}, 2.88});
  auto g = attach_lead(base, Site{14, 40, 0}, LeadDirection::incoming);
  g = attach_lead(g, Site{59, 80, 0}, LeadDirection::outgoing);
  REQUIRE(g.leads().size() == 2);
  for (const auto& lead : g.leads()) {
    CHECK(g.vertex(lead.vertex).kind == VertexKind::lead_port);
    CHECK(g.degree(lead.vertex) == 5);
  }
  CHECK(g.vertex(g.leads()[0].vertex).pos[0] == doctest::Approx(14 * 0.15));
  CHECK(g.vertex(g.leads()[0].vertex).pos[1] == doctest::Approx(40 * 0.15));
  CHECK(detach_leads(g) == base);
  CHECK_THROWS_AS(attach_lead(g, Site{14, 40, 0}, LeadDirection::incoming), GraphError);
  CHECK_THROWS_AS(attach_lead(base, Site{0, 40, 0}, LeadDirection::incoming), GraphError);
}

TEST_CASE("validation flags a zero-length edge") {
  auto plain = build_square_lattice(5, 5, 0.5);
  auto rep = validate(plain);
  CHECK(rep.admissible());
  CHECK(rep.ell0 == 0.5);
  CHECK(rep.L0 == 0.5);
  CHECK(rep.N0 == 4);

  std::vector<Vertex> vs{{0, {0, 0, 0}, VertexKind::boundary, 0},
                         {1, {1, 0, 0}, VertexKind::interior, 0},
                         {2, {1, 0, 0}, VertexKind::boundary, 0}};
  std::vector<Edge> es{{1, 0, 1.0, {}}, {2, 1, 0.0, {}}};
  MetricGraph bad(1, std::nullopt, vs, es);
  auto r2 = validate(bad);
  CHECK_FALSE(r2.admissible());
  CHECK(r2.ell0 == 0.0);
}

TEST_CASE("graph json round trip is lossless") {
  auto g = build_square_lattice(4, 4, 0.1 + 0.2, [](const Point& p) { return p[0] / 3.0; });
  g = attach_lead(g, Site{1, 1, 0}, LeadDirection::incoming);
  g = attach_lead(g, Site{1, 1, 0}, LeadDirection::outgoing);
  auto path = std::filesystem::temp_directory_path() / "lw_graph_roundtrip.json";
  save_graph(path, g);
  CHECK(load_graph(path) == g);
  std::filesystem::remove(path);

  std::vector<Vertex> vs{{0, {0, 0, 0}, VertexKind::boundary, 0}, {1, {0.7, 0, 0}, VertexKind::interior, 1.0 / 3},
                         {2, {1.9, 0, 0}, VertexKind::boundary, 0}};
  std::vector<Edge> es{{1, 0, 0.7, Potential::constant(2.5)},
                       {2, 1, 1.2, Potential::sampled({0.1, 1.0 / 7, -3.3})}};
  MetricGraph h(1, std::nullopt, vs, es);
  CHECK(graph_from_json(graph_to_json(h)) == h);
  auto j = graph_to_json(h);
  CHECK(j["spacing"].is_null());
  CHECK(j["edges"][0]["potential"]["type"] == "const");
  CHECK(j["edges"][1]["potential"]["type"] == "samples");
}
