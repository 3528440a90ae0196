#include "latticewave/graph_io.hpp"

#include "latticewave/io.hpp"

namespace latticewave {

using nlohmann::json;

namespace {

json potential_to_json(const Potential& p) {
  switch (p.type) {
    case Potential::Type::zero: return {{"type", "zero"}};
    case Potential::Type::constant: return {{"type", "const"}, {"value", p.value}};
    case Potential::Type::samples: return {{"type", "samples"}, {"values", p.samples}};
  }
  return {};
}

Potential potential_from_json(const json& j) {
  auto type = j.at("type").get<std::string>();
  if (type == "zero") return Potential::zero();
  if (type == "const") return Potential::constant(j.at("value").get<double>());
  if (type == "samples") return Potential::sampled(j.at("values").get<std::vector<double>>());
  throw GraphError("unknown potential type '" + type + "'");
}

}  // namespace

json graph_to_json(const MetricGraph& graph) {
  json vertices = json::array();
  for (const auto& v : graph.vertices()) {
    json pos = json::array();
    for (int a = 0; a < graph.dimension(); ++a) pos.push_back(v.pos[a]);
    vertices.push_back(
        {{"id", v.id}, {"pos", pos}, {"kind", to_string(v.kind)}, {"alpha", v.alpha}});
  }
  json edges = json::array();
  for (const auto& e : graph.edges())
    edges.push_back({{"j", e.j},
                     {"n", e.n},
                     {"length", e.length},
                     {"potential", potential_to_json(e.potential)}});
  json leads = json::array();
  for (const auto& l : graph.leads())
    leads.push_back({{"vertex", l.vertex}, {"direction", to_string(l.direction)}});

  json j;
  j["dimension"] = graph.dimension();
  j["spacing"] = graph.spacing() ? json(*graph.spacing()) : json(nullptr);
  j["vertices"] = std::move(vertices);
  j["edges"] = std::move(edges);
  j["leads"] = std::move(leads);
  return j;
}

MetricGraph graph_from_json(const json& j) {
  try {
    int dimension = j.at("dimension").get<int>();
    std::optional<double> spacing;
    if (j.contains("spacing") && !j.at("spacing").is_null())
      spacing = j.at("spacing").get<double>();

    std::vector<Vertex> vertices;
    for (const auto& jv : j.at("vertices")) {
      Vertex v;
      v.id = jv.at("id").get<int>();
      auto pos = jv.at("pos").get<std::vector<double>>();
      if (static_cast<int>(pos.size()) != dimension)
        throw GraphError("vertex position length differs from dimension");
      for (int a = 0; a < dimension; ++a) v.pos[a] = pos[a];
      v.kind = vertex_kind_from_string(jv.at("kind").get<std::string>());
      v.alpha = jv.at("alpha").get<double>();
      vertices.push_back(v);
    }
    std::vector<Edge> edges;
    for (const auto& je : j.at("edges")) {
      Edge e;
      e.j = je.at("j").get<int>();
      e.n = je.at("n").get<int>();
      e.length = je.at("length").get<double>();
      e.potential = potential_from_json(je.at("potential"));
      edges.push_back(std::move(e));
    }
    std::vector<Lead> leads;
    if (j.contains("leads"))
      for (const auto& jl : j.at("leads"))
        leads.push_back({jl.at("vertex").get<int>(),
                         lead_direction_from_string(jl.at("direction").get<std::string>())});
    return MetricGraph(dimension, spacing, std::move(vertices), std::move(edges),
                       std::move(leads));
  } catch (const json::exception& e) {
    throw GraphError(std::string("malformed graph JSON: ") + e.what());
  }
}

void save_graph(const std::filesystem::path& path, const MetricGraph& graph) {
  write_json(path, graph_to_json(graph));
}

MetricGraph load_graph(const std::filesystem::path& path) {
  return graph_from_json(read_json(path));
}

}  // namespace latticewave
