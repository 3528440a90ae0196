#include "latticewave/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>

#include "latticewave/analysis.hpp"
#include "latticewave/billiard.hpp"
#include "latticewave/graph_io.hpp"
#include "latticewave/io.hpp"
#include "latticewave/scattering.hpp"
#include "latticewave/spectral.hpp"

namespace latticewave {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
constexpr double kPi = 3.14159265358979323846;

// --- schema helpers ---------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(where + "." + key + " is required");
  }
  if (!v->is_number()) throw ConfigError(where + "." + key + " must be a number");
  double x = v->get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

int integer(const json& obj, const char* key, const std::string& where, std::optional<int> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(where + "." + key + " is required");
  }
  if (!v->is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v->get<int>();
}

std::string text(const json& obj, const char* key, const std::string& where,
                 std::optional<std::string> fallback = {}) {
  const json* v = find(obj, key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError(where + "." + key + " is required");
  }
  if (!v->is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v->get<std::string>();
}

std::vector<double> numbers(const json& obj, const char* key, const std::string& where) {
  const json* v = find(obj, key);
  if (!v) throw ConfigError(where + "." + key + " is required");
  if (!v->is_array()) throw ConfigError(where + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& x : *v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& section(const json& config, const char* key) {
  static const json empty = json::object();
  const json* v = find(config, key);
  return v ? *v : empty;
}

int cells(double extent, double spacing, const std::string& where) {
  double c = extent / spacing;
  long r = std::lround(c);
  if (r < 1 || std::abs(c - r) > 1e-9 * std::max(1.0, c))
    throw ConfigError(where + ": spacing must divide the size");
  return static_cast<int>(r);
}

// --- geometry ---------------------------------------------------------------

struct Geometry {
  std::string lattice;
  double spacing = 0.0;
  int n_rows = 0, n_cols = 0;
  std::optional<Disc> disc;
  MetricGraph closed;  // without leads
  MetricGraph open;    // with leads
  std::vector<std::pair<Site, LeadDirection>> lead_sites;
};

std::pair<Box, Indicator> shape_domain(const std::string& shape, double size, const std::string& where) {
  if (!(size > 0.0)) throw ConfigError(where + ".size must be positive");
  const double s3 = std::sqrt(3.0);
  if (shape == "square")
    return {Box{{0, 0, 0}, {size, size, 0}, 2}, [size](const Point& p) {
              return p[0] >= 0 && p[1] >= 0 && p[0] <= size && p[1] <= size;
            }};
  if (shape == "triangle")
    return {Box{{0, 0, 0}, {size, s3 / 2 * size, 0}, 2}, [size, s3](const Point& p) {
              const double eps = 1e-12 * size;
              return p[1] >= -eps && s3 * p[0] - p[1] >= -eps && s3 * (size - p[0]) - p[1] >= -eps;
            }};
  if (shape == "hexagon")
    return {Box{{0, 0, 0}, {2 * size, s3 * size, 0}, 2}, hexagon_indicator({size, s3 / 2 * size, 0}, size)};
  throw ConfigError(where + ".shape must be square, triangle or hexagon");
}

// Continuum Dirichlet ground energy of a shape.
double shape_ground_energy(const std::string& shape, double size) {
  if (shape == "square") return 2 * kPi * kPi / (size * size);
  if (shape == "triangle") return 16 * kPi * kPi / (3 * size * size);
  throw ConfigError("converge.reference is required for shape " + shape);
}

Geometry build_geometry(const json& config) {
  const json* gp = find(config, "geometry");
  if (!gp) throw ConfigError("geometry is required");
  const json& g = *gp;
  const std::string where = "geometry";
  check_keys(g, {"lattice", "n", "n_rows", "n_cols", "extents", "spacing", "alpha", "disc", "shape", "size", "leads"},
             where);
  Geometry geo;
  geo.lattice = text(g, "lattice", where);
  geo.spacing = number(g, "spacing", where);
  if (!(geo.spacing > 0.0)) throw ConfigError("geometry.spacing must be positive");
  const double alpha = number(g, "alpha", where, 0.0);
  AlphaFn alpha_fn;
  if (alpha != 0.0) alpha_fn = [alpha](const Point&) { return alpha; };

  if (geo.lattice == "square") {
    int n = integer(g, "n", where, 0);
    geo.n_rows = integer(g, "n_rows", where, n);
    geo.n_cols = integer(g, "n_cols", where, n);
    if (geo.n_rows < 2 || geo.n_cols < 2) throw ConfigError("geometry needs n (or n_rows and n_cols) >= 2");
    geo.closed = build_square_lattice(geo.n_rows, geo.n_cols, geo.spacing, alpha_fn);
  } else if (geo.lattice == "sinai") {
    int n = integer(g, "n", where);
    if (n < 3) throw ConfigError("geometry.n must be at least 3");
    geo.n_rows = geo.n_cols = n;
    const double side = (n - 1) * geo.spacing;
    Disc disc{{side / 2, side / 2, 0}, 0.2 * side};
    if (const json* d = find(g, "disc")) {
      check_keys(*d, {"center", "radius"}, "geometry.disc");
      auto c = numbers(*d, "center", "geometry.disc");
      if (c.size() != 2) throw ConfigError("geometry.disc.center must have 2 components");
      disc = Disc{{c[0], c[1], 0}, number(*d, "radius", "geometry.disc")};
    }
    if (alpha != 0.0) throw ConfigError("geometry.alpha is not supported for the sinai lattice");
    geo.disc = disc;
    geo.closed = build_sinai_graph(n, geo.spacing, disc);
  } else if (geo.lattice == "triangular") {
    auto [box, inside] = shape_domain(text(g, "shape", where, "square"), number(g, "size", where), where);
    geo.closed = build_triangular_lattice(inside, box, geo.spacing, alpha_fn);
  } else if (geo.lattice == "cubic") {
    auto ext = numbers(g, "extents", where);
    std::vector<int> extents;
    for (double e : ext) {
      if (e != std::floor(e)) throw ConfigError("geometry.extents must be integers");
      extents.push_back(static_cast<int>(e));
    }
    geo.closed = build_cubic_lattice(extents, geo.spacing, alpha_fn);
  } else {
    throw ConfigError("geometry.lattice must be square, sinai, triangular or cubic");
  }

  geo.open = geo.closed;
  if (const json* leads = find(g, "leads")) {
    if (!leads->is_array()) throw ConfigError("geometry.leads must be an array");
    for (const auto& l : *leads) {
      check_keys(l, {"site", "direction"}, "geometry.leads[]");
      auto s = numbers(l, "site", "geometry.leads[]");
      if (s.empty() || s.size() > 3) throw ConfigError("geometry.leads[].site must have 1-3 components");
      Site site{0, 0, 0};
      for (std::size_t i = 0; i < s.size(); ++i) site[i] = static_cast<int>(std::lround(s[i]));
      LeadDirection dir;
      try {
        dir = lead_direction_from_string(text(l, "direction", "geometry.leads[]"));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(std::string("geometry.leads[].direction: ") + e.what());
      }
      geo.open = attach_lead(geo.open, site, dir);
      geo.lead_sites.emplace_back(site, dir);
    }
  }
  return geo;
}

// --- tasks ------------------------------------------------------------------

struct Context {
  const json& config;
  RunOptions options;
  Geometry geo;
  std::vector<fs::path> artifacts;
  std::optional<std::vector<EigenResult>> eigen;
  std::optional<ScatteringSolution> scatter;

  fs::path out(const std::string& name) {
    fs::path p = options.out_dir / name;
    artifacts.push_back(p);
    return p;
  }
  void log(const std::string& msg) const {
    if (options.verbose) std::cerr << "[latticewave] " << msg << '\n';
  }
};

std::string indexed(const std::string& stem, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return stem + "_" + buf + ".csv";
}

void write_vertex_vector(const fs::path& path, const MetricGraph& g, const Eigen::VectorXd& v) {
  CsvWriter out(path, {"id", "x", "y", "value"});
  auto interior = g.interior();
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const auto& vx = g.vertex(interior[i]);
    out.cell(vx.id).cell(vx.pos[0]).cell(vx.pos[1]).cell(v[static_cast<Eigen::Index>(i)]);
    out.end_row();
  }
}

const std::vector<EigenResult>& run_eigen(Context& ctx) {
  if (ctx.eigen) return *ctx.eigen;
  const json& s = section(ctx.config, "eigen");
  check_keys(s, {"count", "method", "k_min", "k_max", "samples", "max_branch"}, "eigen");
  const int count = integer(s, "count", "eigen", 10);
  if (count < 1) throw ConfigError("eigen.count must be positive");
  const std::string method = text(s, "method", "eigen", "adjacency");
  std::vector<EigenResult> result;
  if (method == "adjacency") {
    AdjacencyPathOptions opt;
    opt.max_branch = integer(s, "max_branch", "eigen", 0);
    try {
      result = adjacency_eigen_path(ctx.geo.closed, count, opt);
    } catch (const NotEquilateral& e) {
      throw ConfigError(std::string("eigen: adjacency method not applicable: ") + e.what());
    }
  } else if (method == "secular") {
    auto scan = secular_scan(ctx.geo.closed, number(s, "k_min", "eigen"), number(s, "k_max", "eigen"),
                             integer(s, "samples", "eigen"));
    result = scan.eigen;
    CsvWriter out(ctx.out("secular_scan.csv"), {"k", "sigma_min"});
    for (std::size_t i = 0; i < scan.k_grid.size(); ++i) {
      out.cell(scan.k_grid[i]).cell(scan.sigma_min[i]);
      out.end_row();
    }
  } else {
    throw ConfigError("eigen.method must be adjacency or secular");
  }
  ctx.log("eigen: " + std::to_string(result.size()) + " eigenvalues");
  json arr = json::array();
  for (const auto& e : result)
    arr.push_back({{"k", e.k},
                   {"energy_graph", e.energy_graph},
                   {"energy_continuum", e.energy_continuum},
                   {"residual", e.residual},
                   {"multiplicity", e.multiplicity}});
  write_json(ctx.out("eigen.json"), arr);
  for (std::size_t i = 0; i < result.size(); ++i)
    write_vertex_vector(ctx.out(indexed("eigvec", i)), ctx.geo.closed, result[i].vertex_vector);
  ctx.eigen = std::move(result);
  return *ctx.eigen;
}

void run_nodal(Context& ctx) {
  const json& s = section(ctx.config, "nodal");
  check_keys(s, {"zero_tol"}, "nodal");
  const double tol = number(s, "zero_tol", "nodal", -1.0);
  const auto& eig = run_eigen(ctx);
  json arr = json::array();
  for (std::size_t i = 0; i < eig.size(); ++i) {
    auto p = nodal_domains(ctx.geo.closed, eig[i].vertex_vector, tol);
    write_nodal_csv(ctx.out(indexed("nodal", i)), ctx.geo.closed, p);
    arr.push_back({{"k", eig[i].k}, {"multiplicity", eig[i].multiplicity}, {"domains", p.count}});
  }
  write_json(ctx.out("nodal.json"), arr);
}

// Density on the full lattice grid; missing sites read zero.
void write_density_grid(const fs::path& path, const Geometry& geo, const ScatteringSolution& s) {
  std::vector<double> grid(static_cast<std::size_t>(geo.n_rows) * geo.n_cols, 0.0);
  auto interior = geo.open.interior();
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const auto& p = geo.open.vertex(interior[i]).pos;
    int ix = static_cast<int>(std::lround(p[0] / geo.spacing));
    int iy = static_cast<int>(std::lround(p[1] / geo.spacing));
    grid[static_cast<std::size_t>(iy) * geo.n_cols + ix] = std::norm(s.vertex_values[static_cast<Eigen::Index>(i)]);
  }
  CsvWriter out(path, {"ix", "iy", "x", "y", "abs2"});
  for (int iy = 0; iy < geo.n_rows; ++iy)
    for (int ix = 0; ix < geo.n_cols; ++ix) {
      out.cell(ix).cell(iy).cell(ix * geo.spacing).cell(iy * geo.spacing);
      out.cell(grid[static_cast<std::size_t>(iy) * geo.n_cols + ix]);
      out.end_row();
    }
}

const ScatteringSolution& run_scatter(Context& ctx) {
  if (ctx.scatter) return *ctx.scatter;
  const json& s = section(ctx.config, "scatter");
  check_keys(s, {"k"}, "scatter");
  const double k = number(s, "k", "scatter");
  if (ctx.geo.open.leads().empty()) throw ConfigError("scatter needs geometry.leads");
  auto sol = solve_scattering(ctx.geo.open, k);
  ctx.log("scatter: |r|^2 = " + format_double(std::norm(sol.r)) + ", flux error " + format_double(sol.flux_error));
  write_scattering_json(ctx.out("scatter.json"), sol);
  write_vertex_field_csv(ctx.out("vertex_field.csv"), ctx.geo.open, sol);
  {
    CsvWriter out(ctx.out("edge_currents.csv"), {"edge", "j", "n", "current"});
    for (std::size_t e = 0; e < ctx.geo.open.num_edges(); ++e) {
      const auto& edge = ctx.geo.open.edge(static_cast<int>(e));
      out.cell(static_cast<long long>(e)).cell(edge.j).cell(edge.n).cell(sol.edge_currents[e]);
      out.end_row();
    }
  }
  if (ctx.geo.n_rows > 0)
    write_density_grid(ctx.out("graph_density.csv"), ctx.geo, sol);
  ctx.scatter = std::move(sol);
  return *ctx.scatter;
}

void run_sweep(Context& ctx) {
  const json& s = section(ctx.config, "sweep");
  check_keys(s, {"k_min", "k_max", "samples"}, "sweep");
  const double a = number(s, "k_min", "sweep"), b = number(s, "k_max", "sweep");
  const int n = integer(s, "samples", "sweep");
  if (n < 2 || !(b > a) || !(a > 0.0)) throw ConfigError("sweep needs 0 < k_min < k_max and samples >= 2");
  if (ctx.geo.open.leads().empty()) throw ConfigError("sweep needs geometry.leads");
  std::vector<double> ks(n);
  for (int i = 0; i < n; ++i) ks[i] = a + (b - a) * i / (n - 1);
  auto sweep = transmission_sweep(ctx.geo.open, ks);
  ctx.log("sweep: " + std::to_string(sweep.size()) + " admissible momenta");
  write_sweep_csv(ctx.out("sweep.csv"), sweep);
}

void run_compare(Context& ctx) {
  const json& s = section(ctx.config, "billiard");
  check_keys(s, {"h", "lead_radius", "energy_factor", "control_factor", "port_exclusion"}, "billiard");
  if (ctx.geo.lattice != "square" && ctx.geo.lattice != "sinai")
    throw ConfigError("compare needs a square or sinai geometry");
  const auto& sol = run_scatter(ctx);
  const double l = ctx.geo.spacing;
  const double h = number(s, "h", "billiard", l / 4);
  const double radius = number(s, "lead_radius", "billiard", 0.01);
  const double factor = number(s, "energy_factor", "billiard", ctx.geo.open.dimension());
  const double control = number(s, "control_factor", "billiard", 3.7);
  CompareOptions copt{number(s, "port_exclusion", "billiard", 0.0)};

  BilliardGeometry bg;
  bg.width = (ctx.geo.n_cols - 1) * l;
  bg.height = (ctx.geo.n_rows - 1) * l;
  bg.disc = ctx.geo.disc;
  for (const auto& [site, dir] : ctx.geo.lead_sites)
    bg.ports.push_back({{site[0] * l, site[1] * l, 0}, radius, dir});

  const double k = sol.k;
  json report;
  report["k"] = k;
  report["h"] = h;
  for (auto [name, f] : {std::pair<const char*, double>{"main", factor}, {"control", control}}) {
    auto field = solve_open_field(bg, h, f * k * k);
    auto cmp = compare_fields(ctx.geo.open, sol, field, copt);
    auto flux = port_fluxes(field);
    json j = to_json(cmp);
    j["energy"] = f * k * k;
    j["flux_in"] = flux.incoming;
    j["flux_out"] = flux.outgoing;
    j["flux_balance_error"] = flux.balance_error;
    report[name] = j;
    write_billiard_csv(ctx.out(std::string("billiard_") + name + ".csv"), field);
    ctx.log(std::string("compare ") + name + ": correlation " + format_double(cmp.correlation) +
            ", alignment " + format_double(cmp.current_alignment));
  }
  auto ratio_ok = [&](const char* key) {
    double m = report["main"][key].get<double>(), c = report["control"][key].get<double>();
    return m > 0.0 && m >= 3.0 * std::abs(c);
  };
  report["similar"] = ratio_ok("correlation") && ratio_ok("current_alignment");
  write_json(ctx.out("compare.json"), report);
}

void run_converge(Context& ctx) {
  const json& s = section(ctx.config, "converge");
  check_keys(s, {"lattice", "shape", "size", "spacings", "reference", "mode"}, "converge");
  const std::string lattice = text(s, "lattice", "converge", "square");
  const std::string shape = text(s, "shape", "converge", "square");
  const double size = number(s, "size", "converge", 1.0);
  auto spacings = numbers(s, "spacings", "converge");
  const int mode = integer(s, "mode", "converge", 0);
  for (double l : spacings)
    if (!(l > 0.0)) throw ConfigError("converge.spacings must be positive");
  GraphFamily family;
  double reference;
  if (lattice == "square") {
    if (shape != "square") throw ConfigError("converge: the square lattice supports shape square only");
    for (double l : spacings) cells(size, l, "converge");
    family = [size](double l) {
      int n = static_cast<int>(std::lround(size / l)) + 1;
      return build_square_lattice(n, n, l);
    };
    reference = find(s, "reference") ? number(s, "reference", "converge") : shape_ground_energy(shape, size);
  } else if (lattice == "chain") {
    for (double l : spacings) cells(size, l, "converge");
    family = [size](double l) {
      int n = static_cast<int>(std::lround(size / l)) + 1;
      return build_cubic_lattice(std::vector<int>{n}, l);
    };
    reference = find(s, "reference") ? number(s, "reference", "converge") : kPi * kPi / (size * size);
  } else if (lattice == "triangular") {
    auto domain = shape_domain(shape, size, "converge");
    family = [domain](double l) { return build_triangular_lattice(domain.second, domain.first, l); };
    reference = find(s, "reference") ? number(s, "reference", "converge") : shape_ground_energy(shape, size);
  } else {
    throw ConfigError("converge.lattice must be square, chain or triangular");
  }
  if (find(s, "mode") && !find(s, "reference") && mode != 0)
    throw ConfigError("converge.reference is required when mode is not 0");
  ConvergenceReport rep;
  try {
    rep = convergence_study(family, spacings, reference, mode);
  } catch (const NumericError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("converge: ") + e.what());
  }
  json j = to_json(rep);
  j["lattice"] = lattice;
  j["shape"] = shape;
  j["mode"] = mode;
  write_json(ctx.out("convergence.json"), j);
}

void run_dispersion(Context& ctx) {
  const json& s = section(ctx.config, "dispersion");
  check_keys(s, {"spacing", "samples", "seed"}, "dispersion");
  const double l = number(s, "spacing", "dispersion", ctx.geo.spacing);
  const int samples = integer(s, "samples", "dispersion", 100);
  const int seed = integer(s, "seed", "dispersion", 1);
  if (!(l > 0.0) || samples < 1) throw ConfigError("dispersion needs positive spacing and samples");
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  std::uniform_real_distribution<double> theta(-kPi / l, kPi / l);
  CsvWriter out(ctx.out("dispersion.csv"), {"theta1", "theta2", "k", "relation_residual", "continuum_gap"});
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    double t[2] = {theta(rng), theta(rng)};
    double k = bloch_dispersion(t, l);
    double res = std::abs(std::cos(t[0] * l) + std::cos(t[1] * l) - 2 * std::cos(k * l));
    worst = std::max(worst, res);
    out.cell(t[0]).cell(t[1]).cell(k).cell(res).cell(std::abs(2 * k * k - t[0] * t[0] - t[1] * t[1]));
    out.end_row();
  }
  write_json(ctx.out("dispersion.json"), {{"spacing", l}, {"samples", samples}, {"max_relation_residual", worst}});
}

}  // namespace

std::vector<fs::path> run_scenario(const json& config, const RunOptions& options) {
  check_keys(config,
             {"description", "task", "geometry", "eigen", "nodal", "scatter", "sweep", "billiard", "converge",
              "dispersion"},
             "config");
  std::vector<std::string> tasks;
  const json* t = find(config, "task");
  if (!t) throw ConfigError("task is required");
  if (t->is_string()) {
    tasks.push_back(t->get<std::string>());
  } else if (t->is_array() && !t->empty()) {
    for (const auto& x : *t) {
      if (!x.is_string()) throw ConfigError("task entries must be strings");
      tasks.push_back(x.get<std::string>());
    }
  } else {
    throw ConfigError("task must be a string or a non-empty array");
  }
  static const std::set<std::string> known{"eigen", "scatter", "sweep", "compare", "nodal", "converge", "dispersion"};
  for (const auto& name : tasks)
    if (!known.count(name)) throw ConfigError("unknown task '" + name + "'");

  // converge and dispersion carry their own geometry.
  bool needs_geometry = std::any_of(tasks.begin(), tasks.end(),
                                    [](const std::string& n) { return n != "converge" && n != "dispersion"; });
  bool dispersion_needs = std::any_of(tasks.begin(), tasks.end(), [&](const std::string& n) {
    return n == "dispersion" && !find(section(config, "dispersion"), "spacing");
  });
  Context ctx{config, options, {}, {}, {}, {}};
  if (needs_geometry || dispersion_needs || find(config, "geometry")) {
    try {
      ctx.geo = build_geometry(config);
    } catch (const ConfigError&) {
      throw;
    } catch (const NumericError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("geometry: ") + e.what());
    }
  }
  fs::create_directories(options.out_dir);
  if (find(config, "geometry")) {
    for (const auto& w : ctx.geo.open.warnings()) ctx.log("warning: " + w);
    save_graph(ctx.out("graph.json"), ctx.geo.open);
  }
  for (const auto& name : tasks) {
    ctx.log("task " + name);
    if (name == "eigen") run_eigen(ctx);
    else if (name == "nodal") run_nodal(ctx);
    else if (name == "scatter") run_scatter(ctx);
    else if (name == "sweep") run_sweep(ctx);
    else if (name == "compare") run_compare(ctx);
    else if (name == "converge") run_converge(ctx);
    else if (name == "dispersion") run_dispersion(ctx);
  }
  return ctx.artifacts;
}

void render_heatmap(const fs::path& csv, const fs::path& pgm, const std::string& column) {
  CsvTable t = read_csv(csv);
  int cx = t.column("ix"), cy = t.column("iy");
  bool indexed_grid = cx >= 0 && cy >= 0;
  if (!indexed_grid) {
    cx = t.column("x");
    cy = t.column("y");
  }
  if (cx < 0 || cy < 0) throw ConfigError("field CSV needs ix/iy or x/y columns");
  int cv = -1;
  if (!column.empty()) {
    cv = t.column(column);
  } else {
    for (const char* name : {"abs2", "abs", "value"})
      if ((cv = t.column(name)) >= 0) break;
  }
  if (cv < 0) throw ConfigError("field CSV has no value column");
  if (t.rows.empty()) throw ConfigError("field CSV is empty");

  auto parse = [](const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("field CSV holds a non-numeric entry '" + s + "'");
    }
  };
  std::vector<double> xs, ys, vs;
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw ConfigError("field CSV has a ragged row");
    xs.push_back(parse(row[cx]));
    ys.push_back(parse(row[cy]));
    vs.push_back(parse(row[cv]));
  }
  auto axis = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> u;
    for (double x : v)
      if (u.empty() || std::abs(x - u.back()) > 1e-9 * std::max(1.0, std::abs(x))) u.push_back(x);
    return u;
  };
  auto ux = axis(xs), uy = axis(ys);
  auto locate = [](const std::vector<double>& u, double x) {
    auto it = std::lower_bound(u.begin(), u.end(), x - 1e-9 * std::max(1.0, std::abs(x)));
    return static_cast<int>(it - u.begin());
  };
  const int nx = static_cast<int>(ux.size()), ny = static_cast<int>(uy.size());
  if (static_cast<std::size_t>(nx) * ny != vs.size()) throw ConfigError("field CSV is not a full rectangular grid");
  std::vector<double> grid(vs.size(), 0.0);
  std::vector<char> seen(vs.size(), 0);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    std::size_t idx = static_cast<std::size_t>(locate(uy, ys[i])) * nx + locate(ux, xs[i]);
    if (seen[idx]) throw ConfigError("field CSV repeats a grid cell");
    seen[idx] = 1;
    grid[idx] = vs[i];
  }
  auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  const double vmin = *lo, vmax = *hi;
  std::ofstream out(pgm, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + pgm.string());
  out << "P5\n" << nx << ' ' << ny << "\n255\n";
  for (int row = ny - 1; row >= 0; --row)
    for (int col = 0; col < nx; ++col) {
      double v = grid[static_cast<std::size_t>(row) * nx + col];
      int g = vmax > vmin ? static_cast<int>(std::lround(255.0 * (v - vmin) / (vmax - vmin))) : 128;
      out.put(static_cast<char>(static_cast<unsigned char>(g)));
    }
  if (!out) throw std::runtime_error("cannot write " + pgm.string());
}

}  // namespace latticewave
