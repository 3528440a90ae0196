// One line per acceptance criterion. Exit status is non-zero when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include <Eigen/Dense>

#include "latticewave/analysis.hpp"
#include "latticewave/billiard.hpp"
#include "latticewave/scattering.hpp"
#include "latticewave/spectral.hpp"

using namespace latticewave;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;  // informational, do not affect the verdict
};

struct TestCase {
  std::string name;
  std::string intent;
  std::function<Outcome()> run;
  double time_limit_s;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

const Disc kSinaiDisc{{7.2, 7.2, 0}, 2.88};

MetricGraph sinai_closed() { return build_sinai_graph(97, 0.15, kSinaiDisc); }

MetricGraph sinai_open() {
  auto g = attach_lead(sinai_closed(), Site{14, 40, 0}, LeadDirection::incoming);
  return attach_lead(g, Site{59, 80, 0}, LeadDirection::outgoing);
}

// Breadth-first nodal labelling, written without the union-find.
int bfs_domains(const MetricGraph& g, const Eigen::VectorXd& v, double tol) {
  const int n = static_cast<int>(g.interior().size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : g.edges()) {
    if (g.is_boundary(e.j) || g.is_boundary(e.n)) continue;
    adj[g.interior_index(e.j)].push_back(g.interior_index(e.n));
    adj[g.interior_index(e.n)].push_back(g.interior_index(e.j));
  }
  auto sign = [&](int i) { return std::abs(v[i]) <= tol ? 0 : (v[i] > 0 ? 1 : -1); };
  std::vector<char> seen(n, 0);
  int count = 0;
  for (int s = 0; s < n; ++s) {
    if (seen[s] || sign(s) == 0) continue;
    ++count;
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      int x = q.front();
      q.pop();
      for (int y : adj[x])
        if (!seen[y] && sign(y) == sign(s)) seen[y] = 1, q.push(y);
    }
  }
  return count;
}

MetricGraph unit_square(double l) {
  int n = static_cast<int>(std::lround(1 / l)) + 1;
  return build_square_lattice(n, n, l);
}

bool ratios_in_window(const ConvergenceReport& r) {
  for (double x : r.ratios)
    if (!(x >= 3.5 && x <= 4.5)) return false;
  return !r.ratios.empty();
}

std::string ratio_text(const ConvergenceReport& r) {
  std::string s = "errors";
  for (double e : r.errors) s += fmt(" %.3g", e);
  s += ", ratios";
  for (double x : r.ratios) s += fmt(" %.4f", x);
  return s;
}

// 1 --------------------------------------------------------------------------
Outcome rectangle_spectrum() {
  const double l = 0.1;
  double worst = 0.0;
  int checked = 0;
  for (auto [m, n] : std::vector<std::pair<int, int>>{{12, 12}, {7, 11}, {1, 12}, {5, 3}, {9, 10}}) {
    auto g = build_square_lattice(n + 2, m + 2, l);  // m along x, n along y
    // Oracle: grid adjacency assembled from (i, j) indices, dense solver.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m * n, m * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i) {
        int p = j * m + i;
        if (i + 1 < m) a(p, p + 1) = a(p + 1, p) = 1;
        if (j + 1 < n) a(p, p + m) = a(p + m, p) = 1;
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    std::vector<double> oracle;
    for (int i = static_cast<int>(es.eigenvalues().size()) - 1; i >= 0; --i) {
      double mu = es.eigenvalues()[i];
      if (oracle.empty() || std::abs(std::acos(mu / 4) / l - oracle.back()) > 1e-8)
        oracle.push_back(std::acos(mu / 4) / l);
    }
    auto eig = adjacency_eigen_path(g, m * n);
    if (eig.size() != oracle.size())
      return {false, "distinct eigenvalue count " + std::to_string(eig.size()) + " vs oracle " +
                         std::to_string(oracle.size())};
    for (std::size_t i = 0; i < eig.size(); ++i) worst = std::max(worst, std::abs(eig[i].k - oracle[i]));
    checked += static_cast<int>(eig.size());
  }
  return {worst <= 1e-10, fmt("max |dk| = %.2e over ", worst) + std::to_string(checked) + " momenta (tol 1e-10)"};
}

// 2 --------------------------------------------------------------------------
Outcome energy_rescaling() {
  std::vector<double> ls{1.0 / 20, 1.0 / 40, 1.0 / 80};
  auto r = convergence_study(unit_square, ls, 2 * kPi * kPi);
  Outcome o{ratios_in_window(r), "lowest mode vs 2pi^2: " + ratio_text(r) + " (window [3.5, 4.5])"};
  auto second = convergence_study(unit_square, ls, 5 * kPi * kPi, 1);
  o.notes.push_back("second mode vs 5pi^2: " + ratio_text(second));
  return o;
}

// 3 --------------------------------------------------------------------------
Outcome triangular_invariance() {
  std::vector<double> ls{1.0 / 20, 1.0 / 40, 1.0 / 80};
  Box box{{0, 0, 0}, {1, 1, 0}, 2};
  auto inside = [](const Point& p) { return p[0] >= 0 && p[1] >= 0 && p[0] <= 1 && p[1] <= 1; };
  auto r = convergence_study([&](double l) { return build_triangular_lattice(inside, box, l); }, ls, 2 * kPi * kPi);
  Outcome o{ratios_in_window(r), "triangular lattice on the unit square vs 2pi^2: " + ratio_text(r)};

  const double s3 = std::sqrt(3.0);
  Box tbox{{0, 0, 0}, {1, s3 / 2, 0}, 2};
  auto tri = [s3](const Point& p) {
    return p[1] >= -1e-12 && s3 * p[0] - p[1] >= -1e-12 && s3 * (1 - p[0]) - p[1] >= -1e-12;
  };
  auto t = convergence_study([&](double l) { return build_triangular_lattice(tri, tbox, l); },
                             {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, 16 * kPi * kPi / 3);
  o.notes.push_back("triangular lattice on the unit equilateral triangle vs 16pi^2/3: " + ratio_text(t));
  return o;
}

// 4 --------------------------------------------------------------------------
Outcome dispersion() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::array<double, 2>> thetas(100);
  for (auto& t : thetas) t = {u(rng), u(rng)};

  double relation = 0.0;
  const double l0 = 0.1;
  for (const auto& t : thetas) {
    double k = bloch_dispersion(t, l0);
    relation = std::max(relation, std::abs(std::cos(t[0] * l0) + std::cos(t[1] * l0) - 2 * std::cos(k * l0)));
  }
  std::vector<double> ladder{0.4, 0.2, 0.1, 0.05, 0.025}, gaps;
  for (double l : ladder) {
    double g = 0.0;
    for (const auto& t : thetas) {
      double k = bloch_dispersion(t, l);
      g = std::max(g, std::abs(2 * k * k - t[0] * t[0] - t[1] * t[1]));
    }
    gaps.push_back(g);
  }
  double order = fit_order(ladder, gaps);
  return {relation <= 1e-12 && order >= 1.9,
          fmt("relation residual %.2e (tol 1e-12), ", relation) + fmt("continuum gap order %.3f (min 1.9)", order)};
}

// 5 --------------------------------------------------------------------------
Outcome scattering_conservation() {
  auto g = sinai_open();
  auto swapped = swap_leads(g);
  std::vector<double> ks;
  for (int i = 0; i < 50; ++i) ks.push_back(1.6 + 0.1 * i / 49);
  const double tau = default_singular_tolerance(g);
  double flux = 0.0, vertex = 0.0, recip = 0.0;
  int used = 0;
  for (double k : ks) {
    if (singular_set_distance(g, k) <= tau) continue;
    ++used;
    auto s = solve_scattering(g, k);
    auto b = solve_scattering(swapped, k);
    flux = std::max({flux, s.flux_error, b.flux_error});
    for (double x : current_imbalance(g, s)) vertex = std::max(vertex, std::abs(x) / k);  // incoming flux is k
    recip = std::max(recip, std::abs(std::norm(s.t) - std::norm(b.t)));
  }
  auto sweep = transmission_sweep(g, ks);
  for (const auto& p : sweep) flux = std::max(flux, p.flux_error);
  return {used == 50 && flux <= 1e-8 && vertex <= 1e-10 && recip <= 1e-10,
          std::to_string(used) + " momenta in [1.6, 1.7]: " + fmt("flux %.2e (tol 1e-8), ", flux) +
              fmt("vertex sums %.2e (tol 1e-10), ", vertex) + fmt("reciprocity %.2e (tol 1e-10)", recip)};
}

// 6 --------------------------------------------------------------------------
Outcome duality() {
  double cont = 0.0, kirch = 0.0, prop = 0.0;
  auto check = [&](const MetricGraph& g, double k, const Eigen::VectorXcd& psi) {
    auto f = reconstruct(g, k, psi);
    const double scale = psi.cwiseAbs().maxCoeff();
    cont = std::max(cont, continuity_error(g, f, psi) / scale);
    for (cplx r : kirchhoff_residuals(g, f, psi)) kirch = std::max(kirch, std::abs(r) / scale);
  };
  {
    auto g = build_square_lattice(14, 12, 0.1);
    for (const auto& e : adjacency_eigen_path(g, 6, {std::nullopt, 1}))
      check(g, e.k, e.vertex_vector.cast<cplx>());
  }
  {
    auto g = sinai_closed();
    for (const auto& e : adjacency_eigen_path(g, 3)) check(g, e.k, e.vertex_vector.cast<cplx>());
    auto open = sinai_open();
    auto s = solve_scattering(open, 1.65);
    check(open, 1.65, s.vertex_values);
  }
  {
    // delta couplings and edge potentials, scattering
    auto g = build_square_lattice(6, 7, 0.2, [](const Point& p) { return 0.3 * std::sin(p[0] + 2 * p[1]); });
    auto sq = attach_lead(attach_lead(g, Site{1, 1, 0}, LeadDirection::incoming), Site{4, 3, 0},
                          LeadDirection::outgoing);
    auto s = solve_scattering(sq, 2.7);
    check(sq, 2.7, s.vertex_values);
  }
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> kdist(0.3, 14.0);
  Box box{{0, 0, 0}, {1.2, 1.2, 0}, 2};
  std::vector<MetricGraph> graphs{
      build_square_lattice(9, 11, 0.2, [](const Point& p) { return p[0] - 0.5 * p[1]; }),
      build_triangular_lattice(hexagon_indicator({1.0, 0.9, 0}, 0.8), Box{{0, 0, 0}, {2, 2, 0}, 2}, 0.2),
      build_cubic_lattice(std::vector<int>{5, 6, 4}, 0.25, [](const Point& p) { return p[2]; }),
      sinai_closed()};
  for (const auto& g : graphs) {
    const double l = *g.spacing();
    for (int trial = 0; trial < 3; ++trial) {
      double k = kdist(rng);
      if (std::abs(std::sin(k * l)) < 1e-3) continue;
      auto sys = assemble_dual(g, k);
      auto eq7 = assemble_equilateral(g, k);
      const cplx w = -std::sin(k * l) / k;
      SparseMatrixC diff = sys.matrix * w - eq7;
      double worst = 0.0;
      for (int c = 0; c < diff.outerSize(); ++c)
        for (SparseMatrixC::InnerIterator it(diff, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
      double norm = 0.0;
      for (int c = 0; c < eq7.outerSize(); ++c)
        for (SparseMatrixC::InnerIterator it(eq7, c); it; ++it) norm = std::max(norm, std::abs(it.value()));
      prop = std::max(prop, worst / norm);
    }
  }
  return {cont <= 1e-12 && kirch <= 1e-8 && prop <= 1e-12,
          fmt("continuity %.2e (tol 1e-12), ", cont) + fmt("Kirchhoff %.2e (tol 1e-8), ", kirch) +
              fmt("row proportionality %.2e (tol 1e-12)", prop)};
}

// 7 --------------------------------------------------------------------------
Outcome nodal_oracle() {
  auto g = sinai_closed();
  const int n = static_cast<int>(g.interior().size());
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> pick(0, 19);
  int mismatches = 0, total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(n);
    const int bias = 5 + trial % 10;
    for (int i = 0; i < n; ++i) {
      int r = pick(rng);
      v[i] = r == 0 ? 0.0 : (r <= bias ? 1.0 : -1.0);
    }
    mismatches += nodal_domains(g, v, 0.0).count != bfs_domains(g, v, 0.0);
    ++total;
  }
  auto eig = adjacency_eigen_path(g, 10);
  int vectors = 0;
  for (const auto& e : eig)
    for (Eigen::Index c = 0; c < e.subspace.cols(); ++c) {
      Eigen::VectorXd v = e.subspace.col(c);
      double tol = 1e-12 * v.cwiseAbs().maxCoeff();
      mismatches += nodal_domains(g, v).count != bfs_domains(g, v, tol);
      ++total;
      ++vectors;
    }
  return {mismatches == 0 && eig.size() == 10,
          std::to_string(total - mismatches) + "/" + std::to_string(total) + " labellings agree (50 random, " +
              std::to_string(vectors) + " eigenvectors from the 10 lowest eigenvalues)"};
}

// 8 --------------------------------------------------------------------------
Outcome billiard_sanity() {
  BilliardGeometry square;
  auto modes = solve_closed_modes(square, 1.0 / 200, 6);
  std::vector<double> exact;
  for (int p = 1; p <= 4; ++p)
    for (int q = 1; q <= 4; ++q) exact.push_back(kPi * kPi * (p * p + q * q));
  std::sort(exact.begin(), exact.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < modes.energies.size(); ++i)
    worst = std::max(worst, std::abs(modes.energies[i] - exact[i]) / exact[i]);

  BilliardGeometry sinai;
  sinai.width = sinai.height = 96 * 0.15;
  sinai.disc = kSinaiDisc;
  sinai.ports = {{{14 * 0.15, 40 * 0.15, 0}, 0.01, LeadDirection::incoming},
                 {{59 * 0.15, 80 * 0.15, 0}, 0.01, LeadDirection::outgoing}};
  auto field = solve_open_field(sinai, 0.0375, 2 * 1.65 * 1.65);
  auto flux = port_fluxes(field);
  return {worst <= 0.02 && flux.balance_error <= 1e-8,
          fmt("6 lowest unit-square energies within %.3f%% (tol 2%%), ", 100 * worst) +
              fmt("open flux balance %.2e (tol 1e-8)", flux.balance_error)};
}

// 9 --------------------------------------------------------------------------
Outcome pipeline_comparison() {
  auto g = sinai_open();
  const double k = 1.65;
  auto s = solve_scattering(g, k);
  BilliardGeometry sinai;
  sinai.width = sinai.height = 96 * 0.15;
  sinai.disc = kSinaiDisc;
  sinai.ports = {{{14 * 0.15, 40 * 0.15, 0}, 0.01, LeadDirection::incoming},
                 {{59 * 0.15, 80 * 0.15, 0}, 0.01, LeadDirection::outgoing}};
  const double h = 0.15 / 4;
  auto main = compare_fields(g, s, solve_open_field(sinai, h, 2.0 * k * k));
  auto control = compare_fields(g, s, solve_open_field(sinai, h, 3.7 * k * k));
  auto ok = [](double m, double c) { return m > 0 && m >= 3 * std::abs(c); };
  return {ok(main.correlation, control.correlation) && ok(main.current_alignment, control.current_alignment),
          fmt("correlation %.3f vs control ", main.correlation) + fmt("%.3f, ", control.correlation) +
              fmt("alignment %.3f vs control ", main.current_alignment) +
              fmt("%.3f (factor >= 3)", control.current_alignment)};
}

// 10 -------------------------------------------------------------------------
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "latticewave_acceptance";
  fs::remove_all(root);
  const std::string cfg = std::string(LATTICEWAVE_CONFIGS) + "/sinai_pipeline.json";
  std::vector<fs::path> dirs{root / "a", root / "b"};
  std::vector<std::string> workers{"", " --workers 1"};
  for (int i = 0; i < 2; ++i) {
    std::string cmd = "\"" + std::string(LATTICEWAVE_CLI) + "\" run \"" + cfg + "\" --out \"" + dirs[i].string() +
                      "\"" + workers[i] + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "pipeline run failed"};
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    ++files;
    auto other = dirs[1] / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differ;
  }
  int second = static_cast<int>(std::distance(fs::directory_iterator(dirs[1]), fs::directory_iterator{}));
  return {differ == 0 && files == second && files > 0,
          std::to_string(files - differ) + "/" + std::to_string(files) +
              " artifacts identical (all workers vs one worker)"};
}

}  // namespace

int main() {
  const std::vector<TestCase> cases{
      {"rectangle spectrum", "adjacency momenta match a dense oracle on rectangles up to 12x12", rectangle_spectrum, 5},
      {"energy rescaling", "lowest 2k^2 on the unit square converges at second order", energy_rescaling, 60},
      {"triangular invariance", "the triangular lattice reaches the same limit at the same order",
       triangular_invariance, 120},
      {"dispersion", "Bloch relation holds exactly and approaches the continuum at second order", dispersion, 60},
      {"scattering conservation", "flux, vertex currents and reciprocity on the Sinai graph", scattering_conservation,
       600},
      {"duality", "edge reconstruction is continuous and Kirchhoff; the two assemblies agree", duality, 120},
      {"nodal oracle", "union-find nodal domains agree with breadth-first search", nodal_oracle, 120},
      {"billiard reference", "closed square energies and open flux balance", billiard_sanity, 300},
      {"pipeline comparison", "graph field resembles the billiard at 2k^2 more than at 3.7k^2", pipeline_comparison,
       300},
      {"determinism", "two pipeline runs give byte-identical artifacts", determinism, 600},
  };

  int failed = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass && secs < c.time_limit_s;
    failed += !pass;
    std::printf("[%s] %2zu %-24s %s; %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", i + 1, c.name.c_str(),
                o.detail.c_str(), secs, c.time_limit_s);
    for (const auto& n : o.notes) std::printf("       info: %s\n", n.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(cases.size()) - failed, cases.size());
  return failed == 0 ? 0 : 1;
}
