#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "latticewave/billiard.hpp"
#include "latticewave/io.hpp"

using namespace latticewave;

namespace {
constexpr double kPi = 3.14159265358979323846;

BilliardGrid plane_wave(double k, double h) {
  BilliardGrid g;
  g.h = h;
  g.nx = g.ny = static_cast<int>(std::lround(1.0 / h)) + 1;
  g.mask.assign(static_cast<std::size_t>(g.nx) * g.ny, NodeKind::interior);
  g.values.resize(g.mask.size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) g.values[g.index(ix, iy)] = std::exp(cplx(0, k * g.x(ix)));
  return g;
}
}  // namespace

TEST_CASE("unit square eigenvalues at h = 1/200") {
  BilliardGeometry square;
  auto modes = solve_closed_modes(square, 1.0 / 200, 5);
  REQUIRE(modes.energies.size() == 5);
  const double exact[5] = {2, 5, 5, 8, 10};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(modes.energies[i] / (kPi * kPi * exact[i]) - 1.0) <= 0.02);
  // walls carry zero
  const auto& m = modes.modes[0];
  for (std::size_t i = 0; i < m.mask.size(); ++i)
    if (m.mask[i] == NodeKind::wall) CHECK(m.values[i] == cplx(0));
}

TEST_CASE("rectangle eigenvalues converge at second order") {
  BilliardGeometry rect{1.0, 0.5, std::nullopt, {}};
  std::vector<double> e;
  for (double h : {1.0 / 20, 1.0 / 40, 1.0 / 80}) e.push_back(solve_closed_modes(rect, h, 1).energies[0]);
  const double exact = kPi * kPi * (1.0 + 4.0);
  double r1 = (e[0] - exact) / (e[1] - exact), r2 = (e[1] - exact) / (e[2] - exact);
  CHECK(r1 == doctest::Approx(4.0).epsilon(0.02));
  CHECK(r2 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("centred disc raises the spectrum consistently across resolutions") {
  BilliardGeometry sinai{1.0, 1.0, Disc{{0.5, 0.5, 0}, 0.2}, {}};
  auto coarse = solve_closed_modes(sinai, 1.0 / 40, 3);
  auto fine = solve_closed_modes(sinai, 1.0 / 80, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(coarse.energies[i] > 2 * kPi * kPi);
    CHECK(std::abs(coarse.energies[i] / fine.energies[i] - 1.0) < 0.05);
  }
}

TEST_CASE("resolution guard") {
  BilliardGeometry square;
  square.ports.push_back({{0.3, 0.3, 0}, 0.01, LeadDirection::incoming});
  CHECK_THROWS_AS(solve_open_field(square, 0.1, 30.0), NumericError);  // k h = 0.55
  CHECK_THROWS_AS(solve_closed_modes(BilliardGeometry{}, 0.25, 3), NumericError);
}

TEST_CASE("geometry checks") {
  BilliardGeometry g{1.0, 1.0, Disc{{0.5, 0.5, 0}, 0.2}, {}};
  g.ports.push_back({{0.5, 0.6, 0}, 0.01, LeadDirection::incoming});
  CHECK_THROWS(make_billiard_grid(g, 0.05));  // inside the disc
  g.ports = {{{0.005, 0.5, 0}, 0.01, LeadDirection::incoming}};
  CHECK_THROWS(make_billiard_grid(g, 0.05));  // crosses the wall
  g.ports = {{{0.05, 0.5, 0}, 0.01, LeadDirection::incoming}};
  CHECK_THROWS(make_billiard_grid(g, 0.05));  // ring touches the wall
  CHECK_THROWS(make_billiard_grid(g, 0.3));   // spacing does not divide the box
  g.disc = Disc{{0.5, 0.5, 0}, 0.6};
  g.ports.clear();
  CHECK_THROWS(make_billiard_grid(g, 0.05));
}

TEST_CASE("open field with an absorbing ring") {
  BilliardGeometry sq{2.0, 2.0, std::nullopt,
                      {{{0.5, 0.5, 0}, 0.01, LeadDirection::incoming}, {{1.4, 1.3, 0}, 0.01, LeadDirection::outgoing}}};
  auto f = solve_open_field(sq, 0.05, 20.0);
  for (std::size_t i = 0; i < f.mask.size(); ++i)
    if (f.mask[i] == NodeKind::wall) CHECK(f.values[i] == cplx(0));
  auto flux = port_fluxes(f);
  CHECK(flux.incoming > 0.0);
  CHECK(flux.outgoing > 0.0);
  CHECK(flux.wall == 0.0);
  CHECK(flux.balance_error <= 1e-8);
}

TEST_CASE("sinai geometry flux balance") {
  BilliardGeometry geo{14.4, 14.4, Disc{{7.2, 7.2, 0}, 2.88},
                       {{{2.1, 6.0, 0}, 0.01, LeadDirection::incoming}, {{8.85, 12.0, 0}, 0.01, LeadDirection::outgoing}}};
  auto f = solve_open_field(geo, 0.075, 2 * 1.65 * 1.65);
  auto flux = port_fluxes(f);
  CHECK(flux.outgoing > 0.0);
  CHECK(flux.balance_error <= 1e-8);
}

TEST_CASE("continuum current of analytic fields") {
  const double k = 3.0;
  std::vector<double> err;
  for (double h : {0.02, 0.01}) {
    auto g = plane_wave(k, h);
    auto j = continuum_current(g);
    const auto& c = j[g.index(g.nx / 2, g.ny / 2)];
    CHECK(std::abs(c[1]) < 1e-14);
    err.push_back(std::abs(c[0] - k));
    CHECK(err.back() <= k * (k * h) * (k * h) / 6 * 1.01);
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.01));

  auto real = plane_wave(k, 0.05);
  for (auto& v : real.values) v = v.real();
  for (const auto& c : continuum_current(real)) {
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.0);
  }
}

TEST_CASE("bilinear sampling") {
  auto g = plane_wave(1.0, 0.1);
  CHECK(g.sample(0.3, 0.4) == g.values[g.index(3, 4)]);
  CHECK(std::abs(g.sample(0.35, 0.4) - 0.5 * (g.values[g.index(3, 4)] + g.values[g.index(4, 4)])) < 1e-15);
  CHECK(g.sample(-0.1, 0.4) == cplx(0));
}

TEST_CASE("field csv layout") {
  BilliardGeometry sq{1.0, 1.0, std::nullopt, {{{0.5, 0.5, 0}, 0.01, LeadDirection::incoming}}};
  auto f = solve_open_field(sq, 0.1, 4.0);
  auto path = std::filesystem::temp_directory_path() / "lw_billiard.csv";
  write_billiard_csv(path, f);
  auto t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"ix", "iy", "x", "y", "re", "im", "abs2", "jx", "jy"});
  CHECK(t.rows.size() == 121);
  std::filesystem::remove(path);
}
