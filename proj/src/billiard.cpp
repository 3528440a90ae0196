#include "latticewave/billiard.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "latticewave/eigensolver.hpp"
#include "latticewave/io.hpp"

namespace latticewave {

namespace {
constexpr cplx kI(0.0, 1.0);
constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

int grid_count(double extent, double h) {
  double cells = extent / h;
  long r = std::lround(cells);
  if (r < 2 || std::abs(cells - r) > 1e-9 * std::max(1.0, cells))
    throw std::invalid_argument("grid spacing must divide the box into at least 2 cells");
  return static_cast<int>(r) + 1;
}

bool helmholtz(NodeKind k) { return k == NodeKind::interior; }
bool ring(NodeKind k) { return k == NodeKind::radiation_in || k == NodeKind::radiation_out; }
}  // namespace

cplx BilliardGrid::sample(double px, double py) const {
  double fx = px / h, fy = py / h;
  if (fx < 0.0 || fy < 0.0 || fx > nx - 1 || fy > ny - 1) return 0.0;
  int ix = std::min(static_cast<int>(std::floor(fx)), nx - 2);
  int iy = std::min(static_cast<int>(std::floor(fy)), ny - 2);
  double tx = fx - ix, ty = fy - iy;
  return (1 - tx) * (1 - ty) * values[index(ix, iy)] + tx * (1 - ty) * values[index(ix + 1, iy)] +
         (1 - tx) * ty * values[index(ix, iy + 1)] + tx * ty * values[index(ix + 1, iy + 1)];
}

BilliardGrid make_billiard_grid(const BilliardGeometry& geo, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  BilliardGrid g;
  g.h = h;
  g.nx = grid_count(geo.width, h);
  g.ny = grid_count(geo.height, h);
  g.mask.assign(static_cast<std::size_t>(g.nx) * g.ny, NodeKind::interior);
  g.values.assign(g.mask.size(), 0.0);

  if (geo.disc) {
    const auto& d = *geo.disc;
    if (!(d.radius > 0.0) || d.center[0] - d.radius <= 0.0 || d.center[1] - d.radius <= 0.0 ||
        d.center[0] + d.radius >= geo.width || d.center[1] + d.radius >= geo.height)
      throw std::invalid_argument("disc must lie strictly inside the box");
  }
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      bool wall = ix == 0 || iy == 0 || ix == g.nx - 1 || iy == g.ny - 1;
      if (geo.disc) {
        double dx = g.x(ix) - geo.disc->center[0], dy = g.y(iy) - geo.disc->center[1];
        wall = wall || std::hypot(dx, dy) <= geo.disc->radius;
      }
      if (wall) g.mask[g.index(ix, iy)] = NodeKind::wall;
    }

  for (const auto& p : geo.ports) {
    const double px = p.center[0], py = p.center[1];
    if (!(p.radius > 0.0) || px - p.radius <= 0.0 || py - p.radius <= 0.0 ||
        px + p.radius >= geo.width || py + p.radius >= geo.height)
      throw std::invalid_argument("lead circle must lie strictly inside the box");
    if (geo.disc &&
        std::hypot(px - geo.disc->center[0], py - geo.disc->center[1]) <= geo.disc->radius + p.radius)
      throw std::invalid_argument("lead circle overlaps the disc");
    int cx = static_cast<int>(std::lround(px / h)), cy = static_cast<int>(std::lround(py / h));
    auto& centre = g.mask[g.index(cx, cy)];
    if (centre != NodeKind::interior) throw std::invalid_argument("lead circle overlaps a wall or another lead");
    centre = NodeKind::outside;
    for (int s = 0; s < 4; ++s) {
      int ix = cx + kDx[s], iy = cy + kDy[s];
      auto& m = g.mask[g.index(ix, iy)];
      if (m != NodeKind::interior) throw std::invalid_argument("lead circle too close to a wall or another lead");
      m = p.direction == LeadDirection::incoming ? NodeKind::radiation_in : NodeKind::radiation_out;
    }
  }
  return g;
}

ClosedModes solve_closed_modes(const BilliardGeometry& geometry, double h, int count) {
  BilliardGeometry closed = geometry;
  closed.ports.clear();
  BilliardGrid g = make_billiard_grid(closed, h);
  std::vector<int> unknown(g.mask.size(), -1);
  int n = 0;
  for (std::size_t i = 0; i < g.mask.size(); ++i)
    if (helmholtz(g.mask[i])) unknown[i] = n++;
  if (n == 0) throw std::invalid_argument("billiard has no interior nodes");

  std::vector<Eigen::Triplet<double>> trip;
  const double s = 1.0 / (h * h);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      int r = unknown[g.index(ix, iy)];
      if (r < 0) continue;
      trip.emplace_back(r, r, 4.0 * s);
      for (int d = 0; d < 4; ++d) {
        int c = unknown[g.index(ix + kDx[d], iy + kDy[d])];
        if (c >= 0) trip.emplace_back(r, c, -s);
      }
    }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(trip.begin(), trip.end());
  auto eigs = nearest_eigenpairs(lap, 0.0, count, 1e-10);

  std::vector<int> order(eigs.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return eigs.values[a] < eigs.values[b]; });
  ClosedModes out;
  for (int i : order) {
    double e = eigs.values[i];
    if (std::sqrt(std::max(e, 0.0)) * h >= 0.5)
      throw NumericError("grid too coarse for the requested modes (k h >= 0.5)");
    BilliardGrid m = g;
    m.energy = e;
    Eigen::VectorXd v = eigs.vectors.col(i).normalized();
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    for (std::size_t node = 0; node < m.mask.size(); ++node)
      if (unknown[node] >= 0) m.values[node] = v[unknown[node]];
    out.energies.push_back(e);
    out.modes.push_back(std::move(m));
  }
  return out;
}

BilliardGrid solve_open_field(const BilliardGeometry& geometry, double h, double energy) {
  if (!(energy > 0.0)) throw std::invalid_argument("open solve needs a positive energy");
  if (geometry.ports.empty()) throw std::invalid_argument("open solve needs at least one lead circle");
  const double k = std::sqrt(energy);
  if (k * h >= 0.5) throw NumericError("grid too coarse for this energy (k h >= 0.5)");
  BilliardGrid g = make_billiard_grid(geometry, h);
  g.energy = energy;

  std::vector<int> unknown(g.mask.size(), -1);
  int n = 0;
  for (std::size_t i = 0; i < g.mask.size(); ++i)
    if (helmholtz(g.mask[i]) || ring(g.mask[i])) unknown[i] = n++;

  std::vector<Eigen::Triplet<cplx>> trip;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const int node = g.index(ix, iy);
      const int r = unknown[node];
      if (r < 0) continue;
      if (helmholtz(g.mask[node])) {
        // Scaled by h^2: sum of neighbours - (4 - E h^2) psi = 0.
        trip.emplace_back(r, r, -(4.0 - energy * h * h));
        for (int d = 0; d < 4; ++d) {
          int c = unknown[g.index(ix + kDx[d], iy + kDy[d])];
          if (c >= 0) trip.emplace_back(r, c, 1.0);
        }
        continue;
      }
      // Ring node: the centre is the one neighbour marked outside.
      int dir = -1;
      for (int d = 0; d < 4; ++d)
        if (g.mask[g.index(ix - kDx[d], iy - kDy[d])] == NodeKind::outside) dir = d;
      // (psi_out - psi) / h + i k psi = source
      trip.emplace_back(r, r, -1.0 / h + kI * k);
      int c = unknown[g.index(ix + kDx[dir], iy + kDy[dir])];
      if (c >= 0) trip.emplace_back(r, c, 1.0 / h);
      if (g.mask[node] == NodeKind::radiation_in) rhs[r] = 2.0 * kI * k;
    }
  SparseMatrixC a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SparseMatrixC> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericError("open billiard system is singular");
  Eigen::VectorXcd psi = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !psi.allFinite()) throw NumericError("open billiard solve failed");
  double res = (a * psi - rhs).cwiseAbs().maxCoeff();
  if (res > 1e-8 * std::max(1.0, psi.cwiseAbs().maxCoeff()))
    throw NumericError("open billiard system is ill-conditioned (near a cavity resonance)");

  for (std::size_t i = 0; i < g.mask.size(); ++i)
    if (unknown[i] >= 0) g.values[i] = psi[unknown[i]];
  // Display value at collapsed circle centres: mean of the ring.
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) {
      if (g.mask[g.index(ix, iy)] != NodeKind::outside) continue;
      cplx sum = 0.0;
      for (int d = 0; d < 4; ++d) sum += g.values[g.index(ix + kDx[d], iy + kDy[d])];
      g.values[g.index(ix, iy)] = sum / 4.0;
    }
  return g;
}

std::vector<std::array<double, 2>> continuum_current(const BilliardGrid& g) {
  std::vector<std::array<double, 2>> out(g.mask.size(), {0.0, 0.0});
  for (int iy = 1; iy < g.ny - 1; ++iy)
    for (int ix = 1; ix < g.nx - 1; ++ix) {
      const int node = g.index(ix, iy);
      if (!helmholtz(g.mask[node]) && !ring(g.mask[node])) continue;
      cplx c = std::conj(g.values[node]);
      cplx gx = (g.values[g.index(ix + 1, iy)] - g.values[g.index(ix - 1, iy)]) / (2.0 * g.h);
      cplx gy = (g.values[g.index(ix, iy + 1)] - g.values[g.index(ix, iy - 1)]) / (2.0 * g.h);
      out[node] = {std::imag(c * gx), std::imag(c * gy)};
    }
  return out;
}

PortFluxes port_fluxes(const BilliardGrid& g) {
  PortFluxes f;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const int a = g.index(ix, iy);
      if (!helmholtz(g.mask[a])) continue;
      for (int d = 0; d < 4; ++d) {
        int bx = ix + kDx[d], by = iy + kDy[d];
        if (bx < 0 || by < 0 || bx >= g.nx || by >= g.ny) continue;
        const int b = g.index(bx, by);
        // Current along the link a -> b.
        double j = std::imag(std::conj(g.values[a]) * g.values[b]);
        switch (g.mask[b]) {
          case NodeKind::radiation_in: f.incoming -= j; break;
          case NodeKind::radiation_out: f.outgoing += j; break;
          case NodeKind::wall: f.wall += j; break;
          default: break;
        }
      }
    }
  double scale = std::max(std::abs(f.incoming), 1e-300);
  f.balance_error = std::abs(f.incoming - f.outgoing - f.wall) / scale;
  return f;
}

void write_billiard_csv(const std::filesystem::path& path, const BilliardGrid& g) {
  auto current = continuum_current(g);
  CsvWriter out(path, {"ix", "iy", "x", "y", "re", "im", "abs2", "jx", "jy"});
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const int node = g.index(ix, iy);
      const cplx z = g.values[node];
      out.cell(ix).cell(iy).cell(g.x(ix)).cell(g.y(iy)).cell(z.real()).cell(z.imag());
      out.cell(std::norm(z)).cell(current[node][0]).cell(current[node][1]);
      out.end_row();
    }
}

}  // namespace latticewave
