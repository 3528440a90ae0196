#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "latticewave/edge_solutions.hpp"
#include "latticewave/graph.hpp"

namespace latticewave {

// Small circle standing in for an attached lead.
struct Port {
  Point center{};
  double radius = 0.01;
  LeadDirection direction = LeadDirection::incoming;
};

// Box [0, width] x [0, height] minus an optional disc, Dirichlet walls.
struct BilliardGeometry {
  double width = 1.0;
  double height = 1.0;
  std::optional<Disc> disc;
  std::vector<Port> ports;
};

enum class NodeKind { interior, wall, radiation_in, radiation_out, outside };

// Node (ix, iy) sits at (ix h, iy h).
struct BilliardGrid {
  double h = 0.0;
  int nx = 0;
  int ny = 0;
  double energy = 0.0;
  std::vector<NodeKind> mask;
  std::vector<cplx> values;

  int index(int ix, int iy) const { return iy * nx + ix; }
  double x(int ix) const { return ix * h; }
  double y(int iy) const { return iy * h; }
  // Bilinear interpolation; zero outside the box.
  cplx sample(double px, double py) const;
};

// Wall, port and interior marks without values. Lead circles collapse to
// their nearest node (outside), whose four neighbours form the radiation ring.
BilliardGrid make_billiard_grid(const BilliardGeometry& geometry, double h);

struct ClosedModes {
  std::vector<double> energies;
  std::vector<BilliardGrid> modes;  // unit 2-norm over nodes
};

// Lowest Dirichlet eigenpairs of the 5-point Laplacian; ports are ignored.
// Throws NumericError when some returned mode has sqrt(E) h >= 0.5.
ClosedModes solve_closed_modes(const BilliardGeometry& geometry, double h, int count);

// (-Laplace - E) psi = 0 with Dirichlet walls and the Robin rows
// d psi/dn + i k psi = 2ik (incoming) or 0 (outgoing), k = sqrt(E), on
// each radiation ring; n points away from the circle centre.
BilliardGrid solve_open_field(const BilliardGeometry& geometry, double h, double energy);

// Central-difference Im(conj(psi) grad psi) per node, zero off the domain.
std::vector<std::array<double, 2>> continuum_current(const BilliardGrid& grid);

// Link currents Im(conj(psi_a) psi_b) summed over the links between the
// Helmholtz nodes and each class of non-Helmholtz node.
struct PortFluxes {
  double incoming = 0.0;  // into the domain
  double outgoing = 0.0;  // out through the outgoing rings
  double wall = 0.0;      // out through wall links
  double balance_error = 0.0;  // |in - out - wall| / |in|
};
PortFluxes port_fluxes(const BilliardGrid& grid);

// ix, iy, x, y, re, im, abs2, jx, jy
void write_billiard_csv(const std::filesystem::path& path, const BilliardGrid& grid);

}  // namespace latticewave
