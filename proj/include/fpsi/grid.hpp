#pragma once

#include <iosfwd>
#include <vector>

#include "fpsi/types.hpp"

namespace fpsi {

// Structured node grid on an axis-aligned rectangle. Node (i,j) sits at
// (x0 + i*dx, y0 + j*dy); linear node index is j*nx + i. Quadrature is the
// cell-midpoint rule on the (nx-1)*(ny-1) cells, so the weights sum to the
// rectangle area exactly.
struct RectGrid {
  Index nx = 0, ny = 0;
  Scalar x0 = 0, y0 = 0;
  Scalar dx = 0, dy = 0;

  RectGrid() = default;
  RectGrid(Index nx_, Index ny_, Scalar x0_, Scalar y0_, Scalar lx, Scalar ly);

  Index num_nodes() const { return nx * ny; }
  Index num_cells() const { return (nx - 1) * (ny - 1); }
  Index node_index(Index i, Index j) const { return j * nx + i; }
  Index cell_index(Index i, Index j) const { return j * (nx - 1) + i; }

  Vec2 node(Index i, Index j) const {
    return {x0 + Scalar(i) * dx, y0 + Scalar(j) * dy};
  }
  Vec2 cell_center(Index i, Index j) const {
    return {x0 + (Scalar(i) + 0.5) * dx, y0 + (Scalar(j) + 0.5) * dy};
  }

  Scalar lx() const { return Scalar(nx - 1) * dx; }
  Scalar ly() const { return Scalar(ny - 1) * dy; }
  Scalar area() const { return lx() * ly(); }
  Scalar cell_area() const { return dx * dy; }

  bool is_boundary(Index i, Index j) const {
    return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
  }
  std::vector<Index> boundary_nodes() const;

  // Positions of all nodes, one row per node.
  NodeField node_positions() const;

  // Trapezoidal nodal weights (interior dx*dy, edges half, corners quarter);
  // they also sum to the rectangle area exactly and are exact on bilinear
  // integrands. Used for nodal L2-type norms.
  VectorX node_weights() const;
};

// Reference grid of the solid on Q, plus the pinned ("Dirichlet") node set P.
struct SolidGrid : RectGrid {
  std::vector<Index> dirichlet_set;  // subset of boundary nodes; may be empty

  SolidGrid() = default;
  SolidGrid(Index nx_, Index ny_, Scalar x0_, Scalar y0_, Scalar lx, Scalar ly)
      : RectGrid(nx_, ny_, x0_, y0_, lx, ly) {}
};

// Container grid on Omega.
struct FluidGrid : RectGrid {
  FluidGrid() = default;
  FluidGrid(Index mx, Index my, Scalar x0_, Scalar y0_, Scalar lx, Scalar ly)
      : RectGrid(mx, my, x0_, y0_, lx, ly) {}

  std::vector<Index> boundary_set() const { return boundary_nodes(); }
  bool contains(const Vec2& p) const {
    return p.x() >= x0 && p.x() <= x0 + lx() && p.y() >= y0 &&
           p.y() <= y0 + ly();
  }
};

// Nodal deformation eta: Q -> Omega. values.row(n) is the deformed position
// of solid node n.
struct DeformationField {
  const SolidGrid* grid = nullptr;
  NodeField values;

  DeformationField() = default;
  DeformationField(const SolidGrid& g, NodeField v)
      : grid(&g), values(std::move(v)) {}

  // Embeds Q rigidly at an offset (identity map when offset is zero).
  static DeformationField identity_embed(const SolidGrid& g,
                                         const Vec2& offset = Vec2::Zero());
  // Stretch by lambda along x about the center of Q, then offset.
  static DeformationField uniaxial_stretch(const SolidGrid& g, Scalar lambda,
                                           const Vec2& offset = Vec2::Zero());
};

// Stream-function representation of the fluid velocity. psi holds one value
// per fluid node; boundary entries must be zero (no-slip), interior entries
// are the free DOFs.
struct StreamVelocity {
  const FluidGrid* grid = nullptr;
  VectorX psi;

  StreamVelocity() = default;
  explicit StreamVelocity(const FluidGrid& g)
      : grid(&g), psi(VectorX::Zero(g.num_nodes())) {}
  StreamVelocity(const FluidGrid& g, VectorX p) : grid(&g), psi(std::move(p)) {}
};

// Plain-text grid snapshot: header "nx ny x0 y0 dx dy", then one row per
// node "i j value..." in row-major order.
void write_snapshot(std::ostream& os, const RectGrid& grid,
                    const MatrixX& node_values);
MatrixX read_snapshot(std::istream& is, RectGrid& grid_out);

void write_snapshot_file(const std::string& path, const RectGrid& grid,
                         const MatrixX& node_values);
MatrixX read_snapshot_file(const std::string& path, RectGrid& grid_out);

}  // namespace fpsi
