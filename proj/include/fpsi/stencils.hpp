#pragma once

#include <array>
#include <vector>

#include "fpsi/grid.hpp"
#include "fpsi/types.hpp"

namespace fpsi {

// Sparse difference operators on a structured grid. All "cell_*" operators
// map nodal scalar fields to values at the cell midpoints (the quadrature
// points); second derivatives are formed at nodes (central interior,
// one-sided second order at the boundary) and then averaged to the cells.
//
// k3 is the quadratic form of the third forward differences,
//   f' * k3 * f = sum over difference sites of w_site * (D^alpha f)^2 * dA
// with multinomial weights (1,3,3,1) over |alpha| = 3; its kernel contains
// all affine (indeed all per-axis quadratic-free) fields.
struct DiffOps {
  const RectGrid* grid = nullptr;

  SparseMat cell_gx, cell_gy;   // nodes -> cells, d/dx and d/dy
  SparseMat cell_avg;           // nodes -> cells, 4-corner average
  SparseMat cell_hxx, cell_hxy, cell_hyy;  // nodes -> cells, second derivatives
  SparseMat k3;                 // nodes -> nodes, third-difference form

  // Stream function to velocity: vx = d(psi)/dy, vy = -d(psi)/dx at nodes,
  // with ghost-node reflection across the boundary (zero normal derivative).
  // Paired with central divergence these satisfy div(curl psi) = 0 at every
  // interior node identically.
  SparseMat curl_x, curl_y;     // nodes -> nodes
};

DiffOps make_diff_ops(const RectGrid& grid);

// Deformation gradient at each quadrature point; F(r,c) = d eta_r / d x_c.
std::vector<Mat2> gradient_of_deformation(const DiffOps& ops,
                                          const NodeField& values);
inline std::vector<Mat2> gradient_of_deformation(const DiffOps& ops,
                                                 const DeformationField& eta) {
  return gradient_of_deformation(ops, eta.values);
}

// Second gradient at each quadrature point; one symmetric 2x2 Hessian per
// deformation component.
using Hessian2 = std::array<Mat2, 2>;
std::vector<Hessian2> hessian_of_deformation(const DiffOps& ops,
                                             const NodeField& values);
inline std::vector<Hessian2> hessian_of_deformation(
    const DiffOps& ops, const DeformationField& eta) {
  return hessian_of_deformation(ops, eta.values);
}

// Velocity induced by a stream function, one row per node.
NodeField stream_to_velocity(const DiffOps& ops, const VectorX& psi);
inline NodeField stream_to_velocity(const DiffOps& ops,
                                    const StreamVelocity& v) {
  return stream_to_velocity(ops, v.psi);
}

// Central-difference divergence of a nodal vector field at the interior
// nodes (row-major over interior (i,j)). Test/diagnostic companion of the
// curl stencils.
VectorX divergence_at_interior(const RectGrid& grid, const NodeField& v);

// Sparse bilinear interpolation matrix W with one row per point:
// (W * nodal_field) evaluates the field at the points, W^T maps point
// forces back to the nodes (the adjoint weights). Points may fall outside
// the rectangle by at most max_cells_outside cells (they are clamped);
// beyond that an OutOfDomainError carrying the point is thrown.
SparseMat interpolation_matrix(const RectGrid& grid, const NodeField& points,
                               Scalar max_cells_outside = 1.0);

// Convenience wrapper returning the interpolated values directly.
NodeField interpolate_eulerian(const RectGrid& grid, const NodeField& field,
                               const NodeField& points,
                               Scalar max_cells_outside = 1.0);

// Pointwise bilinear evaluation with the interpolant's Jacobian (used by
// flow-map inversion). The point is clamped into the grid rectangle.
void bilinear_eval(const RectGrid& grid, const NodeField& field,
                   const Vec2& p, Vec2& value, Mat2& jacobian);

}  // namespace fpsi
