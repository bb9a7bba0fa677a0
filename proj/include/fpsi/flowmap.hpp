#pragma once

#include <utility>
#include <vector>

#include "fpsi/stencils.hpp"

namespace fpsi {

// Nodal Lagrangian flow map of the fluid on the container grid; values.row(n)
// is the current position of the particle that started at node n (of the
// window's initial time).
struct FlowMap {
  const FluidGrid* grid = nullptr;
  NodeField values;

  FlowMap() = default;
  static FlowMap identity(const FluidGrid& g) {
    FlowMap phi;
    phi.grid = &g;
    phi.values = g.node_positions();
    return phi;
  }
};

// One explicit composition step: Phiter <- (id + tau * v) o Phi. Advected
// points may leave the container by less than one cell (they are clamped
// back to the boundary); beyond that an OutOfDomainError is thrown.
FlowMap advance(const FlowMap& phi, const NodeField& v_nodes, Scalar tau);

// Min and max of det(grad Phi) over the quadrature cells.
std::pair<Scalar, Scalar> jacobian_det_bounds(const DiffOps& ops,
                                              const FlowMap& phi);

// Largest spectral norm of the discrete velocity gradient over the cells
// (the measured Lipschitz constant of v).
Scalar lipschitz_constant(const DiffOps& ops, const NodeField& v_nodes);

// Largest |det(grad v)| over the cells and largest |tr(grad v)| (the
// discrete divergence residual at the cells); the measured ingredients of
// the 2x2 determinant expansion det(I + tau G) = 1 + tau tr G + tau^2 det G.
struct GradientExpansion {
  Scalar max_abs_det = 0;
  Scalar max_abs_trace = 0;
};
GradientExpansion gradient_expansion_bounds(const DiffOps& ops,
                                            const NodeField& v_nodes);

// Newton inversion of the bilinear interpolant of a nodal map at one target
// point. Throws InversionFailure when it does not converge.
Vec2 invert_at(const FlowMap& phi, const Vec2& target, Scalar tol = 1e-10,
               int max_iter = 50);

// Inverts the map at every grid node (z such that Phi(z) = node position).
NodeField invert_at_nodes(const FlowMap& phi, Scalar tol = 1e-10,
                          int max_iter = 50);

// History of one solved window: maps[k] is the flow map after k inner steps
// (maps[0] is the identity), velocities[k] the nodal velocity of step k+1.
struct WindowFlowHistory {
  std::vector<FlowMap> maps;
  std::vector<NodeField> velocities;
};

// Map sending a particle position at time t to its position at time t + s,
// assembled from per-window histories with inner step tau and window length
// h. Both t and t + s must lie on the tau-lattice of the solved horizon.
FlowMap compose_windows(const FluidGrid& grid,
                        const std::vector<WindowFlowHistory>& windows,
                        Scalar tau, Scalar h, Scalar t, Scalar s);

// Delayed fluid data for the next window: w_k = v_{k+1} o Phi_{k+1} o
// Phi_N^{-1}, evaluated at the grid nodes for every inner step k.
std::vector<NodeField> straighten_velocity(const WindowFlowHistory& window);

}  // namespace fpsi
