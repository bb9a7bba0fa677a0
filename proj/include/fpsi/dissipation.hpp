#pragma once

#include <functional>

#include "fpsi/stencils.hpp"

namespace fpsi {

// Drag and viscosity parameters. The drag matrix a(F) must be symmetric
// positive semi-definite for det F > 0; the default (no callback) is the
// isotropic a(F) = drag_a0 * I.
struct DissipationParams {
  Scalar nu = 1.0;       // fluid viscosity
  Scalar drag_a0 = 1.0;  // isotropic drag coefficient
  std::function<Mat2(const Mat2&)> drag_matrix;  // optional anisotropic a(F)
  Scalar h_rate_weight = 0.0;  // h, weight of the rate regularizers

  Mat2 drag_at(const Mat2& f) const {
    return drag_matrix ? drag_matrix(f) : Mat2(drag_a0 * Mat2::Identity());
  }

  void validate() const;
};

// Kelvin-Voigt solid dissipation
//   R(eta, b) = int_Q |(grad b)^T grad eta + (grad eta)^T grad b|^2 dx
// and its derivative in the rate argument b.
Scalar kelvin_voigt_rate(const DiffOps& ops, const NodeField& eta_values,
                         const NodeField& rate_values);
NodeField kelvin_voigt_partial(const DiffOps& ops, const NodeField& eta_values,
                               const NodeField& rate_values);

// ||D^3 b||^2 built from the third-difference form, and its derivative.
// Shared by the solid rate regularizer (h/2)||D^3 d_t eta||^2 and the fluid
// one (h/2)||D^3 v||^2.
Scalar rate_regularizer(const DiffOps& ops, const NodeField& b);
NodeField rate_regularizer_partial(const DiffOps& ops, const NodeField& b);

// Drag potential A(eta, phi) = int_Q (1/2) phi^T a(grad eta) phi dx with the
// relative velocity phi given at the solid nodes.
Scalar drag_potential(const DiffOps& ops, const NodeField& eta_values,
                      const NodeField& relative, const DissipationParams& p);

// Partial derivatives of A(eta, eta_dot - v o eta) in the solid rate and in
// the stream-function DOFs. The solid and fluid nodal forces are exact
// transposes of each other through the interpolation weights, so the pairing
// <solid, b> + <fluid_nodes, xi> vanishes whenever b = xi o eta.
struct DragPartials {
  Scalar value = 0;        // A itself
  NodeField solid;         // d A / d eta_dot (per solid node)
  NodeField fluid_nodes;   // d A / d v (per fluid node)
  VectorX psi;             // d A / d psi (chained through the curl)
};
DragPartials drag_partials(const DiffOps& solid_ops, const FluidGrid& fluid,
                           const DiffOps& fluid_ops,
                           const NodeField& eta_values,
                           const NodeField& eta_dot, const VectorX& psi,
                           const DissipationParams& p);

// Fluid viscous dissipation (nu/2)||sym grad v||^2 from the nodal velocity,
// and its partials with respect to v and psi.
Scalar fluid_dissipation(const DiffOps& ops, const NodeField& v, Scalar nu);
NodeField fluid_dissipation_partial_v(const DiffOps& ops, const NodeField& v,
                                      Scalar nu);
VectorX fluid_dissipation_partial_psi(const DiffOps& ops, const VectorX& psi,
                                      Scalar nu);

// Chains a per-node velocity force back to stream-function DOFs.
VectorX velocity_force_to_psi(const DiffOps& ops, const NodeField& force_v);

}  // namespace fpsi
