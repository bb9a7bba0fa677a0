#pragma once

#include "fpsi/stencils.hpp"

namespace fpsi {

// Material and regularization parameters of the solid stored energy
//   E(eta) = int_Q (1/8)|grad(eta)^T grad(eta) - I|_C^2
//          + (det grad eta)^(-a) + (1/q)|grad^2 eta|^q dx,
// with the isotropic elastic norm |M|_C^2 = 2*mu*|M|^2 + lambda*tr(M)^2.
// The regularized variant adds (h_reg_weight/2)*||D^3 eta||^2 built from
// third forward differences.
struct ElasticParams {
  Scalar mu = 1.0;
  Scalar lambda = 1.0;
  Scalar a = 9.0;      // determinant-penalty exponent, needs a > 2q/(q-2)
  Scalar q = 4.0;      // second-gradient exponent, needs q > 2
  Scalar h_reg_weight = 0.0;  // h^a0; zero disables the regularizer
  Scalar a0 = 0.5;            // exponent used by the scheme to set h_reg_weight
  int k0_order = 3;           // order of the regularizing difference

  // Throws std::invalid_argument listing every violated constraint.
  void validate() const;
};

struct EnergyBreakdown {
  Scalar stvk = 0;
  Scalar det_penalty = 0;
  Scalar second_gradient = 0;
  Scalar regularizer = 0;
  bool finite = true;  // false iff det(grad eta) <= 0 at some quadrature point

  Scalar total() const {
    return finite ? stvk + det_penalty + second_gradient + regularizer
                  : kInfinity;
  }
};

// E(eta); the +infinity case is a value (breakdown.finite == false), not an
// error, so a line search can reject such states.
EnergyBreakdown stored_energy(const DiffOps& ops, const DeformationField& eta,
                              const ElasticParams& p);

// Analytic gradient of the discrete E with respect to the nodal positions;
// rows of pinned (Dirichlet) nodes are zeroed. Throws InfiniteEnergyError
// when the barrier is active.
NodeField stored_energy_gradient(const DiffOps& ops,
                                 const DeformationField& eta,
                                 const ElasticParams& p);

// E_h = E + (h_reg_weight/2)*||D^3 eta||^2 and its gradient.
EnergyBreakdown regularized_energy(const DiffOps& ops,
                                   const DeformationField& eta,
                                   const ElasticParams& p);
NodeField regularized_energy_gradient(const DiffOps& ops,
                                      const DeformationField& eta,
                                      const ElasticParams& p);

// Minimum of det(grad eta) over the quadrature points.
Scalar min_determinant(const DiffOps& ops, const DeformationField& eta);

}  // namespace fpsi
