#pragma once

#include <functional>
#include <optional>

#include "fpsi/dissipation.hpp"
#include "fpsi/energy.hpp"
#include "fpsi/flowmap.hpp"
#include "fpsi/injectivity.hpp"

namespace fpsi {

// Constants of one inner step of the two-scale scheme.
struct StepSettings {
  Scalar tau = 0;
  Scalar h = 0;
  Scalar rho_s = 1;
  Scalar rho_f = 1;
  ElasticParams elastic;     // h_reg_weight already set to h^a0
  DissipationParams diss;    // h_rate_weight already set to h
};

// The per-step objective over (deformation DOFs, stream DOFs):
//
//   F(eta, v) = E_h(eta)
//             + tau * [ R_h(eta_k, d) + A(eta_k, d - v o eta_k)
//                       + (nu/2)||sym grad v||^2 + (h/2)||D^3 v||^2 ]
//             + (tau/2h) * [ rho_s ||d - zeta_k||^2
//                            + rho_f ||v o Phi_k - w_k||^2 ]
//             - tau <f_k, v>,            d := (eta - eta_k)/tau,
//
// with v = curl(psi). The dissipative terms are evaluated at the previous
// deformation eta_k, which makes every term except E_h quadratic in the
// unknowns; the interpolation weights at eta_k and at the flow-map images
// are therefore fixed for the whole solve and are precomputed here.
class StepFunctional {
 public:
  StepFunctional(const DiffOps& solid_ops, const FluidGrid& fluid,
                 const DiffOps& fluid_ops, const DeformationField& eta_k,
                 const FlowMap& phi_k, const NodeField& zeta_k,
                 const NodeField& w_k, const NodeField& f_k,
                 const StepSettings& s);

  // Named pieces of the objective at a state (all pre-weighting values, the
  // scheme's ledger derives its channels from these).
  struct Channels {
    EnergyBreakdown energy;       // E_h(eta) breakdown
    Scalar kelvin_voigt = 0;      // R(eta_k, d)
    Scalar solid_rate_reg = 0;    // (h/2)||D^3 d||^2
    Scalar drag = 0;              // A(eta_k, d - v o eta_k)
    Scalar viscous = 0;           // (nu/2)||sym grad v||^2
    Scalar fluid_rate_reg = 0;    // (h/2)||D^3 v||^2
    Scalar inertia_solid = 0;     // (tau/2h) rho_s ||d - zeta||^2
    Scalar inertia_fluid = 0;     // (tau/2h) rho_f ||v o Phi - w||^2
    Scalar work_rate = 0;         // <f, v>
    Scalar total = 0;             // the objective; +inf marker when infeasible
  };

  // Returns the +infinity marker for states with det(grad eta) <= 0; never
  // feeds it into arithmetic.
  Scalar evaluate(const NodeField& eta_values, const VectorX& psi) const;
  Channels evaluate_channels(const NodeField& eta_values,
                             const VectorX& psi) const;

  // Analytic gradient; Dirichlet rows and boundary psi entries are zeroed.
  // Throws InfiniteEnergyError at infeasible states.
  void gradient(const NodeField& eta_values, const VectorX& psi,
                NodeField& g_eta, VectorX& g_psi) const;

  // Flat DOF vector: solid positions (node-major x,y), then interior psi.
  Index num_dofs() const { return 2 * num_solid_nodes_ + Index(interior_.size()); }
  VectorX pack(const NodeField& eta_values, const VectorX& psi) const;
  void unpack(const VectorX& x, NodeField& eta_values, VectorX& psi) const;

  Scalar value_at_rest() const;   // F(eta_k, 0)
  const DeformationField& previous() const { return *eta_k_; }
  const DiffOps& solid_ops() const { return *solid_ops_; }
  const DiffOps& fluid_ops() const { return *fluid_ops_; }
  const StepSettings& settings() const { return settings_; }

  // Measured norms entering the ledger.
  Scalar fluid_norm_sq(const NodeField& v) const;           // ||v||^2 nodal
  Scalar fluid_norm_sq_composed(const NodeField& v) const;  // ||v o Phi_k||^2
  Scalar solid_norm_sq(const NodeField& b) const;           // ||b||^2 nodal

 private:
  const DiffOps* solid_ops_;
  const FluidGrid* fluid_;
  const DiffOps* fluid_ops_;
  const DeformationField* eta_k_;
  NodeField zeta_, w_, f_;
  StepSettings settings_;

  Index num_solid_nodes_ = 0;
  std::vector<Index> interior_;     // interior fluid node indices
  SparseMat w_eta_;                 // interpolation at eta_k node images
  SparseMat w_phi_;                 // interpolation at Phi_k node images
  std::vector<Mat2> drag_cells_;    // a(grad eta_k) per solid cell
  VectorX solid_weights_, fluid_weights_;  // nodal quadrature weights
};

enum class MinimizeStatus { Converged, MaxIter, CollisionGuard };

struct MinimizeOptions {
  Scalar gtol = 1e-8;   // on ||grad||_2 / sqrt(ndof)
  Scalar ftol = 1e-12;  // relative decrease per iteration
  int max_iterations = 500;
  int lbfgs_memory = 10;
  Scalar certificate_tol = 1e-10;
  bool warm_start = false;
};

struct MinimizeReport {
  int iterations = 0;
  Scalar final_gradient_norm = 0;
  Scalar value_at_min = 0;
  Scalar value_at_rest = 0;
  int line_search_rejections = 0;
  MinimizeStatus status = MinimizeStatus::Converged;
  bool certificate_ok = true;  // value_at_min <= value_at_rest + tolerance
};

struct MinimizeResult {
  NodeField eta_values;
  VectorX psi;
  MinimizeReport report;
};

using GuardFn = std::function<GuardVerdict(const NodeField& eta_values)>;

// Limited-memory quasi-Newton descent from the rest state (eta_k, 0) with a
// strong-Wolfe line search; trial states with the +infinity marker are
// rejected by the search, so every accepted iterate keeps det(grad eta) > 0.
// The warm start, when enabled and strictly better than rest, replaces the
// starting point; the certificate is always measured against rest.
MinimizeResult minimize(const StepFunctional& f, const MinimizeOptions& opt,
                        const GuardFn& guard = nullptr,
                        const NodeField* warm_eta = nullptr,
                        const VectorX* warm_psi = nullptr);

}  // namespace fpsi
