#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpsi/minimizer.hpp"

namespace fpsi {

struct SchemeParams {
  Scalar tau = 0;
  Scalar h = 0;
  Scalar horizon = 0;  // T; must be an integer multiple of h
  Scalar rho_s = 1;
  Scalar rho_f = 1;
  ElasticParams elastic;
  DissipationParams diss;
  GuardTols guard;  // clearance_tol <= 0 means "one fluid cell"
  MinimizeOptions opt;
  Scalar certificate_tol = 1e-10;   // per-step certificate scale factor
  Scalar window_slack_coeff = 1e-9;  // window inequality slack per (h/tau)

  Index steps_per_window() const;
  Index num_windows() const;
  void validate() const;
};

// One row of the ledger per accepted inner step.
struct StepRecord {
  Index step = 0;    // global inner-step index (1-based state index)
  Index window = 0;
  Scalar time = 0;

  Scalar e_total = 0, e_stvk = 0, e_det = 0, e_grad2 = 0, e_reg = 0;
  Scalar solid_kinetic = 0;        // rho_s/2 ||d eta||^2
  Scalar fluid_kinetic = 0;        // rho_f/2 ||v||^2
  Scalar fluid_kinetic_comp = 0;   // rho_f/2 ||v o Phi_k||^2 (measured)
  Scalar diss_solid = 0;           // 2 R_h
  Scalar diss_drag = 0;            // 2 A
  Scalar diss_visc = 0;            // nu ||sym grad v||^2
  Scalar diss_vreg = 0;            // h ||D^3 v||^2
  Scalar work_rate = 0;            // <f, v>

  Scalar value_at_min = 0, value_at_rest = 0, certificate_gap = 0;
  Scalar gradient_norm = 0;
  Index iterations = 0;
  int status = 0;  // MinimizeStatus as int

  Scalar min_det = 0;
  Scalar cn_gap = 0;
  Scalar clearance = 0;
  Scalar phi_det_min = 1, phi_det_max = 1;
  Scalar lip_v = 0;
  Scalar vphi_defect = 0;   // | ||v o Phi||^2 - ||v||^2 |
  Scalar vphi_bound = 0;    // (exp(accumulated expansion) - 1) * ||v||^2
  Scalar drift = 0;         // ||eta - eta(window start)||
  Scalar drift_bound = 0;   // Cauchy-Schwarz bound sqrt(t-t0)*sqrt(sum tau |rate|^2)
};

// Window-level energy bookkeeping.
struct WindowRecord {
  Index window = 0;
  Scalar t0 = 0, t1 = 0;
  Scalar e_start = 0, e_end = 0;
  Scalar sum_dissipation = 0;       // sum tau * (2R_h + 2A + nu|eps v|^2 + h|D3 v|^2)
  Scalar kin_window_solid = 0;      // avg over window of rho_s/2 ||d eta||^2
  Scalar kin_window_fluid = 0;      // avg of rho_f/2 ||v o Phi||^2 (measured)
  Scalar kin_prev_solid = 0;        // avg of rho_s/2 ||zeta||^2 (as used)
  Scalar kin_prev_fluid = 0;        // avg of rho_f/2 ||w||^2 (as used)
  Scalar work = 0;                  // sum tau <f, v>
  Scalar inequality_lhs = 0, inequality_rhs = 0, slack_allowed = 0;
  bool inequality_ok = true;        // the paper-form (factor-2) inequality
  bool telescope_ok = true;         // the exact certificate telescope
  Scalar handoff_kin_solid = 0;     // stored for the next window's kin_prev
  Scalar handoff_kin_fluid = 0;
};

struct EnergyLedger {
  std::vector<StepRecord> steps;
  std::vector<WindowRecord> windows;

  void write_steps_csv(std::ostream& os) const;
  void write_windows_csv(std::ostream& os) const;
  static std::string steps_header();
  static std::string windows_header();
};

enum class HaltReason { HorizonReached, CollisionDetected };

struct WindowData {
  DeformationField eta0;
  std::vector<NodeField> zeta;  // per inner step, solid nodes
  std::vector<NodeField> w;     // per inner step, fluid nodes
  std::vector<NodeField> f;     // per inner step, fluid nodes
};

struct Trajectory {
  std::vector<Scalar> times;                   // state times, starting at 0
  std::vector<DeformationField> eta_hist;      // one per state
  std::vector<VectorX> psi_hist;               // one per step
  std::vector<WindowFlowHistory> flows;        // one per window
  EnergyLedger ledger;
  HaltReason halt = HaltReason::HorizonReached;
  Scalar t_star = 0;
  bool all_certificates_ok = true;
  bool all_window_inequalities_ok = true;
  bool any_maxiter = false;
};

// Everything a run needs to know about its grids.
struct SchemeContext {
  const SolidGrid* solid = nullptr;
  const FluidGrid* fluid = nullptr;
  DiffOps solid_ops, fluid_ops;
  SchemeParams params;

  SchemeContext(const SolidGrid& s, const FluidGrid& f, SchemeParams p);
};

using ForceFn = std::function<Vec2(const Vec2& pos, Scalar t)>;

// Midpoint-in-time samples of the external force per inner step.
std::vector<NodeField> sample_force(const FluidGrid& grid, const ForceFn& f,
                                    Scalar t0, Scalar tau, Index steps);

// Runs the h/tau inner minimization steps of one window, appends to the
// trajectory, and assembles the next window's delayed data. Returns false
// when the collision guard halted the run.
bool solve_window(SchemeContext& ctx, const WindowData& data,
                  Index window_index, Scalar t0, Trajectory& traj,
                  WindowData& next);

// Chains windows over [0, T]; the first window carries zeta == b and
// w == v0 as constant histories.
Trajectory solve_horizon(SchemeContext& ctx, const DeformationField& eta0,
                         const NodeField& b, const VectorX& psi0,
                         const ForceFn& force);

}  // namespace fpsi
