#include "fpsi/scheme.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace fpsi {

Index SchemeParams::steps_per_window() const {
  return Index(std::llround(h / tau));
}

Index SchemeParams::num_windows() const {
  return Index(std::llround(horizon / h));
}

void SchemeParams::validate() const {
  std::ostringstream msg;
  bool bad = false;
  auto fail = [&](const std::string& s) {
    if (bad) msg << "; ";
    msg << s;
    bad = true;
  };
  if (!(tau > 0)) fail("tau must be > 0");
  if (!(h > 0)) fail("h must be > 0");
  if (!(horizon > 0)) fail("horizon must be > 0");
  if (tau > 0 && h > 0) {
    const Scalar n = h / tau;
    if (std::abs(n - std::llround(n)) > 1e-9 * n || std::llround(n) < 1)
      fail("h/tau must be a positive integer");
  }
  if (h > 0 && horizon > 0) {
    const Scalar n = horizon / h;
    if (std::abs(n - std::llround(n)) > 1e-9 * n || std::llround(n) < 1)
      fail("horizon/h must be a positive integer (no partial windows)");
  }
  if (!(rho_s > 0) || !(rho_f > 0)) fail("densities must be > 0");
  if (bad) throw std::invalid_argument("scheme parameters: " + msg.str());
  elastic.validate();
  diss.validate();
}

SchemeContext::SchemeContext(const SolidGrid& s, const FluidGrid& f,
                             SchemeParams p)
    : solid(&s), fluid(&f), params(std::move(p)) {
  params.validate();
  solid_ops = make_diff_ops(s);
  fluid_ops = make_diff_ops(f);
  if (params.guard.clearance_tol <= 0)
    params.guard.clearance_tol = std::min(f.dx, f.dy);
  // The scheme's regularization weights are tied to the window length.
  params.elastic.h_reg_weight = std::pow(params.h, params.elastic.a0);
  params.diss.h_rate_weight = params.h;
}

std::vector<NodeField> sample_force(const FluidGrid& grid, const ForceFn& f,
                                    Scalar t0, Scalar tau, Index steps) {
  std::vector<NodeField> out;
  out.reserve(steps);
  const NodeField pos = grid.node_positions();
  for (Index k = 0; k < steps; ++k) {
    NodeField fk = NodeField::Zero(grid.num_nodes(), 2);
    if (f) {
      const Scalar t = t0 + (Scalar(k) + 0.5) * tau;
      for (Index n = 0; n < grid.num_nodes(); ++n)
        fk.row(n) = f(pos.row(n).transpose(), t).transpose();
    }
    out.push_back(std::move(fk));
  }
  return out;
}

namespace {

Scalar weighted_norm_sq(const NodeField& a, const VectorX& w) {
  return (a.array().square().rowwise().sum() * w.array()).sum();
}

}  // namespace

bool solve_window(SchemeContext& ctx, const WindowData& data,
                  Index window_index, Scalar t0, Trajectory& traj,
                  WindowData& next) {
  const Index n_steps = ctx.params.steps_per_window();
  if (Index(data.zeta.size()) != n_steps || Index(data.w.size()) != n_steps ||
      Index(data.f.size()) != n_steps)
    throw std::invalid_argument("window data must hold h/tau samples");

  StepSettings settings;
  settings.tau = ctx.params.tau;
  settings.h = ctx.params.h;
  settings.rho_s = ctx.params.rho_s;
  settings.rho_f = ctx.params.rho_f;
  settings.elastic = ctx.params.elastic;
  settings.diss = ctx.params.diss;

  const Scalar area_q = ctx.solid->area();
  const VectorX solid_w = ctx.solid->node_weights();
  const VectorX fluid_w = ctx.fluid->node_weights();

  WindowFlowHistory flow;
  flow.maps.push_back(FlowMap::identity(*ctx.fluid));

  DeformationField eta = data.eta0;
  std::vector<NodeField> rates;
  rates.reserve(n_steps);

  WindowRecord win;
  win.window = window_index;
  win.t0 = t0;
  win.t1 = t0 + ctx.params.h;
  {
    EnergyBreakdown e0 =
        regularized_energy(ctx.solid_ops, eta, ctx.params.elastic);
    win.e_start = e0.total();
  }

  // Accumulators for the window inequality and the flow-map bound.
  Scalar sum_drift_sq = 0;
  Scalar expansion_accum = 0;  // sum tau*max|trG| + tau^2*max|detG|
  Scalar sum_diss_factor1 = 0, sum_inertia = 0, sum_work = 0;
  Scalar sum_kin_solid = 0, sum_kin_fluid_comp = 0;
  Scalar kin_prev_solid = 0, kin_prev_fluid = 0;

  bool halted = false;
  const Index first_state = Index(traj.eta_hist.size()) - 1;

  for (Index k = 0; k < n_steps && !halted; ++k) {
    StepFunctional f(ctx.solid_ops, *ctx.fluid, ctx.fluid_ops, eta,
                     flow.maps.back(), data.zeta[k], data.w[k], data.f[k],
                     settings);

    InjectivityReport guard_report;
    GuardFn guard = [&](const NodeField& vals) {
      DeformationField cand{*ctx.solid, vals};
      guard_report = ciarlet_necas_gap(cand, ctx.fluid);
      return collision_guard(guard_report, area_q, ctx.params.guard);
    };

    MinimizeOptions opt = ctx.params.opt;
    opt.certificate_tol = ctx.params.certificate_tol;
    const NodeField* warm_eta = nullptr;
    const VectorX* warm_psi = nullptr;
    NodeField warm_eta_store;
    VectorX warm_psi_store;
    if (opt.warm_start && !traj.psi_hist.empty() && k > 0) {
      warm_eta_store = eta.values;  // previous accepted state
      warm_psi_store = traj.psi_hist.back();
      warm_eta = &warm_eta_store;
      warm_psi = &warm_psi_store;
    }

    MinimizeResult res = minimize(f, opt, guard, warm_eta, warm_psi);

    const Scalar time = t0 + Scalar(k + 1) * ctx.params.tau;
    StepRecord rec;
    rec.step = Index(traj.psi_hist.size()) + 1;
    rec.window = window_index;
    rec.time = time;
    rec.value_at_min = res.report.value_at_min;
    rec.value_at_rest = res.report.value_at_rest;
    rec.certificate_gap = res.report.value_at_min - res.report.value_at_rest;
    rec.gradient_norm = res.report.final_gradient_norm;
    rec.iterations = res.report.iterations;
    rec.status = int(res.report.status);

    if (!res.report.certificate_ok) traj.all_certificates_ok = false;
    if (res.report.status == MinimizeStatus::MaxIter) traj.any_maxiter = true;

    if (res.report.status == MinimizeStatus::CollisionGuard) {
      halted = true;
      traj.halt = HaltReason::CollisionDetected;
      traj.t_star = time;
      rec.cn_gap = guard_report.gap;
      rec.clearance = guard_report.min_boundary_clearance;
      traj.ledger.steps.push_back(rec);
      break;
    }

    // Accept the state.
    const NodeField rate = (res.eta_values - eta.values) / ctx.params.tau;
    const auto ch = f.evaluate_channels(res.eta_values, res.psi);
    const NodeField v = stream_to_velocity(ctx.fluid_ops, res.psi);

    rec.e_total = ch.energy.total();
    rec.e_stvk = ch.energy.stvk;
    rec.e_det = ch.energy.det_penalty;
    rec.e_grad2 = ch.energy.second_gradient;
    rec.e_reg = ch.energy.regularizer;
    rec.solid_kinetic = 0.5 * ctx.params.rho_s * weighted_norm_sq(rate, solid_w);
    rec.fluid_kinetic = 0.5 * ctx.params.rho_f * weighted_norm_sq(v, fluid_w);
    rec.fluid_kinetic_comp =
        0.5 * ctx.params.rho_f * f.fluid_norm_sq_composed(v);
    rec.diss_solid = 2 * (ch.kelvin_voigt + ch.solid_rate_reg);
    rec.diss_drag = 2 * ch.drag;
    rec.diss_visc = 2 * ch.viscous;
    rec.diss_vreg = 2 * ch.fluid_rate_reg;
    rec.work_rate = ch.work_rate;

    DeformationField eta_new{*ctx.solid, res.eta_values};
    rec.min_det = min_determinant(ctx.solid_ops, eta_new);
    rec.cn_gap = guard_report.gap;
    rec.clearance = guard_report.min_boundary_clearance;

    // Flow map update and its Jacobian bookkeeping.
    const GradientExpansion ge = gradient_expansion_bounds(ctx.fluid_ops, v);
    expansion_accum += ctx.params.tau * ge.max_abs_trace +
                       ctx.params.tau * ctx.params.tau * ge.max_abs_det;
    flow.maps.push_back(advance(flow.maps.back(), v, ctx.params.tau));
    flow.velocities.push_back(v);
    const auto dets = jacobian_det_bounds(ctx.fluid_ops, flow.maps.back());
    rec.phi_det_min = dets.first;
    rec.phi_det_max = dets.second;
    rec.lip_v = lipschitz_constant(ctx.fluid_ops, v);

    const Scalar vnorm2 = f.fluid_norm_sq(v);
    rec.vphi_defect = std::abs(2 * rec.fluid_kinetic_comp / ctx.params.rho_f -
                               vnorm2);
    rec.vphi_bound = (std::exp(expansion_accum) - 1) * vnorm2;

    // Drift from the window-initial state and its Cauchy-Schwarz bound.
    sum_drift_sq += ctx.params.tau * weighted_norm_sq(rate, solid_w);
    rec.drift = std::sqrt(
        weighted_norm_sq(res.eta_values - data.eta0.values, solid_w));
    rec.drift_bound =
        std::sqrt(Scalar(k + 1) * ctx.params.tau) * std::sqrt(sum_drift_sq);

    // Window accumulators.
    sum_diss_factor1 += ctx.params.tau *
                        (ch.kelvin_voigt + ch.solid_rate_reg + ch.drag +
                         ch.viscous + ch.fluid_rate_reg);
    sum_inertia += ch.inertia_solid + ch.inertia_fluid;
    sum_work += ctx.params.tau * ch.work_rate;
    sum_kin_solid += rec.solid_kinetic;
    sum_kin_fluid_comp += rec.fluid_kinetic_comp;
    kin_prev_solid +=
        0.5 * ctx.params.rho_s * weighted_norm_sq(data.zeta[k], solid_w);
    kin_prev_fluid +=
        0.5 * ctx.params.rho_f * weighted_norm_sq(data.w[k], fluid_w);

    traj.ledger.steps.push_back(rec);
    traj.times.push_back(time);
    traj.eta_hist.push_back(eta_new);
    traj.psi_hist.push_back(res.psi);
    rates.push_back(rate);
    eta = eta_new;
  }

  if (halted) {
    traj.flows.push_back(std::move(flow));
    return false;
  }

  // Window bookkeeping.
  const Scalar inv_n = 1.0 / Scalar(n_steps);
  win.e_end = traj.ledger.steps.back().e_total;
  win.kin_window_solid = sum_kin_solid * inv_n;
  win.kin_window_fluid = sum_kin_fluid_comp * inv_n;
  win.kin_prev_solid = kin_prev_solid * inv_n;
  win.kin_prev_fluid = kin_prev_fluid * inv_n;
  win.work = sum_work;
  win.sum_dissipation = 2 * sum_diss_factor1;

  // Exact certificate telescope: factor-1 dissipation plus the difference
  // inertia terms, with only the per-step certificate tolerance as slack.
  {
    const Scalar lhs = win.e_end + sum_diss_factor1 + sum_inertia;
    const Scalar rhs = win.e_start +
                       Scalar(n_steps) * (win.kin_prev_solid +
                                          win.kin_prev_fluid) *
                           inv_n * 1.0 +
                       sum_work;
    // rhs kinetic part: (tau/2h)*sum(|zeta|^2 rho_s + |w|^2 rho_f) equals the
    // plain average since tau/h = 1/N.
    const Scalar scale = 1 + std::abs(rhs) + std::abs(lhs);
    win.telescope_ok =
        lhs <= rhs + Scalar(n_steps) * ctx.params.certificate_tol * scale;
  }

  // Paper-form window inequality (factor-2 dissipation, averaged kinetics).
  {
    win.inequality_lhs = win.e_end + win.sum_dissipation +
                         win.kin_window_solid + win.kin_window_fluid;
    win.inequality_rhs =
        win.e_start + win.kin_prev_solid + win.kin_prev_fluid + win.work;
    const Scalar scale =
        1 + std::abs(win.inequality_lhs) + std::abs(win.inequality_rhs);
    win.slack_allowed = Scalar(n_steps) * ctx.params.window_slack_coeff * scale;
    win.inequality_ok =
        win.inequality_lhs <= win.inequality_rhs + win.slack_allowed;
  }
  if (!win.telescope_ok || !win.inequality_ok)
    traj.all_window_inequalities_ok = false;

  // Delayed data for the next window.
  next.eta0 = eta;
  next.zeta = std::move(rates);
  next.w = straighten_velocity(flow);
  next.f.clear();

  Scalar handoff_fluid = 0;
  for (const NodeField& wk : next.w)
    handoff_fluid += 0.5 * ctx.params.rho_f * weighted_norm_sq(wk, fluid_w);
  win.handoff_kin_solid = win.kin_window_solid;
  win.handoff_kin_fluid = handoff_fluid * inv_n;

  traj.ledger.windows.push_back(win);
  traj.flows.push_back(std::move(flow));
  return true;
}

Trajectory solve_horizon(SchemeContext& ctx, const DeformationField& eta0,
                         const NodeField& b, const VectorX& psi0,
                         const ForceFn& force) {
  ctx.params.validate();

  // Admissibility of the initial state.
  {
    EnergyBreakdown e =
        regularized_energy(ctx.solid_ops, eta0, ctx.params.elastic);
    if (!e.finite)
      throw std::invalid_argument("initial deformation has infinite energy");
    const InjectivityReport rep = ciarlet_necas_gap(eta0, ctx.fluid);
    if (collision_guard(rep, ctx.solid->area(), ctx.params.guard) ==
        GuardVerdict::Halt)
      throw std::invalid_argument(
          "initial deformation violates the injectivity guard");
    for (Index n = 0; n < eta0.values.rows(); ++n)
      if (!ctx.fluid->contains(eta0.values.row(n).transpose()))
        throw std::invalid_argument(
            "initial deformation leaves the container");
  }

  const Index n_steps = ctx.params.steps_per_window();
  const Index n_windows = ctx.params.num_windows();

  Trajectory traj;
  traj.times.push_back(0);
  traj.eta_hist.push_back(eta0);

  const NodeField v0 = stream_to_velocity(ctx.fluid_ops, psi0);

  WindowData data;
  data.eta0 = eta0;
  data.zeta.assign(n_steps, b);
  data.w.assign(n_steps, v0);

  for (Index m = 0; m < n_windows; ++m) {
    const Scalar t0 = Scalar(m) * ctx.params.h;
    data.f = sample_force(*ctx.fluid, force, t0, ctx.params.tau, n_steps);
    WindowData next;
    if (!solve_window(ctx, data, m, t0, traj, next)) return traj;
    data = std::move(next);
  }
  traj.halt = HaltReason::HorizonReached;
  traj.t_star = ctx.params.horizon;
  return traj;
}

namespace {

void put(std::ostream& os, Scalar v, bool first = false) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  if (!first) os << ',';
  os << buf;
}

}  // namespace

std::string EnergyLedger::steps_header() {
  return "step,window,time,e_total,e_stvk,e_det,e_grad2,e_reg,"
         "solid_kinetic,fluid_kinetic,fluid_kinetic_comp,"
         "diss_solid,diss_drag,diss_visc,diss_vreg,work_rate,"
         "value_at_min,value_at_rest,certificate_gap,gradient_norm,"
         "iterations,status,min_det,cn_gap,clearance,"
         "phi_det_min,phi_det_max,lip_v,vphi_defect,vphi_bound,"
         "drift,drift_bound";
}

void EnergyLedger::write_steps_csv(std::ostream& os) const {
  os << steps_header() << '\n';
  for (const StepRecord& r : steps) {
    os << r.step << ',' << r.window;
    put(os, r.time);
    put(os, r.e_total);
    put(os, r.e_stvk);
    put(os, r.e_det);
    put(os, r.e_grad2);
    put(os, r.e_reg);
    put(os, r.solid_kinetic);
    put(os, r.fluid_kinetic);
    put(os, r.fluid_kinetic_comp);
    put(os, r.diss_solid);
    put(os, r.diss_drag);
    put(os, r.diss_visc);
    put(os, r.diss_vreg);
    put(os, r.work_rate);
    put(os, r.value_at_min);
    put(os, r.value_at_rest);
    put(os, r.certificate_gap);
    put(os, r.gradient_norm);
    os << ',' << r.iterations << ',' << r.status;
    put(os, r.min_det);
    put(os, r.cn_gap);
    put(os, r.clearance);
    put(os, r.phi_det_min);
    put(os, r.phi_det_max);
    put(os, r.lip_v);
    put(os, r.vphi_defect);
    put(os, r.vphi_bound);
    put(os, r.drift);
    put(os, r.drift_bound);
    os << '\n';
  }
}

std::string EnergyLedger::windows_header() {
  return "window,t0,t1,e_start,e_end,sum_dissipation,"
         "kin_window_solid,kin_window_fluid,kin_prev_solid,kin_prev_fluid,"
         "work,inequality_lhs,inequality_rhs,slack_allowed,inequality_ok,"
         "telescope_ok,handoff_kin_solid,handoff_kin_fluid";
}

void EnergyLedger::write_windows_csv(std::ostream& os) const {
  os << windows_header() << '\n';
  for (const WindowRecord& w : windows) {
    os << w.window;
    put(os, w.t0);
    put(os, w.t1);
    put(os, w.e_start);
    put(os, w.e_end);
    put(os, w.sum_dissipation);
    put(os, w.kin_window_solid);
    put(os, w.kin_window_fluid);
    put(os, w.kin_prev_solid);
    put(os, w.kin_prev_fluid);
    put(os, w.work);
    put(os, w.inequality_lhs);
    put(os, w.inequality_rhs);
    put(os, w.slack_allowed);
    os << ',' << (w.inequality_ok ? 1 : 0) << ',' << (w.telescope_ok ? 1 : 0);
    put(os, w.handoff_kin_solid);
    put(os, w.handoff_kin_fluid);
    os << '\n';
  }
}

}  // namespace fpsi
