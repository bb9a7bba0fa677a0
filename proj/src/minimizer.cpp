#include "fpsi/minimizer.hpp"

#include <cmath>
#include <deque>

namespace fpsi {

StepFunctional::StepFunctional(const DiffOps& solid_ops, const FluidGrid& fluid,
                               const DiffOps& fluid_ops,
                               const DeformationField& eta_k,
                               const FlowMap& phi_k, const NodeField& zeta_k,
                               const NodeField& w_k, const NodeField& f_k,
                               const StepSettings& s)
    : solid_ops_(&solid_ops),
      fluid_(&fluid),
      fluid_ops_(&fluid_ops),
      eta_k_(&eta_k),
      zeta_(zeta_k),
      w_(w_k),
      f_(f_k),
      settings_(s) {
  if (!(s.tau > 0) || !(s.h > 0))
    throw std::invalid_argument("step functional needs tau > 0 and h > 0");
  num_solid_nodes_ = eta_k.grid->num_nodes();
  for (Index j = 1; j + 1 < fluid.ny; ++j)
    for (Index i = 1; i + 1 < fluid.nx; ++i)
      interior_.push_back(fluid.node_index(i, j));

  w_eta_ = interpolation_matrix(fluid, eta_k.values);
  w_phi_ = interpolation_matrix(fluid, phi_k.values);

  const auto fe = gradient_of_deformation(solid_ops, eta_k.values);
  drag_cells_.reserve(fe.size());
  for (const Mat2& f : fe) drag_cells_.push_back(s.diss.drag_at(f));

  solid_weights_ = eta_k.grid->node_weights();
  fluid_weights_ = fluid.node_weights();
}

Scalar StepFunctional::solid_norm_sq(const NodeField& b) const {
  return (b.array().square().rowwise().sum() * solid_weights_.array()).sum();
}

Scalar StepFunctional::fluid_norm_sq(const NodeField& v) const {
  return (v.array().square().rowwise().sum() * fluid_weights_.array()).sum();
}

Scalar StepFunctional::fluid_norm_sq_composed(const NodeField& v) const {
  const NodeField vc = w_phi_ * v;
  return (vc.array().square().rowwise().sum() * fluid_weights_.array()).sum();
}

StepFunctional::Channels StepFunctional::evaluate_channels(
    const NodeField& eta_values, const VectorX& psi) const {
  Channels ch;
  DeformationField eta{*eta_k_->grid, eta_values};
  ch.energy = regularized_energy(*solid_ops_, eta, settings_.elastic);
  if (!ch.energy.finite) {
    ch.total = kInfinity;
    return ch;
  }

  const Scalar tau = settings_.tau, h = settings_.h;
  const NodeField d = (eta_values - eta_k_->values) / tau;
  ch.kelvin_voigt = kelvin_voigt_rate(*solid_ops_, eta_k_->values, d);
  ch.solid_rate_reg = 0.5 * h * rate_regularizer(*solid_ops_, d);

  const NodeField v = stream_to_velocity(*fluid_ops_, psi);
  const NodeField phi = d - w_eta_ * v;
  const NodeField phi_cells = solid_ops_->cell_avg * phi;
  const Scalar dA = solid_ops_->grid->cell_area();
  for (Index c = 0; c < Index(drag_cells_.size()); ++c) {
    const Vec2 pc = phi_cells.row(c).transpose();
    ch.drag += 0.5 * pc.dot(drag_cells_[c] * pc) * dA;
  }

  ch.viscous = fluid_dissipation(*fluid_ops_, v, settings_.diss.nu);
  ch.fluid_rate_reg = 0.5 * h * rate_regularizer(*fluid_ops_, v);

  ch.inertia_solid =
      tau / (2 * h) * settings_.rho_s * solid_norm_sq(d - zeta_);
  const NodeField vphi = w_phi_ * v;
  ch.inertia_fluid =
      tau / (2 * h) * settings_.rho_f *
      ((vphi - w_).array().square().rowwise().sum() * fluid_weights_.array())
          .sum();
  ch.work_rate =
      ((f_.array() * v.array()).rowwise().sum() * fluid_weights_.array()).sum();

  ch.total = ch.energy.total() +
             tau * (ch.kelvin_voigt + ch.solid_rate_reg + ch.drag +
                    ch.viscous + ch.fluid_rate_reg) +
             ch.inertia_solid + ch.inertia_fluid - tau * ch.work_rate;
  return ch;
}

Scalar StepFunctional::evaluate(const NodeField& eta_values,
                                const VectorX& psi) const {
  return evaluate_channels(eta_values, psi).total;
}

Scalar StepFunctional::value_at_rest() const {
  return evaluate(eta_k_->values, VectorX::Zero(fluid_->num_nodes()));
}

void StepFunctional::gradient(const NodeField& eta_values, const VectorX& psi,
                              NodeField& g_eta, VectorX& g_psi) const {
  const Scalar tau = settings_.tau, h = settings_.h;
  DeformationField eta{*eta_k_->grid, eta_values};

  // Solid side.
  g_eta = regularized_energy_gradient(*solid_ops_, eta, settings_.elastic);
  const NodeField d = (eta_values - eta_k_->values) / tau;
  g_eta += kelvin_voigt_partial(*solid_ops_, eta_k_->values, d);
  g_eta += 0.5 * h * rate_regularizer_partial(*solid_ops_, d);

  const NodeField v = stream_to_velocity(*fluid_ops_, psi);
  const NodeField rel = d - w_eta_ * v;
  const NodeField rel_cells = solid_ops_->cell_avg * rel;
  const Scalar dA = solid_ops_->grid->cell_area();
  MatrixX drag_force(Index(drag_cells_.size()), 2);
  for (Index c = 0; c < Index(drag_cells_.size()); ++c)
    drag_force.row(c) =
        (drag_cells_[c] * rel_cells.row(c).transpose() * dA).transpose();
  const NodeField drag_solid = solid_ops_->cell_avg.transpose() * drag_force;
  g_eta += drag_solid;

  g_eta += (settings_.rho_s / h) *
           ((d - zeta_).array().colwise() * solid_weights_.array()).matrix();

  for (Index n : eta_k_->grid->dirichlet_set) g_eta.row(n).setZero();

  // Fluid side, assembled as a force on the nodal velocity first.
  NodeField force_v = -(w_eta_.transpose() * drag_solid);
  force_v += fluid_dissipation_partial_v(*fluid_ops_, v, settings_.diss.nu);
  force_v += 0.5 * h * rate_regularizer_partial(*fluid_ops_, v);

  const NodeField vphi_res = w_phi_ * v - w_;
  force_v += (settings_.rho_f / h / tau) *
             (w_phi_.transpose() *
              (vphi_res.array().colwise() * fluid_weights_.array()).matrix());
  force_v -= (f_.array().colwise() * fluid_weights_.array()).matrix();

  g_psi = tau * velocity_force_to_psi(*fluid_ops_, force_v);

  // Only interior psi entries are DOFs.
  VectorX masked = VectorX::Zero(g_psi.size());
  for (Index n : interior_) masked[n] = g_psi[n];
  g_psi.swap(masked);
}

VectorX StepFunctional::pack(const NodeField& eta_values,
                             const VectorX& psi) const {
  VectorX x(num_dofs());
  for (Index n = 0; n < num_solid_nodes_; ++n) {
    x[2 * n] = eta_values(n, 0);
    x[2 * n + 1] = eta_values(n, 1);
  }
  for (std::size_t k = 0; k < interior_.size(); ++k)
    x[2 * num_solid_nodes_ + Index(k)] = psi[interior_[k]];
  return x;
}

void StepFunctional::unpack(const VectorX& x, NodeField& eta_values,
                            VectorX& psi) const {
  eta_values.resize(num_solid_nodes_, 2);
  for (Index n = 0; n < num_solid_nodes_; ++n) {
    eta_values(n, 0) = x[2 * n];
    eta_values(n, 1) = x[2 * n + 1];
  }
  psi = VectorX::Zero(fluid_->num_nodes());
  for (std::size_t k = 0; k < interior_.size(); ++k)
    psi[interior_[k]] = x[2 * num_solid_nodes_ + Index(k)];
}

namespace {

struct Evaluated {
  Scalar value = kInfinity;
  VectorX grad;
};

class PackedObjective {
 public:
  explicit PackedObjective(const StepFunctional& f) : f_(&f) {}

  Scalar value(const VectorX& x) const {
    NodeField eta;
    VectorX psi;
    f_->unpack(x, eta, psi);
    return f_->evaluate(eta, psi);
  }

  Evaluated value_and_grad(const VectorX& x) const {
    NodeField eta;
    VectorX psi;
    f_->unpack(x, eta, psi);
    Evaluated e;
    e.value = f_->evaluate(eta, psi);
    if (!std::isfinite(e.value)) return e;
    NodeField ge;
    VectorX gp;
    f_->gradient(eta, psi, ge, gp);
    e.grad = f_->pack(ge, gp);
    return e;
  }

 private:
  const StepFunctional* f_;
};

// Strong-Wolfe line search (bracket + zoom). Non-finite trial values count
// as "step too long". Returns the accepted alpha, or 0 when no acceptable
// step exists down to alpha_min.
struct LineSearchResult {
  Scalar alpha = 0;
  Evaluated at;  // objective at the accepted point
  int rejections = 0;
};

LineSearchResult line_search(const PackedObjective& obj, const VectorX& x,
                             const VectorX& dir, Scalar f0, Scalar g0,
                             Scalar alpha_init) {
  constexpr Scalar c1 = 1e-4, c2 = 0.9;
  constexpr int max_trials = 60;
  LineSearchResult res;

  auto eval_at = [&](Scalar a) { return obj.value_and_grad(x + a * dir); };

  auto zoom = [&](Scalar lo, Scalar f_lo, Scalar g_lo, Scalar hi,
                  int budget) -> bool {
    for (int i = 0; i < budget; ++i) {
      const Scalar a = 0.5 * (lo + hi);
      Evaluated e = eval_at(a);
      ++res.rejections;
      if (!std::isfinite(e.value) || e.value > f0 + c1 * a * g0 ||
          e.value >= f_lo) {
        hi = a;
        continue;
      }
      const Scalar ga = e.grad.dot(dir);
      if (std::abs(ga) <= -c2 * g0) {
        res.alpha = a;
        res.at = std::move(e);
        --res.rejections;
        return true;
      }
      if (ga * (hi - lo) >= 0) hi = lo;
      lo = a;
      f_lo = e.value;
      g_lo = ga;
    }
    // Fall back to the best sufficient-decrease point seen.
    Evaluated e = eval_at(lo);
    if (std::isfinite(e.value) && e.value <= f0 + c1 * lo * g0 && lo > 0) {
      res.alpha = lo;
      res.at = std::move(e);
      return true;
    }
    return false;
  };

  Scalar a_prev = 0, f_prev = f0, g_prev = g0;
  Scalar a = alpha_init;
  for (int i = 0; i < max_trials; ++i) {
    Evaluated e = eval_at(a);
    if (!std::isfinite(e.value) || e.value > f0 + c1 * a * g0 ||
        (i > 0 && e.value >= f_prev)) {
      ++res.rejections;
      if (zoom(a_prev, f_prev, g_prev, a, max_trials - i)) return res;
      return res;  // alpha stays 0
    }
    const Scalar ga = e.grad.dot(dir);
    if (std::abs(ga) <= -c2 * g0) {
      res.alpha = a;
      res.at = std::move(e);
      return res;
    }
    if (ga >= 0) {
      ++res.rejections;
      if (zoom(a, e.value, ga, a_prev, max_trials - i)) return res;
      return res;
    }
    a_prev = a;
    f_prev = e.value;
    g_prev = ga;
    a *= 2;
  }
  return res;
}

}  // namespace

MinimizeResult minimize(const StepFunctional& f, const MinimizeOptions& opt,
                        const GuardFn& guard, const NodeField* warm_eta,
                        const VectorX* warm_psi) {
  const PackedObjective obj(f);
  const Index n = f.num_dofs();

  const VectorX rest = f.pack(f.previous().values,
                              VectorX::Zero(f.fluid_ops().grid->num_nodes()));
  Evaluated cur = obj.value_and_grad(rest);
  const Scalar f_rest = cur.value;
  if (!std::isfinite(f_rest))
    throw InfiniteEnergyError("minimize: rest state is inadmissible");

  VectorX x = rest;
  if (opt.warm_start && warm_eta && warm_psi) {
    const VectorX xw = f.pack(*warm_eta, *warm_psi);
    const Evaluated ew = obj.value_and_grad(xw);
    if (std::isfinite(ew.value) && ew.value < f_rest) {
      x = xw;
      cur = ew;
    }
  }

  MinimizeReport rep;
  rep.value_at_rest = f_rest;

  std::deque<VectorX> s_hist, y_hist;
  std::deque<Scalar> rho_hist;

  const Scalar gscale = std::sqrt(Scalar(n));
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Scalar gnorm = cur.grad.norm();
    if (gnorm <= opt.gtol * gscale) break;

    // Two-loop recursion.
    VectorX q = cur.grad;
    std::vector<Scalar> alpha(s_hist.size());
    for (Index i = Index(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const Scalar gamma = s_hist.back().dot(y_hist.back()) /
                           y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const Scalar beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    VectorX dir = -q;

    Scalar g0 = cur.grad.dot(dir);
    if (!(g0 < 0)) {  // not a descent direction, restart from steepest
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -cur.grad;
      g0 = cur.grad.dot(dir);
    }

    const Scalar a0 =
        s_hist.empty() ? std::min<Scalar>(1.0, 1.0 / std::max<Scalar>(
                                                   1.0, cur.grad.norm()))
                       : 1.0;
    LineSearchResult ls = line_search(obj, x, dir, cur.value, g0, a0);
    rep.line_search_rejections += ls.rejections;
    if (ls.alpha == 0) break;  // no progress possible along dir

    const VectorX x_new = x + ls.alpha * dir;
    const VectorX s = x_new - x;
    const VectorX y = ls.at.grad - cur.grad;
    const Scalar sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (Index(s_hist.size()) > opt.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const Scalar decrease = cur.value - ls.at.value;
    x = x_new;
    cur = std::move(ls.at);
    if (decrease <= opt.ftol * (1 + std::abs(cur.value))) {
      ++it;
      break;
    }
  }

  rep.iterations = it;
  rep.final_gradient_norm = cur.grad.norm();
  rep.value_at_min = cur.value;
  rep.status = (it >= opt.max_iterations &&
                cur.grad.norm() > opt.gtol * gscale)
                   ? MinimizeStatus::MaxIter
                   : MinimizeStatus::Converged;
  rep.certificate_ok =
      rep.value_at_min <=
      rep.value_at_rest + opt.certificate_tol * (1 + std::abs(rep.value_at_rest));
  if (!rep.certificate_ok && rep.status == MinimizeStatus::Converged)
    rep.status = MinimizeStatus::MaxIter;

  MinimizeResult out;
  f.unpack(x, out.eta_values, out.psi);
  if (guard && guard(out.eta_values) == GuardVerdict::Halt)
    rep.status = MinimizeStatus::CollisionGuard;
  out.report = rep;
  return out;
}

}  // namespace fpsi
