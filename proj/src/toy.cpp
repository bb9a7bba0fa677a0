#include "fpsi/toy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "fpsi/ode.hpp"

namespace fpsi {
namespace toy {

ToyEnergy ToyEnergy::quadratic() {
  ToyEnergy e;
  e.value = [](const VectorX& x) { return 0.5 * x.squaredNorm(); };
  e.gradient = [](const VectorX& x) { return x; };
  e.convex = true;
  return e;
}

ToyEnergy ToyEnergy::double_well() {
  ToyEnergy e;
  e.value = [](const VectorX& x) {
    const Scalar s = x.squaredNorm() - 1;
    return s * s;
  };
  e.gradient = [](const VectorX& x) {
    return VectorX(4 * (x.squaredNorm() - 1) * x);
  };
  e.convex = false;
  return e;
}

ToyEnergy ToyEnergy::zero() {
  ToyEnergy e;
  e.value = [](const VectorX&) { return Scalar(0); };
  e.gradient = [](const VectorX& x) { return VectorX(VectorX::Zero(x.size())); };
  e.convex = true;
  return e;
}

namespace {

// Minimizes E(x) + (kappa/2) |(x - base)/tau - target_rate|^2 by damped
// Newton on the stationarity equation, falling back to gradient descent on
// the objective when the Newton step does not decrease it.
VectorX solve_inner(const ToyEnergy& e, const VectorX& base,
                    const VectorX& target_rate, Scalar tau, Scalar kappa) {
  const Index n = base.size();
  auto objective = [&](const VectorX& x) {
    const VectorX r = (x - base) / tau - target_rate;
    return e.value(x) + 0.5 * kappa * r.squaredNorm();
  };
  auto residual = [&](const VectorX& x) {
    return VectorX(e.gradient(x) +
                   (kappa / tau) * ((x - base) / tau - target_rate));
  };

  VectorX x = base + tau * target_rate;  // free-flight initial guess
  const Scalar res_scale = kappa / (tau * tau);
  const Scalar tol = 1e-13 * (1 + res_scale);

  for (int it = 0; it < 200; ++it) {
    const VectorX g = residual(x);
    if (g.norm() <= tol) return x;

    // Hessian of the objective by finite differences of the residual.
    MatrixX jac(n, n);
    const Scalar fd = 1e-7 * (1 + x.norm());
    for (Index c = 0; c < n; ++c) {
      VectorX xp = x;
      xp[c] += fd;
      VectorX xm = x;
      xm[c] -= fd;
      jac.col(c) = (residual(xp) - residual(xm)) / (2 * fd);
    }
    VectorX dir = jac.fullPivLu().solve(-g);
    if (!dir.allFinite() || dir.dot(g) >= 0) dir = -g / res_scale;

    const Scalar f0 = objective(x);
    Scalar alpha = 1;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const VectorX trial = x + alpha * dir;
      if (objective(trial) <= f0 - 1e-4 * alpha * std::abs(dir.dot(g))) {
        x = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw std::runtime_error("toy solver: line search stalled");
  }
  throw std::runtime_error("toy solver: Newton did not converge");
}

void push_state(ToyTrajectory& t, const ToyEnergy& e, Scalar time,
                const VectorX& x, const VectorX& rate) {
  t.times.push_back(time);
  t.positions.push_back(x);
  t.velocities.push_back(rate);
  t.energy.push_back(e.value(x) + 0.5 * rate.squaredNorm());
}

}  // namespace

ToyTrajectory naive_scheme(const ToyEnergy& e, const VectorX& x0,
                           const VectorX& v0, Scalar tau, Scalar horizon) {
  if (!(tau > 0)) throw std::invalid_argument("naive_scheme: tau must be > 0");
  const Index steps = Index(std::llround(horizon / tau));
  ToyTrajectory t;
  push_state(t, e, 0, x0, v0);
  VectorX x = x0, rate = v0;
  for (Index k = 0; k < steps; ++k) {
    // kappa = 1: E(x) + (1/2)|(x - x_k)/tau - rate_k|^2.
    const VectorX x_next = solve_inner(e, x, rate, tau, 1.0);
    rate = (x_next - x) / tau;
    x = x_next;
    push_state(t, e, Scalar(k + 1) * tau, x, rate);
  }
  return t;
}

ToyTrajectory two_scale_scheme(const ToyEnergy& e, const VectorX& x0,
                               const VectorX& v0, Scalar tau, Scalar h,
                               Scalar horizon) {
  if (!(tau > 0) || !(h > 0))
    throw std::invalid_argument("two_scale_scheme: tau and h must be > 0");
  const Scalar ratio = h / tau;
  const Index n = Index(std::llround(ratio));
  if (std::abs(ratio - Scalar(n)) > 1e-9 * ratio || n < 1)
    throw std::invalid_argument("two_scale_scheme: h/tau must be an integer");
  const Index windows = Index(std::llround(horizon / h));

  ToyTrajectory t;
  push_state(t, e, 0, x0, v0);
  VectorX x = x0;
  std::vector<VectorX> zeta(n, v0);  // first window carries the initial rate
  for (Index m = 0; m < windows; ++m) {
    std::vector<VectorX> rates(n);
    for (Index k = 0; k < n; ++k) {
      const VectorX x_next = solve_inner(e, x, zeta[k], tau, tau / h);
      rates[k] = (x_next - x) / tau;
      x = x_next;
      push_state(t, e, Scalar(m) * h + Scalar(k + 1) * tau, x, rates[k]);
    }
    zeta = std::move(rates);
  }
  return t;
}

std::vector<WindowPairCheck> hyperbolic_estimate_check(
    const ToyTrajectory& traj, Scalar tau, Scalar h, Scalar slack) {
  const Index n = Index(std::llround(h / tau));
  const Index steps = Index(traj.positions.size()) - 1;
  const Index windows = steps / n;
  if (windows < 1) return {};

  // Window m (1-based) covers states (m-1)*n+1 .. m*n.
  std::vector<Scalar> avg_rate_sq(windows + 1, 0);
  std::vector<Scalar> e_at(windows + 1, 0);
  e_at[0] = 0;
  for (Index m = 1; m <= windows; ++m) {
    Scalar s = 0;
    for (Index k = (m - 1) * n + 1; k <= m * n; ++k)
      s += traj.velocities[k].squaredNorm();
    avg_rate_sq[m] = s / Scalar(n);
    const VectorX& x = traj.positions[m * n];
    e_at[m] = traj.energy[m * n] - 0.5 * traj.velocities[m * n].squaredNorm();
    (void)x;
  }

  std::vector<WindowPairCheck> out;
  for (Index a = 1; a <= windows; ++a)
    for (Index b = a + 1; b <= windows; ++b) {
      WindowPairCheck c;
      c.window_a = a;
      c.window_b = b;
      c.lhs = e_at[b] - e_at[a];
      c.rhs = 0.5 * avg_rate_sq[a] - 0.5 * avg_rate_sq[b];
      c.ok = c.lhs <= c.rhs + slack;
      out.push_back(c);
    }
  return out;
}

ToyTrajectory reference_integrate(const ToyEnergy& e, const VectorX& x0,
                                  const VectorX& v0, Scalar horizon,
                                  Scalar tol, Scalar sample_dt) {
  const Index n = x0.size();
  auto rhs = [&](Scalar, const VectorX& y) {
    VectorX dy(2 * n);
    dy.head(n) = y.tail(n);
    dy.tail(n) = -e.gradient(y.head(n));
    return dy;
  };
  const Index samples = Index(std::llround(horizon / sample_dt));
  ToyTrajectory t;
  push_state(t, e, 0, x0, v0);
  VectorX y(2 * n);
  y.head(n) = x0;
  y.tail(n) = v0;
  for (Index k = 0; k < samples; ++k) {
    y = rk45_integrate(rhs, y, Scalar(k) * sample_dt,
                       Scalar(k + 1) * sample_dt, tol);
    push_state(t, e, Scalar(k + 1) * sample_dt, y.head(n), y.tail(n));
  }
  return t;
}

namespace {

NaiveFailure run_naive_seed(const ToyEnergy& e, Scalar tau, Scalar horizon,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Scalar> pos(-1.5, 1.5), vel(-2.0, 2.0);
  NaiveFailure out;
  out.seed = seed;
  out.x0 = VectorX(2);
  out.v0 = VectorX(2);
  out.x0 << pos(rng), pos(rng);
  out.v0 << vel(rng), vel(rng);
  const ToyTrajectory t = naive_scheme(e, out.x0, out.v0, tau, horizon);
  for (std::size_t k = 1; k < t.energy.size(); ++k) {
    const Scalar jump = t.energy[k] - t.energy[k - 1];
    if (jump > 1e-8 * (1 + std::abs(t.energy[k - 1]))) {
      out.found = true;
      out.step = Index(k);
      out.increase = jump;
      return out;
    }
  }
  return out;
}

}  // namespace

NaiveFailure find_naive_energy_increase(const ToyEnergy& e, Scalar tau,
                                        Scalar horizon,
                                        std::uint64_t seed_begin,
                                        std::uint64_t seed_end) {
  for (std::uint64_t s = seed_begin; s < seed_end; ++s) {
    NaiveFailure f = run_naive_seed(e, tau, horizon, s);
    if (f.found) return f;
  }
  NaiveFailure none;
  none.found = false;
  return none;
}

NaiveFailure check_naive_energy_increase(const ToyEnergy& e, Scalar tau,
                                         Scalar horizon, std::uint64_t seed) {
  return run_naive_seed(e, tau, horizon, seed);
}

}  // namespace toy
}  // namespace fpsi
