#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fpsi/types.hpp"

namespace fpsi {
namespace toy {

// Potential energy of the single-particle laboratory problem x'' = -grad E.
struct ToyEnergy {
  std::function<Scalar(const VectorX&)> value;
  std::function<VectorX(const VectorX&)> gradient;
  bool convex = false;

  static ToyEnergy quadratic();    // E(x) = |x|^2 / 2
  static ToyEnergy double_well();  // E(x) = (|x|^2 - 1)^2
  static ToyEnergy zero();         // free flight
};

// velocities[k] is the rate arriving at state k ((x_k - x_{k-1})/tau);
// velocities[0] is the initial rate. energy[k] = E(x_k) + |rate_k|^2 / 2.
struct ToyTrajectory {
  std::vector<Scalar> times;
  std::vector<VectorX> positions;
  std::vector<VectorX> velocities;
  std::vector<Scalar> energy;
};

// Single-scale backward Euler: 0 = grad E(x_{k+1}) + (rate_{k+1}-rate_k)/tau,
// solved per step by damped Newton on the stationarity equation with descent
// on the associated objective as fallback.
ToyTrajectory naive_scheme(const ToyEnergy& e, const VectorX& x0,
                           const VectorX& v0, Scalar tau, Scalar horizon);

// Two-scale scheme: windows of length h, inner step tau; per step minimizes
// E(x) + (tau/2h) |(x - x_k)/tau - zeta_k|^2 with zeta the delayed rates of
// the previous window (the initial rate on the first window).
ToyTrajectory two_scale_scheme(const ToyEnergy& e, const VectorX& x0,
                               const VectorX& v0, Scalar tau, Scalar h,
                               Scalar horizon);

// E(x(b)) - E(x(a)) <= avg_[a-h,a] |rate|^2/2 - avg_[b-h,b] |rate|^2/2 + slack
// over all window-boundary pairs a < b.
struct WindowPairCheck {
  Index window_a = 0, window_b = 0;  // 1-based window indices
  Scalar lhs = 0, rhs = 0;
  bool ok = true;
};
std::vector<WindowPairCheck> hyperbolic_estimate_check(
    const ToyTrajectory& traj, Scalar tau, Scalar h, Scalar slack);

// Adaptive high-order reference solution of x'' = -grad E sampled on a
// uniform lattice (the oracle for convergence studies).
ToyTrajectory reference_integrate(const ToyEnergy& e, const VectorX& x0,
                                  const VectorX& v0, Scalar horizon,
                                  Scalar tol, Scalar sample_dt);

// Seeded search for a naive-scheme run whose discrete energy E + |rate|^2/2
// increases between consecutive steps.
struct NaiveFailure {
  bool found = false;
  std::uint64_t seed = 0;
  Index step = 0;       // first step with an increase
  Scalar increase = 0;  // size of the jump
  VectorX x0, v0;
};
NaiveFailure find_naive_energy_increase(const ToyEnergy& e, Scalar tau,
                                        Scalar horizon,
                                        std::uint64_t seed_begin,
                                        std::uint64_t seed_end);

// Reruns one seed of the search (the pinned regression instance).
NaiveFailure check_naive_energy_increase(const ToyEnergy& e, Scalar tau,
                                         Scalar horizon, std::uint64_t seed);

}  // namespace toy
}  // namespace fpsi
