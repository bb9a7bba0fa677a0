#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fpsi/types.hpp"

namespace fpsi {

// Adaptive Dormand-Prince 5(4) step integrator for y' = f(t, y).
// Integrates from t0 to t1 with local error tolerance tol (abs + rel).
template <class Rhs>
VectorX rk45_integrate(Rhs&& rhs, VectorX y, Scalar t0, Scalar t1,
                       Scalar tol) {
  static constexpr Scalar c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr Scalar a21 = 1.0 / 5;
  static constexpr Scalar a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr Scalar a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr Scalar a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr Scalar a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr Scalar b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr Scalar e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Scalar dir = t1 >= t0 ? 1.0 : -1.0;
  Scalar t = t0;
  Scalar dt = dir * std::max<Scalar>(1e-8, std::abs(t1 - t0) / 64);
  const Scalar dt_min = std::abs(t1 - t0) * 1e-14 + 1e-300;

  VectorX k1 = rhs(t, y);
  while (dir * (t1 - t) > 0) {
    if (dir * (t + dt) > dir * t1) dt = t1 - t;
    const VectorX k2 = rhs(t + c2 * dt, y + dt * (a21 * k1));
    const VectorX k3 = rhs(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
    const VectorX k4 =
        rhs(t + c4 * dt, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const VectorX k5 = rhs(
        t + c5 * dt, y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const VectorX k6 =
        rhs(t + dt,
            y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const VectorX ynew =
        y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const VectorX k7 = rhs(t + dt, ynew);
    const VectorX err = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 +
                              e6 * k6 + e7 * k7);
    const Scalar scale = tol * (1 + std::max(y.norm(), ynew.norm()));
    const Scalar e = err.norm() / scale;
    if (e <= 1.0) {
      t += dt;
      y = ynew;
      k1 = k7;  // first-same-as-last
    }
    const Scalar fac =
        std::min<Scalar>(5, std::max<Scalar>(0.2, 0.9 * std::pow(
                                                       e > 0 ? e : 1e-10,
                                                       -0.2)));
    dt *= fac;
    if (std::abs(dt) < dt_min)
      throw std::runtime_error("rk45: step size underflow");
  }
  return y;
}

}  // namespace fpsi
