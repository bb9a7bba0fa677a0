#include "fpsi/flowmap.hpp"

#include <cmath>
#include <sstream>

namespace fpsi {

namespace {

// Clamp a point into the grid rectangle; the overshoot must stay below one
// cell (no-slip keeps the continuum boundary invariant, so larger excursions
// indicate a broken state).
Vec2 clamp_into(const RectGrid& g, const Vec2& p) {
  const Scalar x1 = g.x0 + g.lx(), y1 = g.y0 + g.ly();
  if (p.x() < g.x0 - g.dx || p.x() > x1 + g.dx || p.y() < g.y0 - g.dy ||
      p.y() > y1 + g.dy) {
    std::ostringstream msg;
    msg << "advected point (" << p.x() << ", " << p.y()
        << ") left the container by more than one cell";
    throw OutOfDomainError(p, msg.str());
  }
  return {std::min(std::max(p.x(), g.x0), x1),
          std::min(std::max(p.y(), g.y0), y1)};
}

}  // namespace

FlowMap advance(const FlowMap& phi, const NodeField& v_nodes, Scalar tau) {
  if (!(tau > 0)) throw std::invalid_argument("advance: tau must be > 0");
  const FluidGrid& g = *phi.grid;
  const NodeField vq = interpolate_eulerian(g, v_nodes, phi.values);
  FlowMap next;
  next.grid = phi.grid;
  next.values = phi.values + tau * vq;
  for (Index n = 0; n < next.values.rows(); ++n)
    next.values.row(n) =
        clamp_into(g, next.values.row(n).transpose()).transpose();
  return next;
}

std::pair<Scalar, Scalar> jacobian_det_bounds(const DiffOps& ops,
                                              const FlowMap& phi) {
  const auto grads = gradient_of_deformation(ops, phi.values);
  Scalar lo = kInfinity, hi = -kInfinity;
  for (const Mat2& f : grads) {
    const Scalar d = f.determinant();
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

Scalar lipschitz_constant(const DiffOps& ops, const NodeField& v_nodes) {
  const auto grads = gradient_of_deformation(ops, v_nodes);
  Scalar lip = 0;
  for (const Mat2& g : grads) {
    const Mat2 s = g.transpose() * g;
    const Scalar tr = s.trace(), det = s.determinant();
    const Scalar disc = std::max<Scalar>(0, tr * tr - 4 * det);
    lip = std::max(lip, std::sqrt(0.5 * (tr + std::sqrt(disc))));
  }
  return lip;
}

GradientExpansion gradient_expansion_bounds(const DiffOps& ops,
                                            const NodeField& v_nodes) {
  const auto grads = gradient_of_deformation(ops, v_nodes);
  GradientExpansion out;
  for (const Mat2& g : grads) {
    out.max_abs_det = std::max(out.max_abs_det, std::abs(g.determinant()));
    out.max_abs_trace = std::max(out.max_abs_trace, std::abs(g.trace()));
  }
  return out;
}

Vec2 invert_at(const FlowMap& phi, const Vec2& target, Scalar tol,
               int max_iter) {
  const RectGrid& g = *phi.grid;
  Vec2 y = target;
  Vec2 val;
  Mat2 jac;
  for (int it = 0; it < max_iter; ++it) {
    bilinear_eval(g, phi.values, y, val, jac);
    const Vec2 r = val - target;
    if (r.norm() <= tol) return y;
    const Scalar det = jac.determinant();
    if (std::abs(det) < 1e-300)
      throw InversionFailure("flow map inversion hit a singular Jacobian");
    y -= jac.inverse() * r;
    y.x() = std::min(std::max(y.x(), g.x0), g.x0 + g.lx());
    y.y() = std::min(std::max(y.y(), g.y0), g.y0 + g.ly());
  }
  std::ostringstream msg;
  msg << "flow map inversion did not converge at (" << target.x() << ", "
      << target.y() << ")";
  throw InversionFailure(msg.str());
}

NodeField invert_at_nodes(const FlowMap& phi, Scalar tol, int max_iter) {
  const RectGrid& g = *phi.grid;
  NodeField z(g.num_nodes(), 2);
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const Index n = g.node_index(i, j);
      z.row(n) = invert_at(phi, g.node(i, j), tol, max_iter).transpose();
    }
  return z;
}

namespace {

// Lattice position of a time on the solved horizon.
void locate(Scalar t, Scalar tau, Scalar h, Index num_windows, Index& win,
            Index& step) {
  const Index steps_per_window = Index(std::llround(h / tau));
  const Index k = Index(std::llround(t / tau));
  if (k < 0 || k > num_windows * steps_per_window)
    throw std::invalid_argument("compose_windows: time outside the horizon");
  win = std::min(k / steps_per_window, num_windows - 1);
  step = k - win * steps_per_window;
}

// Materialize the map from time 0 to (win, step) at the grid nodes.
NodeField map_from_start(const FluidGrid& grid,
                         const std::vector<WindowFlowHistory>& windows,
                         Index win, Index step) {
  NodeField pts = grid.node_positions();
  for (Index l = 0; l < win; ++l)
    pts = interpolate_eulerian(grid, windows[l].maps.back().values, pts);
  if (step > 0)
    pts = interpolate_eulerian(grid, windows[win].maps[step].values, pts);
  return pts;
}

}  // namespace

FlowMap compose_windows(const FluidGrid& grid,
                        const std::vector<WindowFlowHistory>& windows,
                        Scalar tau, Scalar h, Scalar t, Scalar s) {
  if (windows.empty())
    throw std::invalid_argument("compose_windows: no windows");
  if (s == 0) return FlowMap::identity(grid);

  Index win_t, step_t, win_ts, step_ts;
  locate(t, tau, h, Index(windows.size()), win_t, step_t);
  locate(t + s, tau, h, Index(windows.size()), win_ts, step_ts);

  FlowMap from_start;
  from_start.grid = &grid;
  from_start.values = map_from_start(grid, windows, win_t, step_t);
  const NodeField to_target = map_from_start(grid, windows, win_ts, step_ts);

  FlowMap out;
  out.grid = &grid;
  const NodeField z = invert_at_nodes(from_start);
  out.values = interpolate_eulerian(grid, to_target, z);
  return out;
}

std::vector<NodeField> straighten_velocity(const WindowFlowHistory& window) {
  if (window.maps.size() != window.velocities.size() + 1)
    throw std::invalid_argument("straighten_velocity: inconsistent history");
  const FluidGrid& grid = *window.maps.front().grid;
  const NodeField z = invert_at_nodes(window.maps.back());
  std::vector<NodeField> w;
  w.reserve(window.velocities.size());
  for (std::size_t k = 0; k < window.velocities.size(); ++k) {
    const NodeField p =
        interpolate_eulerian(grid, window.maps[k + 1].values, z);
    w.push_back(interpolate_eulerian(grid, window.velocities[k], p));
  }
  return w;
}

}  // namespace fpsi
