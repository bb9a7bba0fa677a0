#include "fpsi/injectivity.hpp"

#include <algorithm>
#include <cmath>

namespace fpsi {

std::vector<Index> boundary_loop(const RectGrid& g) {
  std::vector<Index> loop;
  for (Index i = 0; i < g.nx; ++i) loop.push_back(g.node_index(i, 0));
  for (Index j = 1; j < g.ny; ++j) loop.push_back(g.node_index(g.nx - 1, j));
  for (Index i = g.nx - 2; i >= 0; --i)
    loop.push_back(g.node_index(i, g.ny - 1));
  for (Index j = g.ny - 2; j >= 1; --j) loop.push_back(g.node_index(0, j));
  return loop;
}

namespace {

Scalar cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Scalar tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross2(b - a, c - a);
}

int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Scalar v = cross2(b - a, c - a);
  const Scalar eps = 1e-14 * ((b - a).norm() * (c - a).norm() + 1e-300);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x(), b.x()) - 1e-14 <= p.x() &&
         p.x() <= std::max(a.x(), b.x()) + 1e-14 &&
         std::min(a.y(), b.y()) - 1e-14 <= p.y() &&
         p.y() <= std::max(a.y(), b.y()) + 1e-14;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d);
  const int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

// Winding number of p with respect to the closed polygon (Sunday's method).
int winding_number(const std::vector<Vec2>& poly, const Vec2& p) {
  int w = 0;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % m];
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && cross2(b - a, p - a) > 0) ++w;
    } else {
      if (b.y() <= p.y() && cross2(b - a, p - a) < 0) --w;
    }
  }
  return w;
}

// Area covered by the polygon with multiplicity collapsed to one, by
// winding-number sampling on the bounding box.
Scalar covered_area_sampled(const std::vector<Vec2>& poly, Index samples) {
  Scalar xlo = kInfinity, xhi = -kInfinity, ylo = kInfinity, yhi = -kInfinity;
  for (const Vec2& p : poly) {
    xlo = std::min(xlo, p.x());
    xhi = std::max(xhi, p.x());
    ylo = std::min(ylo, p.y());
    yhi = std::max(yhi, p.y());
  }
  const Scalar hx = (xhi - xlo) / Scalar(samples);
  const Scalar hy = (yhi - ylo) / Scalar(samples);
  Index hit = 0;
  for (Index j = 0; j < samples; ++j)
    for (Index i = 0; i < samples; ++i) {
      const Vec2 p(xlo + (Scalar(i) + 0.5) * hx, ylo + (Scalar(j) + 0.5) * hy);
      if (winding_number(poly, p) != 0) ++hit;
    }
  return Scalar(hit) * hx * hy;
}

Scalar wall_distance(const RectGrid& box, const Vec2& p) {
  const Scalar d1 = p.x() - box.x0;
  const Scalar d2 = box.x0 + box.lx() - p.x();
  const Scalar d3 = p.y() - box.y0;
  const Scalar d4 = box.y0 + box.ly() - p.y();
  return std::min(std::min(d1, d2), std::min(d3, d4));
}

}  // namespace

InjectivityReport ciarlet_necas_gap(const DeformationField& eta,
                                    const RectGrid* container) {
  const SolidGrid& g = *eta.grid;
  InjectivityReport rep;

  // Signed areas of the two triangles of every cell.
  Scalar det_sum = 0;
  bool all_positive = true;
  for (Index j = 0; j + 1 < g.ny; ++j)
    for (Index i = 0; i + 1 < g.nx; ++i) {
      const Vec2 p00 = eta.values.row(g.node_index(i, j)).transpose();
      const Vec2 p10 = eta.values.row(g.node_index(i + 1, j)).transpose();
      const Vec2 p01 = eta.values.row(g.node_index(i, j + 1)).transpose();
      const Vec2 p11 = eta.values.row(g.node_index(i + 1, j + 1)).transpose();
      const Scalar a1 = tri_area(p00, p10, p11);
      const Scalar a2 = tri_area(p00, p11, p01);
      if (a1 <= 0 || a2 <= 0) all_positive = false;
      det_sum += a1 + a2;
    }
  rep.det_integral = det_sum;
  rep.orientation_ok = all_positive;

  const std::vector<Index> loop = boundary_loop(g);
  std::vector<Vec2> poly;
  poly.reserve(loop.size());
  for (Index n : loop) poly.push_back(eta.values.row(n).transpose());
  const std::size_t m = poly.size();

  // Shoelace; equals det_sum up to rounding whenever the triangulated map is
  // consistent, so it carries the winding multiplicity of overlaps.
  Scalar shoelace = 0;
  for (std::size_t i = 0; i < m; ++i)
    shoelace += cross2(poly[i], poly[(i + 1) % m]);
  shoelace *= 0.5;

  // Self-intersection of the boundary curve.
  rep.boundary_simple = true;
  for (std::size_t i = 0; i < m && rep.boundary_simple; ++i)
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;  // closing neighbor
      if (segments_intersect(poly[i], poly[(i + 1) % m], poly[j],
                             poly[(j + 1) % m])) {
        rep.boundary_simple = false;
        break;
      }
    }

  if (rep.boundary_simple && rep.orientation_ok) {
    // Positive dets + simple boundary certify injectivity of the PL map.
    rep.deformed_area = shoelace;
    rep.gap = rep.det_integral - rep.deformed_area;
  } else {
    rep.deformed_area = covered_area_sampled(poly, 1024);
    rep.gap = std::max<Scalar>(0, rep.det_integral - rep.deformed_area);
  }

  // Clearance of the free boundary: to the container walls and to itself
  // (midpoints of segments at least 3 arc steps apart).
  std::vector<bool> node_free(g.num_nodes(), true);
  for (Index n : g.dirichlet_set) node_free[n] = false;
  std::vector<Vec2> mids;
  std::vector<std::size_t> arc;
  for (std::size_t i = 0; i < m; ++i) {
    const Index na = loop[i], nb = loop[(i + 1) % m];
    if (node_free[na] && node_free[nb]) {
      mids.push_back(0.5 * (poly[i] + poly[(i + 1) % m]));
      arc.push_back(i);
    }
  }
  Scalar clearance = kInfinity;
  if (container)
    for (const Vec2& p : mids)
      clearance = std::min(clearance, wall_distance(*container, p));
  for (std::size_t u = 0; u < mids.size(); ++u)
    for (std::size_t v = u + 1; v < mids.size(); ++v) {
      const std::size_t d = arc[v] - arc[u];
      if (std::min(d, m - d) < 3) continue;
      clearance = std::min(clearance, (mids[u] - mids[v]).norm());
    }
  rep.min_boundary_clearance = clearance;
  return rep;
}

GuardVerdict collision_guard(const InjectivityReport& report, Scalar area_q,
                             const GuardTols& tols) {
  if (report.gap > tols.gap_tol * area_q) return GuardVerdict::Halt;
  if (report.min_boundary_clearance < tols.clearance_tol)
    return GuardVerdict::Halt;
  return GuardVerdict::Pass;
}

}  // namespace fpsi
