#include "fpsi/stencils.hpp"

#include <sstream>
#include <stdexcept>

namespace fpsi {

namespace {

SparseMat from_triplets(Index rows, Index cols,
                        const std::vector<Triplet>& t) {
  SparseMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Nodal first derivative along one axis: central interior, one-sided
// second-order at the two ends.
void axis_d1(std::vector<Triplet>& t, const RectGrid& g, bool along_x) {
  const Index n = along_x ? g.nx : g.ny;
  const Scalar h = along_x ? g.dx : g.dy;
  auto idx = [&](Index a, Index b) {
    return along_x ? g.node_index(a, b) : g.node_index(b, a);
  };
  const Index m = along_x ? g.ny : g.nx;
  for (Index b = 0; b < m; ++b) {
    for (Index a = 0; a < n; ++a) {
      const Index r = idx(a, b);
      if (a == 0) {
        t.emplace_back(r, idx(0, b), -1.5 / h);
        t.emplace_back(r, idx(1, b), 2.0 / h);
        t.emplace_back(r, idx(2, b), -0.5 / h);
      } else if (a == n - 1) {
        t.emplace_back(r, idx(n - 1, b), 1.5 / h);
        t.emplace_back(r, idx(n - 2, b), -2.0 / h);
        t.emplace_back(r, idx(n - 3, b), 0.5 / h);
      } else {
        t.emplace_back(r, idx(a + 1, b), 0.5 / h);
        t.emplace_back(r, idx(a - 1, b), -0.5 / h);
      }
    }
  }
}

// Nodal second derivative along one axis: central interior, 4-point
// one-sided at the ends (exact on cubics).
void axis_d2(std::vector<Triplet>& t, const RectGrid& g, bool along_x) {
  const Index n = along_x ? g.nx : g.ny;
  const Scalar h2 = along_x ? g.dx * g.dx : g.dy * g.dy;
  auto idx = [&](Index a, Index b) {
    return along_x ? g.node_index(a, b) : g.node_index(b, a);
  };
  const Index m = along_x ? g.ny : g.nx;
  for (Index b = 0; b < m; ++b) {
    for (Index a = 0; a < n; ++a) {
      const Index r = idx(a, b);
      if (a == 0) {
        t.emplace_back(r, idx(0, b), 2.0 / h2);
        t.emplace_back(r, idx(1, b), -5.0 / h2);
        t.emplace_back(r, idx(2, b), 4.0 / h2);
        t.emplace_back(r, idx(3, b), -1.0 / h2);
      } else if (a == n - 1) {
        t.emplace_back(r, idx(n - 1, b), 2.0 / h2);
        t.emplace_back(r, idx(n - 2, b), -5.0 / h2);
        t.emplace_back(r, idx(n - 3, b), 4.0 / h2);
        t.emplace_back(r, idx(n - 4, b), -1.0 / h2);
      } else {
        t.emplace_back(r, idx(a - 1, b), 1.0 / h2);
        t.emplace_back(r, idx(a, b), -2.0 / h2);
        t.emplace_back(r, idx(a + 1, b), 1.0 / h2);
      }
    }
  }
}

}  // namespace

DiffOps make_diff_ops(const RectGrid& grid) {
  if (grid.nx < 4 || grid.ny < 4)
    throw std::invalid_argument("difference stencils need >= 4 nodes per axis");

  DiffOps ops;
  ops.grid = &grid;
  const Index nn = grid.num_nodes();
  const Index nc = grid.num_cells();

  // Cell-midpoint gradient and average from the 4 cell corners.
  {
    std::vector<Triplet> tgx, tgy, tav;
    const Scalar cx = 0.5 / grid.dx, cy = 0.5 / grid.dy;
    for (Index j = 0; j + 1 < grid.ny; ++j)
      for (Index i = 0; i + 1 < grid.nx; ++i) {
        const Index r = grid.cell_index(i, j);
        const Index n00 = grid.node_index(i, j), n10 = grid.node_index(i + 1, j);
        const Index n01 = grid.node_index(i, j + 1),
                    n11 = grid.node_index(i + 1, j + 1);
        tgx.emplace_back(r, n10, cx);
        tgx.emplace_back(r, n11, cx);
        tgx.emplace_back(r, n00, -cx);
        tgx.emplace_back(r, n01, -cx);
        tgy.emplace_back(r, n01, cy);
        tgy.emplace_back(r, n11, cy);
        tgy.emplace_back(r, n00, -cy);
        tgy.emplace_back(r, n10, -cy);
        for (Index n : {n00, n10, n01, n11}) tav.emplace_back(r, n, 0.25);
      }
    ops.cell_gx = from_triplets(nc, nn, tgx);
    ops.cell_gy = from_triplets(nc, nn, tgy);
    ops.cell_avg = from_triplets(nc, nn, tav);
  }

  // Nodal second derivatives, then transfer to cells.
  {
    std::vector<Triplet> txx, tyy, tx, ty;
    axis_d2(txx, grid, true);
    axis_d2(tyy, grid, false);
    axis_d1(tx, grid, true);
    axis_d1(ty, grid, false);
    const SparseMat dxx = from_triplets(nn, nn, txx);
    const SparseMat dyy = from_triplets(nn, nn, tyy);
    const SparseMat dx1 = from_triplets(nn, nn, tx);
    const SparseMat dy1 = from_triplets(nn, nn, ty);
    ops.cell_hxx = ops.cell_avg * dxx;
    ops.cell_hyy = ops.cell_avg * dyy;
    ops.cell_hxy = ops.cell_avg * (dx1 * dy1);
  }

  // Third forward-difference form.
  {
    std::vector<Triplet> td;
    std::vector<Scalar> w;
    Index row = 0;
    const Scalar dA = grid.cell_area();
    const Scalar dx3 = grid.dx * grid.dx * grid.dx;
    const Scalar dy3 = grid.dy * grid.dy * grid.dy;
    const Scalar dx2y = grid.dx * grid.dx * grid.dy;
    const Scalar dxy2 = grid.dx * grid.dy * grid.dy;
    auto site = [&](std::initializer_list<std::pair<Index, Scalar>> entries,
                    Scalar weight) {
      for (auto& [n, c] : entries) td.emplace_back(row, n, c);
      w.push_back(weight * dA);
      ++row;
    };
    for (Index j = 0; j < grid.ny; ++j)
      for (Index i = 0; i + 3 < grid.nx; ++i)
        site({{grid.node_index(i + 3, j), 1 / dx3},
              {grid.node_index(i + 2, j), -3 / dx3},
              {grid.node_index(i + 1, j), 3 / dx3},
              {grid.node_index(i, j), -1 / dx3}},
             1.0);
    for (Index j = 0; j + 3 < grid.ny; ++j)
      for (Index i = 0; i < grid.nx; ++i)
        site({{grid.node_index(i, j + 3), 1 / dy3},
              {grid.node_index(i, j + 2), -3 / dy3},
              {grid.node_index(i, j + 1), 3 / dy3},
              {grid.node_index(i, j), -1 / dy3}},
             1.0);
    for (Index j = 0; j + 1 < grid.ny; ++j)
      for (Index i = 0; i + 2 < grid.nx; ++i)
        site({{grid.node_index(i + 2, j + 1), 1 / dx2y},
              {grid.node_index(i + 1, j + 1), -2 / dx2y},
              {grid.node_index(i, j + 1), 1 / dx2y},
              {grid.node_index(i + 2, j), -1 / dx2y},
              {grid.node_index(i + 1, j), 2 / dx2y},
              {grid.node_index(i, j), -1 / dx2y}},
             3.0);
    for (Index j = 0; j + 2 < grid.ny; ++j)
      for (Index i = 0; i + 1 < grid.nx; ++i)
        site({{grid.node_index(i + 1, j + 2), 1 / dxy2},
              {grid.node_index(i + 1, j + 1), -2 / dxy2},
              {grid.node_index(i + 1, j), 1 / dxy2},
              {grid.node_index(i, j + 2), -1 / dxy2},
              {grid.node_index(i, j + 1), 2 / dxy2},
              {grid.node_index(i, j), -1 / dxy2}},
             3.0);
    SparseMat d3 = from_triplets(row, nn, td);
    VectorX wv = Eigen::Map<VectorX>(w.data(), Index(w.size()));
    ops.k3 = d3.transpose() * wv.asDiagonal() * d3;
    ops.k3.makeCompressed();
  }

  // Curl stencils. Rows of normal components on the boundary are identically
  // zero (ghost reflection); tangential components use the boundary psi
  // values, which the no-slip condition keeps at zero.
  {
    std::vector<Triplet> tx, ty;
    for (Index j = 0; j < grid.ny; ++j)
      for (Index i = 0; i < grid.nx; ++i) {
        const Index r = grid.node_index(i, j);
        if (j > 0 && j < grid.ny - 1) {
          tx.emplace_back(r, grid.node_index(i, j + 1), 0.5 / grid.dy);
          tx.emplace_back(r, grid.node_index(i, j - 1), -0.5 / grid.dy);
        }
        if (i > 0 && i < grid.nx - 1) {
          ty.emplace_back(r, grid.node_index(i + 1, j), -0.5 / grid.dx);
          ty.emplace_back(r, grid.node_index(i - 1, j), 0.5 / grid.dx);
        }
      }
    ops.curl_x = from_triplets(nn, nn, tx);
    ops.curl_y = from_triplets(nn, nn, ty);
  }

  return ops;
}

std::vector<Mat2> gradient_of_deformation(const DiffOps& ops,
                                          const NodeField& values) {
  if (values.rows() != ops.grid->num_nodes())
    throw std::invalid_argument("field dimensions do not match grid");
  const VectorX gxx = ops.cell_gx * values.col(0);
  const VectorX gxy = ops.cell_gy * values.col(0);
  const VectorX gyx = ops.cell_gx * values.col(1);
  const VectorX gyy = ops.cell_gy * values.col(1);
  std::vector<Mat2> out(ops.grid->num_cells());
  for (Index c = 0; c < ops.grid->num_cells(); ++c)
    out[c] << gxx[c], gxy[c], gyx[c], gyy[c];
  return out;
}

std::vector<Hessian2> hessian_of_deformation(const DiffOps& ops,
                                             const NodeField& values) {
  if (values.rows() != ops.grid->num_nodes())
    throw std::invalid_argument("field dimensions do not match grid");
  std::vector<Hessian2> out(ops.grid->num_cells());
  for (int d = 0; d < 2; ++d) {
    const VectorX hxx = ops.cell_hxx * values.col(d);
    const VectorX hxy = ops.cell_hxy * values.col(d);
    const VectorX hyy = ops.cell_hyy * values.col(d);
    for (Index c = 0; c < ops.grid->num_cells(); ++c)
      out[c][d] << hxx[c], hxy[c], hxy[c], hyy[c];
  }
  return out;
}

NodeField stream_to_velocity(const DiffOps& ops, const VectorX& psi) {
  if (psi.size() != ops.grid->num_nodes())
    throw std::invalid_argument("psi dimensions do not match grid");
  NodeField v(psi.size(), 2);
  v.col(0) = ops.curl_x * psi;
  v.col(1) = ops.curl_y * psi;
  return v;
}

VectorX divergence_at_interior(const RectGrid& grid, const NodeField& v) {
  if (v.rows() != grid.num_nodes())
    throw std::invalid_argument("field dimensions do not match grid");
  VectorX div((grid.nx - 2) * (grid.ny - 2));
  Index r = 0;
  for (Index j = 1; j + 1 < grid.ny; ++j)
    for (Index i = 1; i + 1 < grid.nx; ++i) {
      const Scalar ddx = (v(grid.node_index(i + 1, j), 0) -
                          v(grid.node_index(i - 1, j), 0)) /
                         (2 * grid.dx);
      const Scalar ddy = (v(grid.node_index(i, j + 1), 1) -
                          v(grid.node_index(i, j - 1), 1)) /
                         (2 * grid.dy);
      div[r++] = ddx + ddy;
    }
  return div;
}

SparseMat interpolation_matrix(const RectGrid& grid, const NodeField& points,
                               Scalar max_cells_outside) {
  std::vector<Triplet> t;
  t.reserve(4 * points.rows());
  for (Index p = 0; p < points.rows(); ++p) {
    const Scalar u = (points(p, 0) - grid.x0) / grid.dx;
    const Scalar w = (points(p, 1) - grid.y0) / grid.dy;
    if (u < -max_cells_outside || u > Scalar(grid.nx - 1) + max_cells_outside ||
        w < -max_cells_outside || w > Scalar(grid.ny - 1) + max_cells_outside) {
      std::ostringstream msg;
      msg << "point (" << points(p, 0) << ", " << points(p, 1)
          << ") outside the container";
      throw OutOfDomainError(points.row(p).transpose(), msg.str());
    }
    Index ci = Index(std::floor(u)), cj = Index(std::floor(w));
    ci = std::max<Index>(0, std::min(ci, grid.nx - 2));
    cj = std::max<Index>(0, std::min(cj, grid.ny - 2));
    const Scalar fx = std::min<Scalar>(1, std::max<Scalar>(0, u - Scalar(ci)));
    const Scalar fy = std::min<Scalar>(1, std::max<Scalar>(0, w - Scalar(cj)));
    t.emplace_back(p, grid.node_index(ci, cj), (1 - fx) * (1 - fy));
    t.emplace_back(p, grid.node_index(ci + 1, cj), fx * (1 - fy));
    t.emplace_back(p, grid.node_index(ci, cj + 1), (1 - fx) * fy);
    t.emplace_back(p, grid.node_index(ci + 1, cj + 1), fx * fy);
  }
  return from_triplets(points.rows(), grid.num_nodes(), t);
}

NodeField interpolate_eulerian(const RectGrid& grid, const NodeField& field,
                               const NodeField& points,
                               Scalar max_cells_outside) {
  if (field.rows() != grid.num_nodes())
    throw std::invalid_argument("field dimensions do not match grid");
  const SparseMat w = interpolation_matrix(grid, points, max_cells_outside);
  return w * field;
}

void bilinear_eval(const RectGrid& grid, const NodeField& field,
                   const Vec2& p, Vec2& value, Mat2& jacobian) {
  const Scalar u = (p.x() - grid.x0) / grid.dx;
  const Scalar w = (p.y() - grid.y0) / grid.dy;
  Index ci = Index(std::floor(u)), cj = Index(std::floor(w));
  ci = std::max<Index>(0, std::min(ci, grid.nx - 2));
  cj = std::max<Index>(0, std::min(cj, grid.ny - 2));
  const Scalar fx = std::min<Scalar>(1, std::max<Scalar>(0, u - Scalar(ci)));
  const Scalar fy = std::min<Scalar>(1, std::max<Scalar>(0, w - Scalar(cj)));
  const Vec2 f00 = field.row(grid.node_index(ci, cj)).transpose();
  const Vec2 f10 = field.row(grid.node_index(ci + 1, cj)).transpose();
  const Vec2 f01 = field.row(grid.node_index(ci, cj + 1)).transpose();
  const Vec2 f11 = field.row(grid.node_index(ci + 1, cj + 1)).transpose();
  value = (1 - fx) * (1 - fy) * f00 + fx * (1 - fy) * f10 +
          (1 - fx) * fy * f01 + fx * fy * f11;
  const Vec2 du = ((1 - fy) * (f10 - f00) + fy * (f11 - f01)) / grid.dx;
  const Vec2 dv = ((1 - fx) * (f01 - f00) + fx * (f11 - f10)) / grid.dy;
  jacobian.col(0) = du;
  jacobian.col(1) = dv;
}

}  // namespace fpsi
