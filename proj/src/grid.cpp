#include "fpsi/grid.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fpsi {

RectGrid::RectGrid(Index nx_, Index ny_, Scalar x0_, Scalar y0_, Scalar lx,
                   Scalar ly)
    : nx(nx_), ny(ny_), x0(x0_), y0(y0_) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs >= 2 nodes per axis");
  if (lx <= 0 || ly <= 0) throw std::invalid_argument("grid extents must be positive");
  dx = lx / Scalar(nx - 1);
  dy = ly / Scalar(ny - 1);
}

std::vector<Index> RectGrid::boundary_nodes() const {
  std::vector<Index> out;
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i)
      if (is_boundary(i, j)) out.push_back(node_index(i, j));
  return out;
}

NodeField RectGrid::node_positions() const {
  NodeField p(num_nodes(), 2);
  for (Index j = 0; j < ny; ++j)
    for (Index i = 0; i < nx; ++i)
      p.row(node_index(i, j)) = node(i, j).transpose();
  return p;
}

VectorX RectGrid::node_weights() const {
  VectorX w(num_nodes());
  for (Index j = 0; j < ny; ++j) {
    const Scalar wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
    for (Index i = 0; i < nx; ++i) {
      const Scalar wx = (i == 0 || i == nx - 1) ? 0.5 : 1.0;
      w[node_index(i, j)] = wx * wy * dx * dy;
    }
  }
  return w;
}

DeformationField DeformationField::identity_embed(const SolidGrid& g,
                                                  const Vec2& offset) {
  DeformationField eta;
  eta.grid = &g;
  eta.values = g.node_positions();
  eta.values.rowwise() += offset.transpose();
  return eta;
}

DeformationField DeformationField::uniaxial_stretch(const SolidGrid& g,
                                                    Scalar lambda,
                                                    const Vec2& offset) {
  DeformationField eta = identity_embed(g, offset);
  const Scalar cx = g.x0 + 0.5 * g.lx() + offset.x();
  eta.values.col(0) = (eta.values.col(0).array() - cx) * lambda + cx;
  return eta;
}

void write_snapshot(std::ostream& os, const RectGrid& grid,
                    const MatrixX& node_values) {
  if (node_values.rows() != grid.num_nodes())
    throw std::invalid_argument("snapshot: row count != node count");
  char buf[64];
  auto put = [&](Scalar v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  os << grid.nx << ' ' << grid.ny << ' ';
  put(grid.x0); os << ' ';
  put(grid.y0); os << ' ';
  put(grid.dx); os << ' ';
  put(grid.dy); os << '\n';
  for (Index j = 0; j < grid.ny; ++j)
    for (Index i = 0; i < grid.nx; ++i) {
      os << i << ' ' << j;
      const Index n = grid.node_index(i, j);
      for (Index c = 0; c < node_values.cols(); ++c) {
        os << ' ';
        put(node_values(n, c));
      }
      os << '\n';
    }
}

MatrixX read_snapshot(std::istream& is, RectGrid& grid_out) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("snapshot: empty stream");
  std::istringstream hs(header);
  RectGrid g;
  if (!(hs >> g.nx >> g.ny >> g.x0 >> g.y0 >> g.dx >> g.dy))
    throw std::runtime_error("snapshot: bad header");

  // Column count is inferred from the first data row.
  std::string line;
  std::vector<std::vector<Scalar>> rows;
  Index cols = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Index i, j;
    if (!(ls >> i >> j)) throw std::runtime_error("snapshot: bad row: " + line);
    std::vector<Scalar> vals;
    Scalar v;
    while (ls >> v) vals.push_back(v);
    if (cols < 0) cols = Index(vals.size());
    if (Index(vals.size()) != cols)
      throw std::runtime_error("snapshot: inconsistent column count");
    if (g.node_index(i, j) != Index(rows.size()))
      throw std::runtime_error("snapshot: rows out of order");
    rows.push_back(std::move(vals));
  }
  if (Index(rows.size()) != g.num_nodes())
    throw std::runtime_error("snapshot: node count mismatch");
  MatrixX out(g.num_nodes(), cols);
  for (Index n = 0; n < g.num_nodes(); ++n)
    for (Index c = 0; c < cols; ++c) out(n, c) = rows[n][c];
  grid_out = g;
  return out;
}

void write_snapshot_file(const std::string& path, const RectGrid& grid,
                         const MatrixX& node_values) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  write_snapshot(f, grid, node_values);
}

MatrixX read_snapshot_file(const std::string& path, RectGrid& grid_out) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_snapshot(f, grid_out);
}

}  // namespace fpsi
