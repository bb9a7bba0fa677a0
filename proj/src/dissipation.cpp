#include "fpsi/dissipation.hpp"

#include <stdexcept>

namespace fpsi {

void DissipationParams::validate() const {
  if (!(nu > 0)) throw std::invalid_argument("nu must be > 0");
  if (!(drag_a0 >= 0)) throw std::invalid_argument("drag_a0 must be >= 0");
  if (!(h_rate_weight >= 0))
    throw std::invalid_argument("h_rate_weight must be >= 0");
}

Scalar kelvin_voigt_rate(const DiffOps& ops, const NodeField& eta_values,
                         const NodeField& rate_values) {
  const auto fe = gradient_of_deformation(ops, eta_values);
  const auto fb = gradient_of_deformation(ops, rate_values);
  const Scalar dA = ops.grid->cell_area();
  Scalar r = 0;
  for (std::size_t c = 0; c < fe.size(); ++c) {
    const Mat2 m = fb[c].transpose() * fe[c] + fe[c].transpose() * fb[c];
    r += m.squaredNorm() * dA;
  }
  return r;
}

NodeField kelvin_voigt_partial(const DiffOps& ops, const NodeField& eta_values,
                               const NodeField& rate_values) {
  const auto fe = gradient_of_deformation(ops, eta_values);
  const auto fb = gradient_of_deformation(ops, rate_values);
  const Index nc = ops.grid->num_cells();
  const Scalar dA = ops.grid->cell_area();
  MatrixX df(nc, 4);
  for (Index c = 0; c < nc; ++c) {
    const Mat2 m = fb[c].transpose() * fe[c] + fe[c].transpose() * fb[c];
    const Mat2 d = 4 * fe[c] * m * dA;
    df(c, 0) = d(0, 0);
    df(c, 1) = d(0, 1);
    df(c, 2) = d(1, 0);
    df(c, 3) = d(1, 1);
  }
  NodeField g(rate_values.rows(), 2);
  g.col(0) = ops.cell_gx.transpose() * df.col(0) +
             ops.cell_gy.transpose() * df.col(1);
  g.col(1) = ops.cell_gx.transpose() * df.col(2) +
             ops.cell_gy.transpose() * df.col(3);
  return g;
}

Scalar rate_regularizer(const DiffOps& ops, const NodeField& b) {
  Scalar r = 0;
  for (int d = 0; d < 2; ++d) r += b.col(d).dot(ops.k3 * b.col(d));
  return r;
}

NodeField rate_regularizer_partial(const DiffOps& ops, const NodeField& b) {
  NodeField g(b.rows(), 2);
  for (int d = 0; d < 2; ++d) g.col(d) = 2 * (ops.k3 * b.col(d));
  return g;
}

Scalar drag_potential(const DiffOps& ops, const NodeField& eta_values,
                      const NodeField& relative, const DissipationParams& p) {
  if (relative.rows() != ops.grid->num_nodes())
    throw std::invalid_argument("relative velocity does not match solid grid");
  const auto fe = gradient_of_deformation(ops, eta_values);
  const NodeField phi_cells_x = ops.cell_avg * relative;
  const Scalar dA = ops.grid->cell_area();
  Scalar a = 0;
  for (std::size_t c = 0; c < fe.size(); ++c) {
    const Vec2 phi = phi_cells_x.row(Index(c)).transpose();
    a += 0.5 * phi.dot(p.drag_at(fe[c]) * phi) * dA;
  }
  return a;
}

DragPartials drag_partials(const DiffOps& solid_ops, const FluidGrid& fluid,
                           const DiffOps& fluid_ops,
                           const NodeField& eta_values,
                           const NodeField& eta_dot, const VectorX& psi,
                           const DissipationParams& p) {
  const SparseMat w = interpolation_matrix(fluid, eta_values);
  const NodeField v = stream_to_velocity(fluid_ops, psi);
  const NodeField phi = eta_dot - w * v;

  const auto fe = gradient_of_deformation(solid_ops, eta_values);
  const NodeField phi_cells = solid_ops.cell_avg * phi;
  const Scalar dA = solid_ops.grid->cell_area();

  DragPartials out;
  MatrixX force_cells(Index(fe.size()), 2);
  for (std::size_t c = 0; c < fe.size(); ++c) {
    const Vec2 pc = phi_cells.row(Index(c)).transpose();
    const Vec2 f = p.drag_at(fe[c]) * pc * dA;
    out.value += 0.5 * pc.dot(f);
    force_cells.row(Index(c)) = f.transpose();
  }
  out.solid = solid_ops.cell_avg.transpose() * force_cells;
  out.fluid_nodes = -(w.transpose() * out.solid);
  out.psi = velocity_force_to_psi(fluid_ops, out.fluid_nodes);
  return out;
}

Scalar fluid_dissipation(const DiffOps& ops, const NodeField& v, Scalar nu) {
  const auto gv = gradient_of_deformation(ops, v);
  const Scalar dA = ops.grid->cell_area();
  Scalar d = 0;
  for (const Mat2& g : gv) {
    const Mat2 eps = 0.5 * (g + g.transpose());
    d += 0.5 * nu * eps.squaredNorm() * dA;
  }
  return d;
}

NodeField fluid_dissipation_partial_v(const DiffOps& ops, const NodeField& v,
                                      Scalar nu) {
  const auto gv = gradient_of_deformation(ops, v);
  const Index nc = ops.grid->num_cells();
  const Scalar dA = ops.grid->cell_area();
  MatrixX df(nc, 4);
  for (Index c = 0; c < nc; ++c) {
    const Mat2 eps = 0.5 * (gv[c] + gv[c].transpose());
    const Mat2 d = nu * eps * dA;
    df(c, 0) = d(0, 0);
    df(c, 1) = d(0, 1);
    df(c, 2) = d(1, 0);
    df(c, 3) = d(1, 1);
  }
  NodeField g(v.rows(), 2);
  g.col(0) = ops.cell_gx.transpose() * df.col(0) +
             ops.cell_gy.transpose() * df.col(1);
  g.col(1) = ops.cell_gx.transpose() * df.col(2) +
             ops.cell_gy.transpose() * df.col(3);
  return g;
}

VectorX velocity_force_to_psi(const DiffOps& ops, const NodeField& force_v) {
  return ops.curl_x.transpose() * force_v.col(0) +
         ops.curl_y.transpose() * force_v.col(1);
}

VectorX fluid_dissipation_partial_psi(const DiffOps& ops, const VectorX& psi,
                                      Scalar nu) {
  const NodeField v = stream_to_velocity(ops, psi);
  return velocity_force_to_psi(ops, fluid_dissipation_partial_v(ops, v, nu));
}

}  // namespace fpsi
