#include "fpsi/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fpsi {

namespace {

Mat2 cofactor(const Mat2& f) {
  Mat2 c;
  c << f(1, 1), -f(1, 0), -f(0,  1), f(0, 0);
  return c;
}

void zero_dirichlet_rows(const SolidGrid& grid, NodeField& g) {
  for (Index n : grid.dirichlet_set) g.row(n).setZero();
}

}  // namespace

void ElasticParams::validate() const {
  std::ostringstream msg;
  bool bad = false;
  auto fail = [&](const std::string& s) {
    if (bad) msg << "; ";
    msg << s;
    bad = true;
  };
  if (!(mu > 0)) fail("mu must be > 0");
  if (!(mu + lambda > 0)) fail("mu + lambda must be > 0");
  if (!(q > 2)) fail("q must be > 2 (q > n with n = 2)");
  if (!(a > 2 * q / (q - 2))) {
    std::ostringstream s;
    s << "a must be > 2q/(q-2) = " << 2 * q / (q - 2) << ", got a = " << a;
    fail(s.str());
  }
  if (!(a0 > 0 && a0 < 1)) fail("a0 must lie in (0,1)");
  if (!(h_reg_weight >= 0)) fail("h_reg_weight must be >= 0");
  if (k0_order != 3) fail("k0_order is fixed to 3");
  if (bad) throw std::invalid_argument("elastic parameters: " + msg.str());
}

EnergyBreakdown stored_energy(const DiffOps& ops, const DeformationField& eta,
                              const ElasticParams& p) {
  const auto grads = gradient_of_deformation(ops, eta);
  const auto hess = hessian_of_deformation(ops, eta);
  const Scalar dA = ops.grid->cell_area();

  EnergyBreakdown b;
  for (std::size_t c = 0; c < grads.size(); ++c) {
    const Mat2& f = grads[c];
    const Scalar det = f.determinant();
    if (!(det > 0)) {
      b.finite = false;
      return b;
    }
    const Mat2 g = f.transpose() * f - Mat2::Identity();
    b.stvk += 0.125 *
              (2 * p.mu * g.squaredNorm() + p.lambda * g.trace() * g.trace()) *
              dA;
    b.det_penalty += std::pow(det, -p.a) * dA;
    const Scalar h2 =
        hess[c][0].squaredNorm() + hess[c][1].squaredNorm();
    b.second_gradient += std::pow(h2, 0.5 * p.q) / p.q * dA;
  }
  if (!std::isfinite(b.det_penalty)) b.finite = false;
  return b;
}

NodeField stored_energy_gradient(const DiffOps& ops,
                                 const DeformationField& eta,
                                 const ElasticParams& p) {
  const auto grads = gradient_of_deformation(ops, eta);
  const auto hess = hessian_of_deformation(ops, eta);
  const Index nc = ops.grid->num_cells();
  const Scalar dA = ops.grid->cell_area();

  // Per-cell derivative of the density w.r.t. F, and w.r.t. the Hessian of
  // each component; assembled back to the nodes through the stencil
  // transposes.
  MatrixX df(nc, 4);       // columns: dPhi/dF(0,0), (0,1), (1,0), (1,1)
  MatrixX dhxx(nc, 2), dhxy(nc, 2), dhyy(nc, 2);
  for (Index c = 0; c < nc; ++c) {
    const Mat2& f = grads[c];
    const Scalar det = f.determinant();
    if (!(det > 0))
      throw InfiniteEnergyError("stored energy gradient at a folded state");
    const Mat2 g = f.transpose() * f - Mat2::Identity();
    Mat2 dphi = p.mu * f * g + 0.5 * p.lambda * g.trace() * f;
    dphi += -p.a * std::pow(det, -p.a - 1) * cofactor(f);
    df(c, 0) = dphi(0, 0) * dA;
    df(c, 1) = dphi(0, 1) * dA;
    df(c, 2) = dphi(1, 0) * dA;
    df(c, 3) = dphi(1, 1) * dA;

    const Scalar h2 = hess[c][0].squaredNorm() + hess[c][1].squaredNorm();
    const Scalar coef = h2 > 0 ? std::pow(h2, 0.5 * p.q - 1) : 0;
    for (int d = 0; d < 2; ++d) {
      dhxx(c, d) = coef * hess[c][d](0, 0) * dA;
      dhxy(c, d) = coef * 2 * hess[c][d](0, 1) * dA;  // both off-diagonals
      dhyy(c, d) = coef * hess[c][d](1, 1) * dA;
    }
  }

  NodeField grad(eta.values.rows(), 2);
  grad.col(0) = ops.cell_gx.transpose() * df.col(0) +
                ops.cell_gy.transpose() * df.col(1) +
                ops.cell_hxx.transpose() * dhxx.col(0) +
                ops.cell_hxy.transpose() * dhxy.col(0) +
                ops.cell_hyy.transpose() * dhyy.col(0);
  grad.col(1) = ops.cell_gx.transpose() * df.col(2) +
                ops.cell_gy.transpose() * df.col(3) +
                ops.cell_hxx.transpose() * dhxx.col(1) +
                ops.cell_hxy.transpose() * dhxy.col(1) +
                ops.cell_hyy.transpose() * dhyy.col(1);
  zero_dirichlet_rows(*eta.grid, grad);
  return grad;
}

EnergyBreakdown regularized_energy(const DiffOps& ops,
                                   const DeformationField& eta,
                                   const ElasticParams& p) {
  EnergyBreakdown b = stored_energy(ops, eta, p);
  if (!b.finite || p.h_reg_weight == 0) return b;
  Scalar reg = 0;
  for (int d = 0; d < 2; ++d)
    reg += eta.values.col(d).dot(ops.k3 * eta.values.col(d));
  b.regularizer = 0.5 * p.h_reg_weight * reg;
  return b;
}

NodeField regularized_energy_gradient(const DiffOps& ops,
                                      const DeformationField& eta,
                                      const ElasticParams& p) {
  NodeField grad = stored_energy_gradient(ops, eta, p);
  if (p.h_reg_weight != 0) {
    NodeField reg(eta.values.rows(), 2);
    reg.col(0) = p.h_reg_weight * (ops.k3 * eta.values.col(0));
    reg.col(1) = p.h_reg_weight * (ops.k3 * eta.values.col(1));
    zero_dirichlet_rows(*eta.grid, reg);
    grad += reg;
  }
  return grad;
}

Scalar min_determinant(const DiffOps& ops, const DeformationField& eta) {
  const auto grads = gradient_of_deformation(ops, eta);
  Scalar m = kInfinity;
  for (const Mat2& f : grads) m = std::min(m, f.determinant());
  return m;
}

}  // namespace fpsi
