#include "sbpsat/mapping.hpp"

#include <cmath>

namespace sbpsat {

MappingBasis::MappingBasis(const ReferenceOperator& ref, int pm) : p_map(pm) {
  auto VL = evaluate_basis(lagrange_nodes(pm), pm).V;
  Eigen::FullPivLU<MatrixXd> lu(VL);
  if (lu.rank() < VL.cols()) throw DataError("mapping-basis Vandermonde is singular");
  MatrixXd VLinv = lu.inverse();
  auto bv = evaluate_basis(ref.quad.nodes, pm);
  P = bv.V * VLinv;
  P_xi = bv.V_xi * VLinv;
  P_eta = bv.V_eta * VLinv;
  for (int f = 0; f < 3; ++f) {
    auto bf = evaluate_basis(ref.quad.facet_nodes(f), pm);
    Pf[f] = bf.V * VLinv;
    Pf_xi[f] = bf.V_xi * VLinv;
    Pf_eta[f] = bf.V_eta * VLinv;
  }
}

ElementGeometry map_element(const MappingBasis& mb, const Eigen::MatrixX2d& xt) {
  if (xt.rows() != mb.P.cols()) throw DomainError("mapping node count does not match p_map");
  ElementGeometry g;
  g.x = mb.P * xt;
  MatrixXd dxi = mb.P_xi * xt, deta = mb.P_eta * xt;
  g.x_xi = dxi.col(0);
  g.y_xi = dxi.col(1);
  g.x_eta = deta.col(0);
  g.y_eta = deta.col(1);
  g.J = g.x_xi.cwiseProduct(g.y_eta) - g.x_eta.cwiseProduct(g.y_xi);
  if (!(g.J.minCoeff() > 0)) throw GeometryError("nonpositive Jacobian at a volume node");
  for (int f = 0; f < 3; ++f) {
    g.xf[f] = mb.Pf[f] * xt;
    MatrixXd fxi = mb.Pf_xi[f] * xt, feta = mb.Pf_eta[f] * xt;
    g.fx_xi[f] = fxi.col(0);
    g.fy_xi[f] = fxi.col(1);
    g.fx_eta[f] = feta.col(0);
    g.fy_eta[f] = feta.col(1);
    // facet Jacobian: physical over reference arc length along the unit reference tangent
    Eigen::Vector2d n = reference::facet_normal(f);
    const double tx = -n.y(), ty = n.x();
    VectorXd dx = g.fx_xi[f] * tx + g.fx_eta[f] * ty, dy = g.fy_xi[f] * tx + g.fy_eta[f] * ty;
    g.Jf[f] = (dx.array().square() + dy.array().square()).sqrt().matrix();
    if (!(g.Jf[f].minCoeff() > 0)) throw GeometryError("degenerate facet Jacobian");
  }
  return g;
}

PhysicalOperators build_physical_operators(const ReferenceOperator& ref, ElementGeometry geo,
                                           const Diffusivity& lambda) {
  PhysicalOperators op;
  op.ref = &ref;
  op.geo = std::move(geo);
  const auto& g = op.geo;
  const int np = ref.n_p;
  op.H = g.J.cwiseProduct(ref.H);
  op.Ex = MatrixXd::Zero(np, np);
  op.Ey = MatrixXd::Zero(np, np);
  for (int f = 0; f < 3; ++f) {
    const double nxi = ref.normal[f].x(), neta = ref.normal[f].y();
    VectorXd invJ = g.Jf[f].cwiseInverse();
    op.B[f] = g.Jf[f].cwiseProduct(ref.B[f]);
    op.Nx[f] = invJ.cwiseProduct(g.fy_eta[f] * nxi - g.fy_xi[f] * neta);
    op.Ny[f] = invJ.cwiseProduct(-g.fx_eta[f] * nxi + g.fx_xi[f] * neta);
    op.Ex += ref.R[f].transpose() * op.B[f].cwiseProduct(op.Nx[f]).asDiagonal() * ref.R[f];
    op.Ey += ref.R[f].transpose() * op.B[f].cwiseProduct(op.Ny[f]).asDiagonal() * ref.R[f];
  }
  auto skew = [](const VectorXd& m, const MatrixXd& Q) -> MatrixXd {
    MatrixXd a = m.asDiagonal() * Q;
    return 0.5 * (a - a.transpose());
  };
  op.Sx = skew(g.y_eta, ref.Q_xi) - skew(g.y_xi, ref.Q_eta);
  op.Sy = -skew(g.x_eta, ref.Q_xi) + skew(g.x_xi, ref.Q_eta);
  VectorXd Hinv = op.H.cwiseInverse();
  op.Dx = Hinv.asDiagonal() * (op.Sx + 0.5 * op.Ex);
  op.Dy = Hinv.asDiagonal() * (op.Sy + 0.5 * op.Ey);

  op.Lxx.resize(np);
  op.Lxy.resize(np);
  op.Lyx.resize(np);
  op.Lyy.resize(np);
  for (int i = 0; i < np; ++i) {
    Eigen::Matrix2d L = lambda(g.x(i, 0), g.x(i, 1));
    if (!(L.determinant() > 0 && L.trace() > 0))
      throw DomainError("diffusivity is not positive definite at a volume node");
    op.Lxx(i) = L(0, 0);
    op.Lxy(i) = L(0, 1);
    op.Lyx(i) = L(1, 0);
    op.Lyy(i) = L(1, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (L + L.transpose()));
    op.lambda_max = std::max(op.lambda_max, es.eigenvalues().maxCoeff());
  }
  // fluxes lambda grad u at volume nodes
  MatrixXd Fx = op.Lxx.asDiagonal() * op.Dx + op.Lxy.asDiagonal() * op.Dy;
  MatrixXd Fy = op.Lyx.asDiagonal() * op.Dx + op.Lyy.asDiagonal() * op.Dy;
  op.D2 = op.Dx * Fx + op.Dy * Fy;
  op.M = op.Dx.transpose() * op.H.asDiagonal() * Fx + op.Dy.transpose() * op.H.asDiagonal() * Fy;
  for (int f = 0; f < 3; ++f)
    op.Dg[f] = op.Nx[f].asDiagonal() * ref.R[f] * Fx + op.Ny[f].asDiagonal() * ref.R[f] * Fy;
  return op;
}

double d2_identity_residual(const PhysicalOperators& op) {
  MatrixXd rhs = -op.M;
  for (int f = 0; f < 3; ++f) rhs += op.R(f).transpose() * op.B[f].asDiagonal() * op.Dg[f];
  rhs = op.H.cwiseInverse().asDiagonal() * rhs;
  return (op.D2 - rhs).cwiseAbs().maxCoeff() / op.D2.cwiseAbs().maxCoeff();
}

double d2_adjoint_identity_residual(const PhysicalOperators& op) {
  MatrixXd rhs = op.D2.transpose() * op.H.asDiagonal();
  for (int f = 0; f < 3; ++f) {
    rhs -= op.Dg[f].transpose() * op.B[f].asDiagonal() * op.R(f);
    rhs += op.R(f).transpose() * op.B[f].asDiagonal() * op.Dg[f];
  }
  rhs = op.H.cwiseInverse().asDiagonal() * rhs;
  return (op.D2 - rhs).cwiseAbs().maxCoeff() / op.D2.cwiseAbs().maxCoeff();
}

} // namespace sbpsat
