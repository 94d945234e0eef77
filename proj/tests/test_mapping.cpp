#include <doctest.h>

#include "sbpsat/mapping.hpp"

using namespace sbpsat;

namespace {

const Diffusivity kIdentity = [](double, double) { return Eigen::Matrix2d::Identity(); };

Mesh one_triangle(Eigen::Vector2d a, Eigen::Vector2d b, Eigen::Vector2d c) {
  return build_mesh({a, b, c}, {{{0, 1, 2}}}, -5.0, 5.0, -5.0, 5.0);
}

} // namespace

TEST_CASE("affine metrics") {
  const auto ref = build_sbp_operator(load_quadrature(Family::Omega, 2));
  const Mesh m = one_triangle({0, 0}, {2, 0}, {0, 2});
  const MappingNodes map = curve_mesh(m, 2, CurveMode::Affine);
  const ElementGeometry g = map_element(MappingBasis(ref, 2), map.nodes[0]);
  CHECK((g.x_xi.array() - 1.0).abs().maxCoeff() < 1e-13);
  CHECK(g.x_eta.cwiseAbs().maxCoeff() < 1e-13);
  CHECK(g.y_xi.cwiseAbs().maxCoeff() < 1e-13);
  CHECK((g.y_eta.array() - 1.0).abs().maxCoeff() < 1e-13);
  CHECK((g.J.array() - 1.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("identity map reproduces the reference operator") {
  for (Family f : {Family::Omega, Family::Gamma, Family::DiagE}) {
    const auto ref = build_sbp_operator(load_quadrature(f, 3));
    const Mesh m = one_triangle({-1, -1}, {1, -1}, {-1, 1});
    const MappingNodes map = curve_mesh(m, 1, CurveMode::Affine);
    const auto op = build_physical_operators(ref, map_element(MappingBasis(ref, 1), map.nodes[0]), kIdentity);
    CHECK((op.geo.x - ref.quad.nodes).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((op.Dx - ref.D_xi).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((op.Dy - ref.D_eta).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((op.H - ref.H).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("curved facet metrics match finite differences") {
  const auto ref = build_sbp_operator(load_quadrature(Family::Gamma, 3));
  const Mesh m = generate_rect_mesh(4, 2);
  const MappingNodes map = curve_mesh(m, 2, CurveMode::Perturbed);
  const MappingBasis basis(ref, 2);
  const double d = 1e-3;
  // the map is quadratic, so the one-sided three-point difference is exact up to rounding
  auto derivative = [&](int k, const Eigen::Vector2d& r, int axis) {
    const double s = r(0) + r(1) + 2 * d <= 0 ? 1.0 : -1.0;
    Eigen::MatrixX2d pts(3, 2);
    for (int i = 0; i < 3; ++i) {
      pts.row(i) = r.transpose();
      pts(i, axis) += s * i * d;
    }
    const Eigen::MatrixX2d x = map.map_points(k, pts);
    return Eigen::Vector2d(s * (-3 * x.row(0) + 4 * x.row(1) - x.row(2)).transpose() / (2 * d));
  };
  for (int k : {0, 5, 11}) {
    const ElementGeometry g = map_element(basis, map.nodes[k]);
    for (int f = 0; f < 3; ++f) {
      const Eigen::MatrixX2d fn = ref.quad.facet_nodes(f);
      for (int j = 0; j < fn.rows(); ++j) {
        const Eigen::Vector2d dxi = derivative(k, fn.row(j).transpose(), 0);
        const Eigen::Vector2d deta = derivative(k, fn.row(j).transpose(), 1);
        CHECK(std::abs(dxi(0) - g.fx_xi[f](j)) < 1e-9);
        CHECK(std::abs(dxi(1) - g.fy_xi[f](j)) < 1e-9);
        CHECK(std::abs(deta(0) - g.fx_eta[f](j)) < 1e-9);
        CHECK(std::abs(deta(1) - g.fy_eta[f](j)) < 1e-9);
      }
      CHECK((g.xf[f] - map.map_points(k, fn)).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("second derivative of a quadratic on an affine element") {
  const Mesh m = one_triangle({0.5, -0.2}, {2.0, 0.3}, {0.1, 1.7});
  const MappingNodes map = curve_mesh(m, 1, CurveMode::Affine);
  for (Family f : {Family::Omega, Family::Gamma, Family::DiagE})
    for (int p = 2; p <= 4; ++p) {
      const auto ref = build_sbp_operator(load_quadrature(f, p));
      const auto op = build_physical_operators(ref, map_element(MappingBasis(ref, 1), map.nodes[0]), kIdentity);
      const VectorXd u = op.geo.x.col(0).array().square() + op.geo.x.col(1).array().square();
      CHECK(((op.D2 * u).array() - 4.0).abs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("curved element identities") {
  const Mesh m = generate_rect_mesh(8, 4);
  const MappingNodes map = curve_mesh(m, 2, CurveMode::Perturbed);
  const Diffusivity lam = [](double x, double y) {
    Eigen::Matrix2d L;
    L << 4 + x / 20, 0.3 * y / 5, 0.3 * y / 5, 2 + 0.1 * x;
    return L;
  };
  for (Family f : {Family::Omega, Family::Gamma, Family::DiagE})
    for (int p = 1; p <= 4; ++p) {
      const auto ref = build_sbp_operator(load_quadrature(f, p));
      const MappingBasis basis(ref, 2);
      double r1 = 0, r2 = 0, c = 0;
      for (int k = 0; k < m.n_elements(); ++k) {
        const auto op = build_physical_operators(ref, map_element(basis, map.nodes[k]), lam);
        r1 = std::max(r1, d2_identity_residual(op));
        r2 = std::max(r2, d2_adjoint_identity_residual(op));
        const VectorXd one = VectorXd::Ones(ref.n_p);
        c = std::max({c, (op.Dx * one).cwiseAbs().maxCoeff(), (op.Dy * one).cwiseAbs().maxCoeff()});
      }
      CHECK(r1 <= 1e-10);
      CHECK(r2 <= 1e-10);
      CHECK(c <= 1e-12);
    }
}

TEST_CASE("mapping degree is checked") {
  const auto ref = build_sbp_operator(load_quadrature(Family::Omega, 1));
  const MappingBasis basis(ref, 2);
  CHECK_THROWS_AS(map_element(basis, Eigen::MatrixX2d::Zero(3, 2)), DomainError);
  CHECK_THROWS_AS(curve_mesh(generate_rect_mesh(1, 1), 3, CurveMode::Affine), DomainError);
}
