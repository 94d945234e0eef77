#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sbpsat/mesh.hpp"
#include "sbpsat/refelem.hpp"

using namespace sbpsat;

namespace {

int count_interior(const Mesh& m) {
  int n = 0;
  for (const auto& f : m.facets) n += f.tag == BoundaryTag::Interior;
  return n;
}

double signed_area(const Mesh& m, int k) {
  const auto& t = m.triangles[k];
  const Eigen::Vector2d a = m.vertices[t[1]] - m.vertices[t[0]], b = m.vertices[t[2]] - m.vertices[t[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

} // namespace

TEST_CASE("smallest structured mesh") {
  const Mesh m = generate_rect_mesh(1, 1);
  CHECK(m.n_elements() == 2);
  CHECK(m.facets.size() == 5);
  CHECK(count_interior(m) == 1);
  int neumann = 0;
  for (const auto& f : m.facets) neumann += f.tag == BoundaryTag::Neumann;
  CHECK(neumann == 1);
}

TEST_CASE("refinement levels") {
  const Mesh m = generate_rect_mesh(8, 4);
  CHECK(m.n_elements() == 64);
  CHECK(m.nominal_h() == doctest::Approx(2.5));
  const Mesh f = generate_rect_mesh(16, 8);
  CHECK(f.n_elements() == 4 * m.n_elements());
  CHECK(f.nominal_h() == doctest::Approx(m.nominal_h() / 2));
  for (int k = 0; k < f.n_elements(); ++k) CHECK(signed_area(f, k) > 0);
  // each interior facet joins two distinct elements
  for (const auto& fc : f.facets)
    if (fc.tag == BoundaryTag::Interior) CHECK(fc.elem[0] != fc.elem[1]);
  // Neumann only on x = 20
  for (const auto& fc : f.facets)
    if (fc.tag == BoundaryTag::Neumann) {
      const auto v = f.facet_vertices(fc.elem[0], fc.local[0]);
      CHECK(v[0].x() == 20.0);
      CHECK(v[1].x() == 20.0);
    }
}

TEST_CASE("perturbation formula") {
  using std::numbers::pi;
  auto oracle = [](double x, double y) {
    const double xt = x + 1.25 * std::cos(pi * x / 20 - pi / 2) * std::cos(3 * pi * y / 10);
    const double yt = y + 0.625 * std::sin(pi * xt / 5 - 2 * pi) * std::cos(pi * y / 10);
    return Eigen::Vector2d(xt, yt);
  };
  const Eigen::Vector2d c = perturb({0.0, -5.0});
  CHECK(std::abs(c.x()) < 1e-15);
  CHECK(c.y() == doctest::Approx(-5.0));
  for (auto [x, y] : {std::pair{3.3, 1.7}, {12.0, -4.1}, {19.5, 0.2}})
    CHECK((perturb({x, y}) - oracle(x, y)).norm() < 1e-14);
}

TEST_CASE("affine mapping nodes are barycentric images") {
  const Mesh m = build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}}, 0.0, 1.0, 0.0, 1.0);
  const MappingNodes map = curve_mesh(m, 2, CurveMode::Affine);
  const Eigen::MatrixX2d ref = lagrange_nodes(2);
  for (int i = 0; i < ref.rows(); ++i) {
    // reference vertices (-1,-1),(1,-1),(-1,1) map to (0,0),(1,0),(0,1)
    const Eigen::Vector2d expect((1 + ref(i, 0)) / 2, (1 + ref(i, 1)) / 2);
    CHECK((map.nodes[0].row(i).transpose() - expect).norm() < 1e-15);
  }
}

TEST_CASE("curved meshes keep positive Jacobians") {
  const auto q = load_quadrature(Family::Omega, 4);
  for (int n : {1, 2, 4}) {
    const Mesh m = generate_rect_mesh(8 * n, 4 * n);
    const MappingNodes map = curve_mesh(m, 2, CurveMode::Perturbed);
    for (int k = 0; k < m.n_elements(); ++k) CHECK(map.jacobian(k, q.nodes).minCoeff() > 0);
  }
}

TEST_CASE("facet node matching") {
  const auto ref = build_sbp_operator(load_quadrature(Family::Omega, 3));
  const Mesh m = generate_rect_mesh(4, 2);
  const MappingNodes map = curve_mesh(m, 2, CurveMode::Affine);
  const auto perms = match_facet_nodes(m, map, ref);
  for (size_t id = 0; id < m.facets.size(); ++id) {
    const auto& fc = m.facets[id];
    if (fc.tag != BoundaryTag::Interior) {
      CHECK(perms[id].empty());
      continue;
    }
    for (int j = 0; j < ref.n_f; ++j) CHECK(perms[id][j] == ref.n_f - 1 - j);
    auto field = [&](int k) {
      const Eigen::MatrixX2d x = map.map_points(k, ref.quad.nodes);
      return VectorXd(x.col(0) + x.col(1));
    };
    const VectorXd ro = ref.R[fc.local[0]] * field(fc.elem[0]);
    const VectorXd rn = ref.R[fc.local[1]] * field(fc.elem[1]);
    for (int j = 0; j < ref.n_f; ++j) CHECK(std::abs(ro(j) - rn(perms[id][j])) < 1e-10);
  }
}

TEST_CASE("mesh JSON round trip") {
  const Mesh m = generate_rect_mesh(3, 2);
  const Mesh r = import_mesh_json(export_mesh_json(m));
  REQUIRE(r.n_elements() == m.n_elements());
  CHECK(r.facets.size() == m.facets.size());
  for (size_t i = 0; i < m.vertices.size(); ++i) CHECK((r.vertices[i] - m.vertices[i]).norm() == 0.0);
  CHECK_THROWS_AS(import_mesh_json("{not json"), DataError);
}
