#include <doctest.h>

#include "sbpsat/solve.hpp"

using namespace sbpsat;

namespace {

GlobalSystem build(Family f, int p, SatVariant v, int nx = 4) {
  static std::map<std::pair<Family, int>, ReferenceOperator> cache;
  auto it = cache.find({f, p});
  if (it == cache.end()) it = cache.emplace(std::pair{f, p}, build_sbp_operator(load_quadrature(f, p))).first;
  const ProblemData prob = manufactured_problem();
  Mesh mesh = generate_rect_mesh(nx, nx / 2);
  MappingNodes map = curve_mesh(mesh, 2, CurveMode::Perturbed);
  SatSpec spec;
  spec.variant = v;
  const Discretization d = discretize(it->second, std::move(mesh), std::move(map), prob.lambda, spec);
  return assemble_primal(d, prob);
}

double h_rel(const GlobalSystem& s, const VectorXd& a, const VectorXd& b) {
  const VectorXd e = a - b;
  return std::sqrt(e.dot(s.H.cwiseProduct(e)) / b.dot(s.H.cwiseProduct(b)));
}

} // namespace

TEST_CASE("sign convention") {
  GlobalSystem s;
  s.A.resize(3, 3);
  s.A.setIdentity();
  s.A *= -1.0;
  s.b = VectorXd::Unit(3, 0);
  s.H = VectorXd::Ones(3);
  for (SolverKind k : {SolverKind::Dense, SolverKind::SparseLU, SolverKind::CG, SolverKind::GMRES}) {
    SolveOptions o;
    o.kind = k;
    CHECK((solve_linear(s, o).x - VectorXd::Unit(3, 0)).norm() < 1e-12);
  }
  s.b = VectorXd::Ones(2);
  CHECK_THROWS_AS(solve_linear(s), DomainError);
}

TEST_CASE("solvers agree") {
  const GlobalSystem br2 = build(Family::Omega, 2, SatVariant::BR2);
  SolveOptions o;
  o.kind = SolverKind::Dense;
  const VectorXd ref = solve_linear(br2, o).x;
  for (SolverKind k : {SolverKind::SparseLU, SolverKind::CG, SolverKind::GMRES}) {
    o.kind = k;
    o.tol = 1e-12;
    const SolveReport r = solve_linear(br2, o);
    CHECK_MESSAGE(h_rel(br2, r.x, ref) < 1e-8, to_string(k));
  }
  const GlobalSystem cng = build(Family::Omega, 2, SatVariant::CNG);
  o.kind = SolverKind::Dense;
  const VectorXd cref = solve_linear(cng, o).x;
  o.kind = SolverKind::GMRES;
  CHECK(h_rel(cng, solve_linear(cng, o).x, cref) < 1e-8);
}

TEST_CASE("solver names") {
  CHECK(parse_solver("cg") == SolverKind::CG);
  CHECK(parse_solver("sparse") == SolverKind::SparseLU);
  CHECK_THROWS_AS(parse_solver("jacobi"), DomainError);
}

TEST_CASE("spectra") {
  const SpectrumReport br2 = compute_spectrum(build(Family::Omega, 2, SatVariant::BR2));
  CHECK(br2.max_real < 0);
  CHECK(br2.max_imag < 1e-8 * br2.spectral_radius);
  CHECK(br2.condition > 1);

  const SpectrumReport bo = compute_spectrum(build(Family::Omega, 2, SatVariant::BO));
  CHECK(bo.max_imag > 1e-3 * bo.spectral_radius);
  CHECK(bo.max_real <= 1e-8 * bo.spectral_radius);

  const double ldg = compute_spectrum(build(Family::Omega, 2, SatVariant::LDG), SpectrumMode::Eigen).spectral_radius;
  const double br1 = compute_spectrum(build(Family::Omega, 2, SatVariant::BR1), SpectrumMode::Eigen).spectral_radius;
  CHECK(ldg > br1);
  CHECK(br1 > br2.spectral_radius);
  CHECK(ldg / br2.spectral_radius >= 2.5);
  CHECK(ldg / br2.spectral_radius <= 6.0);
}
