#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sbpsat/analysis.hpp"

using namespace sbpsat;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConvergenceRecord synthetic() {
  ConvergenceRecord r;
  r.p = 2;
  for (int i = 0; i < 4; ++i) {
    const double h = 2.5 / (1 << i);
    r.levels.push_back({64 << (2 * i), h, 0.1 * std::pow(h, 3), 0.2 * std::pow(h, 3), 0.05 * std::pow(h, 4)});
  }
  r.rate_u = r.rate_psi = 3;
  r.rate_I = 4;
  return r;
}

} // namespace

TEST_CASE("rate fit") {
  const std::vector<double> h{1.0, 0.5, 0.25, 0.125};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * std::pow(x, 2.5));
  CHECK(std::abs(fit_rate(h, e) - 2.5) < 1e-10);
  e[0] *= 10; // only the last three levels enter by default
  CHECK(std::abs(fit_rate(h, e) - 2.5) < 1e-10);
  CHECK(std::abs(fit_rate(h, e, true) - 2.5) > 0.1);
  CHECK_THROWS_AS(fit_rate({1.0, 0.5}, {1.0, 0.25}), DomainError);
}

TEST_CASE("level meshes") {
  CHECK(mesh_for_level(64).n_elements() == 64);
  CHECK(mesh_for_level(1024).nominal_h() == doctest::Approx(0.625));
  CHECK_THROWS_AS(mesh_for_level(100 * 2), DomainError);
}

TEST_CASE("nonzero estimates") {
  CHECK(estimate_nnz(SatVariant::BR2, Family::Omega, 15, 6, 4352) == 3916800);
  CHECK(estimate_nnz(SatVariant::BR1, Family::Omega, 10, 4, 64) == 10 * 100 * 64);
  for (SatVariant v : all_variants())
    for (Family f : {Family::Omega, Family::Gamma, Family::DiagE}) CHECK(estimate_nnz(v, f, 10, 4, 0) == 0);
  const auto ref = build_sbp_operator(load_quadrature(Family::Omega, 1));
  const NnzEstimate e = measure_nnz(ref, SatVariant::BR2, 64);
  CHECK(e.measured <= e.estimated);
  CHECK(e.percent_error >= 0);
}

TEST_CASE("writers") {
  write_convergence_csv({}, "sbpsat_empty.csv");
  CHECK(slurp("sbpsat_empty.csv") == "level,n_e,h,err_u,err_psi,err_I,rate_u,rate_psi,rate_I\n");
  const ConvergenceRecord r = synthetic();
  write_convergence_csv({r}, "sbpsat_a.csv");
  write_convergence_csv({r}, "sbpsat_b.csv");
  CHECK(slurp("sbpsat_a.csv") == slurp("sbpsat_b.csv"));
  std::stringstream lines(slurp("sbpsat_a.csv"));
  int n = 0;
  for (std::string line; std::getline(lines, line);) ++n;
  CHECK(n == 5);

  write_convergence_svg(r, "sbpsat_plot.svg");
  const std::string svg = slurp("sbpsat_plot.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  size_t polylines = 0;
  for (size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++polylines;
  CHECK(polylines == 3);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);

  SpectrumReport sp;
  sp.eigenvalues = {{-1.0, 0.5}, {-2.0, 0.0}};
  write_spectrum_csv(sp, "sbpsat_spec.csv");
  CHECK(slurp("sbpsat_spec.csv") == "re,im\n-1,0.5\n-2,0\n");
  for (const char* f : {"sbpsat_empty.csv", "sbpsat_a.csv", "sbpsat_b.csv", "sbpsat_plot.svg", "sbpsat_spec.csv"})
    std::remove(f);
}

TEST_CASE("property suite on a small mesh") {
  const auto ref = build_sbp_operator(load_quadrature(Family::DiagE, 2));
  const Mesh mesh = generate_rect_mesh(4, 2);
  for (SatVariant v : {SatVariant::BR1, SatVariant::LDG, SatVariant::CNG}) {
    const PropertyReport rep = run_property_suite(ref, v, mesh, true);
    for (const auto& c : rep.checks) CHECK_MESSAGE(c.pass, to_string(v) << ": " << c.name << " " << c.residual);
  }
}

TEST_CASE("study reports level context") {
  const auto ref = build_sbp_operator(load_quadrature(Family::Omega, 1));
  StudyOptions opt;
  opt.levels = {16, 64, 120};
  try {
    run_convergence_study(ref, SatVariant::BR2, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("n_e=120") != std::string::npos);
  }
}
