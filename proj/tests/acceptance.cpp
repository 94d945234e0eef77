// Acceptance checks. Each criterion prints one PASS or FAIL line; the exit status is nonzero on any FAIL.
#include <CLI11.hpp>

#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "sbpsat/analysis.hpp"

using namespace sbpsat;

namespace {

const Family kFamilies[] = {Family::Omega, Family::Gamma, Family::DiagE};

const ReferenceOperator& reference(Family f, int p) {
  static std::map<std::pair<Family, int>, ReferenceOperator> cache;
  auto it = cache.find({f, p});
  if (it == cache.end()) it = cache.emplace(std::pair{f, p}, build_sbp_operator(load_quadrature(f, p))).first;
  return it->second;
}

Discretization setup(Family f, int p, SatVariant v, int nx, bool curved) {
  Mesh mesh = generate_rect_mesh(nx, nx / 2);
  MappingNodes map = curve_mesh(mesh, 2, curved ? CurveMode::Perturbed : CurveMode::Affine);
  SatSpec spec;
  spec.variant = v;
  return discretize(reference(f, p), std::move(mesh), std::move(map), manufactured_problem().lambda, spec);
}

std::string tag(Family f, int p, SatVariant v) { return to_string(f) + " p" + std::to_string(p) + " " + to_string(v); }

/// Collects failures for one criterion.
struct Outcome {
  std::vector<std::string> failures;
  std::string summary;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  bool pass() const { return failures.empty(); }
};

std::string sci(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << x;
  return s.str();
}

double bscale_of(const Discretization& d) {
  double b = 0;
  for (const auto& op : d.ops)
    for (int f = 0; f < 3; ++f) b = std::max(b, op.B[f].maxCoeff());
  return b;
}

double inf_norm(const SparseMatrix& A) {
  double m = 0;
  for (int r = 0; r < A.outerSize(); ++r) {
    double s = 0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

Outcome operator_validity() {
  Outcome o;
  double worst = 0;
  for (Family f : kFamilies)
    for (int p = 1; p <= 4; ++p) {
      const auto rep = validate_operator(reference(f, p));
      for (const auto& c : rep.checks) {
        o.check(c.pass, to_string(f) + " p" + std::to_string(p) + " " + c.name + " " + sci(c.residual));
        worst = std::max(worst, c.residual);
      }
    }
  o.summary = "12 operators, largest residual " + sci(worst);
  return o;
}

Outcome curved_identities() {
  Outcome o;
  const Mesh mesh = generate_rect_mesh(8, 4);
  const MappingNodes map = curve_mesh(mesh, 2, CurveMode::Perturbed);
  const Diffusivity lambda = manufactured_problem().lambda;
  double r1 = 0, r2 = 0, c = 0;
  for (Family f : kFamilies)
    for (int p = 1; p <= 4; ++p) {
      const auto& ref = reference(f, p);
      const MappingBasis basis(ref, 2);
      const VectorXd one = VectorXd::Ones(ref.n_p);
      for (int k = 0; k < mesh.n_elements(); ++k) {
        const auto op = build_physical_operators(ref, map_element(basis, map.nodes[k]), lambda);
        const double a = d2_identity_residual(op), b = d2_adjoint_identity_residual(op);
        const double z = std::max((op.Dx * one).cwiseAbs().maxCoeff(), (op.Dy * one).cwiseAbs().maxCoeff());
        const std::string where = to_string(f) + " p" + std::to_string(p) + " element " + std::to_string(k);
        o.check(a <= 1e-10, where + " second-derivative identity " + sci(a));
        o.check(b <= 1e-10, where + " adjoint identity " + sci(b));
        o.check(z <= 1e-12, where + " D 1 " + sci(z));
        r1 = std::max(r1, a);
        r2 = std::max(r2, b);
        c = std::max(c, z);
      }
    }
  o.summary = "64 curved elements, residuals " + sci(r1) + " / " + sci(r2) + ", |D 1| " + sci(c);
  return o;
}

Outcome conservation() {
  Outcome o;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0;
  for (Family f : kFamilies)
    for (SatVariant v : all_variants())
      for (bool curved : {false, true}) {
        const Discretization d = setup(f, 2, v, 8, curved);
        VectorXd u(d.ndof);
        for (int i = 0; i < d.ndof; ++i) u(i) = uni(rng);
        const GlobalSystem sys = assemble_primal(d, manufactured_problem());
        const double r = conservation_probe(d, u) / (inf_norm(sys.A) * d.H().sum() * u.cwiseAbs().maxCoeff());
        o.check(r <= 1e-10, tag(f, 2, v) + (curved ? " curved " : " affine ") + sci(r));
        worst = std::max(worst, r);
      }
  o.summary = "60 systems, largest normalized probe " + sci(worst);
  return o;
}

Outcome adjoint_consistency() {
  Outcome o;
  const ProblemData prob = manufactured_problem();
  double sym = 0;
  for (Family f : kFamilies)
    for (SatVariant v : all_variants()) {
      const Discretization d = setup(f, 2, v, 8, true);
      const double bs = bscale_of(d);
      const double r = adjoint_condition_residual(d.sat, d.mesh, d.ops);
      if (is_adjoint_consistent(v)) {
        o.check(r <= 1e-12 * bs, tag(f, 2, v) + " conditions violated " + sci(r));
        const GlobalSystem sys = assemble_primal(d, prob);
        const MatrixXd HA = sys.H.asDiagonal() * MatrixXd(sys.A);
        const double s = (HA - HA.transpose()).cwiseAbs().maxCoeff() / HA.cwiseAbs().maxCoeff();
        o.check(s <= 1e-10, tag(f, 2, v) + " H A asymmetry " + sci(s));
        sym = std::max(sym, s);
      } else {
        o.check(r > 1e-3 * bs, tag(f, 2, v) + " conditions unexpectedly hold");
      }
    }
  o.summary = "consistent set exact, BO/NIPG/CNG violate, H A asymmetry " + sci(sym);
  return o;
}

Outcome stability() {
  Outcome o;
  const ProblemData prob = manufactured_problem();
  const SatVariant certified[] = {SatVariant::BR1, SatVariant::BR2, SatVariant::SIPG, SatVariant::LDG,
                                  SatVariant::CDG, SatVariant::BO,  SatVariant::NIPG, SatVariant::CNG};
  double worst = -1e300;
  int n = 0;
  auto spectrum = [&](const Discretization& d, const std::string& what) {
    const SpectrumReport s = compute_spectrum(assemble_primal(d, prob), SpectrumMode::Eigen);
    const double r = s.max_real / s.spectral_radius;
    o.check(r <= 1e-8, what + " max Re / rho " + sci(r));
    worst = std::max(worst, r);
    ++n;
  };
  for (Family f : kFamilies)
    for (int p = 1; p <= 4; ++p) {
      for (SatVariant v : certified) {
        const Discretization d = setup(f, p, v, 8, true);
        const auto cert = certify_stability(d.sat, d.mesh, d.ops);
        o.check(cert.pass(), tag(f, p, v) + " certificate worst " + sci(cert.worst()));
        spectrum(d, tag(f, p, v));
      }
      if (f == Family::DiagE)
        for (SatVariant v : {SatVariant::BR1u, SatVariant::LDGu}) spectrum(setup(f, p, v, 8, true), tag(f, p, v));
    }
  o.summary = std::to_string(n) + " certified systems, largest max Re / rho " + sci(worst);
  return o;
}

Outcome convergence() {
  Outcome o;
  int n = 0;
  for (int p = 1; p <= 3; ++p)
    for (Family f : kFamilies) {
      StudyOptions opt;
      opt.levels = {64, 256, 1024};
      if (p <= 2) opt.levels.push_back(4096);
      std::vector<SatVariant> vars;
      for (SatVariant v : all_variants()) {
        const bool unmodified = v == SatVariant::BR1u || v == SatVariant::LDGu;
        if (is_adjoint_consistent(v) && (!unmodified || f == Family::DiagE)) vars.push_back(v);
        if (p == 2 && (v == SatVariant::BO || v == SatVariant::CNG)) vars.push_back(v);
      }
      for (SatVariant v : vars) {
        const ConvergenceRecord r = run_convergence_study(reference(f, p), v, opt);
        std::ostringstream rates;
        rates << std::fixed << std::setprecision(2) << " rates u " << r.rate_u << " psi " << r.rate_psi << " I "
              << r.rate_I;
        std::cout << "  " << tag(f, p, v) << rates.str() << "\n";
        ++n;
        if (is_adjoint_consistent(v)) {
          o.check(std::abs(r.rate_u - (p + 1)) <= 0.3, tag(f, p, v) + " solution" + rates.str());
          o.check(r.rate_psi >= p + 1 - 0.3, tag(f, p, v) + " adjoint" + rates.str());
          o.check(std::abs(r.rate_I - 2 * p) <= 0.4, tag(f, p, v) + " functional" + rates.str());
        } else {
          o.check(std::abs(r.rate_u - p) <= 0.3, tag(f, p, v) + " solution" + rates.str());
          o.check(r.rate_I < 2 * p - 0.5, tag(f, p, v) + " functional" + rates.str());
        }
      }
    }
  o.summary = std::to_string(n) + " studies";
  return o;
}

Outcome diag_e_equivalence() {
  Outcome o;
  for (int p = 1; p <= 4; ++p) {
    const Discretization d = setup(Family::DiagE, p, SatVariant::BR2, 8, true);
    double u = 0;
    for (const auto& op : d.ops)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (a != b) u = std::max(u, compute_upsilon(op, a, b).cwiseAbs().maxCoeff());
    o.check(u == 0.0, "diage p" + std::to_string(p) + " cross-facet lifting " + sci(u));
    for (SatVariant v : {SatVariant::BR1, SatVariant::LDG}) {
      const auto rep = run_property_suite(reference(Family::DiagE, p), v, generate_rect_mesh(8, 4), true);
      for (const auto& c : rep.checks)
        if (c.name.rfind("diag-E", 0) == 0)
          o.check(c.pass, tag(Family::DiagE, p, v) + " " + c.name + " " + sci(c.residual));
    }
  }
  o.summary = "cross-facet lifting exactly zero; BR1/BR2 and LDG/CDG differ only in T1";
  return o;
}

Outcome sparsity() {
  Outcome o;
  const long long unit = estimate_nnz(SatVariant::BR2, Family::Omega, 15, 6, 4352);
  o.check(unit == 3916800, "unit estimate " + std::to_string(unit));
  double worst = 0;
  for (Family f : kFamilies)
    for (int p = 1; p <= 4; ++p)
      for (SatVariant v : all_variants()) {
        const NnzEstimate coarse = measure_nnz(reference(f, p), v, 256);
        const NnzEstimate fine = measure_nnz(reference(f, p), v, 1024);
        const std::string what = tag(f, p, v) + " estimate " + std::to_string(fine.estimated) + " measured " +
                                 std::to_string(fine.measured);
        o.check(fine.measured <= fine.estimated, what + " exceeds estimate");
        o.check(fine.percent_error <= 12.0, what + " error " + sci(fine.percent_error) + "%");
        o.check(fine.percent_error <= coarse.percent_error, what + " error not decreasing");
        worst = std::max(worst, fine.percent_error);
      }
  o.summary = "unit estimate 3916800, largest error at 1024 elements " + sci(worst) + "%";
  return o;
}

Outcome spectral_ordering() {
  Outcome o;
  const ProblemData prob = manufactured_problem();
  std::map<SatVariant, SpectrumReport> rep;
  for (SatVariant v : {SatVariant::LDG, SatVariant::BR1, SatVariant::BR2, SatVariant::BO, SatVariant::CNG})
    rep[v] = compute_spectrum(assemble_primal(setup(Family::Omega, 2, v, 4, true), prob), SpectrumMode::Eigen);
  const double ldg = rep[SatVariant::LDG].spectral_radius, br1 = rep[SatVariant::BR1].spectral_radius,
               br2 = rep[SatVariant::BR2].spectral_radius;
  o.check(ldg > br1, "rho(LDG) <= rho(BR1)");
  o.check(br1 > br2, "rho(BR1) <= rho(BR2)");
  o.check(ldg / br2 >= 2.5 && ldg / br2 <= 6.0, "rho(LDG)/rho(BR2) = " + sci(ldg / br2));
  for (SatVariant v : {SatVariant::BO, SatVariant::CNG}) {
    const auto& s = rep[v];
    int complex = 0;
    for (const auto& z : s.eigenvalues) complex += std::abs(z.imag()) > 1e-6 * s.spectral_radius;
    o.check(complex >= 2, to_string(v) + " spectrum is real");
  }
  std::ostringstream s;
  s << std::setprecision(5) << "rho LDG " << ldg << ", BR1 " << br1 << ", BR2 " << br2 << ", ratio " << ldg / br2;
  o.summary = s.str();
  return o;
}

Outcome solver_cross_validation() {
  Outcome o;
  const ProblemData prob = manufactured_problem();
  double worst = 0;
  for (Family f : kFamilies)
    for (SatVariant v : all_variants()) {
      const Discretization d = setup(f, 2, v, 8, true);
      const GlobalSystem sys = assemble_primal(d, prob);
      SolveOptions dense, iter;
      dense.kind = SolverKind::Dense;
      iter.kind = sys.symmetric ? SolverKind::CG : SolverKind::GMRES;
      iter.tol = 1e-12;
      const VectorXd xd = solve_linear(sys, dense).x;
      const VectorXd xi = solve_linear(sys, iter).x;
      const double r = d.h_norm(xd - xi) / d.h_norm(xd);
      o.check(r <= 1e-8, tag(f, 2, v) + " " + to_string(iter.kind) + " " + sci(r));
      worst = std::max(worst, r);
    }
  o.summary = "30 systems, largest H-norm difference " + sci(worst);
  return o;
}

const std::map<int, std::pair<std::string, Outcome (*)()>> kCriteria = {
    {1, {"operator validity", operator_validity}},
    {2, {"curved-element identities", curved_identities}},
    {3, {"conservation", conservation}},
    {4, {"adjoint consistency", adjoint_consistency}},
    {5, {"energy stability", stability}},
    {6, {"convergence rates", convergence}},
    {7, {"diag-E equivalence", diag_e_equivalence}},
    {8, {"sparsity", sparsity}},
    {9, {"spectral-radius ordering", spectral_ordering}},
    {10, {"solver cross-validation", solver_cross_validation}},
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criteria to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (which.empty())
    for (const auto& [n, c] : kCriteria) which.push_back(n);

  bool all = true;
  for (int n : which) {
    const auto& [name, run] = kCriteria.at(n);
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("error: ") + e.what());
    }
    for (const auto& f : o.failures) std::cout << "  fail: " << f << "\n";
    std::cout << (o.pass() ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): "
              << (o.pass() ? o.summary : std::to_string(o.failures.size()) + " failing checks") << std::endl;
    all = all && o.pass();
  }
  return all ? 0 : 1;
}
