#include "sbpsat/analysis.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace sbpsat {

double fit_rate(const std::vector<double>& h, const std::vector<double>& err, bool first_three) {
  if (h.size() != err.size() || h.size() < 3) throw DomainError("rate fit needs at least three levels");
  const size_t start = first_three ? 0 : h.size() - 3;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = start; i < start + 3; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
}

Mesh mesh_for_level(int n_e) {
  const int ny = static_cast<int>(std::lround(std::sqrt(n_e / 4.0)));
  if (ny < 1 || 4 * ny * ny != n_e) throw DomainError("level element count must be 4 m^2");
  return generate_rect_mesh(2 * ny, ny);
}

ConvergenceRecord run_convergence_study(const ReferenceOperator& ref, SatVariant variant, const StudyOptions& opt) {
  if (opt.levels.size() < 3) throw DomainError("convergence study needs at least three levels");
  ConvergenceRecord rec;
  rec.family = ref.family;
  rec.p = ref.p;
  rec.variant = variant;
  rec.curved = opt.curved;
  const ProblemData prob = manufactured_problem();
  SatSpec spec;
  spec.variant = variant;
  for (int n_e : opt.levels) {
    try {
      Mesh mesh = mesh_for_level(n_e);
      MappingNodes map = curve_mesh(mesh, opt.p_map, opt.curved ? CurveMode::Perturbed : CurveMode::Affine);
      Discretization d = discretize(ref, std::move(mesh), std::move(map), prob.lambda, spec);
      GlobalSystem primal = assemble_primal(d, prob);
      GlobalSystem adjoint = assemble_adjoint(d, prob);
      VectorXd u = solve_linear(primal, opt.solver).x;
      VectorXd psi = solve_linear(adjoint, opt.solver).x;
      LevelResult lr;
      lr.n_e = n_e;
      lr.h = d.mesh.nominal_h();
      lr.err_u = d.h_norm(u - d.sample(prob.U));
      lr.err_psi = d.h_norm(psi - d.sample(prob.psi));
      lr.err_I = std::abs(discrete_functional(u, d, prob) - prob.exact_functional);
      rec.levels.push_back(lr);
    } catch (const Error& e) {
      throw Error("level n_e=" + std::to_string(n_e) + ": " + e.what());
    }
  }
  std::vector<double> h, eu, ep, ei;
  for (const auto& l : rec.levels) {
    h.push_back(l.h);
    eu.push_back(l.err_u);
    ep.push_back(l.err_psi);
    ei.push_back(l.err_I);
  }
  rec.rate_u = fit_rate(h, eu, opt.fit_first_three);
  rec.rate_psi = fit_rate(h, ep, opt.fit_first_three);
  rec.rate_I = fit_rate(h, ei, opt.fit_first_three);
  return rec;
}

long long estimate_nnz(SatVariant v, Family f, long long np, long long nf, long long ne) {
  const long long third = (ne + 2) / 3, rest = (2 * ne) / 3; // ceil(n_e/3), floor(2 n_e/3)
  const bool br1 = v == SatVariant::BR1 || v == SatVariant::BR1u;
  const bool ldg = v == SatVariant::LDG || v == SatVariant::LDGu;
  const bool onesided = ldg || v == SatVariant::CDG || v == SatVariant::CNG;
  switch (f) {
  case Family::Omega:
    if (br1) return 10 * np * np * ne;
    if (ldg) return third * 6 * np * np + rest * 5 * np * np;
    return 4 * np * np * ne;
  case Family::Gamma:
    if (br1) return (np * np + 3 * (2 * np * nf - nf * nf) + 6 * nf * nf) * ne;
    if (ldg) return (np * np + 3 * np * nf) * ne + (third * 2 + rest) * nf * nf;
    if (onesided) return (np * np + 3 * np * nf) * ne;
    return (np * np + 3 * (2 * np * nf - nf * nf)) * ne;
  case Family::DiagE:
    if (onesided) return (np * np + 3 * np * nf) * ne;
    return (np * np + 3 * (2 * np * nf - nf * nf)) * ne;
  }
  throw DomainError("unsupported family for the nonzero estimate");
}

NnzEstimate measure_nnz(const ReferenceOperator& ref, SatVariant variant, int n_e) {
  const ProblemData prob = manufactured_problem();
  SatSpec spec;
  spec.variant = variant;
  Mesh mesh = mesh_for_level(n_e);
  MappingNodes map = curve_mesh(mesh, 1, CurveMode::Affine);
  Discretization d = discretize(ref, std::move(mesh), std::move(map), prob.lambda, spec);
  GlobalSystem sys = assemble_primal(d, prob);
  NnzEstimate e{variant, ref.family, ref.n_p, ref.n_f, n_e, 0, sys.A.nonZeros(), 0.0};
  e.estimated = estimate_nnz(variant, ref.family, ref.n_p, ref.n_f, n_e);
  e.percent_error = 100.0 * static_cast<double>(e.estimated - e.measured) / static_cast<double>(e.measured);
  return e;
}

namespace {

double inf_norm(const SparseMatrix& A) {
  double m = 0.0;
  for (int r = 0; r < A.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) s += std::abs(it.value());
    m = std::max(m, s);
  }
  return m;
}

double max_abs(const SparseMatrix& A) {
  double m = 0.0;
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// Expected change of A when only T1 changes by dT1 on every interior facet.
SparseMatrix t1_difference(const Discretization& d, const Discretization& other) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < d.mesh.n_elements(); ++k)
    for (int g = 0; g < 3; ++g) {
      if (d.mesh.tag(k, g) != BoundaryTag::Interior) continue;
      const MatrixXd dT = d.sat.elem[k].side[g].T1k - other.sat.elem[k].side[g].T1k;
      const int v = d.mesh.neighbor(k, g), fv = d.mesh.neighbor_local(k, g);
      const MatrixXd Hi = d.ops[k].H.cwiseInverse().asDiagonal();
      const MatrixXd Rt = d.ops[k].R(g).transpose();
      const MatrixXd kk = -Hi * Rt * dT * d.ops[k].R(g);
      const MatrixXd kv = Hi * Rt * dT * d.sat.elem[k].P[g] * d.ops[v].R(fv);
      for (int i = 0; i < kk.rows(); ++i)
        for (int j = 0; j < kk.cols(); ++j) {
          if (kk(i, j) != 0.0) trip.emplace_back(d.offset[k] + i, d.offset[k] + j, kk(i, j));
          if (kv(i, j) != 0.0) trip.emplace_back(d.offset[k] + i, d.offset[v] + j, kv(i, j));
        }
    }
  SparseMatrix D(d.ndof, d.ndof);
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

} // namespace

PropertyReport run_property_suite(const ReferenceOperator& ref, SatVariant variant, const Mesh& mesh, bool curved,
                                  int p_map) {
  PropertyReport rep;
  const ProblemData prob = manufactured_problem();
  SatSpec spec;
  spec.variant = variant;
  MappingNodes map = curve_mesh(mesh, p_map, curved ? CurveMode::Perturbed : CurveMode::Affine);
  Discretization d = discretize(ref, mesh, map, prob.lambda, spec);
  GlobalSystem A = assemble_primal(d, prob);
  const double normA = inf_norm(A.A);
  double bscale = 0.0;
  for (const auto& op : d.ops)
    for (int f = 0; f < 3; ++f) bscale = std::max(bscale, op.B[f].maxCoeff());

  rep.add("conservation coefficients", conservation_residual(d.sat, d.mesh, d.ops), 1e-12 * bscale);
  rep.add("coefficient symmetry", symmetry_residual(d.sat, d.mesh), 1e-12 * bscale);

  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  VectorXd u(d.ndof);
  for (int i = 0; i < d.ndof; ++i) u(i) = uni(rng);
  const double probe_scale = normA * d.H().sum() * u.cwiseAbs().maxCoeff();
  rep.add("conservation probe", conservation_probe(d, u) / probe_scale, 1e-10);

  const double adj = adjoint_condition_residual(d.sat, d.mesh, d.ops);
  if (is_adjoint_consistent(variant))
    rep.add("adjoint-consistency conditions hold", adj, 1e-12 * bscale);
  else
    rep.add("adjoint-consistency conditions violated", adj > 1e-3 * bscale ? 0.0 : 1.0, 0.0);

  SparseMatrix HA = A.H.asDiagonal() * A.A;
  const double normHA = inf_norm(HA);
  if (A.symmetric) {
    SparseMatrix asym = HA - SparseMatrix(HA.transpose());
    rep.add("H A symmetric", max_abs(asym) / normHA, 1e-10);
    GlobalSystem Adj = assemble_adjoint(d, prob);
    SparseMatrix diff = SparseMatrix(A.H.asDiagonal() * Adj.A) - SparseMatrix(HA.transpose());
    rep.add("adjoint operator is H-transpose", max_abs(diff) / normHA, 1e-10);
  }

  if (variant != SatVariant::BR1u && variant != SatVariant::LDGu) {
    auto cert = certify_stability(d.sat, d.mesh, d.ops);
    rep.add("stability certificate", cert.pass() ? 0.0 : -cert.worst(), 0.0);
  }

  if (d.ndof <= 2000) {
    auto spec_rep = compute_spectrum(A, SpectrumMode::Eigen);
    rep.add("max Re(eig) <= 1e-8 rho", spec_rep.max_real / spec_rep.spectral_radius, 1e-8);
    if (A.symmetric) rep.add("real spectrum", spec_rep.max_imag / spec_rep.spectral_radius, 1e-8);
  }

  if (ref.family == Family::DiagE && (variant == SatVariant::BR1 || variant == SatVariant::LDG)) {
    SatSpec other = spec;
    other.variant = variant == SatVariant::BR1 ? SatVariant::BR2 : SatVariant::CDG;
    Discretization d2 = discretize(ref, mesh, map, prob.lambda, other);
    GlobalSystem A2 = assemble_primal(d2, prob);
    SparseMatrix diff = A.A - A2.A;
    SparseMatrix expected = t1_difference(d, d2);
    rep.add("diag-E: difference is T1 only", max_abs(SparseMatrix(diff - expected)) / normA, 1e-12);
    double ratio = 0.0;
    for (int k = 0; k < mesh.n_elements(); ++k)
      for (int g = 0; g < 3; ++g)
        if (mesh.tag(k, g) == BoundaryTag::Interior)
          ratio = std::max(ratio, (d.sat.elem[k].side[g].T1k - 2.0 * d2.sat.elem[k].side[g].T1k).cwiseAbs().maxCoeff());
    rep.add("diag-E: T1 doubled", ratio, 1e-12 * bscale);
    int wide = 0;
    for (const auto& ec : d.sat.elem)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) wide += ec.T5[a][b].size() > 0 || ec.T6[a][b].size() > 0;
    rep.add("diag-E: no wide couplings", wide, 0.0);
  }

  {
    SolveOptions dense;
    dense.kind = SolverKind::Dense;
    SolveOptions iter;
    iter.kind = A.symmetric ? SolverKind::CG : SolverKind::GMRES;
    iter.tol = 1e-12;
    VectorXd xd = solve_linear(A, dense).x;
    VectorXd xi = solve_linear(A, iter).x;
    rep.add("iterative matches dense (H-norm)", d.h_norm(xd - xi) / d.h_norm(xd), 1e-8);
  }
  return rep;
}

void write_convergence_csv(const std::vector<ConvergenceRecord>& recs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "level,n_e,h,err_u,err_psi,err_I,rate_u,rate_psi,rate_I\n";
  out << std::setprecision(10);
  for (const auto& r : recs)
    for (size_t i = 0; i < r.levels.size(); ++i) {
      const auto& l = r.levels[i];
      out << i << ',' << l.n_e << ',' << l.h << ',' << l.err_u << ',' << l.err_psi << ',' << l.err_I << ','
          << r.rate_u << ',' << r.rate_psi << ',' << r.rate_I << '\n';
    }
}

void write_convergence_svg(const ConvergenceRecord& rec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const double W = 480, Hh = 360, m = 50;
  double hmin = 1e300, hmax = 0, emin = 1e300, emax = 0;
  for (const auto& l : rec.levels) {
    hmin = std::min(hmin, l.h);
    hmax = std::max(hmax, l.h);
    for (double e : {l.err_u, l.err_psi, l.err_I})
      if (e > 0) {
        emin = std::min(emin, e);
        emax = std::max(emax, e);
      }
  }
  const double lx0 = std::log10(hmin) - 0.1, lx1 = std::log10(hmax) + 0.1;
  const double ly0 = std::log10(emin) - 0.5, ly1 = std::log10(emax) + 0.5;
  auto X = [&](double h) { return m + (std::log10(h) - lx0) / (lx1 - lx0) * (W - 2 * m); };
  auto Y = [&](double e) { return Hh - m - (std::log10(e) - ly0) / (ly1 - ly0) * (Hh - 2 * m); };
  out << std::fixed << std::setprecision(2);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << Hh << "\">\n";
  out << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << Hh - 2 * m
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};
  const char* names[3] = {"solution", "adjoint", "functional"};
  const double rates[3] = {rec.rate_u, rec.rate_psi, rec.rate_I};
  for (int c = 0; c < 3; ++c) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[c] << "\" points=\"";
    for (const auto& l : rec.levels) {
      double e = c == 0 ? l.err_u : c == 1 ? l.err_psi : l.err_I;
      if (e > 0) out << X(l.h) << ',' << Y(e) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - m - 120 << "\" y=\"" << m + 15 + 15 * c << "\" font-size=\"12\" fill=\"" << colors[c]
        << "\">" << names[c] << " rate " << rates[c] << "</text>\n";
  }
  // reference slopes p+1 and 2p anchored at the coarsest solution and functional errors
  if (!rec.levels.empty()) {
    const auto& l0 = rec.levels.front();
    const int p = rec.p;
    for (auto [slope, e0] : {std::pair<double, double>{p + 1.0, l0.err_u}, {2.0 * p, l0.err_I}}) {
      if (!(e0 > 0)) continue;
      const double h1 = hmin;
      const double e1 = e0 * std::pow(h1 / l0.h, slope);
      out << "<line x1=\"" << X(l0.h) << "\" y1=\"" << Y(e0) << "\" x2=\"" << X(h1) << "\" y2=\"" << Y(e1)
          << "\" stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n";
    }
  }
  out << "<text x=\"" << W / 2 - 10 << "\" y=\"" << Hh - 15 << "\" font-size=\"12\">h</text>\n";
  out << "</svg>\n";
}

void write_nnz_csv(const std::vector<NnzEstimate>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "variant,family,n_p,n_f,n_e,estimated,measured,percent_error\n";
  out << std::setprecision(6);
  for (const auto& r : rows)
    out << to_string(r.variant) << ',' << to_string(r.family) << ',' << r.n_p << ',' << r.n_f << ',' << r.n_e << ','
        << r.estimated << ',' << r.measured << ',' << r.percent_error << '\n';
}

void write_spectrum_csv(const SpectrumReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "re,im\n" << std::setprecision(17);
  for (const auto& z : rep.eigenvalues) out << z.real() << ',' << z.imag() << '\n';
}

} // namespace sbpsat
