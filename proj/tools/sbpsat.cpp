// Command-line driver for operator validation, convergence, spectra, sparsity and certification studies.
#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sbpsat/analysis.hpp"

using namespace sbpsat;

namespace {

struct Config {
  std::vector<std::string> families{"omega", "gamma", "diage"};
  std::vector<int> degrees{1, 2, 3, 4};
  std::vector<std::string> sats;
  std::vector<int> levels{64, 256, 1024, 4096};
  int nx = 8, ny = 4;
  bool curved = false;
  int p_map = 2;
  std::string solver = "auto";
  double tol = 0.0;
  bool first_three = false;
  bool dump = false;
  std::string out = "out";
};

const std::string kVariantList = "br1|br1u|br2|sipg|ldg|ldgu|cdg|bo|nipg|cng";

std::vector<Family> families_of(const Config& c) {
  std::vector<Family> f;
  for (const auto& s : c.families) f.push_back(parse_family(s));
  return f;
}

std::vector<SatVariant> variants_of(const Config& c) {
  if (c.sats.empty()) return all_variants();
  std::vector<SatVariant> v;
  for (const auto& s : c.sats) v.push_back(parse_sat(s));
  return v;
}

SolveOptions solve_options(const Config& c) {
  SolveOptions o;
  o.kind = parse_solver(c.solver);
  o.tol = c.tol;
  return o;
}

std::filesystem::path out_dir(const Config& c) {
  std::filesystem::path p(c.out);
  std::filesystem::create_directories(p);
  return p;
}

std::string tag(Family f, int p, SatVariant v) { return to_string(f) + "_p" + std::to_string(p) + "_" + to_string(v); }

void print_report(const std::string& title, const ValidationReport& rep) {
  std::cout << title << (rep.all_pass() ? "  ok" : "  FAILED") << "\n";
  for (const auto& ch : rep.checks)
    std::cout << "  " << (ch.pass ? "pass" : "FAIL") << "  " << std::left << std::setw(44) << ch.name << std::scientific
              << std::setprecision(3) << ch.residual << std::defaultfloat << "\n";
}

bool run_validate(const Config& c) {
  bool ok = true;
  for (Family f : families_of(c))
    for (int p : c.degrees) {
      const auto op = build_sbp_operator(load_quadrature(f, p));
      const ValidationReport rep = validate_operator(op);
      print_report(to_string(f) + " p=" + std::to_string(p) + " n_p=" + std::to_string(op.n_p), rep);
      ok = ok && rep.all_pass();
    }
  return ok;
}

bool run_converge(const Config& c) {
  StudyOptions opt;
  opt.levels = c.levels;
  opt.curved = c.curved;
  opt.p_map = c.p_map;
  opt.fit_first_three = c.first_three;
  opt.solver = solve_options(c);
  const auto dir = out_dir(c);
  for (Family f : families_of(c))
    for (int p : c.degrees) {
      const auto op = build_sbp_operator(load_quadrature(f, p));
      for (SatVariant v : variants_of(c)) {
        auto rec = run_convergence_study(op, v, opt);
        const std::string name = "converge_" + tag(f, p, v);
        write_convergence_csv({rec}, (dir / (name + ".csv")).string());
        write_convergence_svg(rec, (dir / (name + ".svg")).string());
        std::cout << std::left << std::setw(22) << tag(f, p, v) << " rates: u " << std::fixed << std::setprecision(2)
                  << rec.rate_u << "  psi " << rec.rate_psi << "  I " << rec.rate_I << std::defaultfloat << "\n";
      }
    }
  return true;
}

bool run_spectra(const Config& c) {
  const auto dir = out_dir(c);
  const ProblemData prob = manufactured_problem();
  bool ok = true;
  for (Family f : families_of(c))
    for (int p : c.degrees) {
      const auto op = build_sbp_operator(load_quadrature(f, p));
      for (SatVariant v : variants_of(c)) {
        Mesh mesh = generate_rect_mesh(c.nx, c.ny);
        MappingNodes map = curve_mesh(mesh, c.p_map, c.curved ? CurveMode::Perturbed : CurveMode::Affine);
        SatSpec spec;
        spec.variant = v;
        Discretization d = discretize(op, std::move(mesh), std::move(map), prob.lambda, spec);
        GlobalSystem sys = assemble_primal(d, prob);
        SpectrumReport rep = compute_spectrum(sys);
        write_spectrum_csv(rep, (dir / ("spectrum_" + tag(f, p, v) + ".csv")).string());
        const bool stable = rep.max_real <= 1e-8 * rep.spectral_radius;
        ok = ok && stable;
        std::cout << std::left << std::setw(22) << tag(f, p, v) << std::scientific << std::setprecision(4)
                  << " rho " << rep.spectral_radius << "  max Re " << rep.max_real << "  max |Im| " << rep.max_imag
                  << "  cond " << rep.condition << std::defaultfloat << (stable ? "" : "  UNSTABLE") << "\n";
        if (c.dump) {
          write_matrix_market(sys.A, (dir / ("A_" + tag(f, p, v) + ".mtx")).string());
          write_vector(sys.b, (dir / ("b_" + tag(f, p, v) + ".txt")).string());
        }
      }
    }
  return ok;
}

bool run_sparsity(const Config& c) {
  const auto dir = out_dir(c);
  std::vector<NnzEstimate> rows;
  bool ok = true;
  for (Family f : families_of(c))
    for (int p : c.degrees) {
      const auto op = build_sbp_operator(load_quadrature(f, p));
      for (SatVariant v : variants_of(c))
        for (int n_e : c.levels) {
          NnzEstimate e = measure_nnz(op, v, n_e);
          ok = ok && e.measured <= e.estimated;
          std::cout << std::left << std::setw(22) << tag(f, p, v) << " n_e " << std::setw(6) << n_e << " estimate "
                    << std::setw(10) << e.estimated << " measured " << std::setw(10) << e.measured << " error "
                    << std::fixed << std::setprecision(2) << e.percent_error << "%" << std::defaultfloat << "\n";
          rows.push_back(e);
        }
    }
  write_nnz_csv(rows, (dir / "sparsity.csv").string());
  return ok;
}

bool run_certify(const Config& c) {
  bool ok = true;
  for (Family f : families_of(c))
    for (int p : c.degrees) {
      const auto op = build_sbp_operator(load_quadrature(f, p));
      const Mesh mesh = generate_rect_mesh(c.nx, c.ny);
      for (SatVariant v : variants_of(c)) {
        auto rep = run_property_suite(op, v, mesh, c.curved, c.p_map);
        print_report(tag(f, p, v), rep);
        ok = ok && rep.all_pass();
      }
    }
  return ok;
}

void add_common(CLI::App* app, Config& c, bool with_sat) {
  app->add_option("--family", c.families, "operator families (omega|gamma|diage)")
      ->check(CLI::IsMember({"omega", "gamma", "diage"}));
  app->add_option("--p", c.degrees, "operator degrees")->check(CLI::Range(1, kMaxDegree));
  if (with_sat) {
    app->add_option("--sat", c.sats, "SAT variants (" + kVariantList + ")")
        ->check(CLI::IsMember({"br1", "br1u", "br2", "sipg", "ldg", "ldgu", "cdg", "bo", "nipg", "cng"}));
    app->add_option("--nx", c.nx, "rectangles in x")->check(CLI::PositiveNumber);
    app->add_option("--ny", c.ny, "rectangles in y")->check(CLI::PositiveNumber);
    app->add_option("--levels", c.levels, "element counts per level (4 m^2 each)");
    app->add_flag("--curved", c.curved, "perturb the mesh");
    app->add_option("--pmap", c.p_map, "mapping degree")->check(CLI::Range(1, 2));
    app->add_option("--solver", c.solver, "linear solver")->check(CLI::IsMember({"auto", "dense", "sparse", "cg", "gmres"}));
    app->add_option("--tol", c.tol, "solver tolerance (0 selects the default)");
    app->add_flag("--first-three", c.first_three, "fit rates on the first three levels");
    app->add_flag("--dump", c.dump, "write assembled matrices");
    app->add_option("--out", c.out, "output directory");
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"SBP-SAT diffusion discretization studies"};
  app.set_config("--config", "", "TOML configuration file");
  app.require_subcommand(1);
  Config cfg;
  auto* validate = app.add_subcommand("validate", "check quadrature data and reference operators");
  auto* converge = app.add_subcommand("converge", "manufactured-solution convergence study");
  auto* spectra = app.add_subcommand("spectra", "eigenvalues and condition number of the system matrix");
  auto* sparsity = app.add_subcommand("sparsity", "measured versus estimated nonzeros");
  auto* certify = app.add_subcommand("certify", "conservation, adjoint consistency, stability and solver checks");
  auto* all = app.add_subcommand("all", "validate, certify, spectra and sparsity with defaults");
  add_common(validate, cfg, false);
  for (auto* s : {converge, spectra, sparsity, certify, all}) add_common(s, cfg, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0 && e.get_exit_code() != 0) {
      std::cerr << "SAT variants: " << kVariantList << "\n";
      return 2;
    }
    return rc;
  }

  try {
    bool ok = true;
    if (*validate) ok = run_validate(cfg);
    if (*converge) {
      if (cfg.sats.empty()) cfg.sats = {"br2"};
      ok = run_converge(cfg);
    }
    if (*spectra) ok = run_spectra(cfg);
    if (*sparsity) ok = run_sparsity(cfg);
    if (*certify) ok = run_certify(cfg);
    if (*all) {
      ok = run_validate(cfg);
      if (cfg.degrees.size() == 4) cfg.degrees = {2};
      ok = run_certify(cfg) && ok;
      ok = run_spectra(cfg) && ok;
      cfg.levels = {256, 1024};
      ok = run_sparsity(cfg) && ok;
    }
    return ok ? 0 : 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
