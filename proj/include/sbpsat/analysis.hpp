#ifndef SBPSAT_ANALYSIS_HPP
#define SBPSAT_ANALYSIS_HPP

#include <string>
#include <vector>

#include "sbpsat/solve.hpp"

namespace sbpsat {

struct LevelResult {
  int n_e = 0;
  double h = 0.0;
  double err_u = 0.0, err_psi = 0.0, err_I = 0.0;
};

struct ConvergenceRecord {
  Family family = Family::Omega;
  int p = 1;
  SatVariant variant = SatVariant::BR2;
  bool curved = true;
  std::vector<LevelResult> levels;
  double rate_u = 0.0, rate_psi = 0.0, rate_I = 0.0;
};

/// Least-squares slope of log(err) against log(h) over three consecutive levels.
double fit_rate(const std::vector<double>& h, const std::vector<double>& err, bool first_three = false);

struct StudyOptions {
  std::vector<int> levels{64, 256, 1024, 4096}; ///< element counts, each 4 m^2 for an integer m
  bool curved = true;
  int p_map = 2;
  bool fit_first_three = false;
  SolveOptions solver;
};

/// Structured mesh with 2 nx ny = n_e elements and nx = 2 ny.
Mesh mesh_for_level(int n_e);

ConvergenceRecord run_convergence_study(const ReferenceOperator& ref, SatVariant variant, const StudyOptions& opt);

/// Table-style nonzero estimate for a two-dimensional mesh.
long long estimate_nnz(SatVariant variant, Family family, long long n_p, long long n_f, long long n_e);

struct NnzEstimate {
  SatVariant variant;
  Family family;
  int n_p, n_f, n_e;
  long long estimated, measured;
  double percent_error; ///< 100 (est - meas) / meas
};

NnzEstimate measure_nnz(const ReferenceOperator& ref, SatVariant variant, int n_e);

using PropertyReport = ValidationReport;

/// Conservation, adjoint-consistency, coefficient, stability, spectrum, equivalence and solver checks.
PropertyReport run_property_suite(const ReferenceOperator& ref, SatVariant variant, const Mesh& mesh, bool curved,
                                  int p_map = 2);

void write_convergence_csv(const std::vector<ConvergenceRecord>& recs, const std::string& path);
/// Log-log plot of the three error curves with reference slope segments.
void write_convergence_svg(const ConvergenceRecord& rec, const std::string& path);
void write_nnz_csv(const std::vector<NnzEstimate>& rows, const std::string& path);
void write_spectrum_csv(const SpectrumReport& rep, const std::string& path);

} // namespace sbpsat

#endif
