#ifndef SBPSAT_SOLVE_HPP
#define SBPSAT_SOLVE_HPP

#include <complex>
#include <string>
#include <vector>

#include "sbpsat/assembly.hpp"

namespace sbpsat {

enum class SolverKind { Auto, Dense, SparseLU, CG, GMRES };

SolverKind parse_solver(const std::string& s);
std::string to_string(SolverKind k);

struct SolveOptions {
  SolverKind kind = SolverKind::Auto;
  double tol = 0.0; ///< 0 selects 1e-12 for dense and 1e-10 for iterative solvers
  int max_iterations = 20000;
  int restart = 200; ///< GMRES restart length
};

struct SolveReport {
  VectorXd x;
  SolverKind used = SolverKind::Dense;
  int iterations = 0;
  double relative_residual = 0.0;
  double seconds = 0.0;
};

/// Solve A x = -b. Auto picks dense LU below 2000 unknowns and sparse LU above.
SolveReport solve_linear(const GlobalSystem& sys, const SolveOptions& opt = {});

enum class SpectrumMode { Eigen, Cond, Both };

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;
  double spectral_radius = 0.0;
  double max_real = 0.0;
  double max_imag = 0.0;
  double condition = 0.0;
};

/// Dense eigenvalues and/or 2-norm condition number; refuses beyond 5000 unknowns.
SpectrumReport compute_spectrum(const GlobalSystem& sys, SpectrumMode mode = SpectrumMode::Both);

} // namespace sbpsat

#endif
