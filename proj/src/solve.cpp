#include "sbpsat/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

namespace sbpsat {

SolverKind parse_solver(const std::string& s) {
  if (s == "auto") return SolverKind::Auto;
  if (s == "dense") return SolverKind::Dense;
  if (s == "sparse") return SolverKind::SparseLU;
  if (s == "cg") return SolverKind::CG;
  if (s == "gmres") return SolverKind::GMRES;
  throw DomainError("unknown solver '" + s + "' (expected auto|dense|sparse|cg|gmres)");
}

std::string to_string(SolverKind k) {
  switch (k) {
  case SolverKind::Auto: return "auto";
  case SolverKind::Dense: return "dense-LU";
  case SolverKind::SparseLU: return "sparse-LU";
  case SolverKind::CG: return "CG";
  case SolverKind::GMRES: return "GMRES";
  }
  return "?";
}

SolveReport solve_linear(const GlobalSystem& sys, const SolveOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(sys.A.rows());
  if (sys.A.cols() != n || sys.b.size() != n) throw DomainError("system is not square or b does not conform");
  SolverKind kind = opt.kind;
  if (kind == SolverKind::Auto) kind = n < 2000 ? SolverKind::Dense : SolverKind::SparseLU;
  const double tol = opt.tol > 0 ? opt.tol : (kind == SolverKind::Dense || kind == SolverKind::SparseLU ? 1e-12 : 1e-10);
  const VectorXd rhs = -sys.b;
  const double bnorm = std::max(rhs.norm(), 1e-300);
  SolveReport rep;
  rep.used = kind;
  switch (kind) {
  case SolverKind::Dense: {
    Eigen::PartialPivLU<MatrixXd> lu(MatrixXd(sys.A));
    rep.x = lu.solve(rhs);
    break;
  }
  case SolverKind::SparseLU: {
    Eigen::SparseMatrix<double> Ac = sys.A;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(Ac);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed");
    rep.x = lu.solve(rhs);
    break;
  }
  case SolverKind::CG: {
    // -H A is symmetric positive definite for the symmetric variants
    SparseMatrix K = -(sys.H.asDiagonal() * sys.A);
    Eigen::SparseMatrix<double> Kc = K;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(tol * 0.1);
    cg.setMaxIterations(opt.max_iterations);
    cg.compute(Kc);
    rep.x = cg.solve(sys.H.cwiseProduct(sys.b));
    rep.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success) throw SolverError("CG did not converge");
    break;
  }
  case SolverKind::GMRES: {
    Eigen::SparseMatrix<double> Ac = sys.A;
    Eigen::GMRES<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> gm;
    gm.setTolerance(tol * 0.1);
    gm.setMaxIterations(opt.max_iterations);
    gm.set_restart(opt.restart);
    gm.preconditioner().setDroptol(1e-6);
    gm.compute(Ac);
    if (gm.info() != Eigen::Success) throw SolverError("GMRES preconditioner setup failed");
    rep.x = gm.solve(rhs);
    rep.iterations = static_cast<int>(gm.iterations());
    if (gm.info() != Eigen::Success) throw SolverError("GMRES did not converge");
    break;
  }
  case SolverKind::Auto: break;
  }
  rep.relative_residual = (sys.A * rep.x - rhs).norm() / bnorm;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!(rep.relative_residual <= tol * 10.0))
    throw SolverError(to_string(kind) + " residual " + std::to_string(rep.relative_residual) + " above tolerance");
  return rep;
}

SpectrumReport compute_spectrum(const GlobalSystem& sys, SpectrumMode mode) {
  const int n = static_cast<int>(sys.A.rows());
  if (n > 5000) throw DomainError("dense spectrum limited to 5000 unknowns; use a coarser mesh");
  MatrixXd A(sys.A);
  SpectrumReport rep;
  if (mode != SpectrumMode::Cond) {
    Eigen::EigenSolver<MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw SolverError("eigenvalue iteration failed");
    rep.max_real = -1e300;
    for (int i = 0; i < n; ++i) {
      std::complex<double> z = es.eigenvalues()(i);
      rep.eigenvalues.push_back(z);
      rep.spectral_radius = std::max(rep.spectral_radius, std::abs(z));
      rep.max_real = std::max(rep.max_real, z.real());
      rep.max_imag = std::max(rep.max_imag, std::abs(z.imag()));
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](auto a, auto b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
  }
  if (mode != SpectrumMode::Eigen) {
    Eigen::BDCSVD<MatrixXd> svd(A);
    const auto& s = svd.singularValues();
    rep.condition = s(0) / s(s.size() - 1);
  }
  return rep;
}

} // namespace sbpsat
