#ifndef SBPSAT_ASSEMBLY_HPP
#define SBPSAT_ASSEMBLY_HPP

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "sbpsat/sat.hpp"

namespace sbpsat {

using ScalarField = std::function<double(double, double)>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Diffusion problem with exact primal and adjoint fields.
struct ProblemData {
  Diffusivity lambda;
  ScalarField F, U, U_x, U_y;         ///< source and exact solution with gradient
  ScalarField G, psi, psi_x, psi_y;   ///< adjoint source and exact adjoint with gradient
  double exact_functional = 0.0;
};

/// Manufactured problem on [0,20]x[-5,5] with U = sin(pi x/8) sin(pi y/8) and psi = x + y.
ProblemData manufactured_problem();

/// Everything needed to assemble on one mesh with one operator and SAT choice.
struct Discretization {
  const ReferenceOperator* ref = nullptr;
  Mesh mesh;
  MappingNodes map;
  FacetPermutations perms;
  std::vector<PhysicalOperators> ops;
  SatCoefficients sat;
  std::vector<int> offset; ///< first global row of each element
  int ndof = 0;

  /// Diagonal of the global norm matrix.
  VectorXd H() const;
  /// Sample a field at all volume nodes.
  VectorXd sample(const ScalarField& f) const;
  /// sqrt(e^T H e).
  double h_norm(const VectorXd& e) const;
};

Discretization discretize(const ReferenceOperator& ref, Mesh mesh, MappingNodes map, const Diffusivity& lambda,
                          const SatSpec& spec);

/// Which terms to assemble.
enum Parts : unsigned { kVolume = 1u, kInterface = 2u, kBoundary = 4u, kAll = 7u };

/// du/dt = A u + b, so the steady problem is A u = -b.
struct GlobalSystem {
  SparseMatrix A;
  VectorXd b;
  VectorXd H;
  std::vector<int> offset;
  bool symmetric = false; ///< H A is expected to be symmetric
};

GlobalSystem assemble_primal(const Discretization& d, const ProblemData& prob, unsigned parts = kAll);
GlobalSystem assemble_adjoint(const Discretization& d, const ProblemData& prob, unsigned parts = kAll);

/// Functional with the boundary corrections that make it adjoint consistent.
double discrete_functional(const VectorXd& u, const Discretization& d, const ProblemData& prob,
                           bool dirichlet_correction = true);

/// Interface conservation probe: |1^T (H D2 u - s_I(u)) - sum over boundary facets 1^T B Dg u|.
double conservation_probe(const Discretization& d, const VectorXd& u);

void write_matrix_market(const SparseMatrix& A, const std::string& path);
void write_vector(const VectorXd& v, const std::string& path);

} // namespace sbpsat

#endif
