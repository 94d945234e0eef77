#ifndef SBPSAT_MAPPING_HPP
#define SBPSAT_MAPPING_HPP

#include <array>
#include <functional>

#include "sbpsat/mesh.hpp"

namespace sbpsat {

/// Interpolation from mapping nodes to SBP volume and facet nodes, built once per (operator, p_map).
struct MappingBasis {
  int p_map = 2;
  MatrixXd P, P_xi, P_eta;                  ///< n_p x n_s
  std::array<MatrixXd, 3> Pf, Pf_xi, Pf_eta; ///< n_f x n_s per facet

  MappingBasis(const ReferenceOperator& ref, int p_map);
};

/// Coordinates and exact metrics of one mapped element.
struct ElementGeometry {
  Eigen::MatrixX2d x;                       ///< volume nodes
  std::array<Eigen::MatrixX2d, 3> xf;       ///< facet nodes
  VectorXd x_xi, x_eta, y_xi, y_eta, J;     ///< at volume nodes
  std::array<VectorXd, 3> fx_xi, fx_eta, fy_xi, fy_eta, Jf;
};

ElementGeometry map_element(const MappingBasis& basis, const Eigen::MatrixX2d& mapping_nodes);

/// Diffusivity tensor field lambda(x, y).
using Diffusivity = std::function<Eigen::Matrix2d(double, double)>;

struct PhysicalOperators {
  const ReferenceOperator* ref = nullptr;
  ElementGeometry geo;
  VectorXd H;
  std::array<VectorXd, 3> B, Nx, Ny;
  MatrixXd Ex, Ey, Sx, Sy, Dx, Dy;
  VectorXd Lxx, Lxy, Lyx, Lyy;
  double lambda_max = 0.0; ///< largest eigenvalue of lambda over the volume nodes
  std::array<MatrixXd, 3> Dg; ///< normal flux n.(lambda grad) at facet nodes
  MatrixXd D2, M;

  const MatrixXd& R(int f) const { return ref->R[f]; }
  int n_p() const { return ref->n_p; }
  int n_f() const { return ref->n_f; }
};

PhysicalOperators build_physical_operators(const ReferenceOperator& ref, ElementGeometry geo,
                                           const Diffusivity& lambda);

/// Relative residual of D2 = -H^-1 M + H^-1 sum R^T B Dg.
double d2_identity_residual(const PhysicalOperators& op);
/// Relative residual of D2 = H^-1 D2^T H - H^-1 sum Dg^T B R + H^-1 sum R^T B Dg.
double d2_adjoint_identity_residual(const PhysicalOperators& op);

} // namespace sbpsat

#endif
