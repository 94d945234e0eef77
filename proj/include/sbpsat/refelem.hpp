#ifndef SBPSAT_REFELEM_HPP
#define SBPSAT_REFELEM_HPP

#include <array>
#include <string>
#include <vector>

#include "sbpsat/common.hpp"

namespace sbpsat {

/// Reference triangle with vertices (-1,-1), (1,-1), (-1,1).
/// Facet f1 runs v2->v3, f2 runs v3->v1, f3 runs v1->v2 (stored 0-based).
namespace reference {
Eigen::Vector2d vertex(int i);
/// Point on facet f at parameter s in [-1,1].
Eigen::Vector2d facet_point(int f, double s);
double facet_length(int f);
/// Outward unit normal of facet f.
Eigen::Vector2d facet_normal(int f);
inline constexpr double kArea = 2.0;
} // namespace reference

/// One collocation entry: facet node (facet, j) sits on volume node `volume`.
struct Collocation {
  int facet;
  int j;
  int volume;
};

/// Volume and facet quadrature for one operator family and degree.
struct QuadratureData {
  Family family = Family::Omega;
  int p = 1;
  Eigen::MatrixX2d nodes;    ///< n_p x 2 reference coordinates
  VectorXd weights;          ///< volume weights, one per node
  VectorXd facet_s;          ///< 1D Legendre-Gauss nodes on [-1,1]
  VectorXd facet_w;          ///< 1D Legendre-Gauss weights
  std::vector<Collocation> collocation; ///< diag-E only, 0-based

  int n_p() const { return static_cast<int>(nodes.rows()); }
  int n_f() const { return static_cast<int>(facet_s.size()); }
  /// Reference coordinates of facet quadrature nodes on facet f.
  Eigen::MatrixX2d facet_nodes(int f) const;
};

/// Parse a JSON operator file and validate it; throws DataError on failure.
QuadratureData load_quadrature(const std::string& path);
/// Load from the data directory (SBPSAT_DATA_DIR or the build default).
QuadratureData load_quadrature(Family family, int p);
std::string data_directory();

/// Orthonormal Proriol basis and its derivatives sampled at points.
struct BasisEvaluation {
  MatrixXd V, V_xi, V_eta;
};

BasisEvaluation evaluate_basis(const Eigen::MatrixX2d& points, int degree);
inline int basis_size(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Extrapolation matrices R_gamma (n_f x n_p) for the three facets.
std::array<MatrixXd, 3> build_extrapolation(const QuadratureData& quad);

struct ReferenceOperator {
  QuadratureData quad;
  Family family = Family::Omega;
  int p = 1, n_p = 0, n_f = 0;
  VectorXd H;                      ///< diagonal norm
  MatrixXd Q_xi, Q_eta, E_xi, E_eta, S_xi, S_eta, D_xi, D_eta;
  std::array<MatrixXd, 3> R;       ///< extrapolation per facet
  std::array<VectorXd, 3> B;       ///< facet quadrature weights (scaled)
  std::array<Eigen::Vector2d, 3> normal;
};

ReferenceOperator build_sbp_operator(const QuadratureData& quad);

struct ValidationReport {
  struct Check {
    std::string name;
    bool pass;
    double residual;
  };
  std::vector<Check> checks;
  bool all_pass() const;
  void add(std::string name, double residual, double tol);
};

ValidationReport validate_quadrature(const QuadratureData& quad);
/// Full operator report including the quadrature checks.
ValidationReport validate_operator(const ReferenceOperator& op);

} // namespace sbpsat

#endif
