#ifndef SBPSAT_SAT_HPP
#define SBPSAT_SAT_HPP

#include <array>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sbpsat/mapping.hpp"

namespace sbpsat {

/// BR1u and LDGu are the unmodified forms with extended Dirichlet couplings.
enum class SatVariant { BR1, BR1u, BR2, SIPG, LDG, LDGu, CDG, BO, NIPG, CNG };

std::string to_string(SatVariant v);
/// Accepts br1|br1u|br2|sipg|ldg|ldgu|cdg|bo|nipg|cng.
SatVariant parse_sat(const std::string& s);
const std::vector<SatVariant>& all_variants();
/// True when the coefficients satisfy the adjoint-consistency relations.
bool is_adjoint_consistent(SatVariant v);
/// True when the variant can couple second neighbors.
bool is_wide(SatVariant v);

struct SatSpec {
  SatVariant variant = SatVariant::BR2;
  double sigma1 = 1.0, sigma5 = 1.0, sigmaD = 1.0;
  double t4 = 0.0; ///< T4 = t4 * B on both sides
  Eigen::Vector2d g{std::numbers::pi / 2.0, std::numbers::e};
  double ldgu_boost = 1.5; ///< Dirichlet penalty factor of the unmodified LDG form
};

/// Coefficients of one interior facet as seen from element k, in k's facet node order.
struct SideCoefficients {
  MatrixXd T1k, T1v, T2k, T2v, T3k, T3v, T4k, T4v;
  MatrixXd Uk, Uv;        ///< Upsilon_ggk and Upsilon_ggv (the latter permuted to k's order)
  double alpha_k = 0, alpha_v = 0;
  int beta_k = 0, beta_v = 0;
};

struct ElementCoefficients {
  std::array<SideCoefficients, 3> side;           ///< interior facets only
  std::array<MatrixXd, 3> P;                      ///< k-order = P * neighbor-order (interior facets)
  std::array<MatrixXd, 3> TD;                     ///< Dirichlet facets only
  std::array<MatrixXd, 3> UD;                     ///< Upsilon_ggk on Dirichlet facets
  std::array<double, 3> alpha{};
  std::array<int, 3> beta{};
  std::array<std::array<MatrixXd, 3>, 3> T5, T6;  ///< [a][b], empty when the pair does not couple
  std::array<std::array<MatrixXd, 3>, 3> X;       ///< extended Dirichlet couplings, coefficient included
};

struct SatCoefficients {
  SatSpec spec;
  std::vector<ElementCoefficients> elem;
};

/// Upsilon_abk = sum_ij N_ia R_a H^-1 Lambda_ij R_b^T N_jb.
MatrixXd compute_upsilon(const PhysicalOperators& op, int a, int b);
/// Facet weights from straight facet lengths; zero on Neumann facets.
std::array<double, 3> compute_alpha(const Mesh& mesh, int k);
/// (beta_k, beta_v) from the owner's straight outward normal; (0,0) on boundary facets.
std::pair<int, int> compute_switch(const Eigen::Vector2d& normal, const Eigen::Vector2d& g, bool boundary);
/// Squared 2-norm of B^1/2 R H^-1/2 for facet f.
double extrapolation_norm2(const PhysicalOperators& op, int f);
/// Straight-facet outward unit normal of local facet f.
Eigen::Vector2d straight_normal(const Mesh& mesh, int k, int f);

SatCoefficients build_coefficients(const SatSpec& spec, const Mesh& mesh, const std::vector<PhysicalOperators>& ops,
                                   const FacetPermutations& perms);

/// Largest violation of the conservation relations.
double conservation_residual(const SatCoefficients& c, const Mesh& mesh, const std::vector<PhysicalOperators>& ops);
/// Largest violation of the adjoint-consistency relations (T2k + T2v = -B, T4k = T4v, T3k - T2k = B).
double adjoint_condition_residual(const SatCoefficients& c, const Mesh& mesh, const std::vector<PhysicalOperators>& ops);
/// Largest violation of the symmetry assumptions on the coefficient blocks.
double symmetry_residual(const SatCoefficients& c, const Mesh& mesh);

struct StabilityCertificate {
  struct Entry {
    int element, facet;
    std::string condition;
    double min_eig;
    double scale;
    bool pass;
  };
  double zeta = 2.0;
  std::vector<Entry> entries;
  bool pass() const;
  /// Smallest min_eig / scale over all entries.
  double worst() const;
};

/// Smallest eigenvalue of the symmetric part.
double min_sym_eig(const MatrixXd& A);

StabilityCertificate certify_stability(const SatCoefficients& c, const Mesh& mesh,
                                       const std::vector<PhysicalOperators>& ops);

} // namespace sbpsat

#endif
