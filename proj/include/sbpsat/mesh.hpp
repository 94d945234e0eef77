#ifndef SBPSAT_MESH_HPP
#define SBPSAT_MESH_HPP

#include <array>
#include <string>
#include <vector>

#include "sbpsat/refelem.hpp"

namespace sbpsat {

enum class BoundaryTag { Interior, Dirichlet, Neumann };

/// One mesh edge. Side 0 is the owner; side 1 is the neighbor (elem = -1 on the boundary).
struct Facet {
  std::array<int, 2> elem{-1, -1};
  std::array<int, 2> local{-1, -1};
  BoundaryTag tag = BoundaryTag::Interior;
  /// True when the two sides traverse the edge in opposite directions.
  bool reversed = false;
};

struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles; ///< counter-clockwise
  std::vector<Facet> facets;
  std::vector<std::array<int, 3>> element_facets; ///< facet id per local facet
  double xmin = 0.0, xmax = 20.0, ymin = -5.0, ymax = 5.0;

  int n_elements() const { return static_cast<int>(triangles.size()); }
  /// Nominal element size 20/sqrt(n_e).
  double nominal_h() const;
  const Facet& facet(int k, int f) const { return facets[element_facets[k][f]]; }
  BoundaryTag tag(int k, int f) const { return facet(k, f).tag; }
  /// Element across local facet f of k, or -1 on the boundary.
  int neighbor(int k, int f) const;
  /// Local index of the shared facet as seen from the neighbor.
  int neighbor_local(int k, int f) const;
  /// Straight-edge endpoints of local facet f (same orientation as the reference facet).
  std::array<Eigen::Vector2d, 2> facet_vertices(int k, int f) const;
};

/// Build connectivity for a triangle soup on the box; boundary edges on x = xmax are Neumann.
Mesh build_mesh(std::vector<Eigen::Vector2d> vertices, std::vector<std::array<int, 3>> triangles,
                double xmin = 0.0, double xmax = 20.0, double ymin = -5.0, double ymax = 5.0);

/// nx x ny rectangles on [0,20]x[-5,5], each split along the lower-left to upper-right diagonal.
Mesh generate_rect_mesh(int nx, int ny);

std::string export_mesh_json(const Mesh& mesh);
Mesh import_mesh_json(const std::string& text);

/// Reference Lagrange nodes for the mapping: vertices, then edge midpoints (v1v2, v2v3, v3v1).
Eigen::MatrixX2d lagrange_nodes(int p_map);

enum class CurveMode { Affine, Perturbed };

struct MappingNodes {
  int p_map = 1;
  std::vector<Eigen::MatrixX2d> nodes; ///< per element, n_s x 2 physical coordinates

  /// Evaluate the mapping of element k at reference points.
  Eigen::MatrixX2d map_points(int k, const Eigen::MatrixX2d& ref) const;
  /// Mapping Jacobian determinant of element k at reference points.
  VectorXd jacobian(int k, const Eigen::MatrixX2d& ref) const;
};

/// Two-stage coordinate perturbation used for the curved meshes.
Eigen::Vector2d perturb(const Eigen::Vector2d& x);

/// Place mapping nodes; perturbed mode curves every node. Throws GeometryError on a folded element.
MappingNodes curve_mesh(const Mesh& mesh, int p_map, CurveMode mode);

/// Per facet: perm[j] is the neighbor-side index of owner facet node j (empty for boundary facets).
using FacetPermutations = std::vector<std::vector<int>>;

FacetPermutations match_facet_nodes(const Mesh& mesh, const MappingNodes& map, const ReferenceOperator& ref);

} // namespace sbpsat

#endif
