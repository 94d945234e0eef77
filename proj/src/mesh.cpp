#include "sbpsat/mesh.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include <json.hpp>

namespace sbpsat {

namespace {

constexpr int kFacetVerts[3][2] = {{1, 2}, {2, 0}, {0, 1}};

// sample points used to check the mapping Jacobian away from any specific node set
Eigen::MatrixX2d jacobian_samples() {
  constexpr int n = 8;
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j)
      pts.emplace_back(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
  Eigen::MatrixX2d out(pts.size(), 2);
  for (size_t r = 0; r < pts.size(); ++r) out.row(r) = pts[r].transpose();
  return out;
}

} // namespace

double Mesh::nominal_h() const { return 20.0 / std::sqrt(static_cast<double>(n_elements())); }

int Mesh::neighbor(int k, int f) const {
  const Facet& fc = facet(k, f);
  if (fc.tag != BoundaryTag::Interior) return -1;
  return fc.elem[0] == k && fc.local[0] == f ? fc.elem[1] : fc.elem[0];
}

int Mesh::neighbor_local(int k, int f) const {
  const Facet& fc = facet(k, f);
  if (fc.tag != BoundaryTag::Interior) return -1;
  return fc.elem[0] == k && fc.local[0] == f ? fc.local[1] : fc.local[0];
}

std::array<Eigen::Vector2d, 2> Mesh::facet_vertices(int k, int f) const {
  return {vertices[triangles[k][kFacetVerts[f][0]]], vertices[triangles[k][kFacetVerts[f][1]]]};
}

Mesh build_mesh(std::vector<Eigen::Vector2d> vertices, std::vector<std::array<int, 3>> triangles, double xmin,
                double xmax, double ymin, double ymax) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);
  m.xmin = xmin;
  m.xmax = xmax;
  m.ymin = ymin;
  m.ymax = ymax;
  std::map<std::pair<int, int>, int> edge_ids;
  m.element_facets.resize(m.triangles.size());
  for (int k = 0; k < m.n_elements(); ++k) {
    const auto& t = m.triangles[k];
    Eigen::Vector2d a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    double area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    if (!(area2 > 0)) throw GeometryError("triangle " + std::to_string(k) + " is not counter-clockwise");
    for (int f = 0; f < 3; ++f) {
      int va = t[kFacetVerts[f][0]], vb = t[kFacetVerts[f][1]];
      auto key = std::minmax(va, vb);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        Facet fc;
        fc.elem[0] = k;
        fc.local[0] = f;
        edge_ids.emplace(key, static_cast<int>(m.facets.size()));
        m.element_facets[k][f] = static_cast<int>(m.facets.size());
        m.facets.push_back(fc);
      } else {
        Facet& fc = m.facets[it->second];
        if (fc.elem[1] >= 0) throw GeometryError("edge shared by more than two triangles");
        fc.elem[1] = k;
        fc.local[1] = f;
        fc.reversed = m.triangles[fc.elem[0]][kFacetVerts[fc.local[0]][0]] == vb;
        m.element_facets[k][f] = it->second;
      }
    }
  }
  const double tol = 1e-12 * std::max(xmax - xmin, ymax - ymin);
  for (auto& fc : m.facets) {
    if (fc.elem[1] >= 0) continue;
    auto v = m.facet_vertices(fc.elem[0], fc.local[0]);
    bool on_right = std::abs(v[0].x() - xmax) < tol && std::abs(v[1].x() - xmax) < tol;
    fc.tag = on_right ? BoundaryTag::Neumann : BoundaryTag::Dirichlet;
  }
  return m;
}

Mesh generate_rect_mesh(int nx, int ny) {
  if (nx < 1 || ny < 1) throw DomainError("mesh needs nx, ny >= 1");
  std::vector<Eigen::Vector2d> verts;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.emplace_back(20.0 * i / nx, -5.0 + 10.0 * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
      tris.push_back({ll, lr, ur});
      tris.push_back({ll, ur, ul});
    }
  return build_mesh(std::move(verts), std::move(tris));
}

std::string export_mesh_json(const Mesh& m) {
  nlohmann::json j;
  j["domain"] = {m.xmin, m.xmax, m.ymin, m.ymax};
  for (const auto& v : m.vertices) j["vertices"].push_back({v.x(), v.y()});
  j["triangles"] = m.triangles;
  for (const auto& f : m.facets) {
    const char* tag = f.tag == BoundaryTag::Interior ? "I" : f.tag == BoundaryTag::Dirichlet ? "D" : "N";
    j["facet_table"].push_back({{"owner", {f.elem[0], f.local[0]}},
                                {"neighbor", {f.elem[1], f.local[1]}},
                                {"reversed", f.reversed}});
    j["tags"].push_back(tag);
  }
  return j.dump(1);
}

Mesh import_mesh_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    std::vector<Eigen::Vector2d> verts;
    for (const auto& v : j.at("vertices")) verts.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    auto tris = j.at("triangles").get<std::vector<std::array<int, 3>>>();
    auto d = j.at("domain").get<std::array<double, 4>>();
    return build_mesh(std::move(verts), std::move(tris), d[0], d[1], d[2], d[3]);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mesh json: ") + e.what());
  }
}

Eigen::MatrixX2d lagrange_nodes(int p_map) {
  if (p_map != 1 && p_map != 2) throw DomainError("mapping degree must be 1 or 2");
  Eigen::MatrixX2d n(p_map == 1 ? 3 : 6, 2);
  for (int i = 0; i < 3; ++i) n.row(i) = reference::vertex(i).transpose();
  if (p_map == 2) {
    n.row(3) = 0.5 * (n.row(0) + n.row(1));
    n.row(4) = 0.5 * (n.row(1) + n.row(2));
    n.row(5) = 0.5 * (n.row(2) + n.row(0));
  }
  return n;
}

namespace {

// Maps reference points to Lagrange-basis weights through the orthonormal basis.
struct LagrangeEval {
  MatrixXd Vinv;
  int p_map;
  explicit LagrangeEval(int p) : p_map(p) {
    auto V = evaluate_basis(lagrange_nodes(p), p).V;
    Eigen::FullPivLU<MatrixXd> lu(V);
    if (lu.rank() < V.cols()) throw DataError("singular mapping Vandermonde");
    Vinv = lu.inverse();
  }
};

const LagrangeEval& lagrange_eval(int p_map) {
  static const LagrangeEval e1(1), e2(2);
  return p_map == 1 ? e1 : e2;
}

} // namespace

Eigen::MatrixX2d MappingNodes::map_points(int k, const Eigen::MatrixX2d& ref) const {
  const auto& le = lagrange_eval(p_map);
  return evaluate_basis(ref, p_map).V * le.Vinv * nodes[k];
}

VectorXd MappingNodes::jacobian(int k, const Eigen::MatrixX2d& ref) const {
  const auto& le = lagrange_eval(p_map);
  auto b = evaluate_basis(ref, p_map);
  MatrixXd dxi = b.V_xi * le.Vinv * nodes[k], deta = b.V_eta * le.Vinv * nodes[k];
  return dxi.col(0).cwiseProduct(deta.col(1)) - deta.col(0).cwiseProduct(dxi.col(1));
}

Eigen::Vector2d perturb(const Eigen::Vector2d& x) {
  using std::numbers::pi;
  const double xt = x.x() + 1.25 * std::cos(pi * x.x() / 20.0 - pi / 2.0) * std::cos(3.0 * pi * x.y() / 10.0);
  const double yt = x.y() + 0.625 * std::sin(pi * xt / 5.0 - 2.0 * pi) * std::cos(pi * x.y() / 10.0);
  return {xt, yt};
}

MappingNodes curve_mesh(const Mesh& mesh, int p_map, CurveMode mode) {
  MappingNodes out;
  out.p_map = p_map;
  const auto ref = lagrange_nodes(p_map);
  out.nodes.reserve(mesh.n_elements());
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& t = mesh.triangles[k];
    Eigen::Vector2d a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    Eigen::MatrixX2d n(ref.rows(), 2);
    for (int i = 0; i < ref.rows(); ++i) {
      // barycentric image of the reference node
      double l2 = 0.5 * (1.0 + ref(i, 0)), l3 = 0.5 * (1.0 + ref(i, 1)), l1 = 1.0 - l2 - l3;
      Eigen::Vector2d x = l1 * a + l2 * b + l3 * c;
      if (mode == CurveMode::Perturbed) x = perturb(x);
      n.row(i) = x.transpose();
    }
    out.nodes.push_back(std::move(n));
  }
  static const Eigen::MatrixX2d samples = jacobian_samples();
  for (int k = 0; k < mesh.n_elements(); ++k)
    if (!(out.jacobian(k, samples).minCoeff() > 0))
      throw GeometryError("nonpositive mapping Jacobian in element " + std::to_string(k));
  return out;
}

FacetPermutations match_facet_nodes(const Mesh& mesh, const MappingNodes& map, const ReferenceOperator& ref) {
  FacetPermutations perms(mesh.facets.size());
  std::array<Eigen::MatrixX2d, 3> fnodes;
  for (int f = 0; f < 3; ++f) fnodes[f] = ref.quad.facet_nodes(f);
  double scale = std::max(mesh.xmax - mesh.xmin, mesh.ymax - mesh.ymin);
  for (size_t id = 0; id < mesh.facets.size(); ++id) {
    const Facet& fc = mesh.facets[id];
    if (fc.elem[1] < 0) continue;
    auto xo = map.map_points(fc.elem[0], fnodes[fc.local[0]]);
    auto xn = map.map_points(fc.elem[1], fnodes[fc.local[1]]);
    std::vector<int> perm(ref.n_f, -1);
    for (int j = 0; j < ref.n_f; ++j) {
      int best = -1;
      double dist = 1e300;
      for (int i = 0; i < ref.n_f; ++i) {
        double d = (xo.row(j) - xn.row(i)).norm();
        if (d < dist) {
          dist = d;
          best = i;
        }
      }
      if (dist > 1e-10 * scale) throw GeometryError("facet nodes do not match across facet " + std::to_string(id));
      perm[j] = best;
    }
    perms[id] = std::move(perm);
  }
  return perms;
}

} // namespace sbpsat
