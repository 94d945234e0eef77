#include "sbpsat/refelem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jacobi.hpp"

#ifndef SBPSAT_DEFAULT_DATA_DIR
#define SBPSAT_DEFAULT_DATA_DIR "data"
#endif

namespace sbpsat {

std::string to_string(Family f) {
  switch (f) {
  case Family::Omega: return "omega";
  case Family::Gamma: return "gamma";
  case Family::DiagE: return "diage";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "omega") return Family::Omega;
  if (t == "gamma") return Family::Gamma;
  if (t == "diage" || t == "diag-e") return Family::DiagE;
  throw DomainError("unknown operator family '" + s + "' (expected omega|gamma|diage)");
}

namespace reference {

Eigen::Vector2d vertex(int i) {
  static const double v[3][2] = {{-1, -1}, {1, -1}, {-1, 1}};
  return {v[i][0], v[i][1]};
}

namespace {
constexpr int kFacetVerts[3][2] = {{1, 2}, {2, 0}, {0, 1}};
}

Eigen::Vector2d facet_point(int f, double s) {
  Eigen::Vector2d a = vertex(kFacetVerts[f][0]), b = vertex(kFacetVerts[f][1]);
  return a + 0.5 * (1.0 + s) * (b - a);
}

double facet_length(int f) {
  return (vertex(kFacetVerts[f][1]) - vertex(kFacetVerts[f][0])).norm();
}

Eigen::Vector2d facet_normal(int f) {
  Eigen::Vector2d t = vertex(kFacetVerts[f][1]) - vertex(kFacetVerts[f][0]);
  return Eigen::Vector2d(t.y(), -t.x()).normalized();
}

} // namespace reference

Eigen::MatrixX2d QuadratureData::facet_nodes(int f) const {
  Eigen::MatrixX2d out(n_f(), 2);
  for (int j = 0; j < n_f(); ++j) out.row(j) = reference::facet_point(f, facet_s(j)).transpose();
  return out;
}

namespace {

// Exact integral of xi^a eta^b over the reference triangle.
double monomial_integral(int a, int b) {
  // substitute xi = 2r - 1, eta = 2s - 1 on the unit simplex
  double total = 0.0;
  for (int i = 0; i <= a; ++i)
    for (int j = 0; j <= b; ++j) {
      double c = std::tgamma(a + 1.0) / (std::tgamma(i + 1.0) * std::tgamma(a - i + 1.0)) *
                 std::tgamma(b + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(b - j + 1.0)) *
                 std::pow(2.0, i + j) * (((a - i + b - j) % 2) ? -1.0 : 1.0);
      total += c * std::tgamma(i + 1.0) * std::tgamma(j + 1.0) / std::tgamma(i + j + 3.0);
    }
  return 4.0 * total;
}

double volume_exactness(const QuadratureData& q, int degree) {
  double worst = 0.0;
  for (int a = 0; a <= degree; ++a)
    for (int b = 0; a + b <= degree; ++b) {
      double sum = 0.0;
      for (int i = 0; i < q.n_p(); ++i)
        sum += q.weights(i) * std::pow(q.nodes(i, 0), a) * std::pow(q.nodes(i, 1), b);
      double exact = monomial_integral(a, b);
      worst = std::max(worst, std::abs(sum - exact) / std::max(1.0, std::abs(exact)));
    }
  return worst;
}

double facet_exactness(const QuadratureData& q, int degree) {
  double worst = 0.0;
  for (int k = 0; k <= degree; ++k) {
    double sum = 0.0;
    for (int j = 0; j < q.n_f(); ++j) sum += q.facet_w(j) * std::pow(q.facet_s(j), k);
    double exact = (k % 2) ? 0.0 : 2.0 / (k + 1);
    worst = std::max(worst, std::abs(sum - exact) / std::max(1.0, std::abs(exact)));
  }
  return worst;
}

double collocation_mismatch(const QuadratureData& q) {
  double worst = 0.0;
  for (const auto& c : q.collocation) {
    Eigen::Vector2d x = reference::facet_point(c.facet, q.facet_s(c.j));
    worst = std::max(worst, (q.nodes.row(c.volume).transpose() - x).norm());
  }
  return worst;
}

} // namespace

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void ValidationReport::add(std::string name, double residual, double tol) {
  checks.push_back({std::move(name), residual <= tol, residual});
}

ValidationReport validate_quadrature(const QuadratureData& q) {
  ValidationReport r;
  r.add("volume weights positive", q.weights.size() && q.weights.minCoeff() > 0 ? 0.0 : 1.0, 0.0);
  r.add("facet weights positive", q.facet_w.size() && q.facet_w.minCoeff() > 0 ? 0.0 : 1.0, 0.0);
  r.add("volume exactness 2p-1", volume_exactness(q, 2 * q.p - 1), 1e-12);
  r.add("facet exactness 2p+1", facet_exactness(q, 2 * q.p + 1), 1e-12);
  if (q.family == Family::DiagE) {
    bool complete = static_cast<int>(q.collocation.size()) == 3 * q.n_f();
    r.add("collocation map complete", complete ? 0.0 : 1.0, 0.0);
    r.add("collocated coordinates", collocation_mismatch(q), 1e-12);
  }
  return r;
}

QuadratureData load_quadrature(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open operator data file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  QuadratureData q;
  try {
    q.family = parse_family(j.at("family").get<std::string>());
    q.p = j.at("p").get<int>();
    if (q.p < 1 || q.p > kMaxDegree) throw DomainError("degree out of range in " + path);
    auto nodes = j.at("volume_nodes").get<std::vector<std::array<double, 2>>>();
    auto w = j.at("volume_weights").get<std::vector<double>>();
    if (nodes.size() != w.size()) throw DataError(path + ": node/weight count mismatch");
    q.nodes.resize(nodes.size(), 2);
    q.weights.resize(w.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      q.nodes(i, 0) = nodes[i][0];
      q.nodes(i, 1) = nodes[i][1];
      q.weights(i) = w[i];
    }
    auto s = j.at("facet_quadrature").at("nodes_1d").get<std::vector<double>>();
    auto b = j.at("facet_quadrature").at("weights_1d").get<std::vector<double>>();
    if (s.size() != b.size() || static_cast<int>(s.size()) != q.p + 1)
      throw DataError(path + ": facet rule must have p+1 nodes");
    q.facet_s = Eigen::Map<VectorXd>(s.data(), s.size());
    q.facet_w = Eigen::Map<VectorXd>(b.data(), b.size());
    if (j.contains("diag_e_collocation")) {
      for (const auto& e : j["diag_e_collocation"]) {
        Collocation c{e.at(0).get<int>() - 1, e.at(1).get<int>() - 1, e.at(2).get<int>() - 1};
        if (c.facet < 0 || c.facet > 2 || c.j < 0 || c.j >= q.n_f() || c.volume < 0 || c.volume >= q.n_p())
          throw DataError(path + ": collocation index out of range");
        q.collocation.push_back(c);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  auto report = validate_quadrature(q);
  for (const auto& c : report.checks)
    if (!c.pass) {
      std::ostringstream msg;
      msg << path << ": check '" << c.name << "' failed (residual " << c.residual << ")";
      throw DataError(msg.str());
    }
  return q;
}

std::string data_directory() {
  if (const char* env = std::getenv("SBPSAT_DATA_DIR")) return env;
  return SBPSAT_DEFAULT_DATA_DIR;
}

QuadratureData load_quadrature(Family family, int p) {
  if (p < 1 || p > kMaxDegree)
    throw DomainError("operator degree must be in 1.." + std::to_string(kMaxDegree));
  auto q = load_quadrature(data_directory() + "/" + to_string(family) + "_p" + std::to_string(p) + ".json");
  if (q.family != family || q.p != p) throw DataError("operator data file content does not match its name");
  return q;
}

BasisEvaluation evaluate_basis(const Eigen::MatrixX2d& points, int degree) {
  if (degree < 0) throw DomainError("basis degree must be nonnegative");
  const double tol = 1e-12;
  const int n = static_cast<int>(points.rows());
  const int m = basis_size(degree);
  BasisEvaluation out{MatrixXd(n, m), MatrixXd(n, m), MatrixXd(n, m)};
  for (int r = 0; r < n; ++r) {
    const double xi = points(r, 0), eta = points(r, 1);
    if (xi < -1 - tol || eta < -1 - tol || xi + eta > tol)
      throw DomainError("point outside the reference triangle");
    // collapsed coordinates; a is arbitrary at the top vertex, the limit uses a = -1
    const double b = eta;
    const double a = (std::abs(1.0 - eta) > 1e-14) ? 2.0 * (1.0 + xi) / (1.0 - eta) - 1.0 : -1.0;
    int col = 0;
    for (int i = 0; i <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j, ++col) {
        const double fa = detail::jacobi(a, 0, 0, i), dfa = detail::jacobi_grad(a, 0, 0, i);
        const double gb = detail::jacobi(b, 2 * i + 1, 0, j), dgb = detail::jacobi_grad(b, 2 * i + 1, 0, j);
        const double hb = 0.5 * (1.0 - b);
        const double scale = std::pow(2.0, i + 0.5);
        out.V(r, col) = scale * fa * gb * std::pow(hb, i);
        // derivatives written so that (1-b)^(i-1) never appears with a negative power
        double dr = dfa * gb, ds = dfa * gb * 0.5 * (1.0 + a);
        if (i > 0) {
          dr *= std::pow(hb, i - 1);
          ds *= std::pow(hb, i - 1);
        }
        double tmp = dgb * std::pow(hb, i);
        if (i > 0) tmp -= 0.5 * i * gb * std::pow(hb, i - 1);
        ds += fa * tmp;
        out.V_xi(r, col) = scale * dr;
        out.V_eta(r, col) = scale * ds;
      }
  }
  return out;
}

std::array<MatrixXd, 3> build_extrapolation(const QuadratureData& q) {
  std::array<MatrixXd, 3> R;
  const int np = q.n_p(), nf = q.n_f();
  switch (q.family) {
  case Family::Omega: {
    auto V = evaluate_basis(q.nodes, q.p).V;
    Eigen::FullPivLU<MatrixXd> lu(V);
    if (lu.rank() < V.cols()) throw DataError("Vandermonde matrix is rank deficient");
    MatrixXd VtV = V.transpose() * V;
    MatrixXd proj = VtV.ldlt().solve(V.transpose());
    for (int f = 0; f < 3; ++f) R[f] = evaluate_basis(q.facet_nodes(f), q.p).V * proj;
    break;
  }
  case Family::Gamma: {
    for (int f = 0; f < 3; ++f) {
      const Eigen::Vector2d a = reference::facet_point(f, -1.0), b = reference::facet_point(f, 1.0);
      const Eigen::Vector2d t = b - a;
      std::vector<int> idx;
      std::vector<double> s;
      for (int i = 0; i < np; ++i) {
        Eigen::Vector2d d = q.nodes.row(i).transpose() - a;
        double cross = std::abs(d.x() * t.y() - d.y() * t.x()) / t.norm();
        if (cross < 1e-10) {
          idx.push_back(i);
          s.push_back(2.0 * d.dot(t) / t.squaredNorm() - 1.0);
        }
      }
      if (static_cast<int>(idx.size()) != q.p + 1)
        throw DataError("family mismatch: expected p+1 volume nodes on each facet");
      R[f] = MatrixXd::Zero(nf, np);
      for (int r = 0; r < nf; ++r)
        for (size_t c = 0; c < idx.size(); ++c) {
          double l = 1.0;
          for (size_t k = 0; k < idx.size(); ++k)
            if (k != c) l *= (q.facet_s(r) - s[k]) / (s[c] - s[k]);
          R[f](r, idx[c]) = l;
        }
    }
    break;
  }
  case Family::DiagE: {
    if (static_cast<int>(q.collocation.size()) != 3 * nf) throw DataError("diag-E data lacks a collocation map");
    for (int f = 0; f < 3; ++f) R[f] = MatrixXd::Zero(nf, np);
    for (const auto& c : q.collocation) R[c.facet](c.j, c.volume) = 1.0;
    break;
  }
  }
  return R;
}

namespace {

// Minimum-norm skew S with S V = rhs.
MatrixXd solve_skew(const MatrixXd& V, const MatrixXd& rhs, double norm_h) {
  const int np = static_cast<int>(V.rows()), nc = static_cast<int>(V.cols());
  const int nu = np * (np - 1) / 2;
  MatrixXd M = MatrixXd::Zero(np * nc, nu);
  int u = 0;
  for (int i = 0; i < np; ++i)
    for (int j = i + 1; j < np; ++j, ++u)
      for (int c = 0; c < nc; ++c) {
        M(i + np * c, u) += V(j, c);
        M(j + np * c, u) -= V(i, c);
      }
  VectorXd b = Eigen::Map<const VectorXd>(rhs.data(), rhs.size());
  VectorXd s = M.completeOrthogonalDecomposition().solve(b);
  double res = (M * s - b).norm();
  if (res > 1e-8 * norm_h) {
    std::ostringstream msg;
    msg << "accuracy system residual " << res << " exceeds tolerance; operator data cannot support degree p";
    throw DataError(msg.str());
  }
  MatrixXd S = MatrixXd::Zero(np, np);
  u = 0;
  for (int i = 0; i < np; ++i)
    for (int j = i + 1; j < np; ++j, ++u) {
      S(i, j) = s(u);
      S(j, i) = -s(u);
    }
  return S;
}

} // namespace

ReferenceOperator build_sbp_operator(const QuadratureData& quad) {
  ReferenceOperator op;
  op.quad = quad;
  op.family = quad.family;
  op.p = quad.p;
  op.n_p = quad.n_p();
  op.n_f = quad.n_f();
  op.H = quad.weights;
  op.R = build_extrapolation(quad);
  op.E_xi = MatrixXd::Zero(op.n_p, op.n_p);
  op.E_eta = MatrixXd::Zero(op.n_p, op.n_p);
  for (int f = 0; f < 3; ++f) {
    op.normal[f] = reference::facet_normal(f);
    op.B[f] = quad.facet_w * (0.5 * reference::facet_length(f));
    op.E_xi += op.R[f].transpose() * (op.B[f] * op.normal[f].x()).asDiagonal() * op.R[f];
    op.E_eta += op.R[f].transpose() * (op.B[f] * op.normal[f].y()).asDiagonal() * op.R[f];
  }
  auto basis = evaluate_basis(quad.nodes, quad.p);
  const double norm_h = op.H.maxCoeff();
  op.S_xi = solve_skew(basis.V, op.H.asDiagonal() * basis.V_xi - 0.5 * op.E_xi * basis.V, norm_h);
  op.S_eta = solve_skew(basis.V, op.H.asDiagonal() * basis.V_eta - 0.5 * op.E_eta * basis.V, norm_h);
  op.Q_xi = op.S_xi + 0.5 * op.E_xi;
  op.Q_eta = op.S_eta + 0.5 * op.E_eta;
  op.D_xi = op.H.cwiseInverse().asDiagonal() * op.Q_xi;
  op.D_eta = op.H.cwiseInverse().asDiagonal() * op.Q_eta;
  return op;
}

ValidationReport validate_operator(const ReferenceOperator& op) {
  ValidationReport r = validate_quadrature(op.quad);
  r.add("SBP property xi", (op.Q_xi + op.Q_xi.transpose() - op.E_xi).cwiseAbs().maxCoeff(), 1e-12);
  r.add("SBP property eta", (op.Q_eta + op.Q_eta.transpose() - op.E_eta).cwiseAbs().maxCoeff(), 1e-12);
  r.add("skew xi", (op.S_xi + op.S_xi.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  r.add("skew eta", (op.S_eta + op.S_eta.transpose()).cwiseAbs().maxCoeff(), 1e-12);

  double d_err = 0.0, r_err = 0.0, ones_err = 0.0;
  const auto& x = op.quad.nodes;
  for (int a = 0; a <= op.p; ++a)
    for (int b = 0; a + b <= op.p; ++b) {
      VectorXd u(op.n_p), ux(op.n_p), uy(op.n_p);
      for (int i = 0; i < op.n_p; ++i) {
        const double xi = x(i, 0), eta = x(i, 1);
        u(i) = std::pow(xi, a) * std::pow(eta, b);
        ux(i) = a ? a * std::pow(xi, a - 1) * std::pow(eta, b) : 0.0;
        uy(i) = b ? b * std::pow(xi, a) * std::pow(eta, b - 1) : 0.0;
      }
      d_err = std::max(d_err, (op.D_xi * u - ux).cwiseAbs().maxCoeff());
      d_err = std::max(d_err, (op.D_eta * u - uy).cwiseAbs().maxCoeff());
      for (int f = 0; f < 3; ++f) {
        auto xf = op.quad.facet_nodes(f);
        VectorXd uf(op.n_f);
        for (int j = 0; j < op.n_f; ++j) uf(j) = std::pow(xf(j, 0), a) * std::pow(xf(j, 1), b);
        r_err = std::max(r_err, (op.R[f] * u - uf).cwiseAbs().maxCoeff());
      }
    }
  for (int f = 0; f < 3; ++f)
    ones_err = std::max(ones_err, (op.R[f] * VectorXd::Ones(op.n_p) - VectorXd::Ones(op.n_f)).cwiseAbs().maxCoeff());
  r.add("D exact on degree p", d_err, 1e-10);
  r.add("R exact on degree p", r_err, 1e-10);
  r.add("R preserves constants", ones_err, 1e-12);

  MatrixXd ex = MatrixXd::Zero(op.n_p, op.n_p), ey = ex;
  for (int f = 0; f < 3; ++f) {
    ex += op.R[f].transpose() * (op.B[f] * op.normal[f].x()).asDiagonal() * op.R[f];
    ey += op.R[f].transpose() * (op.B[f] * op.normal[f].y()).asDiagonal() * op.R[f];
  }
  r.add("E decomposition", std::max((ex - op.E_xi).cwiseAbs().maxCoeff(), (ey - op.E_eta).cwiseAbs().maxCoeff()),
        1e-12);

  if (op.family == Family::DiagE) {
    double sel = 0.0, cross = 0.0;
    for (int f = 0; f < 3; ++f) {
      for (int j = 0; j < op.n_f; ++j) {
        int nnz = 0;
        for (int i = 0; i < op.n_p; ++i) {
          double v = op.R[f](j, i);
          if (v != 0.0) ++nnz;
          if (v != 0.0 && v != 1.0) sel = 1.0;
        }
        if (nnz != 1) sel = 1.0;
      }
      for (int g = 0; g < 3; ++g)
        if (g != f) {
          MatrixXd c = op.R[f] * op.H.cwiseInverse().asDiagonal() * op.R[g].transpose();
          cross = std::max(cross, c.cwiseAbs().maxCoeff());
        }
    }
    r.add("diag-E selection rows", sel, 0.0);
    r.add("diag-E cross-facet coupling", cross, 0.0);
  }
  return r;
}

} // namespace sbpsat
