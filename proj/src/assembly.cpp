#include "sbpsat/assembly.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>

namespace sbpsat {

ProblemData manufactured_problem() {
  using std::numbers::pi;
  constexpr double k = pi / 8.0;
  ProblemData p;
  p.lambda = [](double x, double y) {
    Eigen::Matrix2d L;
    L << 4.0 * x + 1.0, y, y, y * y + 1.0;
    return L;
  };
  p.U = [](double x, double y) { return std::sin(k * x) * std::sin(k * y); };
  p.U_x = [](double x, double y) { return k * std::cos(k * x) * std::sin(k * y); };
  p.U_y = [](double x, double y) { return k * std::sin(k * x) * std::cos(k * y); };
  // F = -div(lambda grad U) = -(5 U_x + 2y U_y + (4x+1) U_xx + 2y U_xy + (y^2+1) U_yy)
  p.F = [](double x, double y) {
    const double s = std::sin(k * x) * std::sin(k * y);
    const double ux = k * std::cos(k * x) * std::sin(k * y), uy = k * std::sin(k * x) * std::cos(k * y);
    const double uxy = k * k * std::cos(k * x) * std::cos(k * y);
    return -(5.0 * ux + 2.0 * y * uy - (4.0 * x + 1.0) * k * k * s + 2.0 * y * uxy - (y * y + 1.0) * k * k * s);
  };
  p.psi = [](double x, double y) { return x + y; };
  p.psi_x = [](double, double) { return 1.0; };
  p.psi_y = [](double, double) { return 1.0; };
  // G = -d/dx(4x + 1 + y) - d/dy(y + y^2 + 1)
  p.G = [](double, double y) { return -5.0 - 2.0 * y; };
  p.exact_functional = -27.0912595377575;
  return p;
}

VectorXd Discretization::H() const {
  VectorXd h(ndof);
  for (size_t k = 0; k < ops.size(); ++k) h.segment(offset[k], ops[k].n_p()) = ops[k].H;
  return h;
}

VectorXd Discretization::sample(const ScalarField& f) const {
  VectorXd v(ndof);
  for (size_t k = 0; k < ops.size(); ++k)
    for (int i = 0; i < ops[k].n_p(); ++i) v(offset[k] + i) = f(ops[k].geo.x(i, 0), ops[k].geo.x(i, 1));
  return v;
}

double Discretization::h_norm(const VectorXd& e) const { return std::sqrt(e.dot(H().cwiseProduct(e))); }

Discretization discretize(const ReferenceOperator& ref, Mesh mesh, MappingNodes map, const Diffusivity& lambda,
                          const SatSpec& spec) {
  Discretization d;
  d.ref = &ref;
  d.mesh = std::move(mesh);
  d.map = std::move(map);
  d.perms = match_facet_nodes(d.mesh, d.map, ref);
  MappingBasis mb(ref, d.map.p_map);
  d.ops.reserve(d.mesh.n_elements());
  d.offset.resize(d.mesh.n_elements());
  for (int k = 0; k < d.mesh.n_elements(); ++k) {
    d.ops.push_back(build_physical_operators(ref, map_element(mb, d.map.nodes[k]), lambda));
    d.offset[k] = d.ndof;
    d.ndof += ref.n_p;
  }
  d.sat = build_coefficients(spec, d.mesh, d.ops, d.perms);
  return d;
}

namespace {

// Dense element-pair blocks of the SAT operator s(u), plus the data part s(0, data).
struct Accumulator {
  const Discretization& d;
  std::map<std::pair<int, int>, MatrixXd> blocks;
  VectorXd sdata;

  explicit Accumulator(const Discretization& disc) : d(disc), sdata(VectorXd::Zero(disc.ndof)) {}

  void add(int r, int c, const MatrixXd& m) {
    if (m.size() == 0) return;
    auto it = blocks.find({r, c});
    if (it == blocks.end())
      blocks.emplace(std::make_pair(r, c), m);
    else
      it->second += m;
  }
  void add_data(int r, const VectorXd& v) { sdata.segment(d.offset[r], v.size()) += v; }
};

struct FacetData {
  VectorXd uD, w; ///< Dirichlet values and Neumann normal flux at facet nodes
};

FacetData facet_data(const PhysicalOperators& op, int f, const ScalarField& u, const ScalarField& ux,
                     const ScalarField& uy, const Diffusivity& lambda) {
  const auto& xf = op.geo.xf[f];
  FacetData fd{VectorXd(xf.rows()), VectorXd(xf.rows())};
  for (int j = 0; j < xf.rows(); ++j) {
    const double x = xf(j, 0), y = xf(j, 1);
    Eigen::Vector2d grad(ux(x, y), uy(x, y));
    Eigen::Vector2d flux = lambda(x, y) * grad;
    fd.uD(j) = u(x, y);
    fd.w(j) = op.Nx[f](j) * flux.x() + op.Ny[f](j) * flux.y();
  }
  return fd;
}

// Neighbor-side extrapolation and normal flux rotated into k's facet order.
struct Across {
  int v, fv;
  MatrixXd R, D;
};

Across across(const Discretization& d, int k, int f) {
  Across a;
  a.v = d.mesh.neighbor(k, f);
  a.fv = d.mesh.neighbor_local(k, f);
  const MatrixXd& P = d.sat.elem[k].P[f];
  a.R = P * d.ops[a.v].R(a.fv);
  a.D = P * d.ops[a.v].Dg[a.fv];
  return a;
}

void interface_terms(Accumulator& acc, bool adjoint) {
  const auto& d = acc.d;
  const auto& mesh = d.mesh;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& op = d.ops[k];
    const auto& ec = d.sat.elem[k];
    for (int g = 0; g < 3; ++g) {
      if (mesh.tag(k, g) != BoundaryTag::Interior) continue;
      const auto& s = ec.side[g];
      const MatrixXd& R = op.R(g);
      const MatrixXd& D = op.Dg[g];
      const MatrixXd B = op.B[g].asDiagonal();
      const Across nb = across(d, k, g);
      const MatrixXd Rt = R.transpose(), Dt = D.transpose();
      if (!adjoint) {
        acc.add(k, k, Rt * s.T1k * R + Rt * s.T3k * D + Dt * s.T2k * R + Dt * s.T4k * D);
        acc.add(k, nb.v, -Rt * s.T1k * nb.R + Rt * s.T3k * nb.D - Dt * s.T2k * nb.R + Dt * s.T4k * nb.D);
      } else {
        acc.add(k, k, Rt * s.T1k * R + Rt * (s.T2k + B) * D + Dt * (s.T3k - B) * R + Dt * s.T4k * D);
        acc.add(k, nb.v, -Rt * s.T1v * nb.R - Rt * s.T2v * nb.D + Dt * s.T3v * nb.R + Dt * s.T4v * nb.D);
      }
      // second-neighbor couplings through k's other facets
      for (int e = 0; e < 3; ++e) {
        if (e == g || mesh.tag(k, e) != BoundaryTag::Interior) continue;
        const Across ng = across(d, k, e);
        if (ec.T5[g][e].size()) {
          acc.add(k, k, Rt * ec.T5[g][e] * op.R(e));
          if (!adjoint) acc.add(k, ng.v, -Rt * ec.T5[g][e] * ng.R);
        }
        if (adjoint && ec.T6[g][e].size()) acc.add(k, ng.v, Rt * ec.T6[g][e] * ng.R);
      }
      // and through the neighbor's other facets
      const auto& ev = d.sat.elem[nb.v];
      const MatrixXd& P = ec.P[g];
      for (int dl = 0; dl < 3; ++dl) {
        if (dl == nb.fv || mesh.tag(nb.v, dl) != BoundaryTag::Interior) continue;
        const Across nq = across(d, nb.v, dl);
        const MatrixXd& Rdv = d.ops[nb.v].R(dl);
        if (!adjoint) {
          if (ev.T6[nb.fv][dl].size()) {
            MatrixXd T = P * ev.T6[nb.fv][dl];
            acc.add(k, nb.v, Rt * T * Rdv);
            acc.add(k, nq.v, -Rt * T * nq.R);
          }
        } else {
          if (ev.T5[nb.fv][dl].size()) acc.add(k, nb.v, -Rt * P * ev.T5[nb.fv][dl] * Rdv);
          if (ev.T6[nb.fv][dl].size()) acc.add(k, nq.v, -Rt * P * ev.T6[nb.fv][dl] * nq.R);
        }
      }
    }
  }
}

void boundary_terms(Accumulator& acc, const ScalarField& u, const ScalarField& ux, const ScalarField& uy,
                    const Diffusivity& lambda) {
  const auto& d = acc.d;
  const auto& mesh = d.mesh;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& op = d.ops[k];
    const auto& ec = d.sat.elem[k];
    for (int g = 0; g < 3; ++g) {
      const BoundaryTag tag = mesh.tag(k, g);
      if (tag == BoundaryTag::Interior) continue;
      const MatrixXd& R = op.R(g);
      const MatrixXd& D = op.Dg[g];
      const MatrixXd B = op.B[g].asDiagonal();
      FacetData fd = facet_data(op, g, u, ux, uy, lambda);
      if (tag == BoundaryTag::Dirichlet) {
        MatrixXd L = R.transpose() * ec.TD[g] - D.transpose() * B;
        acc.add(k, k, L * R);
        acc.add_data(k, -L * fd.uD);
      } else {
        acc.add(k, k, R.transpose() * B * D);
        acc.add_data(k, -R.transpose() * B * fd.w);
      }
    }
    // extended Dirichlet couplings of the unmodified BR1/LDG forms
    for (int a = 0; a < 3; ++a)
      for (int e = 0; e < 3; ++e) {
        const MatrixXd& X = ec.X[a][e];
        if (X.size() == 0) continue;
        const MatrixXd Rat = op.R(a).transpose();
        if (mesh.tag(k, e) == BoundaryTag::Dirichlet) {
          VectorXd uD = facet_data(op, e, u, ux, uy, lambda).uD;
          acc.add(k, k, Rat * X * op.R(e));
          acc.add_data(k, -Rat * X * uD);
          if (mesh.tag(k, a) == BoundaryTag::Interior) {
            const int v = mesh.neighbor(k, a), fv = mesh.neighbor_local(k, a);
            MatrixXd Lv = d.ops[v].R(fv).transpose() * ec.P[a].transpose() * X;
            acc.add(v, k, -Lv * op.R(e));
            acc.add_data(v, Lv * uD);
          }
        } else if (mesh.tag(k, e) == BoundaryTag::Interior) {
          const Across ng = across(d, k, e);
          acc.add(k, k, Rat * X * op.R(e));
          acc.add(k, ng.v, -Rat * X * ng.R);
        }
      }
  }
}

GlobalSystem finish(const Discretization& d, Accumulator& acc, unsigned parts, const ScalarField& source,
                    bool negate_volume) {
  (void)negate_volume;
  GlobalSystem sys;
  sys.offset = d.offset;
  sys.H = d.H();
  const int n = d.ndof;
  std::vector<Eigen::Triplet<double>> trip;
  if (parts & kVolume) {
    for (int k = 0; k < d.mesh.n_elements(); ++k) acc.add(k, k, MatrixXd::Zero(d.ops[k].n_p(), d.ops[k].n_p()));
  }
  for (auto& [rc, m] : acc.blocks) {
    const int r = rc.first, c = rc.second;
    MatrixXd blk = -(d.ops[r].H.cwiseInverse().asDiagonal() * m);
    if ((parts & kVolume) && r == c) blk += d.ops[r].D2;
    for (int i = 0; i < blk.rows(); ++i)
      for (int j = 0; j < blk.cols(); ++j)
        if (blk(i, j) != 0.0) trip.emplace_back(d.offset[r] + i, d.offset[c] + j, blk(i, j));
  }
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.prune(0.0, 0.0);
  sys.A.makeCompressed();
  sys.b = -acc.sdata.cwiseQuotient(sys.H);
  if (parts & kVolume) sys.b += d.sample(source);
  sys.symmetric = is_adjoint_consistent(d.sat.spec.variant);
  return sys;
}

} // namespace

GlobalSystem assemble_primal(const Discretization& d, const ProblemData& prob, unsigned parts) {
  Accumulator acc(d);
  if (parts & kInterface) interface_terms(acc, false);
  if (parts & kBoundary) boundary_terms(acc, prob.U, prob.U_x, prob.U_y, prob.lambda);
  return finish(d, acc, parts, prob.F, false);
}

GlobalSystem assemble_adjoint(const Discretization& d, const ProblemData& prob, unsigned parts) {
  Accumulator acc(d);
  if (parts & kInterface) interface_terms(acc, true);
  if (parts & kBoundary) boundary_terms(acc, prob.psi, prob.psi_x, prob.psi_y, prob.lambda);
  return finish(d, acc, parts, prob.G, true);
}

double discrete_functional(const VectorXd& u, const Discretization& d, const ProblemData& prob,
                           bool dirichlet_correction) {
  double I = 0.0;
  const auto& mesh = d.mesh;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& op = d.ops[k];
    const VectorXd uk = u.segment(d.offset[k], op.n_p());
    for (int i = 0; i < op.n_p(); ++i) I += prob.G(op.geo.x(i, 0), op.geo.x(i, 1)) * op.H(i) * uk(i);
    for (int g = 0; g < 3; ++g) {
      const BoundaryTag tag = mesh.tag(k, g);
      if (tag == BoundaryTag::Interior) continue;
      const FacetData adj = facet_data(op, g, prob.psi, prob.psi_x, prob.psi_y, prob.lambda);
      const VectorXd Bv = op.B[g];
      const VectorXd Ru = op.R(g) * uk;
      if (tag == BoundaryTag::Dirichlet) {
        I -= adj.uD.dot(Bv.cwiseProduct(op.Dg[g] * uk));
        if (dirichlet_correction) {
          const VectorXd uD = facet_data(op, g, prob.U, prob.U_x, prob.U_y, prob.lambda).uD;
          I += adj.uD.dot(d.sat.elem[k].TD[g] * (Ru - uD));
        }
      } else {
        I += adj.w.dot(Bv.cwiseProduct(Ru));
      }
    }
  }
  return I;
}

double conservation_probe(const Discretization& d, const VectorXd& u) {
  ProblemData zero;
  zero.F = zero.G = zero.U = zero.U_x = zero.U_y = [](double, double) { return 0.0; };
  auto sys = assemble_primal(d, zero, kVolume | kInterface);
  VectorXd Au = sys.A * u;
  double total = sys.H.dot(Au);
  for (int k = 0; k < d.mesh.n_elements(); ++k)
    for (int g = 0; g < 3; ++g)
      if (d.mesh.tag(k, g) != BoundaryTag::Interior)
        total -= d.ops[k].B[g].dot(d.ops[k].Dg[g] * u.segment(d.offset[k], d.ops[k].n_p()));
  return std::abs(total);
}

void write_matrix_market(const SparseMatrix& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_vector(const VectorXd& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  for (int i = 0; i < v.size(); ++i) out << v(i) << '\n';
}

} // namespace sbpsat
