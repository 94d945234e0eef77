#include "sbpsat/sat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace sbpsat {

namespace {

struct VariantName {
  SatVariant v;
  const char* name;
};

constexpr VariantName kNames[] = {{SatVariant::BR1, "br1"},   {SatVariant::BR1u, "br1u"}, {SatVariant::BR2, "br2"},
                                  {SatVariant::SIPG, "sipg"}, {SatVariant::LDG, "ldg"},   {SatVariant::LDGu, "ldgu"},
                                  {SatVariant::CDG, "cdg"},   {SatVariant::BO, "bo"},     {SatVariant::NIPG, "nipg"},
                                  {SatVariant::CNG, "cng"}};

MatrixXd diag(const VectorXd& v) { return v.asDiagonal(); }

} // namespace

std::string to_string(SatVariant v) {
  for (const auto& n : kNames)
    if (n.v == v) return n.name;
  return "?";
}

SatVariant parse_sat(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const auto& n : kNames)
    if (t == n.name) return n.v;
  throw DomainError("unknown SAT variant '" + s + "' (expected br1|br1u|br2|sipg|ldg|ldgu|cdg|bo|nipg|cng)");
}

const std::vector<SatVariant>& all_variants() {
  static const std::vector<SatVariant> v = {SatVariant::BR1, SatVariant::BR1u, SatVariant::BR2, SatVariant::SIPG,
                                            SatVariant::LDG, SatVariant::LDGu, SatVariant::CDG, SatVariant::BO,
                                            SatVariant::NIPG, SatVariant::CNG};
  return v;
}

bool is_adjoint_consistent(SatVariant v) {
  return v != SatVariant::BO && v != SatVariant::NIPG && v != SatVariant::CNG;
}

bool is_wide(SatVariant v) {
  return v == SatVariant::BR1 || v == SatVariant::BR1u || v == SatVariant::LDG || v == SatVariant::LDGu;
}

MatrixXd compute_upsilon(const PhysicalOperators& op, int a, int b) {
  const VectorXd Hinv = op.H.cwiseInverse();
  MatrixXd RaT = op.R(a), RbT = op.R(b).transpose();
  auto block = [&](const VectorXd& L) -> MatrixXd { return RaT * (Hinv.cwiseProduct(L)).asDiagonal() * RbT; };
  MatrixXd U = op.Nx[a].asDiagonal() * block(op.Lxx) * op.Nx[b].asDiagonal();
  U += op.Nx[a].asDiagonal() * block(op.Lxy) * op.Ny[b].asDiagonal();
  U += op.Ny[a].asDiagonal() * block(op.Lyx) * op.Nx[b].asDiagonal();
  U += op.Ny[a].asDiagonal() * block(op.Lyy) * op.Ny[b].asDiagonal();
  return U;
}

std::array<double, 3> compute_alpha(const Mesh& mesh, int k) {
  std::array<double, 3> len{}, alpha{};
  double interior = 0.0, dirichlet = 0.0;
  for (int f = 0; f < 3; ++f) {
    auto v = mesh.facet_vertices(k, f);
    len[f] = (v[1] - v[0]).norm();
    if (mesh.tag(k, f) == BoundaryTag::Interior) interior += len[f];
    if (mesh.tag(k, f) == BoundaryTag::Dirichlet) dirichlet += len[f];
  }
  const double denom = interior + 2.0 * dirichlet;
  if (!(denom > 0)) throw GeometryError("facet weights undefined for an element with only Neumann facets");
  for (int f = 0; f < 3; ++f) {
    switch (mesh.tag(k, f)) {
    case BoundaryTag::Interior: alpha[f] = len[f] / denom; break;
    case BoundaryTag::Dirichlet: alpha[f] = 2.0 * len[f] / denom; break;
    case BoundaryTag::Neumann: alpha[f] = 0.0; break;
    }
  }
  return alpha;
}

std::pair<int, int> compute_switch(const Eigen::Vector2d& normal, const Eigen::Vector2d& g, bool boundary) {
  if (boundary) return {0, 0};
  int bk = normal.dot(g) >= 0.0 ? 1 : 0;
  return {bk, 1 - bk};
}

double extrapolation_norm2(const PhysicalOperators& op, int f) {
  MatrixXd A = op.B[f].cwiseSqrt().asDiagonal() * op.R(f) * op.H.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<MatrixXd> svd(A);
  double s = svd.singularValues()(0);
  return s * s;
}

Eigen::Vector2d straight_normal(const Mesh& mesh, int k, int f) {
  auto v = mesh.facet_vertices(k, f);
  Eigen::Vector2d t = v[1] - v[0];
  return Eigen::Vector2d(t.y(), -t.x()).normalized();
}

SatCoefficients build_coefficients(const SatSpec& spec, const Mesh& mesh, const std::vector<PhysicalOperators>& ops,
                                   const FacetPermutations& perms) {
  if (spec.sigma1 <= 0 || spec.sigma5 <= 0 || spec.sigmaD <= 0) throw DomainError("SAT scalings must be positive");
  const SatVariant var = spec.variant;
  const int ne = mesh.n_elements();
  SatCoefficients out;
  out.spec = spec;
  out.elem.resize(ne);

  // switch and weights first: sides need neighbor data
  for (int k = 0; k < ne; ++k) {
    auto& ec = out.elem[k];
    ec.alpha = compute_alpha(mesh, k);
    for (int f = 0; f < 3; ++f) {
      bool boundary = mesh.tag(k, f) != BoundaryTag::Interior;
      ec.beta[f] = compute_switch(straight_normal(mesh, k, f), spec.g, boundary).first;
    }
  }
  // the owner's normal decides; the neighbor takes the complement
  for (int k = 0; k < ne; ++k)
    for (int f = 0; f < 3; ++f) {
      const Facet& fc = mesh.facet(k, f);
      if (fc.tag == BoundaryTag::Interior && fc.elem[1] == k && fc.local[1] == f)
        out.elem[k].beta[f] = 1 - out.elem[fc.elem[0]].beta[fc.local[0]];
    }

  std::vector<double> norms;
  const bool ip = var == SatVariant::SIPG || var == SatVariant::NIPG;

  for (int k = 0; k < ne; ++k) {
    auto& ec = out.elem[k];
    const auto& op = ops[k];
    const int nf = op.n_f();
    for (int f = 0; f < 3; ++f) {
      const BoundaryTag tag = mesh.tag(k, f);
      const MatrixXd B = diag(op.B[f]);
      if (tag == BoundaryTag::Dirichlet) {
        ec.UD[f] = compute_upsilon(op, f, f);
        MatrixXd BUB = B * ec.UD[f] * B;
        if (ip)
          ec.TD[f] = op.lambda_max * extrapolation_norm2(op, f) / ec.alpha[f] * B;
        else if (var == SatVariant::BR1u)
          ec.TD[f] = BUB;
        else if (var == SatVariant::LDGu)
          ec.TD[f] = spec.ldgu_boost * BUB;
        else
          ec.TD[f] = BUB / ec.alpha[f];
        ec.TD[f] *= spec.sigmaD;
        continue;
      }
      if (tag != BoundaryTag::Interior) continue;

      const int v = mesh.neighbor(k, f), fv = mesh.neighbor_local(k, f);
      const int id = mesh.element_facets[k][f];
      const auto& perm = perms[id];
      const bool owner = mesh.facets[id].elem[0] == k && mesh.facets[id].local[0] == f;
      MatrixXd P = MatrixXd::Zero(nf, nf);
      for (int j = 0; j < nf; ++j) {
        if (owner)
          P(j, perm[j]) = 1.0;
        else
          P(perm[j], j) = 1.0;
      }
      ec.P[f] = P;

      SideCoefficients& s = ec.side[f];
      s.Uk = compute_upsilon(op, f, f);
      s.Uv = P * compute_upsilon(ops[v], fv, fv) * P.transpose();
      s.alpha_k = ec.alpha[f];
      s.alpha_v = compute_alpha(mesh, v)[fv];
      s.beta_k = ec.beta[f];
      s.beta_v = 1 - s.beta_k;
      const double ak = s.alpha_k, av = s.alpha_v;
      const double d = s.beta_k - s.beta_v;
      const MatrixXd Psi = B * (s.Uk / ak + s.Uv / av) * B;
      const MatrixXd half = 0.5 * B;
      MatrixXd T1;
      MatrixXd T2k = -half, T2v = -half, T3k = half, T3v = half;
      switch (var) {
      case SatVariant::BR1: T1 = 0.5 * Psi; break;
      case SatVariant::BR1u: T1 = 0.25 * B * (s.Uk + s.Uv) * B; break;
      case SatVariant::BR2: T1 = 0.25 * Psi; break;
      case SatVariant::SIPG:
      case SatVariant::NIPG: {
        double nk = op.lambda_max * extrapolation_norm2(op, f) / (4.0 * ak);
        double nv = ops[v].lambda_max * extrapolation_norm2(ops[v], fv) / (4.0 * av);
        T1 = (nk + nv) * B;
        if (var == SatVariant::NIPG) T2k = T2v = half;
        break;
      }
      case SatVariant::LDG:
      case SatVariant::CDG:
      case SatVariant::LDGu:
        if (var == SatVariant::LDGu)
          T1 = B * ((1 + d * d + 2 * d) / 4.0 * s.Uk + (1 + d * d - 2 * d) / 4.0 * s.Uv) * B;
        else
          T1 = B * ((d + 1) / ak * s.Uk + (1 - d) / av * s.Uv) * B;
        if (var == SatVariant::CDG) T1 *= 0.5;
        T2k = (-d - 1) / 2.0 * B;
        T2v = (d - 1) / 2.0 * B;
        T3k = (-d + 1) / 2.0 * B;
        T3v = (d + 1) / 2.0 * B;
        break;
      case SatVariant::BO:
        T1 = MatrixXd::Zero(nf, nf);
        T2k = T2v = half;
        break;
      case SatVariant::CNG:
        T1 = Psi / 16.0;
        T2k = T2v = MatrixXd::Zero(nf, nf);
        break;
      }
      s.T1k = s.T1v = spec.sigma1 * T1;
      s.T2k = T2k;
      s.T2v = T2v;
      s.T3k = T3k;
      s.T3v = T3v;
      s.T4k = s.T4v = spec.t4 * B;
    }

    // wide couplings between pairs of interior facets of k
    if (is_wide(var)) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          if (a == b || mesh.tag(k, a) != BoundaryTag::Interior || mesh.tag(k, b) != BoundaryTag::Interior) continue;
          MatrixXd BUB = diag(op.B[a]) * compute_upsilon(op, a, b) * diag(op.B[b]);
          if (BUB.cwiseAbs().maxCoeff() == 0.0) continue; // diag-E: no cross-facet coupling
          const double base = (var == SatVariant::BR1 || var == SatVariant::LDG) ? 1.0 / 16.0 : 0.25;
          double c5 = base, c6 = -base;
          if (var == SatVariant::LDG || var == SatVariant::LDGu) {
            const int bak = ec.beta[a], ban = 1 - bak, bbk = ec.beta[b], bbn = 1 - bbk;
            c5 = base * (1 + bak - ban) * (1 + bbk - bbn);
            c6 = base * (ban - bak - 1) * (1 + bbk - bbn);
          }
          if (c5 != 0.0) ec.T5[a][b] = spec.sigma5 * c5 * BUB;
          if (c6 != 0.0) ec.T6[a][b] = spec.sigma5 * c6 * BUB;
        }
    }

    // extended Dirichlet couplings of the unmodified forms
    if (var == SatVariant::BR1u || var == SatVariant::LDGu) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          const BoundaryTag ta = mesh.tag(k, a), tb = mesh.tag(k, b);
          const bool ai = ta == BoundaryTag::Interior, bi = tb == BoundaryTag::Interior;
          const bool ad = ta == BoundaryTag::Dirichlet, bd = tb == BoundaryTag::Dirichlet;
          double c = 0.0;
          if (ai && bd) c = var == SatVariant::BR1u ? 0.5 : (1 + ec.beta[a] - (1 - ec.beta[a])) / 2.0;
          else if (ad && bi) c = var == SatVariant::BR1u ? 0.5 : (1 + ec.beta[b] - (1 - ec.beta[b])) / 2.0;
          else if (ad && bd) c = 1.0;
          if (c == 0.0) continue;
          MatrixXd X = c * diag(op.B[a]) * compute_upsilon(op, a, b) * diag(op.B[b]);
          if (X.cwiseAbs().maxCoeff() == 0.0) continue;
          ec.X[a][b] = X;
        }
    }
  }
  return out;
}

double conservation_residual(const SatCoefficients& c, const Mesh& mesh, const std::vector<PhysicalOperators>& ops) {
  double r = 0.0;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& ec = c.elem[k];
    for (int f = 0; f < 3; ++f) {
      if (mesh.tag(k, f) != BoundaryTag::Interior) continue;
      const auto& s = ec.side[f];
      MatrixXd B = ops[k].B[f].asDiagonal();
      r = std::max(r, (s.T1k - s.T1v).cwiseAbs().maxCoeff());
      r = std::max(r, (s.T3k + s.T3v - B).cwiseAbs().maxCoeff());
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const auto& t5 = ec.T5[a][b];
        const auto& t6 = ec.T6[a][b];
        if (t5.size() == 0 && t6.size() == 0) continue;
        if (t5.size() == 0 || t6.size() == 0) {
          r = std::max(r, (t5.size() ? t5 : t6).cwiseAbs().maxCoeff());
          continue;
        }
        r = std::max(r, (t5 + t6).cwiseAbs().maxCoeff());
      }
  }
  return r;
}

double adjoint_condition_residual(const SatCoefficients& c, const Mesh& mesh,
                                  const std::vector<PhysicalOperators>& ops) {
  double r = 0.0;
  for (int k = 0; k < mesh.n_elements(); ++k)
    for (int f = 0; f < 3; ++f) {
      if (mesh.tag(k, f) != BoundaryTag::Interior) continue;
      const auto& s = c.elem[k].side[f];
      MatrixXd B = ops[k].B[f].asDiagonal();
      r = std::max(r, (s.T2k + s.T2v + B).cwiseAbs().maxCoeff());
      r = std::max(r, (s.T4k - s.T4v).cwiseAbs().maxCoeff());
      r = std::max(r, (s.T3k - s.T2k - B).cwiseAbs().maxCoeff());
    }
  return r;
}

double symmetry_residual(const SatCoefficients& c, const Mesh& mesh) {
  double r = 0.0;
  auto asym = [](const MatrixXd& m) { return m.size() ? (m - m.transpose()).cwiseAbs().maxCoeff() : 0.0; };
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& ec = c.elem[k];
    for (int f = 0; f < 3; ++f) {
      const auto& s = ec.side[f];
      for (const MatrixXd* m : {&s.T1k, &s.T1v, &s.T2k, &s.T2v, &s.T3k, &s.T3v, &s.T4k, &s.T4v, &ec.TD[f]})
        r = std::max(r, asym(*m));
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        for (auto* arr : {&ec.T5, &ec.T6, &ec.X}) {
          const auto& ab = (*arr)[a][b];
          const auto& ba = (*arr)[b][a];
          if (ab.size() == 0 && ba.size() == 0) continue;
          if (ab.size() == 0 || ba.size() == 0) return 1.0;
          r = std::max(r, (ab - ba.transpose()).cwiseAbs().maxCoeff());
        }
      }
  }
  return r;
}

bool StabilityCertificate::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.pass; });
}

double StabilityCertificate::worst() const {
  double w = 1e300;
  for (const auto& e : entries) w = std::min(w, e.min_eig / std::max(e.scale, 1e-300));
  return w;
}

double min_sym_eig(const MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

StabilityCertificate certify_stability(const SatCoefficients& c, const Mesh& mesh,
                                       const std::vector<PhysicalOperators>& ops) {
  const SatVariant var = c.spec.variant;
  StabilityCertificate cert;
  cert.zeta = is_wide(var) ? 1.0 : 2.0;
  auto psd = [&](int k, int f, std::string name, const MatrixXd& lhs, const MatrixXd& rhs) {
    MatrixXd m = lhs - rhs;
    double scale = std::max({lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(), 1e-300});
    double e = min_sym_eig(m);
    cert.entries.push_back({k, f, std::move(name), e, scale, e >= -1e-9 * scale});
  };
  auto equal = [&](int k, int f, std::string name, const MatrixXd& m, double scale) {
    double r = m.cwiseAbs().maxCoeff();
    cert.entries.push_back({k, f, std::move(name), -r, scale, r <= 1e-12 * scale});
  };
  const bool inconsistent = !is_adjoint_consistent(var);
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto& ec = c.elem[k];
    const int nf = ops[k].n_f();
    for (int f = 0; f < 3; ++f) {
      const MatrixXd B = ops[k].B[f].asDiagonal();
      const double bs = B.cwiseAbs().maxCoeff();
      if (mesh.tag(k, f) == BoundaryTag::Dirichlet) {
        psd(k, f, "TD - B U B / alpha", ec.TD[f], B * ec.UD[f] * B / ec.alpha[f]);
        continue;
      }
      if (mesh.tag(k, f) != BoundaryTag::Interior) continue;
      const auto& s = ec.side[f];
      psd(k, f, "T4 psd", s.T4k, MatrixXd::Zero(nf, nf));
      equal(k, f, "T4k = T4v", s.T4k - s.T4v, bs);
      if (var == SatVariant::CNG) {
        psd(k, f, "T1 - B[Uk/16ak + Uv/16av]B", s.T1k, B * (s.Uk / (16 * s.alpha_k) + s.Uv / (16 * s.alpha_v)) * B);
      } else if (inconsistent) {
        equal(k, f, "T3k + T2k - B = 0", s.T3k + s.T2k - B, bs);
        equal(k, f, "T3v + T2v - B = 0", s.T3v + s.T2v - B, bs);
        equal(k, f, "T3v - T2k = 0", s.T3v - s.T2k, bs);
        equal(k, f, "T3k - T2v = 0", s.T3k - s.T2v, bs);
        psd(k, f, "T1 psd", s.T1k, MatrixXd::Zero(nf, nf));
      } else {
        MatrixXd rhs = (2.0 / cert.zeta) * (s.T2k * s.Uk * s.T2k / s.alpha_k + s.T2v * s.Uv * s.T2v / s.alpha_v);
        psd(k, f, "T1 - (2/zeta)(T2 U T2 / alpha)", s.T1k, rhs);
      }
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const auto& t5ab = ec.T5[a][b];
        if (t5ab.size() == 0) continue;
        const auto& T1b = ec.side[b].T1k;
        Eigen::FullPivLU<MatrixXd> lu(T1b);
        if (!lu.isInvertible()) {
          cert.entries.push_back({k, a, "T1_b singular", 0.0, 1.0, false});
          continue;
        }
        psd(k, a, "T1_a - 64 T5_ab T1_b^-1 T5_ba", ec.side[a].T1k, 64.0 * t5ab * lu.solve(ec.T5[b][a]));
      }
  }
  return cert;
}

} // namespace sbpsat
