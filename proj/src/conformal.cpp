#include "sdp/conformal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace sdp {

namespace {

constexpr int kN = 4;

// sign of the permutation (a, b, c, d) of (0, 1, 2, 3), 0 if repeated
int levi_civita_symbol(int a, int b, int c, int d) {
  const int p[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] == p[j]) return 0;
  int s = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

Mat4 value_matrix(const JetMat& m) {
  Mat4 out{};
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j) out[i][j] = m[i][j].value();
  return out;
}

Eigen::Matrix4d to_eigen(const Mat4& m) {
  Eigen::Matrix4d e;
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j) e(i, j) = m[i][j];
  return e;
}

Mat4 inverse_values(const Mat4& m) {
  const Eigen::Matrix4d inv = to_eigen(m).inverse();
  Mat4 out{};
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j) out[i][j] = inv(i, j);
  return out;
}

double max_abs(const Mat4& m) {
  double s = 0.0;
  for (const auto& r : m)
    for (double x : r) s = std::max(s, std::fabs(x));
  return s;
}

// 2-forms on the basis dx^c ^ dx^d, c < d
constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

// eps_cd^ef as a matrix acting on 2-forms: (*F)_cd = 1/2 eps_cd^ef F_ef
Tensor4 star_tensor(const Curvature& c) {
  const double vol = c.volume_sign * std::sqrt(std::fabs(to_eigen(c.g).determinant()));
  Tensor4 s{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int e = 0; e < kN; ++e)
        for (int f = 0; f < kN; ++f) {
          double sum = 0.0;
          for (int g = 0; g < kN; ++g)
            for (int h = 0; h < kN; ++h) {
              const int p = levi_civita_symbol(a, b, g, h);
              if (p != 0) sum += p * c.ginv[g][e] * c.ginv[h][f];
            }
          s[a][b][e][f] = vol * sum;
        }
  return s;
}

Mat4 apply_star(const Tensor4& s, const Mat4& F) {
  Mat4 out{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) {
      double sum = 0.0;
      for (int e = 0; e < kN; ++e)
        for (int f = 0; f < kN; ++f) sum += s[a][b][e][f] * F[e][f];
      out[a][b] = 0.5 * sum;
    }
  return out;
}

Vec4 lower(const Mat4& g, const Vec4& v) {
  Vec4 out{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) out[a] += g[a][b] * v[b];
  return out;
}

double euclid_dot(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (int i = 0; i < kN; ++i) s += a[i] * b[i];
  return s;
}

// part of v orthogonal (Euclidean) to the line through k
double off_line(const Vec4& v, const Vec4& k) {
  const double kk = euclid_dot(k, k);
  const double t = kk > 0.0 ? euclid_dot(v, k) / kk : 0.0;
  double s = 0.0;
  for (int i = 0; i < kN; ++i) s += (v[i] - t * k[i]) * (v[i] - t * k[i]);
  return std::sqrt(s);
}

Jet metric_product(const JetMat& g, const JetVec& u, const JetVec& v) {
  Jet s(u[0].layout());
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) s += g[a][b] * u[a] * v[b];
  return s;
}

}  // namespace

double max_abs(const Tensor4& t) {
  double s = 0.0;
  for (const auto& a : t)
    for (const auto& b : a) s = std::max(s, max_abs(b));
  return s;
}

Frame4 frame_from_lax(const LaxPair& L) {
  Frame4 F;
  for (int i = 0; i < kN; ++i) F.coords[i] = L.coords[i];
  const Expr zero(0.0);
  for (int i = 0; i < kN; ++i) {
    F.X[0][i] = substitute(L.L0[i], Var::lambda, zero);
    F.X[1][i] = substitute(differentiate(L.L0[i], Var::lambda), Var::lambda, zero);
    F.X[2][i] = substitute(L.L1[i], Var::lambda, zero);
    F.X[3][i] = substitute(differentiate(L.L1[i], Var::lambda), Var::lambda, zero);
  }
  return F;
}

Frame4 frame_from_pair(const ProjectivePair& pair) {
  Frame4 F;
  F.coords = pair.coords();
  F.X[0] = {Expr(0.0), Expr(0.0), pair.phi0[0], pair.phi0[1]};
  F.X[1] = {Expr(0.0), Expr(0.0), pair.phi1[0], pair.phi1[1]};
  F.X[2] = {Expr(1.0), Expr(0.0), pair.alpha0[0], pair.alpha0[1]};
  F.X[3] = {Expr(0.0), Expr(1.0), pair.alpha1[0], pair.alpha1[1]};
  return F;
}

Mat4 Metric4::values() const { return value_matrix(g); }

Metric4 metric_from_frame(const Frame4& F, const Vec4& point, int order, const Expr& factor) {
  Metric4 m(seed_env(F.coords, point, order));
  m.frame.assign(kN, JetVec(kN));
  for (int A = 0; A < kN; ++A)
    for (int i = 0; i < kN; ++i) m.frame[i][A] = evaluate(F.X[A][i], m.env);
  m.coframe = inverse(m.frame);
  m.coframe_det = to_eigen(value_matrix(m.coframe)).determinant();
  const Jet f = evaluate(factor, m.env);
  const JetMat& th = m.coframe;
  m.g.assign(kN, JetVec(kN));
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j)
      m.g[i][j] = f * (th[0][i] * th[3][j] + th[3][i] * th[0][j] - th[1][i] * th[2][j] - th[2][i] * th[1][j]);
  return m;
}

Metric4 metric_from_lax(const LaxPair& L, const Vec4& point, int order, const Expr& factor) {
  return metric_from_frame(frame_from_lax(L), point, order, factor);
}

std::array<JetMat, 4> levi_civita(const Metric4& m) {
  const int k = m.order() - 1;
  if (k < 0) throw std::invalid_argument("levi_civita needs metric jets of order >= 1");
  const JetMat ginv = inverse(m.g);
  // dg[c][a][b] = d_c g_ab
  std::array<JetMat, 4> dg;
  for (int c = 0; c < kN; ++c) {
    dg[c].assign(kN, JetVec(kN));
    for (int a = 0; a < kN; ++a)
      for (int b = 0; b < kN; ++b) dg[c][a][b] = m.g[a][b].derivative(c);
  }
  std::array<JetMat, 4> G;
  for (int a = 0; a < kN; ++a) {
    G[a].assign(kN, JetVec(kN));
    for (int b = 0; b < kN; ++b)
      for (int c = b; c < kN; ++c) {
        Jet s(dg[0][0][0].layout());
        for (int d = 0; d < kN; ++d) s += ginv[a][d].truncate(k) * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
        G[a][b][c] = 0.5 * s;
        G[a][c][b] = G[a][b][c];
      }
  }
  return G;
}

Curvature curvature(const Metric4& m, int sigma) {
  if (m.order() < 2) throw std::invalid_argument("curvature needs metric jets of order >= 2");
  Curvature c;
  c.g = m.values();
  c.ginv = inverse_values(c.g);
  c.volume_sign = sigma * (m.coframe_det < 0.0 ? -1.0 : 1.0);

  const auto G = levi_civita(m);
  auto gv = [&](int a, int b, int d) { return G[a][b][d].value(); };
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int cc = 0; cc < kN; ++cc)
        for (int d = 0; d < kN; ++d) {
          double r = G[a][d][b].d(cc) - G[a][cc][b].d(d);
          for (int e = 0; e < kN; ++e) r += gv(a, cc, e) * gv(e, d, b) - gv(a, d, e) * gv(e, cc, b);
          c.riemann[a][b][cc][d] = r;
        }
  for (int b = 0; b < kN; ++b)
    for (int d = 0; d < kN; ++d) {
      double s = 0.0;
      for (int a = 0; a < kN; ++a) s += c.riemann[a][b][a][d];
      c.ricci[b][d] = s;
    }
  for (int b = 0; b < kN; ++b)
    for (int d = 0; d < kN; ++d) c.scalar += c.ginv[b][d] * c.ricci[b][d];

  Mat4 P{}, tf{};
  for (int b = 0; b < kN; ++b)
    for (int d = 0; d < kN; ++d) {
      P[b][d] = 0.5 * (c.ricci[b][d] - c.scalar * c.g[b][d] / 6.0);
      tf[b][d] = c.ricci[b][d] - c.scalar * c.g[b][d] / 4.0;
    }
  // W_abcd = R_abcd - (g_ac P_bd - g_ad P_bc - g_bc P_ad + g_bd P_ac), then raise a
  Tensor4 Wlow{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int cc = 0; cc < kN; ++cc)
        for (int d = 0; d < kN; ++d) {
          double r = 0.0;
          for (int e = 0; e < kN; ++e) r += c.g[a][e] * c.riemann[e][b][cc][d];
          Wlow[a][b][cc][d] = r - (c.g[a][cc] * P[b][d] - c.g[a][d] * P[b][cc] - c.g[b][cc] * P[a][d] +
                                   c.g[b][d] * P[a][cc]);
        }
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int cc = 0; cc < kN; ++cc)
        for (int d = 0; d < kN; ++d) {
          double s = 0.0;
          for (int e = 0; e < kN; ++e) s += c.ginv[a][e] * Wlow[e][b][cc][d];
          c.weyl[a][b][cc][d] = s;
        }

  const Tensor4 S = star_tensor(c);
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) {
      const Mat4 sw = apply_star(S, c.weyl[a][b]);
      for (int cc = 0; cc < kN; ++cc)
        for (int d = 0; d < kN; ++d) {
          c.weyl_plus[a][b][cc][d] = 0.5 * (c.weyl[a][b][cc][d] + sw[cc][d]);
          c.weyl_minus[a][b][cc][d] = 0.5 * (c.weyl[a][b][cc][d] - sw[cc][d]);
        }
    }

  // the star as a 6 x 6 matrix on 2-forms
  Eigen::Matrix<double, 6, 6> St;
  for (int j = 0; j < 6; ++j) {
    Mat4 E{};
    E[kPairs[j][0]][kPairs[j][1]] = 1.0;
    E[kPairs[j][1]][kPairs[j][0]] = -1.0;
    const Mat4 sE = apply_star(S, E);
    for (int i = 0; i < 6; ++i) St(i, j) = sE[kPairs[i][0]][kPairs[i][1]];
  }
  const Eigen::Matrix<double, 6, 6> I = Eigen::Matrix<double, 6, 6>::Identity();
  c.star_defect = (St * St - I).cwiseAbs().maxCoeff();
  const Eigen::Matrix<double, 6, 6> Pp = 0.5 * (I + St), Pm = 0.5 * (I - St);
  c.projector_defect = std::max((Pp * Pp - Pp).cwiseAbs().maxCoeff(), (Pm * Pm - Pm).cwiseAbs().maxCoeff());

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(to_eigen(c.g));
  for (int i = 0; i < kN; ++i) (eig.eigenvalues()(i) > 0.0 ? c.positive : c.negative)++;

  c.riemann_norm = max_abs(c.riemann);
  c.ricci_norm = max_abs(c.ricci);
  c.tf_ricci_norm = max_abs(tf);
  c.weyl_norm = max_abs(c.weyl);
  c.weyl_plus_norm = max_abs(c.weyl_plus);
  c.weyl_minus_norm = max_abs(c.weyl_minus);
  return c;
}

Mat4 hodge_star(const Curvature& c, const Mat4& F) { return apply_star(star_tensor(c), F); }

KillingReport killing_report(const Metric4& m, const VectorExpr& K) {
  if (m.order() < 1) throw std::invalid_argument("killing_report needs metric jets of order >= 1");
  KillingReport out;
  const JetVec Kj = evaluate_all(K, m.env);
  const Mat4 g = m.values();
  const Mat4 ginv = inverse_values(g);
  Vec4 k{};
  for (int a = 0; a < kN; ++a) k[a] = Kj[a].value();

  Mat4 lie{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) {
      double s = 0.0;
      for (int c = 0; c < kN; ++c) s += k[c] * m.g[a][b].d(c) + g[c][b] * Kj[c].d(a) + g[a][c] * Kj[c].d(b);
      lie[a][b] = s;
    }
  double trace = 0.0;
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) trace += ginv[a][b] * lie[a][b];
  Mat4 tf{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) tf[a][b] = lie[a][b] - trace * g[a][b] / 4.0;
  out.lie_norm = max_abs(lie);
  out.conformal_residual = max_abs(tf);
  out.norm_kk = euclid_dot(k, lower(g, k));

  // alpha = g(K, .), T = alpha ^ d alpha, twist from *T
  JetVec alpha(kN, Jet(m.env.layout));
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) alpha[a] += m.g[a][b] * Kj[b];
  Mat4 da{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) da[a][b] = alpha[b].d(a) - alpha[a].d(b);
  Vec4 al{};
  for (int a = 0; a < kN; ++a) al[a] = alpha[a].value();
  double T[4][4][4];
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int c = 0; c < kN; ++c) T[a][b][c] = al[a] * da[b][c] + al[b] * da[c][a] + al[c] * da[a][b];
  double Tup[4][4][4] = {};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int c = 0; c < kN; ++c) {
        double s = 0.0;
        for (int e = 0; e < kN; ++e)
          for (int f = 0; f < kN; ++f)
            for (int h = 0; h < kN; ++h) s += ginv[a][e] * ginv[b][f] * ginv[c][h] * T[e][f][h];
        Tup[a][b][c] = s;
      }
  const double vol = (kOrientationSign * (m.coframe_det < 0.0 ? -1.0 : 1.0)) *
                     std::sqrt(std::fabs(to_eigen(g).determinant()));
  Vec4 st{};
  for (int d = 0; d < kN; ++d) {
    double s = 0.0;
    for (int a = 0; a < kN; ++a)
      for (int b = 0; b < kN; ++b)
        for (int c = 0; c < kN; ++c) {
          const int p = levi_civita_symbol(a, b, c, d);
          if (p != 0) s += p * Tup[a][b][c];
        }
    st[d] = vol * s / 6.0;
  }
  const double aa = euclid_dot(al, al);
  out.twist = aa > 0.0 ? euclid_dot(st, al) / aa : 0.0;
  out.twist_transverse = off_line(st, al);

  const auto G = levi_civita(m);
  Vec4 acc{};
  for (int a = 0; a < kN; ++a) {
    double s = 0.0;
    for (int b = 0; b < kN; ++b) {
      s += k[b] * Kj[a].d(b);
      for (int c = 0; c < kN; ++c) s += G[a][b][c].value() * k[b] * k[c];
    }
    acc[a] = s;
  }
  out.geodesic_residual = off_line(acc, k);
  return out;
}

NullPlanes null_planes(const Metric4& m, const VectorExpr& K) {
  NullPlanes out;
  out.K = evaluate_all(K, m.env);
  const auto& L = m.env.layout;
  JetVec flat(kN, Jet(L));
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) flat[a] += m.g[a][b] * out.K[b];
  int piv = 0;
  for (int a = 1; a < kN; ++a)
    if (std::fabs(flat[a].value()) > std::fabs(flat[piv].value())) piv = a;
  if (!(std::fabs(flat[piv].value()) > 0.0)) throw DomainError("K is zero at the point");
  // basis of K^perp: e_j - (flat_j / flat_piv) e_piv
  std::vector<int> idx;
  for (int j = 0; j < kN; ++j)
    if (j != piv) idx.push_back(j);
  int drop = idx[0];
  for (int j : idx)
    if (std::fabs(out.K[j].value()) > std::fabs(out.K[drop].value())) drop = j;
  std::vector<JetVec> E;
  for (int j : idx) {
    if (j == drop) continue;
    JetVec e(kN, Jet(L));
    e[j] = Jet(L, 1.0);
    e[piv] = -(flat[j] / flat[piv]);
    E.push_back(e);
  }
  const Jet h11 = metric_product(m.g, E[0], E[0]);
  const Jet h12 = metric_product(m.g, E[0], E[1]);
  const Jet h22 = metric_product(m.g, E[1], E[1]);
  const double scale = std::max({std::fabs(h11.value()), std::fabs(h12.value()), std::fabs(h22.value())});
  auto combine = [&](const JetVec& a, const Jet& s, const JetVec& b) {
    JetVec v(kN, Jet(L));
    for (int i = 0; i < kN; ++i) v[i] = a[i] + s * b[i];
    return v;
  };
  if (std::max(std::fabs(h11.value()), std::fabs(h22.value())) <= 1e-13 * scale) {
    out.plus = E[0];
    out.minus = E[1];
    return out;
  }
  const Jet disc = h12 * h12 - h11 * h22;
  if (!(disc.value() > 0.0)) throw DomainError("quotient metric on K^perp/K is not of signature (1,1)");
  const Jet r = sqrt(disc);
  if (std::fabs(h22.value()) >= std::fabs(h11.value())) {
    out.plus = combine(E[0], (-h12 + r) / h22, E[1]);
    out.minus = combine(E[0], (-h12 - r) / h22, E[1]);
  } else {
    out.plus = combine(E[1], (-h12 + r) / h11, E[0]);
    out.minus = combine(E[1], (-h12 - r) / h11, E[0]);
  }
  return out;
}

double frobenius_residual(const std::vector<JetVec>& fields) {
  std::vector<std::vector<double>> basis;
  for (const JetVec& f : fields) basis.push_back(values(f));
  const int n = static_cast<int>(basis.size());
  Eigen::MatrixXd M(basis.empty() ? 0 : basis[0].size(), n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < M.rows(); ++i) M(i, j) = basis[j][i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < n) throw DomainError("frobenius_residual: dependent fields");
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const std::vector<double> br = values(bracket(fields[i], fields[j]));
      worst = std::max(worst, span_residual(br, basis));
    }
  return worst;
}

double frobenius_residual(std::span<const VectorExpr> fields, const std::array<Var, 4>& coords, const Vec4& point) {
  const JetEnv env = seed_env(coords, point, 1);
  std::vector<JetVec> jets;
  for (const VectorExpr& f : fields) jets.push_back(evaluate_all(f, env));
  return frobenius_residual(jets);
}

Mat4 dw_metric(const ProjectivePair& pair, const Vec4& point) {
  DoubleEnv env;
  env.set(Var::x, point[0]).set(Var::y, point[1]).set(pair.fiber[0], point[2]).set(pair.fiber[1], point[3]);
  auto ev = [&](const Expr& e) { return evaluate(e, env); };
  const double p = ev(pair.phi0[0]), u = ev(pair.phi0[1]), q = ev(pair.phi1[0]), v = ev(pair.phi1[1]);
  const double C = ev(pair.alpha0[0]), E = ev(pair.alpha0[1]), D = ev(pair.alpha1[0]), F = ev(pair.alpha1[1]);
  const double delta = p * v - q * u;
  if (delta == 0.0) throw DomainError("dw_metric: phi0, phi1 dependent");
  const Vec4 wt{-C, -D, 1.0, 0.0}, wz{-E, -F, 0.0, 1.0}, U{u, v, 0.0, 0.0}, Pq{p, q, 0.0, 0.0};
  Mat4 g{};
  for (int i = 0; i < kN; ++i)
    for (int j = 0; j < kN; ++j)
      g[i][j] = (wt[i] * U[j] + U[i] * wt[j] - wz[i] * Pq[j] - Pq[i] * wz[j]) / delta;
  return g;
}

NullKahler build_null_kahler(const Expr& a, const Expr& c, const Expr& f) {
  NullKahler nk;
  nk.surface = null_kahler_surface(a);
  nk.pair = null_kahler_pair(a, c);
  nk.lax = build_lax(nk.surface, nk.pair);
  nk.factor = f;
  return nk;
}

namespace {

Mat4 nk_J(double c) {
  Mat4 J{};
  J[2][3] = 1.0;  // d_z -> d_t
  J[1][0] = 1.0;  // d_x -> d_y + c d_t
  J[2][0] = c;
  return J;
}

double compat(const Mat4& om, const Mat4& J, const Mat4& g) {
  double worst = 0.0;
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) {
      double s = 0.0;
      for (int e = 0; e < kN; ++e) s += J[e][a] * g[e][b];
      worst = std::max(worst, std::fabs(om[a][b] - s));
    }
  return worst;
}

}  // namespace

Mat4 null_kahler_J(const NullKahler& nk, const Vec4& point) {
  DoubleEnv env;
  env.set(Var::x, point[0]).set(Var::y, point[1]).set(Var::t, point[2]).set(Var::z, point[3]);
  return nk_J(evaluate(nk.pair.alpha1[0], env));
}

NullKahlerChecks null_kahler_checks(const NullKahler& nk, const Vec4& point, int order) {
  NullKahlerChecks out;
  const Metric4 m = metric_from_lax(nk.lax, point, order, nk.factor);
  const Mat4 g = m.values();
  const Mat4 J = null_kahler_J(nk, point);

  // omega = f dx ^ dz
  const Jet f = evaluate(nk.factor, m.env);
  std::array<std::array<Jet, 4>, 4> om;
  for (auto& r : om)
    for (Jet& j : r) j = Jet(m.env.layout);
  om[0][3] = f;
  om[3][0] = -f;
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b)
      for (int c = 0; c < kN; ++c)
        out.d_omega = std::max(out.d_omega, std::fabs(om[b][c].d(a) + om[c][a].d(b) + om[a][b].d(c)));
  Mat4 omv{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) omv[a][b] = om[a][b].value();

  Mat4 J2{}, iso{};
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) {
      for (int e = 0; e < kN; ++e) J2[a][b] += J[a][e] * J[e][b];
      double s = 0.0;
      for (int c = 0; c < kN; ++c)
        for (int d = 0; d < kN; ++d) s += g[c][d] * J[c][a] * J[d][b];
      iso[a][b] = s;
    }
  out.j_squared = max_abs(J2);
  out.j_isotropy = max_abs(iso);
  out.compatibility = compat(omv, J, g);
  out.literal_j_compatibility = compat(omv, nk_J(0.0), g);
  out.killing = killing_report(m, {Expr(0.0), Expr(0.0), Expr(1.0), Expr(0.0)}).lie_norm;

  out.curvature = curvature(m);
  const Mat4 so = hodge_star(out.curvature, omv);
  for (int a = 0; a < kN; ++a)
    for (int b = 0; b < kN; ++b) {
      out.omega_sd = std::max(out.omega_sd, std::fabs(so[a][b] - omv[a][b]));
      out.omega_asd = std::max(out.omega_asd, std::fabs(so[a][b] + omv[a][b]));
    }
  return out;
}

SelfdualCertificate certify_selfdual(const LaxPair& L, std::span<const Vec4> points, double tol, const Expr& factor,
                                     int order, double lax_tol) {
  SelfdualCertificate out;
  for (const Vec4& p : points) {
    out.lax_defect = std::max(out.lax_defect, lax_residual(L, p).defect());
    const Curvature c = curvature(metric_from_lax(L, p, order, factor));
    out.weyl_minus = std::max(out.weyl_minus, c.weyl_minus_norm);
    out.weyl_plus = std::max(out.weyl_plus, c.weyl_plus_norm);
  }
  out.lax_ok = out.lax_defect < lax_tol;
  out.pass = out.lax_ok && out.weyl_minus < tol;
  return out;
}

}  // namespace sdp
