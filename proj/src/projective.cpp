#include "sdp/projective.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace sdp {

// Jet environments handed to this module carry x as jet variable 0 and y as
// jet variable 1.

int christoffel_slot(int i, int j, int k) { return 3 * i + j + k; }

ProjectiveSurface::ProjectiveSurface() = default;

ProjectiveSurface ProjectiveSurface::from_christoffel(const std::array<Expr, 6>& gamma) {
  ProjectiveSurface P;
  P.g_ = gamma;
  return P;
}

ProjectiveSurface ProjectiveSurface::from_spray(const std::array<Expr, 4>& a) {
  ProjectiveSurface P;
  P.g_[christoffel_slot(1, 0, 0)] = a[0];
  P.g_[christoffel_slot(0, 0, 0)] = -a[1];
  P.g_[christoffel_slot(1, 1, 1)] = a[2];
  P.g_[christoffel_slot(0, 1, 1)] = -a[3];
  return P;
}

ChristoffelJets ProjectiveSurface::christoffel_jets(const JetEnv& env) const {
  ChristoffelJets G;
  for (int s = 0; s < 6; ++s) G.g[s] = evaluate(g_[s], env);
  return G;
}

std::array<Expr, 4> spray_coeffs(const ProjectiveSurface& P) {
  return {P.gamma(1, 0, 0), Expr(2.0) * P.gamma(1, 0, 1) - P.gamma(0, 0, 0),
          P.gamma(1, 1, 1) - Expr(2.0) * P.gamma(0, 0, 1), -P.gamma(0, 1, 1)};
}

ProjectiveSurface projective_change(const ProjectiveSurface& P, const Expr& g0, const Expr& g1) {
  const Expr g[2] = {g0, g1};
  std::array<Expr, 6> out = P.christoffels();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = j; k < 2; ++k) {
        Expr shift(0.0);
        if (i == k) shift = shift + g[j];
        if (i == j) shift = shift + g[k];
        out[christoffel_slot(i, j, k)] = out[christoffel_slot(i, j, k)] + shift;
      }
  return ProjectiveSurface::from_christoffel(out);
}

ChristoffelJets projective_change(const ChristoffelJets& G, const Jet& g0, const Jet& g1) {
  const Jet* g[2] = {&g0, &g1};
  ChristoffelJets out = G;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = j; k < 2; ++k) {
        Jet& slot = out.g[christoffel_slot(i, j, k)];
        if (i == k) slot += *g[j];
        if (i == j) slot += *g[k];
      }
  return out;
}

Expr spray_poly(const std::array<Expr, 4>& a, const Expr& s) {
  return a[0] + a[1] * s + a[2] * pow(s, 2) + a[3] * pow(s, 3);
}

Expr spray_poly_d1(const std::array<Expr, 4>& a, const Expr& s) {
  return a[1] + Expr(2.0) * a[2] * s + Expr(3.0) * a[3] * pow(s, 2);
}

Expr spray_poly_d2(const std::array<Expr, 4>& a, const Expr& s) {
  return Expr(2.0) * a[2] + Expr(6.0) * a[3] * s;
}

JetMat2 curvature_01(const ChristoffelJets& G) {
  const int k = G.order() - 1;
  JetMat2 R;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Jet r = G(a, 1, b).derivative(0) - G(a, 0, b).derivative(1);
      for (int e = 0; e < 2; ++e)
        r += (G(a, 0, e) * G(e, 1, b) - G(a, 1, e) * G(e, 0, b)).truncate(k);
      R[a][b] = r;
    }
  return R;
}

Mat2 reconstruct_curvature(const Mat2& r) {
  // B(r)(X, Y)Z = r(X, Z)Y - r(Y, Z)X + (r(X, Y) - r(Y, X))Z with X = d0, Y = d1
  Mat2 out{};
  for (int b = 0; b < 2; ++b) {
    out[1][b] += r[0][b];
    out[0][b] -= r[1][b];
    out[b][b] += r[0][1] - r[1][0];
  }
  return out;
}

JetMat2 reconstruct_curvature(const JetMat2& r) {
  JetMat2 out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out[a][b] = Jet(r[0][0].layout());
  for (int b = 0; b < 2; ++b) {
    out[1][b] += r[0][b];
    out[0][b] -= r[1][b];
    out[b][b] += r[0][1] - r[1][0];
  }
  return out;
}

namespace {

// Inverse of the linear map r -> B(r) on 2x2 arrays, flattened row-major.
const Eigen::Matrix4d& reconstruction_inverse() {
  static const Eigen::Matrix4d inv = [] {
    Eigen::Matrix4d M;
    for (int col = 0; col < 4; ++col) {
      Mat2 r{};
      r[col / 2][col % 2] = 1.0;
      const Mat2 B = reconstruct_curvature(r);
      for (int row = 0; row < 4; ++row) M(row, col) = B[row / 2][row % 2];
    }
    Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
    if (!lu.isInvertible()) throw std::logic_error("curvature reconstruction map is singular");
    return Eigen::Matrix4d(lu.inverse());
  }();
  return inv;
}

JetEnv surface_env(double x, double y, int order) {
  const Var coords[] = {Var::x, Var::y};
  const double vals[] = {x, y};
  return seed_env(coords, vals, order);
}

}  // namespace

JetMat2 ricci_type(const ChristoffelJets& G) {
  const JetMat2 R = curvature_01(G);
  const Eigen::Matrix4d& inv = reconstruction_inverse();
  JetMat2 r;
  for (int row = 0; row < 4; ++row) {
    Jet acc(R[0][0].layout());
    for (int col = 0; col < 4; ++col) {
      const double m = inv(row, col);
      if (m != 0.0) acc += R[col / 2][col % 2] * m;
    }
    r[row / 2][row % 2] = acc;
  }
  return r;
}

Mat2 ricci_from_connection(const ProjectiveSurface& P, double x, double y) {
  const JetMat2 r = ricci_type(P.christoffel_jets(surface_env(x, y, 1)));
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = r[i][j].value();
  return out;
}

Mat2 curvature_at(const ProjectiveSurface& P, double x, double y) {
  const JetMat2 R = curvature_01(P.christoffel_jets(surface_env(x, y, 1)));
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = R[i][j].value();
  return out;
}

std::array<double, 2> cotton(const ProjectiveSurface& P, double x, double y) {
  const ChristoffelJets G = P.christoffel_jets(surface_env(x, y, 2));
  const JetMat2 r = ricci_type(G);  // order 1
  auto Dr = [&](int i, int j, int k) {
    double v = r[j][k].d(i);
    for (int m = 0; m < 2; ++m) v -= G(m, i, j).value() * r[m][k].value() + G(m, i, k).value() * r[j][m].value();
    return v;
  };
  return {Dr(0, 1, 0) - Dr(1, 0, 0), Dr(0, 1, 1) - Dr(1, 0, 1)};
}

std::array<double, 4> lifted_spray(const ProjectiveSurface& P, const std::array<double, 4>& s) {
  if (s[2] == 0.0 && s[3] == 0.0) throw DomainError("lifted spray at the zero fiber vector");
  DoubleEnv env;
  env.set(Var::x, s[0]).set(Var::y, s[1]);
  double G[6];
  for (int k = 0; k < 6; ++k) G[k] = evaluate(P.christoffels()[k], env);
  auto g = [&](int i, int j, int k) { return G[christoffel_slot(i, j, k)]; };
  const double pi[2] = {s[2], s[3]};
  double trace = 0.0;  // Gamma^E_BE pi^B
  for (int b = 0; b < 2; ++b)
    for (int e = 0; e < 2; ++e) trace += g(e, b, e) * pi[b];
  std::array<double, 4> v{pi[0], pi[1], 0.0, 0.0};
  for (int a = 0; a < 2; ++a) {
    double q = 0.0;
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) q += g(a, b, c) * pi[b] * pi[c];
    v[2 + a] = q - 2.0 / 3.0 * pi[a] * trace;
  }
  return v;
}

double GeodesicPoint::lambda() const {
  if (!inverted) return slope;
  return slope == 0.0 ? HUGE_VAL : 1.0 / slope;
}

namespace {

struct ChartState {
  double x, y, s, ell;
};

}  // namespace

std::vector<GeodesicPoint> integrate_geodesic(const ProjectiveSurface& P, double x0, double y0, double lambda0,
                                              double length, double step, const TransportIntegrand& transport) {
  if (!(step > 0.0)) throw std::invalid_argument("geodesic step must be positive");
  if (!(length >= 0.0)) throw std::invalid_argument("geodesic length must be nonnegative");
  const auto a = spray_coeffs(P);

  bool inverted = false;
  double dir = 1.0;
  ChartState st{x0, y0, lambda0, 0.0};
  if (std::fabs(lambda0) > 1.0) {
    inverted = true;
    dir = lambda0 > 0 ? 1.0 : -1.0;
    st.s = 1.0 / lambda0;
  }

  auto rhs = [&](const ChartState& q) {
    DoubleEnv env;
    env.set(Var::x, q.x).set(Var::y, q.y);
    double c[4];
    for (int j = 0; j < 4; ++j) c[j] = evaluate(a[j], env);
    ChartState d{};
    if (!inverted) {
      d.x = dir;
      d.y = dir * q.s;
      d.s = dir * (c[0] + q.s * (c[1] + q.s * (c[2] + q.s * c[3])));
    } else {
      // mu = 1/lambda with y as parameter: dmu/dy = -(a3 + a2 mu + a1 mu^2 + a0 mu^3)
      d.x = dir * q.s;
      d.y = dir;
      d.s = -dir * (c[3] + q.s * (c[2] + q.s * (c[1] + q.s * c[0])));
    }
    d.ell = transport ? transport(q.x, q.y, d.x, d.y) : 0.0;
    if (!std::isfinite(d.x + d.y + d.s + d.ell)) throw DomainError("geodesic left the domain of the spray");
    return d;
  };
  auto axpy = [](const ChartState& q, double h, const ChartState& d) {
    return ChartState{q.x + h * d.x, q.y + h * d.y, q.s + h * d.s, q.ell + h * d.ell};
  };

  std::vector<GeodesicPoint> path;
  path.push_back({st.x, st.y, st.s, inverted, st.ell});
  const long steps = static_cast<long>(std::ceil(length / step - 1e-9));
  const double h = steps > 0 ? length / steps : 0.0;
  for (long n = 0; n < steps; ++n) {
    const ChartState k1 = rhs(st);
    const ChartState k2 = rhs(axpy(st, h / 2, k1));
    const ChartState k3 = rhs(axpy(st, h / 2, k2));
    const ChartState k4 = rhs(axpy(st, h, k3));
    st.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    st.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    st.s += h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
    st.ell += h / 6 * (k1.ell + 2 * k2.ell + 2 * k3.ell + k4.ell);
    if (std::fabs(st.s) > 1.0) {
      dir *= st.s > 0 ? 1.0 : -1.0;
      st.s = 1.0 / st.s;
      inverted = !inverted;
    }
    path.push_back({st.x, st.y, st.s, inverted, st.ell});
  }
  return path;
}

CongruenceSample congruence_residual(const ProjectiveSurface& P, const Expr& beta, const DoubleEnv& point) {
  std::vector<Var> coords{Var::x, Var::y};
  std::vector<double> vals{point.value[0], point.value[1]};
  for (int v = 0; v < kNumVars; ++v) {
    if (v == static_cast<int>(Var::x) || v == static_cast<int>(Var::y)) continue;
    if (point.bound & (1u << v)) {
      coords.push_back(static_cast<Var>(v));
      vals.push_back(point.value[v]);
    }
  }
  const JetEnv env = seed_env(coords, vals, 1);
  const Jet b = evaluate(beta, env);
  const auto a = spray_coeffs(P);
  double c[4];
  for (int j = 0; j < 4; ++j) c[j] = evaluate(a[j], env).value();
  const double B = b.value(), bx = b.d(0), by = b.d(1);
  CongruenceSample out;
  out.residual = bx + B * by - (c[0] + B * (c[1] + B * (c[2] + B * c[3])));
  // b(lambda) = beta_y - (a(lambda) - a(beta)) / (lambda - beta), divided difference expanded
  out.b = {by - c[1] - c[2] * B - c[3] * B * B, -c[2] - c[3] * B, -c[3]};
  return out;
}

}  // namespace sdp
