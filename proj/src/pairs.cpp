#include "sdp/pairs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "sdp/fields.hpp"

namespace sdp {

namespace {

Expr lam() { return Expr::variable(Var::lambda); }

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct ProjectionAt {
  double b = 0.0, residual = 0.0, bracket = 0.0;
};

ProjectionAt project_bracket(const std::array<Expr, 5>& L0, const std::array<Expr, 5>& L1,
                             const std::array<Var, 5>& coords, const std::array<double, 4>& point, double l) {
  const std::array<double, 5> vals{point[0], point[1], point[2], point[3], l};
  const JetEnv env = seed_env(coords, vals, 1);
  const JetVec A = evaluate_all(L0, env);
  const JetVec B = evaluate_all(L1, env);
  const std::vector<double> br = values(bracket(A, B));
  const std::vector<double> a = values(A);
  double aa = 0.0, ab = 0.0;
  for (int i = 0; i < 5; ++i) {
    aa += a[i] * a[i];
    ab += a[i] * br[i];
  }
  if (!(aa > 0.0)) throw DomainError("L0 vanishes at a sample point");
  ProjectionAt out;
  out.b = ab / aa;
  std::vector<double> rest(5);
  for (int i = 0; i < 5; ++i) rest[i] = br[i] - out.b * a[i];
  out.residual = norm(rest);
  out.bracket = norm(br);
  return out;
}

}  // namespace

LaxPair build_lax(const ProjectiveSurface& P, const ProjectivePair& pair) {
  const auto a = spray_coeffs(P);
  const Expr l = lam();
  LaxPair L;
  L.coords = {Var::x, Var::y, pair.fiber[0], pair.fiber[1], Var::lambda};
  for (int k = 0; k < 2; ++k) {
    L.L0[2 + k] = pair.phi0[k] + l * pair.phi1[k];
    L.L1[2 + k] = pair.alpha0[k] + l * pair.alpha1[k];
    L.L0_inv[2 + k] = l * pair.phi0[k] + pair.phi1[k];
    L.L1_inv[2 + k] = l * pair.alpha0[k] + pair.alpha1[k];
  }
  L.L1[0] = Expr(1.0);
  L.L1[1] = l;
  L.L1[4] = spray_poly(a, l);
  L.L1_inv[0] = l;
  L.L1_inv[1] = Expr(1.0);
  // mu^3 a(1/mu) = a3 + a2 mu + a1 mu^2 + a0 mu^3
  L.L1_inv[4] = -spray_poly({a[3], a[2], a[1], a[0]}, l);
  return L;
}

LaxSample lax_residual(const LaxPair& L, const std::array<double, 4>& point) {
  LaxSample out;
  Eigen::Matrix<double, 7, 4> V;
  Eigen::Matrix<double, 7, 1> bs;
  for (std::size_t k = 0; k < kLambdaSamples.size(); ++k) {
    const double l = kLambdaSamples[k];
    const ProjectionAt p = project_bracket(L.L0, L.L1, L.coords, point, l);
    out.residual = std::max(out.residual, p.residual);
    out.bracket_norm = std::max(out.bracket_norm, p.bracket);
    bs(k) = p.b;
    for (int j = 0; j < 4; ++j) V(k, j) = std::pow(l, j);
  }
  const Eigen::Vector4d c = V.colPivHouseholderQr().solve(bs);
  for (int j = 0; j < 4; ++j) out.b[j] = c(j);
  out.fit_residual = (V * c - bs).cwiseAbs().maxCoeff();
  for (double mu : kInverseSamples) {
    const ProjectionAt p = project_bracket(L.L0_inv, L.L1_inv, L.coords, point, mu);
    out.inverse_residual = std::max(out.inverse_residual, p.residual);
  }
  return out;
}

double projective_pair_residual(const ProjectiveSurface& P, const ProjectivePair& pair,
                                const std::array<double, 4>& point) {
  const auto coords = pair.coords();
  const JetEnv env = seed_env(coords, point, 1);
  const ChristoffelJets G = P.christoffel_jets(env);
  auto vertical = [&](const VField& f) {
    const JetVec c = evaluate_all(f, env);
    return JetVec{Jet(env.layout), Jet(env.layout), c[0], c[1]};
  };
  const JetVec phi[2] = {vertical(pair.phi0), vertical(pair.phi1)};
  const JetVec alpha[2] = {vertical(pair.alpha0), vertical(pair.alpha1)};
  const double c[2] = {evaluate(pair.c0, env).value(), evaluate(pair.c1, env).value()};
  auto g = [&](int i, int j, int k) { return G(i, j, k).value(); };
  const double gam[2] = {g(0, 0, 0) + g(1, 0, 1), g(0, 1, 0) + g(1, 1, 1)};

  // term(i, j): d_i phi_j + [alpha_i, phi_j] + (c_i - 2/3 gamma_i) phi_j + Gamma^0_ij phi_0 + Gamma^1_ij phi_1
  auto term = [&](int i, int j) {
    const JetVec br = bracket(alpha[i], phi[j]);
    std::array<double, 2> out{};
    for (int k = 0; k < 2; ++k) {
      out[k] = phi[j][2 + k].d(i) + br[2 + k].value() + (c[i] - 2.0 / 3.0 * gam[i]) * phi[j][2 + k].value() +
               g(0, i, j) * phi[0][2 + k].value() + g(1, i, j) * phi[1][2 + k].value();
    }
    return out;
  };
  const auto e00 = term(0, 0), e01 = term(0, 1), e10 = term(1, 0), e11 = term(1, 1);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    worst = std::max(worst, std::fabs(e00[k]));
    worst = std::max(worst, std::fabs(e01[k] + e10[k]));
    worst = std::max(worst, std::fabs(e11[k]));
  }
  return worst;
}

VField fiber_bracket(const ProjectivePair& pair, const VField& u, const VField& v) {
  VField out;
  for (int i = 0; i < 2; ++i) {
    Expr s(0.0);
    for (int j = 0; j < 2; ++j)
      s = s + u[j] * differentiate(v[i], pair.fiber[j]) - v[j] * differentiate(u[i], pair.fiber[j]);
    out[i] = s;
  }
  return out;
}

DwQuadrature dw_quadrature_build(const ProjectiveSurface& P, const Expr& gamma, double c_twist, const Expr& H,
                                 const Expr& G, const Expr& C) {
  const auto a = spray_coeffs(P);
  const Expr z = Expr::variable(Var::z);
  const Expr gy = differentiate(gamma, Var::y);
  DwQuadrature out;
  out.beta = gamma + Expr(c_twist) * z;
  out.E = (a[1] + gamma * a[2] + pow(gamma, 2) * a[3] - gy) * z;
  out.F = a[3] * z * out.beta + (a[2] + gamma * a[3]) * z;
  out.C = C;
  out.D = -(a[3] * G);

  ProjectivePair& pr = out.pair;
  pr.fiber = {Var::t, Var::z};
  pr.phi0 = {H, -out.beta};
  pr.phi1 = {Expr(0.0), Expr(1.0)};
  pr.alpha0 = {out.C, out.E};
  pr.alpha1 = {out.D, out.F};
  pr.c0 = a[1] / Expr(3.0);
  pr.c1 = Expr(2.0 / 3.0) * a[2] + a[3] * out.beta;

  out.congruence_residual = differentiate(gamma, Var::x) + gamma * gy - spray_poly(a, gamma);
  out.primitive_residual = differentiate(G, Var::z) - H;
  out.transport_residual = differentiate(H, Var::x) + out.beta * differentiate(H, Var::y) +
                           (out.E + out.beta * out.F) * differentiate(H, Var::z);
  out.c_residual = differentiate(C, Var::z) - (differentiate(H, Var::y) + out.F * differentiate(H, Var::z));
  return out;
}

double dw_transport_characteristic(const ProjectiveSurface& P, const Expr& gamma, double c_twist, const Expr& h0,
                                   double x0, double x, double y, double z, int steps) {
  const DwQuadrature q = dw_quadrature_build(P, gamma, c_twist, Expr(1.0), Expr::variable(Var::z));
  const Expr dz = q.E + q.beta * q.F;
  auto rhs = [&](double xs, double ys, double zs) {
    DoubleEnv env;
    env.set(Var::x, xs).set(Var::y, ys).set(Var::z, zs);
    return std::array<double, 2>{evaluate(q.beta, env), evaluate(dz, env)};
  };
  const double h = (x0 - x) / steps;
  double xs = x, ys = y, zs = z;
  for (int i = 0; i < steps; ++i) {
    const auto k1 = rhs(xs, ys, zs);
    const auto k2 = rhs(xs + h / 2, ys + h / 2 * k1[0], zs + h / 2 * k1[1]);
    const auto k3 = rhs(xs + h / 2, ys + h / 2 * k2[0], zs + h / 2 * k2[1]);
    const auto k4 = rhs(xs + h, ys + h * k3[0], zs + h * k3[1]);
    ys += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    zs += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    xs = x + (i + 1) * h;
  }
  DoubleEnv env;
  env.set(Var::x, x0).set(Var::y, ys).set(Var::z, zs);
  return evaluate(h0, env);
}

TwistFree twist_free_normal_form(const ProjectiveSurface& P, const Expr& beta, const Expr& p, const Expr& q) {
  const auto a = spray_coeffs(P);
  const Expr z = Expr::variable(Var::z);
  const Expr by = differentiate(beta, Var::y);
  const Expr d1 = spray_poly_d1(a, beta), d2 = spray_poly_d2(a, beta);
  TwistFree out;
  out.Q = -by + Expr(2.0 / 3.0) * d1 + Expr(1.0 / 6.0) * (lam() - beta) * d2;
  const Expr E = (-by + Expr(2.0 / 3.0) * d1 - Expr(1.0 / 6.0) * beta * d2) * z;
  const Expr F = Expr(1.0 / 6.0) * d2 * z;
  ProjectivePair& pr = out.pair;
  pr.fiber = {Var::t, Var::z};
  pr.phi0 = {p, -beta};
  pr.phi1 = {q, Expr(1.0)};
  pr.alpha0 = {Expr(0.0), E};
  pr.alpha1 = {Expr(0.0), F};
  out.congruence_residual = differentiate(beta, Var::x) + beta * by - spray_poly(a, beta);
  const Expr third(1.0 / 3.0);
  out.time_residuals = {
      differentiate(p, Var::x) + a[0] * q - third * a[1] * p,
      differentiate(q, Var::x) + differentiate(p, Var::y) + Expr(2.0 / 3.0) * (a[1] * q - a[2] * p),
      differentiate(q, Var::y) + third * a[2] * q - a[3] * p,
  };
  return out;
}

ProjectiveSurface null_kahler_surface(const Expr& a) {
  return ProjectiveSurface::from_spray({a, Expr(0.0), Expr(0.0), Expr(0.0)});
}

ProjectivePair null_kahler_pair(const Expr& a, const Expr& c) {
  ProjectivePair pr;
  pr.fiber = {Var::t, Var::z};
  pr.phi0 = {Expr(0.0), Expr(1.0)};
  pr.phi1 = {Expr(1.0), Expr(0.0)};
  pr.alpha0 = {a * Expr::variable(Var::z), Expr(0.0)};
  pr.alpha1 = {c, Expr(0.0)};
  return pr;
}

GaugeSample gauge_sample(const ProjectivePair& pair, const std::array<double, 4>& point) {
  const auto coords = pair.coords();
  const JetEnv env = seed_env(coords, point, 2);
  const VField* fields[4] = {&pair.phi0, &pair.phi1, &pair.alpha0, &pair.alpha1};
  GaugeSample s;
  Jet div[4];
  for (int f = 0; f < 4; ++f) {
    const JetVec c = evaluate_all(*fields[f], env);
    div[f] = c[0].derivative(2) + c[1].derivative(3);
    const double dv = std::fabs(div[f].value());
    if (f < 2) s.div_phi = std::max(s.div_phi, dv);
    else s.div_alpha = std::max(s.div_alpha, dv);
    s.div_variation = std::max({s.div_variation, std::fabs(div[f].d(2)), std::fabs(div[f].d(3))});
    for (int k = 0; k < 2; ++k) {
      s.t_dependence = std::max(s.t_dependence, std::fabs(c[k].d(2)));
      s.z_curvature = std::max(s.z_curvature, std::fabs(c[k].extract({0, 0, 0, 2})));
      if (f < 2) s.phi_z_dependence = std::max(s.phi_z_dependence, std::fabs(c[k].d(3)));
    }
  }
  s.area_curvature = std::fabs(div[3].d(0) - div[2].d(1));
  s.area_variation = std::max({std::fabs(div[2].d(2)), std::fabs(div[2].d(3)), std::fabs(div[3].d(2)),
                               std::fabs(div[3].d(3))});
  return s;
}

GaugeSample max_merge(const GaugeSample& a, const GaugeSample& b) {
  GaugeSample m;
  m.div_phi = std::max(a.div_phi, b.div_phi);
  m.div_alpha = std::max(a.div_alpha, b.div_alpha);
  m.div_variation = std::max(a.div_variation, b.div_variation);
  m.t_dependence = std::max(a.t_dependence, b.t_dependence);
  m.z_curvature = std::max(a.z_curvature, b.z_curvature);
  m.phi_z_dependence = std::max(a.phi_z_dependence, b.phi_z_dependence);
  m.area_curvature = std::max(a.area_curvature, b.area_curvature);
  m.area_variation = std::max(a.area_variation, b.area_variation);
  return m;
}

GaugeFlags gauge_flags(const GaugeSample& w, double tol) {
  GaugeFlags f;
  f.phi_in_sdiff2 = w.div_phi < tol;
  f.sdiff2 = f.phi_in_sdiff2 && w.div_alpha < tol;
  f.hdiff2 = w.div_variation < tol;
  f.hdiff2_phi_sdiff = f.hdiff2 && f.phi_in_sdiff2;
  f.o_times_diff1 = w.t_dependence < tol;
  f.aff1_translational = f.o_times_diff1 && w.z_curvature < tol && w.phi_z_dependence < tol;
  f.area_flat = w.area_curvature < tol && w.area_variation < tol && f.phi_in_sdiff2;
  return f;
}

}  // namespace sdp
