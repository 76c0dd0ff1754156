#include "sdp/minitwistor.hpp"

#include <algorithm>
#include <cmath>

#include "sdp/fields.hpp"

namespace sdp {

namespace {

using Psi = std::array<Jet, 2>;
using Sq = std::array<std::array<Jet, 2>, 2>;

JetEnv env_at(const Point2& p, int order) {
  const std::array<Var, 2> coords{Var::x, Var::y};
  return seed_env(coords, p, order);
}

ChristoffelJets truncated(const ChristoffelJets& G, int order) {
  ChristoffelJets out;
  for (int i = 0; i < 6; ++i) out.g[i] = G.g[i].truncate(order);
  return out;
}

// The stored Christoffels follow the spray dictionary (geodesics
// x'' = +Gamma x' x'); the connection used here is the one whose geodesics
// are the spray's integral curves, D_a d_b = -Gamma^c_ab d_c.
ChristoffelJets connection_jets(const ProjectiveSurface& P, const JetEnv& env) {
  ChristoffelJets G = P.christoffel_jets(env);
  for (Jet& j : G.g) j = -j;
  return G;
}

Psi psi_of(const Vector2Expr& phi, const JetEnv& env) {
  return {-evaluate(phi[1], env), evaluate(phi[0], env)};
}

// S_ab = d_a psi_b - Gamma^c_ab psi_c + (2/3) tau_a psi_b (+ rho_a psi_b when
// rho is given), one order below psi.
Sq covariant(const ChristoffelJets& G, const Psi& psi, const std::array<Jet, 2>* rho) {
  const int k = psi[0].order() - 1;
  const ChristoffelJets g = truncated(G, k);
  Psi p{psi[0].truncate(k), psi[1].truncate(k)};
  Sq S;
  for (int a = 0; a < 2; ++a) {
    const Jet tau = g(0, a, 0) + g(1, a, 1);
    for (int b = 0; b < 2; ++b) {
      Jet s = psi[b].derivative(a) - g(0, a, b) * p[0] - g(1, a, b) * p[1] + (2.0 / 3.0) * tau * p[b];
      if (rho) s += (*rho)[a].truncate(k) * p[b];
      S[a][b] = s;
    }
  }
  return S;
}

double sym_norm(const Sq& S) {
  return std::max({std::fabs(S[0][0].value()), std::fabs(S[1][1].value()),
                   std::fabs(0.5 * (S[0][1].value() + S[1][0].value()))});
}

// Least-squares rho from sym(S0 + rho psi) = 0, at jet level.
std::array<Jet, 2> solve_rho(const Sq& S0, const Psi& psi) {
  const int k = S0[0][0].order();
  const Jet p0 = psi[0].truncate(k), p1 = psi[1].truncate(k);
  const Jet zero = 0.0 * p0;
  // rows (00), (11), (01)
  const std::array<std::array<Jet, 2>, 3> A{{{p0, zero}, {zero, p1}, {0.5 * p1, 0.5 * p0}}};
  const std::array<Jet, 3> b{S0[0][0], S0[1][1], 0.5 * (S0[0][1] + S0[1][0])};
  JetMat N(2, JetVec(2, zero));
  JetVec rhs(2, zero);
  for (int r = 0; r < 3; ++r)
    for (int i = 0; i < 2; ++i) {
      rhs[i] -= A[r][i] * b[r];
      for (int j = 0; j < 2; ++j) N[i][j] += A[r][i] * A[r][j];
    }
  const JetVec x = solve(N, rhs);
  return {x[0], x[1]};
}

Mat2 values_of(const JetMat2& m) {
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = m[i][j].value();
  return out;
}

}  // namespace

WeightedCongruence congruence_connection(const ProjectiveSurface& P, const Expr& beta) {
  const Expr one(1.0);
  const std::array<Expr, 2> psi{-beta, one};
  auto G = [&](int i, int j, int k) { return -P.gamma(i, j, k); };
  const Expr tau0 = G(0, 0, 0) + G(1, 0, 1);
  const Expr tau1 = G(0, 1, 0) + G(1, 1, 1);
  const Expr rho1 = G(0, 1, 1) * psi[0] + G(1, 1, 1) * psi[1] - Expr(2.0 / 3.0) * tau1;
  const Expr rho0 = differentiate(beta, Var::y) + Expr(2.0) * (G(0, 0, 1) * psi[0] + G(1, 0, 1) * psi[1]) -
                    Expr(2.0 / 3.0) * (tau0 - beta * tau1) + beta * rho1;
  return {{one, beta}, {rho0, rho1}};
}

double abelian_pair_residual(const ProjectiveSurface& P, const WeightedCongruence& c, std::span<const Point2> points) {
  double worst = 0.0;
  for (const Point2& p : points) {
    const JetEnv env = env_at(p, 1);
    const std::array<Jet, 2> rho{evaluate(c.rho[0], env), evaluate(c.rho[1], env)};
    const Sq S = covariant(connection_jets(P, env), psi_of(c.phi, env), &rho);
    worst = std::max(worst, sym_norm(S));
  }
  return worst;
}

CanonicalConnection canonical_connection_from_congruence(const ProjectiveSurface& P, const Vector2Expr& phi,
                                                         const Point2& point) {
  const JetEnv env = env_at(point, 3);
  const Psi psi = psi_of(phi, env);
  const double n2 = psi[0].value() * psi[0].value() + psi[1].value() * psi[1].value();
  if (!(n2 > 1e-24)) throw DomainError("congruence field vanishes at the sample point");
  const ChristoffelJets G = connection_jets(P, env);

  const Sq S0 = covariant(G, psi, nullptr);  // order 2
  const std::array<Jet, 2> rho = solve_rho(S0, psi);
  const Sq S = covariant(G, psi, &rho);

  CanonicalConnection out;
  out.rho = {rho[0].value(), rho[1].value()};
  out.residual = sym_norm(S);
  out.skew = S[0][1].value() - S[1][0].value();

  // gamma with gamma0 psi1 - gamma1 psi0 = -kappa/2 kills the skew part.
  const int k = S[0][0].order();
  const Jet p0 = psi[0].truncate(k), p1 = psi[1].truncate(k);
  const Jet kappa = S[0][1] - S[1][0];
  const Jet scale = -0.5 * kappa / (p0 * p0 + p1 * p1);
  const ChristoffelJets Gt = projective_change(truncated(G, k), scale * p1, -1.0 * scale * p0);
  const Mat2 r = values_of(ricci_type(Gt));
  const double f[2] = {evaluate(phi[0], DoubleEnv().set(Var::x, point[0]).set(Var::y, point[1])),
                       evaluate(phi[1], DoubleEnv().set(Var::x, point[0]).set(Var::y, point[1]))};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out.r_phi_phi += r[a][b] * f[a] * f[b];
  return out;
}

DivisorTwoReport divisor_two_report(const ProjectiveSurface& P, const WeightedCongruence& c1,
                                    const WeightedCongruence& c2, std::span<const Point2> points, double tol) {
  DivisorTwoReport rep;
  for (const Point2& pt : points) {
    const JetEnv env = env_at(pt, 3);
    const int k = 2;
    const ChristoffelJets G = connection_jets(P, env);
    const Psi a = psi_of(c1.phi, env), b = psi_of(c2.phi, env);
    const double det = a[0].value() * b[1].value() - a[1].value() * b[0].value();
    if (!(std::fabs(det) > 1e-12)) throw DomainError("congruences are dependent at a sample point");

    std::array<Jet, 2> rho1{evaluate(c1.rho[0], env), evaluate(c1.rho[1], env)};
    std::array<Jet, 2> rho2{evaluate(c2.rho[0], env), evaluate(c2.rho[1], env)};

    // c_bc = psi1_b psi2_c + psi1_c psi2_b, weight 4, coupled to rho1 + rho2.
    Sq c;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c[i][j] = a[i] * b[j] + a[j] * b[i];
    const ChristoffelJets g = truncated(G, k);
    Sq ck;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) ck[i][j] = c[i][j].truncate(k);

    static constexpr int kPairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
    std::array<Jet, 6> E;
    std::array<std::array<Jet, 2>, 6> M;
    for (int x = 0; x < 2; ++x) {
      const Jet tau = g(0, x, 0) + g(1, x, 1);
      const Jet w = (4.0 / 3.0) * tau + rho1[x].truncate(k) + rho2[x].truncate(k);
      for (int q = 0; q < 3; ++q) {
        const int i = kPairs[q][0], j = kPairs[q][1];
        Jet e = c[i][j].derivative(x) + w * ck[i][j];
        for (int d = 0; d < 2; ++d) e -= g(d, x, i) * ck[d][j] + g(d, x, j) * ck[i][d];
        const int r = 3 * x + q;
        E[r] = e;
        // (w - 2) gamma(X) c - gamma(Y) c(X, .) - gamma(.) c(X, Y), w = 4
        for (int m = 0; m < 2; ++m) {
          Jet coef = 0.0 * e;
          if (m == x) coef += 2.0 * ck[i][j];
          if (m == i) coef -= ck[x][j];
          if (m == j) coef -= ck[x][i];
          M[r][m] = coef;
        }
      }
    }
    const Jet zero = 0.0 * E[0];
    JetMat N(2, JetVec(2, zero));
    JetVec rhs(2, zero);
    for (int r = 0; r < 6; ++r)
      for (int m = 0; m < 2; ++m) {
        rhs[m] -= M[r][m] * E[r];
        for (int n = 0; n < 2; ++n) N[m][n] += M[r][m] * M[r][n];
      }
    const double ndet = N[0][0].value() * N[1][1].value() - N[0][1].value() * N[1][0].value();
    if (!(std::fabs(ndet) > 1e-24)) throw DomainError("degenerate conformal metric in the Weyl solve");
    const JetVec gam = solve(N, rhs);

    DivisorTwoPoint out;
    out.gamma = {gam[0].value(), gam[1].value()};
    for (int r = 0; r < 6; ++r)
      out.dc_residual = std::max(out.dc_residual,
                                 std::fabs(E[r].value() + M[r][0].value() * out.gamma[0] + M[r][1].value() * out.gamma[1]));
    const Mat2 rr = values_of(ricci_type(projective_change(g, gam[0], gam[1])));
    out.r_sym = std::max({std::fabs(rr[0][0]), std::fabs(rr[1][1]), std::fabs(0.5 * (rr[0][1] + rr[1][0]))});
    out.r_skew = std::fabs(0.5 * (rr[0][1] - rr[1][0]));
    out.f1 = rho1[1].d(0) - rho1[0].d(1);
    out.f2 = rho2[1].d(0) - rho2[0].d(1);

    rep.dc_residual = std::max(rep.dc_residual, out.dc_residual);
    rep.r_sym = std::max(rep.r_sym, out.r_sym);
    rep.r_skew = std::max(rep.r_skew, out.r_skew);
    rep.f_sum = std::max(rep.f_sum, std::fabs(out.f1 + out.f2));
    rep.f_diff = std::max(rep.f_diff, std::fabs(out.f1 - out.f2));
    rep.points.push_back(out);
  }
  rep.r_symmetric = rep.r_skew < tol;
  rep.r_skew_only = rep.r_sym < tol;
  rep.sum_flat = rep.f_sum < tol;
  rep.diff_flat = rep.f_diff < tol;
  rep.consistent = rep.r_symmetric == rep.sum_flat && rep.r_skew_only == rep.diff_flat;
  return rep;
}

WardTransport ward_transport(const ProjectiveSurface& P, const Vector2Expr& rho, double x, double y, double lambda,
                             double length, double step) {
  auto integrand = [&](double px, double py, double dx, double dy) {
    DoubleEnv env;
    env.set(Var::x, px).set(Var::y, py);
    return -(evaluate(rho[0], env) * dx + evaluate(rho[1], env) * dy);
  };
  const auto path = integrate_geodesic(P, x, y, lambda, length, step, integrand);
  WardTransport out;
  out.end = path.back();
  out.value = std::exp(out.end.ell);
  if (!std::isfinite(out.value)) throw DomainError("transport left the domain of the connection");
  return out;
}

double projective_field_residual(const ProjectiveSurface& P, const Vector2Expr& V, std::span<const Point2> points) {
  const auto a = spray_coeffs(P);
  const Expr lam = Expr::variable(Var::lambda);
  const Expr spray_l = spray_poly(a, lam);
  const std::array<Var, 3> coords{Var::x, Var::y, Var::lambda};
  double worst = 0.0;
  for (const Point2& p : points)
    for (double l : kFieldSlopes) {
      const std::array<double, 3> vals{p[0], p[1], l};
      const JetEnv env = seed_env(coords, vals, 2);
      const Jet v0 = evaluate(V[0], env), v1 = evaluate(V[1], env);
      const Jet L = env.value[static_cast<int>(Var::lambda)].truncate(1);
      const Jet ldot = v1.derivative(0) + L * (v1.derivative(1) - v0.derivative(0)) - L * L * v0.derivative(1);
      const JetVec Vt{v0.truncate(1), v1.truncate(1), ldot};
      const JetVec S{0.0 * L + 1.0, L, evaluate(spray_l, env).truncate(1)};
      const std::vector<double> br = values(bracket(Vt, S));
      worst = std::max(worst, span_residual(br, {values(S)}));
    }
  return worst;
}

}  // namespace sdp
