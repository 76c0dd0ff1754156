#include <doctest.h>

#include <cmath>
#include <random>

#include "sdp/conformal.hpp"

using namespace sdp;

namespace {

const std::vector<Var> kVars{Var::x, Var::y, Var::t, Var::z, Var::w1, Var::w2};
Expr E(const char* s) { return parse(s, kVars); }
const VectorExpr kDt{Expr(0.0), Expr(0.0), Expr(1.0), Expr(0.0)};

ProjectivePair flat_pair() {
  ProjectivePair p;
  p.phi0 = {Expr(1.0), Expr(0.0)};
  p.phi1 = {Expr(0.0), Expr(1.0)};
  return p;
}

ProjectiveSurface linear_spray() { return ProjectiveSurface::from_spray({Expr(0.0), Expr(1.0), Expr(0.0), Expr(0.0)}); }

DwQuadrature twisting_dw() {
  return dw_quadrature_build(ProjectiveSurface(), Expr(0.0), 1.0, E("1 + (y - z*x)^2"),
                             E("z + y^2*z - x*y*z^2 + x^2*z^3/3"), E("2*y*z - x*z^2"));
}

std::vector<Vec4> box(std::uint64_t seed, int n, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<Vec4> pts;
  for (int i = 0; i < n; ++i) pts.push_back({U(rng), U(rng), U(rng), U(rng)});
  return pts;
}

double diff(const Mat4& a, const Mat4& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s = std::max(s, std::fabs(a[i][j] - b[i][j]));
  return s;
}

double max_entry(const Mat4& a) {
  double s = 0.0;
  for (const auto& r : a)
    for (double x : r) s = std::max(s, std::fabs(x));
  return s;
}

Expr random_poly(std::mt19937_64& rng, Var u, Var v, int deg) {
  std::uniform_int_distribution<int> c(-3, 3);
  Expr e(0.0);
  for (int i = 0; i <= deg; ++i)
    for (int j = 0; i + j <= deg; ++j)
      e = e + Expr(c(rng) / 3.0) * pow(Expr::variable(u), i) * pow(Expr::variable(v), j);
  return e;
}

// null-Kahler formula g = f (dz dy - (dt - a z dx - c dy) dx) on (x, y, t, z)
Mat4 null_kahler_formula(double a, double c, double f, double z) {
  const Vec4 th{-a * z, -c, 1.0, 0.0}, dx{1, 0, 0, 0}, dy{0, 1, 0, 0}, dz{0, 0, 0, 1};
  Mat4 g{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g[i][j] = f * (dz[i] * dy[j] + dy[i] * dz[j] - th[i] * dx[j] - dx[i] * th[j]);
  return g;
}

}  // namespace

TEST_CASE("flat model metric and curvature") {
  const LaxPair L = build_lax(ProjectiveSurface(), flat_pair());
  const Metric4 m = metric_from_lax(L, {0.1, 0.2, 0.3, 0.4}, 3);
  // theta = (dw1, dw2, dx, dy): g = dw1 dy - dw2 dx on (x, y, w1, w2)
  Mat4 expect{};
  expect[2][1] = expect[1][2] = 1.0;
  expect[3][0] = expect[0][3] = -1.0;
  CHECK(diff(m.values(), expect) == 0.0);
  for (const auto& row : m.g)
    for (const Jet& j : row)
      for (int i = 1; i < j.layout()->size(); ++i) CHECK(j.coeffs()[i] == 0.0);
  const Curvature c = curvature(m);
  CHECK(c.riemann_norm < 1e-12);
  CHECK(c.weyl_plus_norm < 1e-12);
  CHECK(c.weyl_minus_norm < 1e-12);
  CHECK(c.positive == 2);
  CHECK(c.negative == 2);
}

TEST_CASE("frame read off the Lax pair matches the pair") {
  const DwQuadrature q = twisting_dw();
  const Frame4 a = frame_from_lax(build_lax(ProjectiveSurface(), q.pair));
  const Frame4 b = frame_from_pair(q.pair);
  DoubleEnv env;
  env.set(Var::x, 0.3).set(Var::y, -0.4).set(Var::t, 0.5).set(Var::z, 0.7);
  for (int A = 0; A < 4; ++A)
    for (int i = 0; i < 4; ++i) CHECK(evaluate(a.X[A][i], env) == doctest::Approx(evaluate(b.X[A][i], env)));
}

TEST_CASE("quadrature metric matches its closed form") {
  const std::vector<DwQuadrature> family{
      twisting_dw(),
      dw_quadrature_build(ProjectiveSurface(), E("y/x"), 0.0, Expr(1.0), E("z")),
      dw_quadrature_build(linear_spray(), E("y/(1 + exp(-x))"), 0.0, Expr(1.0), E("z")),
  };
  for (const DwQuadrature& q : family) {
    const LaxPair L = build_lax(ProjectiveSurface(), q.pair);
    for (const Vec4& p : box(31, 32, 0.5, 1.5)) {
      const Mat4 g = metric_from_lax(L, p, 1).values();
      const Mat4 closed = dw_metric(q.pair, p);
      CHECK(diff(g, closed) <= 1e-12 * max_entry(closed));
    }
  }
}

TEST_CASE("null-Kahler metric matches its formula") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Expr a = random_poly(rng, Var::x, Var::y, 2), c = random_poly(rng, Var::x, Var::y, 2);
    const Expr f = Expr(2.0) + Expr(0.5) * random_poly(rng, Var::x, Var::z, 1);
    for (const Expr& factor : {Expr(1.0), f}) {
      const NullKahler nk = build_null_kahler(a, c, factor);
      for (const Vec4& p : box(40 + trial, 8, -0.5, 0.5)) {
        DoubleEnv env;
        env.set(Var::x, p[0]).set(Var::y, p[1]).set(Var::t, p[2]).set(Var::z, p[3]);
        const Mat4 want = null_kahler_formula(evaluate(a, env), evaluate(c, env), evaluate(factor, env), p[3]);
        CHECK(diff(metric_from_lax(nk.lax, p, 1, factor).values(), want) <= 1e-12 * max_entry(want));
      }
    }
  }
}

TEST_CASE("curvature pipeline against the symbolic oracle") {
  const Vec4 pt{0.3, 0.4, 0.2, 0.5};
  SUBCASE("null-Kahler member") {
    const NullKahler nk = build_null_kahler(E("x + y"), E("x*y"), E("1 + x^2 + z^2"));
    const Curvature c = curvature(metric_from_lax(nk.lax, pt, 2, nk.factor));
    CHECK(std::fabs(c.scalar) < 1e-12);
    const double ric[4][4] = {{-3.266429048785921, 0, 0, 0.5012252171975942},
                              {0, 0, 0, 0},
                              {0, 0, 0, 0},
                              {0.5012252171975942, 0, 0, -0.6571619514368456}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(c.ricci[i][j] == doctest::Approx(ric[i][j]).epsilon(1e-11).scale(1));
    CHECK(c.weyl[2][1][0][1] == doctest::Approx(-1.0).epsilon(1e-11));
    CHECK(c.weyl[3][0][0][1] == doctest::Approx(-1.0).epsilon(1e-11));
  }
  SUBCASE("twisting quadrature metric") {
    const Curvature c = curvature(metric_from_lax(build_lax(ProjectiveSurface(), twisting_dw().pair), pt, 2));
    CHECK(c.scalar == doctest::Approx(1.411764705882353).epsilon(1e-11));
    const double ric[4][4] = {
        {0.8999307958477508, -1.4228373702422146, 0.1439446366782007, -0.5165397923875432},
        {-1.4228373702422146, 1.9044982698961939, 0.0, -0.46505190311418687},
        {0.1439446366782007, 0.0, -0.4429065743944637, 0.1328719723183391},
        {-0.5165397923875432, -0.46505190311418687, 0.1328719723183391, 0.13951557093425607}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(c.ricci[i][j] == doctest::Approx(ric[i][j]).epsilon(1e-11).scale(1));
    CHECK(c.weyl[0][0][0][1] == doctest::Approx(-0.5586354569509465).epsilon(1e-11));
    CHECK(c.weyl[0][0][0][2] == doctest::Approx(-0.11580704254019947).epsilon(1e-11));
    CHECK(c.weyl[0][0][0][3] == doctest::Approx(-0.25688581314878894).epsilon(1e-11));
    CHECK(c.weyl[0][0][1][2] == doctest::Approx(0.23161408508039893).epsilon(1e-11));
    CHECK(c.weyl[0][0][2][3] == doctest::Approx(0.03321799307958478).epsilon(1e-11));
    CHECK(c.weyl[0][2][0][2] == doctest::Approx(0.01563199674333401).epsilon(1e-11));
    // the quadrature metric is selfdual: the whole Weyl tensor is Weyl^+
    CHECK(c.weyl_minus_norm < 1e-12);
  }
}

TEST_CASE("orientation calibration on the null-Kahler family") {
  std::mt19937_64 rng(12);
  double plus = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const NullKahler nk = build_null_kahler(random_poly(rng, Var::x, Var::y, 3), random_poly(rng, Var::x, Var::y, 3),
                                            Expr(2.0) + Expr(0.5) * random_poly(rng, Var::x, Var::z, 2));
    for (const Vec4& p : box(70 + trial, 4, -0.5, 0.5)) {
      const Metric4 m = metric_from_lax(nk.lax, p, 2, nk.factor);
      const Curvature c = curvature(m, kOrientationSign), o = curvature(m, -kOrientationSign);
      CHECK(c.weyl_minus_norm < 1e-8);
      CHECK(o.weyl_plus_norm < 1e-8);
      CHECK(o.weyl_minus_norm == doctest::Approx(c.weyl_plus_norm));
      plus = std::max(plus, c.weyl_plus_norm);
    }
  }
  // the family is not conformally flat, so the choice is not vacuous
  CHECK(plus > 1e-2);
}

TEST_CASE("Hodge star on 2-forms in split signature") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const NullKahler nk = build_null_kahler(random_poly(rng, Var::x, Var::y, 2), random_poly(rng, Var::x, Var::y, 2),
                                            Expr(1.5) + Expr(0.3) * random_poly(rng, Var::x, Var::z, 2));
    const Curvature c = curvature(metric_from_lax(nk.lax, box(trial, 1, -0.5, 0.5)[0], 2, nk.factor));
    CHECK(c.star_defect < 1e-12);
    CHECK(c.projector_defect < 1e-12);
    CHECK(c.positive == 2);
    CHECK(c.negative == 2);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j)
            CHECK(std::fabs(c.weyl_plus[a][b][i][j] + c.weyl_minus[a][b][i][j] - c.weyl[a][b][i][j]) < 1e-12);
  }
}

TEST_CASE("Weyl with one index up is conformally invariant") {
  const LaxPair L = build_lax(ProjectiveSurface(), twisting_dw().pair);
  const Expr omega2 = E("1 + x^2 + y*z^2");
  for (const Vec4& p : box(8, 6, 0.2, 0.8)) {
    const Curvature a = curvature(metric_from_lax(L, p, 2));
    const Curvature b = curvature(metric_from_lax(L, p, 2, omega2));
    CHECK(b.ricci_norm > 1e-3);
    double d = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) d = std::max(d, std::fabs(a.weyl[i][j][k][l] - b.weyl[i][j][k][l]));
    CHECK(d < 1e-11 * std::max(1.0, a.weyl_norm));
    CHECK(b.weyl_minus_norm < 1e-11);
  }
}

TEST_CASE("hyperkahler subcases are Ricci-flat and selfdual") {
  SUBCASE("c = 0, f = 1/z^2") {
    const NullKahler nk = build_null_kahler(E("x"), Expr(0.0), E("1/z^2"));
    for (const Vec4& p : box(9, 32, 0.25, 1.0)) {
      const Curvature c = curvature(metric_from_lax(nk.lax, p, 3, nk.factor));
      CHECK(c.ricci_norm < 1e-9);
      CHECK(c.weyl_minus_norm < 1e-9);
    }
  }
  SUBCASE("a = 0, f = 1 (pp-wave)") {
    const NullKahler nk = build_null_kahler(Expr(0.0), E("x*y + y^3"), Expr(1.0));
    for (const Vec4& p : box(10, 32, -1.0, 1.0)) {
      const Curvature c = curvature(metric_from_lax(nk.lax, p, 3, nk.factor));
      CHECK(c.ricci_norm < 1e-10);
      CHECK(c.weyl_minus_norm < 1e-10);
    }
  }
  SUBCASE("a = 0, c = 0, f = 1 is flat") {
    const NullKahler nk = build_null_kahler(Expr(0.0), Expr(0.0), Expr(1.0));
    const NullKahlerChecks ch = null_kahler_checks(nk, {0.1, 0.2, 0.3, 0.4});
    CHECK(ch.curvature.riemann_norm < 1e-12);
    CHECK(ch.d_omega == 0.0);
  }
}

TEST_CASE("null-Kahler structure checks") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Expr a = random_poly(rng, Var::x, Var::y, 3), c = random_poly(rng, Var::x, Var::y, 3);
    const Expr f = Expr(2.0) + Expr(0.5) * random_poly(rng, Var::x, Var::z, 2);
    const NullKahler nk = build_null_kahler(a, c, f);
    for (const Vec4& p : box(90 + trial, 4, -0.5, 0.5)) {
      const NullKahlerChecks ch = null_kahler_checks(nk, p);
      CHECK(ch.d_omega < 1e-12);
      CHECK(ch.j_squared == 0.0);
      CHECK(ch.compatibility < 1e-10);
      CHECK(ch.j_isotropy < 1e-10);
      CHECK(ch.killing < 1e-12);
      CHECK(ch.omega_asd < 1e-10);
      CHECK(ch.omega_sd > 1e-3);
      CHECK(ch.curvature.weyl_minus_norm < 1e-8);
      // dz (x) d_t + dx (x) d_y misses exactly the c f dx (x) dx term
      DoubleEnv env;
      env.set(Var::x, p[0]).set(Var::y, p[1]).set(Var::z, p[3]);
      CHECK(ch.literal_j_compatibility == doctest::Approx(std::fabs(evaluate(c * f, env))).epsilon(1e-10).scale(1));
    }
  }
  SUBCASE("a = x + y, c = x y, f = 1 + x^2 + z^2") {
    const NullKahler nk = build_null_kahler(E("x + y"), E("x*y"), E("1 + x^2 + z^2"));
    for (const Vec4& p : box(99, 8, -1.0, 1.0)) {
      const NullKahlerChecks ch = null_kahler_checks(nk, p);
      CHECK(ch.d_omega < 1e-12);
      CHECK(ch.curvature.weyl_minus_norm < 1e-9);
    }
  }
}

TEST_CASE("selfdual certification") {
  const std::vector<Vec4> pts = box(15, 8, 0.5, 1.5);
  SUBCASE("flat model") {
    const SelfdualCertificate s = certify_selfdual(build_lax(ProjectiveSurface(), flat_pair()), pts, 1e-8);
    CHECK(s.pass);
    CHECK(s.weyl_minus < 1e-12);
  }
  SUBCASE("twist-free pairs with a time extension") {
    const SelfdualCertificate s = certify_selfdual(
        build_lax(ProjectiveSurface(), twist_free_normal_form(ProjectiveSurface(), E("y/x"), Expr(1.0)).pair), pts,
        1e-8);
    CHECK(s.pass);
    const ProjectiveSurface P = linear_spray();
    const SelfdualCertificate s2 = certify_selfdual(
        build_lax(P, twist_free_normal_form(P, E("y/(1 + exp(-x))"), E("exp(x/3)")).pair), pts, 1e-8);
    CHECK(s2.pass);
  }
  SUBCASE("the bare Diff_1 pair has a degenerate frame") {
    const LaxPair L = build_lax(ProjectiveSurface(), twist_free_normal_form(ProjectiveSurface(), E("y/x")).pair);
    CHECK_THROWS_AS(certify_selfdual(L, pts, 1e-8), DomainError);
  }
  SUBCASE("broken pairs fail with Weyl^- linear in the perturbation") {
    const DwQuadrature q = twisting_dw();
    CHECK(certify_selfdual(build_lax(ProjectiveSurface(), q.pair), pts, 1e-8).pass);
    double w[2];
    for (int k = 0; k < 2; ++k) {
      ProjectivePair pr = q.pair;
      const double eps = k == 0 ? 1e-2 : 1e-3;
      pr.alpha0[1] = pr.alpha0[1] + Expr(eps) * E("x*z^2 + y*z");
      const SelfdualCertificate s = certify_selfdual(build_lax(ProjectiveSurface(), pr), pts, 1e-8);
      CHECK_FALSE(s.pass);
      CHECK_FALSE(s.lax_ok);
      w[k] = s.weyl_minus;
    }
    CHECK(w[1] > 1e-6);
    CHECK(w[0] / w[1] == doctest::Approx(10.0).epsilon(0.05));
  }
}

TEST_CASE("Killing field K = d_t on quadrature metrics") {
  const DwQuadrature q = twisting_dw();
  const LaxPair L = build_lax(ProjectiveSurface(), q.pair);
  for (const Vec4& p : box(16, 8, 0.5, 1.5)) {
    const Metric4 m = metric_from_lax(L, p, 2);
    const KillingReport k = killing_report(m, kDt);
    CHECK(k.lie_norm < 1e-12);
    CHECK(k.conformal_residual < 1e-12);
    CHECK(std::fabs(k.norm_kk) < 1e-14);
    CHECK(k.geodesic_residual < 1e-9);
    CHECK(k.twist_transverse < 1e-12);
    CHECK(std::fabs(k.twist) > 0.1);

    // both null planes containing K are integrable
    const NullPlanes np = null_planes(m, kDt);
    CHECK(frobenius_residual({np.K, np.plus}) < 1e-9);
    CHECK(frobenius_residual({np.K, np.minus}) < 1e-9);
    const Mat4 g = m.values();
    auto dot = [&](const JetVec& u, const JetVec& v) {
      double t = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) t += g[i][j] * u[i].value() * v[j].value();
      return t;
    };
    for (const JetVec* X : {&np.plus, &np.minus}) {
      CHECK(std::fabs(dot(*X, *X)) < 1e-12);
      CHECK(std::fabs(dot(*X, np.K)) < 1e-12);
    }
  }
  SUBCASE("non-null control") {
    const Metric4 m = metric_from_lax(build_lax(ProjectiveSurface(), flat_pair()), {0.1, 0.2, 0.3, 0.4}, 2);
    const KillingReport k = killing_report(m, {Expr(1.0), Expr(0.0), Expr(0.0), Expr(1.0)});
    CHECK(std::fabs(k.norm_kk) > 1.0);
    CHECK(k.lie_norm == 0.0);
  }
}

TEST_CASE("twist is v u_z - u v_z up to the frame factor") {
  // general quadrature-form frames, Lax integrable or not: the twist is a frame fact
  struct Case {
    const char *u, *v, *p, *q;
    bool z_free_ratio;
  };
  const Case cases[] = {
      {"1 + x*z", "2 + z^2", "1 + x*y", "y/2", false},
      {"(1 + x)*(1 + z^2)", "(2 + y)*(1 + z^2)", "1 + x*y", "y/2", true},
      {"-z", "1", "1", "0", false},
      {"-y/x", "1", "1", "0", true},
      {"exp(z)*x", "exp(z)", "3", "1", true},
      {"sin(z) + 2", "cos(z) + 3", "1", "x", false},
  };
  for (const Case& cs : cases) {
    ProjectivePair pr;
    pr.fiber = {Var::t, Var::z};
    pr.phi0 = {E(cs.p), E(cs.u)};
    pr.phi1 = {E(cs.q), E(cs.v)};
    pr.alpha0 = {E("x*z"), E("y*z^2")};
    pr.alpha1 = {E("x + z"), E("z")};
    const Expr formula = E(cs.v) * differentiate(E(cs.u), Var::z) - E(cs.u) * differentiate(E(cs.v), Var::z);
    const Expr delta = E(cs.p) * E(cs.v) - E(cs.q) * E(cs.u);
    double spread_lo = 1e300, spread_hi = -1e300, worst = 0.0;
    for (const Vec4& p : box(17, 16, 0.3, 1.2)) {
      const KillingReport k = killing_report(metric_from_frame(frame_from_pair(pr), p, 2), kDt);
      DoubleEnv env;
      env.set(Var::x, p[0]).set(Var::y, p[1]).set(Var::t, p[2]).set(Var::z, p[3]);
      const double tw = evaluate(formula, env), d = evaluate(delta, env);
      worst = std::max(worst, std::fabs(k.twist));
      if (!cs.z_free_ratio) {
        const double ratio = k.twist * d / tw;
        spread_lo = std::min(spread_lo, ratio);
        spread_hi = std::max(spread_hi, ratio);
      }
    }
    if (cs.z_free_ratio) {
      CHECK_MESSAGE(worst < 1e-12, cs.u << " / " << cs.v);
    } else {
      CHECK_MESSAGE(worst > 1e-3, cs.u << " / " << cs.v);
      CHECK(spread_hi - spread_lo < 1e-8);
      CHECK(spread_hi == doctest::Approx(-1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("Frobenius residual") {
  const std::array<Var, 4> c{Var::x, Var::y, Var::t, Var::z};
  const Vec4 p{0.3, 0.5, 0.7, 0.9};
  const VectorExpr dx{Expr(1.0), Expr(0.0), Expr(0.0), Expr(0.0)}, dy{Expr(0.0), Expr(1.0), Expr(0.0), Expr(0.0)};
  const VectorExpr coord[] = {dx, dy};
  CHECK(frobenius_residual(coord, c, p) == 0.0);
  // [d_x + y d_z, d_y] = -d_z, whose part off the span has length 1/sqrt(1 + y^2)
  const VectorExpr twisted[] = {{Expr(1.0), Expr(0.0), Expr(0.0), E("y")}, dy};
  CHECK(frobenius_residual(twisted, c, p) == doctest::Approx(1.0 / std::sqrt(1.25)).epsilon(1e-14));
  const VectorExpr dependent[] = {dx, {Expr(2.0), Expr(0.0), Expr(0.0), Expr(0.0)}};
  CHECK_THROWS_AS(frobenius_residual(dependent, c, p), DomainError);
}

TEST_CASE("fibers and constant-lambda distributions of certified pairs are integrable") {
  const std::vector<ProjectivePair> pairs{twisting_dw().pair,
                                          twist_free_normal_form(ProjectiveSurface(), E("y/x"), Expr(1.0)).pair};
  for (const ProjectivePair& pr : pairs) {
    const LaxPair L = build_lax(ProjectiveSurface(), pr);
    for (const Vec4& p : box(18, 4, 0.5, 1.5)) {
      const std::array<Var, 4> c = pr.coords();
      const VectorExpr phi[] = {{Expr(0.0), Expr(0.0), pr.phi0[0], pr.phi0[1]},
                                {Expr(0.0), Expr(0.0), pr.phi1[0], pr.phi1[1]}};
      CHECK(frobenius_residual(phi, c, p) < 1e-12);
      // a = 0, so at each fixed lambda the Lax fields live on M
      for (double l : kLambdaSamples) {
        VectorExpr A, B;
        for (int i = 0; i < 4; ++i) {
          A[i] = substitute(L.L0[i], Var::lambda, Expr(l));
          B[i] = substitute(L.L1[i], Var::lambda, Expr(l));
        }
        if (l == 0.0 && pr.phi0[0].is_zero() && pr.phi0[1].is_zero()) continue;
        const VectorExpr ab[] = {A, B};
        CHECK(frobenius_residual(ab, c, p) < 1e-10);
      }
    }
  }
}
