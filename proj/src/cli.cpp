#include "sdp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

namespace sdp {

namespace {

using nlohmann::ordered_json;
using Point4 = std::array<double, 4>;

template <class R>
std::vector<R> parallel_map(std::size_t n, int threads, const std::function<R(std::size_t)>& f) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t t = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (t == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < t; ++k) pool.emplace_back(work, k, t);
    for (auto& th : pool) th.join();
  }
  // the lowest failing index wins, whatever the scheduling
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double finite_or_inf(double v) { return std::isfinite(v) ? v : INFINITY; }

class Context {
 public:
  Context(Scene s, const RunOptions& o) : scene(std::move(s)), opts(o) {}

  Scene scene;
  const RunOptions& opts;
  ordered_json checks = ordered_json::array();
  ordered_json quantities = ordered_json::object();

  int count() const { return opts.samples.value_or(scene.count); }
  std::uint64_t seed() const { return opts.seed.value_or(scene.seed); }

  bool has_tolerance(const std::string& name) const {
    return opts.tolerances.count(name) || scene.tolerances.count(name);
  }
  double tolerance(const std::string& name, double fallback) const {
    if (auto it = opts.tolerances.find(name); it != opts.tolerances.end()) return it->second;
    if (auto it = scene.tolerances.find(name); it != scene.tolerances.end()) return it->second;
    return fallback;
  }

  void check(const std::string& name, double value, double tol) {
    value = finite_or_inf(value);
    ordered_json c;
    c["name"] = name;
    c["value"] = std::isfinite(value) ? ordered_json(value) : ordered_json("inf");
    c["tolerance"] = tol;
    c["pass"] = value <= tol;
    checks.push_back(std::move(c));
  }
  void check(const std::string& name, const std::string& tol_key, double value, double fallback) {
    check(name, value, tolerance(tol_key, fallback));
  }
  /// Only when the tolerance is declared.
  void optional_check(const std::string& name, double value) {
    if (has_tolerance(name)) check(name, value, tolerance(name, 0.0));
  }
  void flag_check(const std::string& name, bool ok) { check(name, ok ? 0.0 : 1.0, 0.0); }

  const ProjectivePair& pair(const char* command) const {
    if (!scene.pair) throw SceneError(std::string(command) + " needs a pair or a build section");
    return *scene.pair;
  }

  std::vector<std::vector<double>> raw_points(std::initializer_list<Var> needed) const {
    for (Var v : needed)
      if (std::find(scene.sampler.vars.begin(), scene.sampler.vars.end(), v) == scene.sampler.vars.end())
        throw SceneError("sampling.box needs a range for '" + std::string(var_name(v)) + "'");
    try {
      return scene.sampler.sample(count(), seed());
    } catch (const DomainError& e) {
      // a box that lies inside the declared singular loci is a scene defect
      throw SceneError(std::string("sampling: ") + e.what());
    }
  }
  double coord(const std::vector<double>& p, Var v) const {
    const auto& vars = scene.sampler.vars;
    return p[std::find(vars.begin(), vars.end(), v) - vars.begin()];
  }
  std::vector<Point4> points4(const char* command) const {
    const auto& pr = pair(command);
    const std::array<Var, 4> c{Var::x, Var::y, pr.fiber[0], pr.fiber[1]};
    std::vector<Point4> out;
    for (const auto& p : raw_points({c[0], c[1], c[2], c[3]}))
      out.push_back({coord(p, c[0]), coord(p, c[1]), coord(p, c[2]), coord(p, c[3])});
    return out;
  }
  std::vector<Point2> points2() const {
    std::vector<Point2> out;
    for (const auto& p : raw_points({Var::x, Var::y})) out.push_back({coord(p, Var::x), coord(p, Var::y)});
    return out;
  }

  template <class R>
  std::vector<R> map(std::size_t n, const std::function<R(std::size_t)>& f) const {
    return parallel_map<R>(n, opts.threads, f);
  }
};

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, finite_or_inf(x));
  return m;
}

ordered_json array4(const std::array<double, 4>& a) { return ordered_json::array({a[0], a[1], a[2], a[3]}); }

// b(lambda) = -a'(lambda)/3 coefficientwise
std::array<double, 4> minus_third_a_prime(const ProjectiveSurface& P, double x, double y) {
  const auto a = spray_coeffs(P);
  DoubleEnv env;
  env.set(Var::x, x).set(Var::y, y);
  return {-evaluate(a[1], env) / 3.0, -2.0 * evaluate(a[2], env) / 3.0, -evaluate(a[3], env), 0.0};
}

void lax_checks(Context& ctx, const LaxPair& L, const std::vector<Point4>& pts, bool b_formula) {
  const auto samples = ctx.map<LaxSample>(pts.size(), [&](std::size_t i) { return lax_residual(L, pts[i]); });
  std::vector<double> defect, bracket, resid, inv, bdev;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const LaxSample& s = samples[i];
    defect.push_back(s.defect());
    bracket.push_back(s.bracket_norm);
    resid.push_back(s.residual);
    inv.push_back(s.inverse_residual);
    if (b_formula) {
      const auto want = minus_third_a_prime(ctx.scene.surface, pts[i][0], pts[i][1]);
      double d = 0.0;
      for (int k = 0; k < 4; ++k) d = std::max(d, std::fabs(s.b[k] - want[k]));
      bdev.push_back(d);
    }
  }
  ctx.check("lax_defect", "lax", max_of(defect), 1e-10);
  ctx.optional_check("bracket", max_of(bracket));
  if (b_formula) ctx.check("b_minus_third_a_prime", "b", max_of(bdev), 1e-9);
  ctx.quantities["bracket_norm"] = max_of(bracket);
  ctx.quantities["span_residual"] = max_of(resid);
  ctx.quantities["inverse_residual"] = max_of(inv);
  if (!samples.empty()) ctx.quantities["b_first_point"] = array4(samples.front().b);
}

void cmd_verify_lax(Context& ctx) {
  const auto pts = ctx.points4("verify-lax");
  const LaxPair L = build_lax(ctx.scene.surface, ctx.pair("verify-lax"));
  bool b_formula = false;
  if (ctx.scene.expect.contains("b")) {
    if (ctx.scene.expect["b"] != "minus_third_a_prime") throw SceneError("expect.b: only \"minus_third_a_prime\" is supported");
    b_formula = true;
  }
  lax_checks(ctx, L, pts, b_formula);
}

void cmd_verify_pair(Context& ctx) {
  const auto pts = ctx.points4("verify-pair");
  const ProjectivePair& pr = ctx.pair("verify-pair");
  const LaxPair L = build_lax(ctx.scene.surface, pr);
  const auto res = ctx.map<double>(pts.size(), [&](std::size_t i) {
    return projective_pair_residual(ctx.scene.surface, pr, pts[i]);
  });
  const auto lax = ctx.map<double>(pts.size(), [&](std::size_t i) { return lax_residual(L, pts[i]).defect(); });
  ctx.check("pair_residual", "pair", max_of(res), 1e-10);
  ctx.quantities["lax_defect"] = max_of(lax);
}

struct CurvatureSample {
  double lax = 0.0;
  Curvature c;
};

std::vector<CurvatureSample> curvature_sweep(Context& ctx, const char* command, const std::vector<Point4>& pts) {
  const LaxPair L = build_lax(ctx.scene.surface, ctx.pair(command));
  const int order = std::max(ctx.opts.order, 2);
  return ctx.map<CurvatureSample>(pts.size(), [&](std::size_t i) {
    CurvatureSample s;
    s.lax = lax_residual(L, pts[i]).defect();
    s.c = curvature(metric_from_lax(L, pts[i], order, ctx.scene.factor));
    return s;
  });
}

void curvature_quantities(Context& ctx, const std::vector<CurvatureSample>& cs) {
  auto col = [&](auto get) {
    std::vector<double> v;
    for (const auto& s : cs) v.push_back(get(s.c));
    return max_of(v);
  };
  ctx.quantities["riemann"] = col([](const Curvature& c) { return c.riemann_norm; });
  ctx.quantities["ricci"] = col([](const Curvature& c) { return c.ricci_norm; });
  ctx.quantities["tf_ricci"] = col([](const Curvature& c) { return c.tf_ricci_norm; });
  ctx.quantities["scalar"] = col([](const Curvature& c) { return std::fabs(c.scalar); });
  ctx.quantities["weyl"] = col([](const Curvature& c) { return c.weyl_norm; });
  ctx.quantities["weyl_plus"] = col([](const Curvature& c) { return c.weyl_plus_norm; });
  ctx.quantities["weyl_minus"] = col([](const Curvature& c) { return c.weyl_minus_norm; });
  ctx.quantities["star_defect"] = col([](const Curvature& c) { return std::max(c.star_defect, c.projector_defect); });
  if (!cs.empty()) {
    ctx.quantities["signature"] = ordered_json::array({cs.front().c.positive, cs.front().c.negative});
    ctx.quantities["volume_sign"] = cs.front().c.volume_sign;
  }
  for (const char* name : {"riemann", "ricci", "tf_ricci", "scalar", "weyl", "weyl_plus", "weyl_minus", "star_defect"})
    ctx.optional_check(name, ctx.quantities[name].get<double>());
}

void cmd_certify_selfdual(Context& ctx) {
  const auto pts = ctx.points4("certify-selfdual");
  const auto cs = curvature_sweep(ctx, "certify-selfdual", pts);
  std::vector<double> lax, wm;
  for (const auto& s : cs) {
    lax.push_back(s.lax);
    wm.push_back(s.c.weyl_minus_norm);
  }
  ctx.check("lax_defect", "lax", max_of(lax), 1e-10);
  ctx.check("weyl_minus", "weyl_minus", max_of(wm), 1e-8);
  curvature_quantities(ctx, cs);
  // weyl_minus is already a mandatory check
  ctx.checks.erase(std::remove_if(ctx.checks.begin() + 2, ctx.checks.end(),
                                  [](const ordered_json& c) { return c["name"] == "weyl_minus"; }),
                   ctx.checks.end());
}

void cmd_curvature(Context& ctx) {
  const auto pts = ctx.points4("curvature");
  curvature_quantities(ctx, curvature_sweep(ctx, "curvature", pts));
}

const VectorExpr& killing_field(const Context& ctx) {
  auto it = ctx.scene.fields.find(ctx.scene.killing_field);
  if (it == ctx.scene.fields.end()) throw SceneError("fields: missing killing field '" + ctx.scene.killing_field + "'");
  return it->second;
}

void cmd_killing(Context& ctx) {
  const auto pts = ctx.points4("killing");
  const VectorExpr& K = killing_field(ctx);
  const LaxPair L = build_lax(ctx.scene.surface, ctx.pair("killing"));
  const int order = std::max(ctx.opts.order - 1, 1);
  const auto reps = ctx.map<KillingReport>(pts.size(), [&](std::size_t i) {
    return killing_report(metric_from_lax(L, pts[i], order, ctx.scene.factor), K);
  });
  std::vector<double> lie, conf, nrm, geo, tw, twt;
  ordered_json twist = ordered_json::array();
  for (const auto& r : reps) {
    lie.push_back(r.lie_norm);
    conf.push_back(r.conformal_residual);
    nrm.push_back(std::fabs(r.norm_kk));
    geo.push_back(r.geodesic_residual);
    tw.push_back(std::fabs(r.twist));
    twt.push_back(r.twist_transverse);
    if (twist.size() < 8) twist.push_back(r.twist);
  }
  ctx.check("killing", "killing", max_of(lie), 1e-12);
  ctx.check("null", "null", max_of(nrm), 1e-12);
  ctx.check("geodesic", "geodesic", max_of(geo), 1e-9);
  ctx.optional_check("conformal_killing", max_of(conf));
  ctx.optional_check("twist", max_of(tw));
  ctx.quantities["conformal_residual"] = max_of(conf);
  ctx.quantities["twist_max"] = max_of(tw);
  ctx.quantities["twist_transverse"] = max_of(twt);
  ctx.quantities["twist_samples"] = twist;
}

void cmd_frobenius(Context& ctx) {
  const auto pts = ctx.points4("frobenius");
  const ProjectivePair& pr = ctx.pair("frobenius");
  const bool planes = ctx.scene.fields.count(ctx.scene.killing_field) > 0;
  if (!planes && ctx.scene.distributions.empty()) throw SceneError("frobenius needs a killing field or distributions");
  const LaxPair L = build_lax(ctx.scene.surface, pr);
  const int order = std::max(ctx.opts.order - 1, 1);
  if (planes) {
    const VectorExpr& K = killing_field(ctx);
    const auto res = ctx.map<std::array<double, 2>>(pts.size(), [&](std::size_t i) {
      const NullPlanes np = null_planes(metric_from_lax(L, pts[i], order, ctx.scene.factor), K);
      return std::array<double, 2>{frobenius_residual({np.K, np.plus}), frobenius_residual({np.K, np.minus})};
    });
    std::vector<double> plus, minus;
    for (const auto& r : res) {
      plus.push_back(r[0]);
      minus.push_back(r[1]);
    }
    ctx.check("frobenius_plus", "frobenius", max_of(plus), 1e-9);
    ctx.check("frobenius_minus", "frobenius", max_of(minus), 1e-9);
  }
  for (const auto& names : ctx.scene.distributions) {
    std::vector<VectorExpr> fs;
    std::string label;
    for (const auto& n : names) {
      fs.push_back(ctx.scene.fields.at(n));
      label += (label.empty() ? "" : "+") + n;
    }
    const auto res = ctx.map<double>(pts.size(), [&](std::size_t i) {
      return frobenius_residual(fs, pr.coords(), pts[i]);
    });
    ctx.check("frobenius:" + label, "frobenius", max_of(res), 1e-9);
  }
}

void cmd_congruence(Context& ctx) {
  if (ctx.scene.congruences.empty()) throw SceneError("congruence needs a congruences section");
  const auto raw = ctx.raw_points({Var::x, Var::y});
  const ProjectiveSurface& P = ctx.scene.surface;
  const bool surface_only = [&] {
    for (const auto& [name, beta] : ctx.scene.congruences)
      for (Var v : ctx.scene.coords)
        if (v != Var::x && v != Var::y && beta.depends_on(v)) return false;
    return true;
  }();
  ordered_json probes = ordered_json::object();
  for (const auto& [name, beta] : ctx.scene.congruences) {
    const auto res = ctx.map<std::array<double, 2>>(raw.size(), [&](std::size_t i) {
      const DoubleEnv env = ctx.scene.sampler.env(raw[i]);
      std::array<double, 2> out{std::fabs(congruence_residual(P, beta, env).residual), 0.0};
      if (surface_only)
        out[1] = canonical_connection_from_congruence(P, {Expr(1.0), beta},
                                                      {ctx.coord(raw[i], Var::x), ctx.coord(raw[i], Var::y)})
                     .residual;
      return out;
    });
    std::vector<double> r0, r1;
    for (const auto& r : res) {
      r0.push_back(r[0]);
      r1.push_back(r[1]);
    }
    ctx.check("congruence:" + name, "congruence", max_of(r0), 1e-12);
    if (surface_only) ctx.check("abelian:" + name, "abelian", max_of(r1), 1e-10);

    ordered_json bs = ordered_json::array();
    for (const Point2& p : ctx.scene.probes) {
      DoubleEnv env;
      env.set(Var::x, p[0]).set(Var::y, p[1]);
      const CongruenceSample c = congruence_residual(P, beta, env);
      bs.push_back(ordered_json::array({c.b[0] + 0.0, c.b[1] + 0.0, c.b[2] + 0.0}));
    }
    if (!ctx.scene.probes.empty()) probes[name] = bs;

    if (ctx.scene.expect.contains("b") && ctx.scene.expect["b"].contains(name)) {
      const auto& want = ctx.scene.expect["b"][name];
      if (!want.is_array() || want.size() != ctx.scene.probes.size())
        throw SceneError("expect.b." + name + ": one [b0, b1, b2] per probe");
      double dev = 0.0;
      for (std::size_t i = 0; i < want.size(); ++i)
        for (int k = 0; k < 3; ++k) dev = std::max(dev, std::fabs(bs[i][k].get<double>() - want[i].at(k).get<double>()));
      ctx.check("b_probe:" + name, "b", dev, 1e-12);
    }
  }
  if (!probes.empty()) ctx.quantities["b_at_probes"] = probes;
}

void cmd_build_dw(Context& ctx) {
  if (!ctx.scene.dw) throw SceneError("build-dw needs a build section of kind dw");
  const DwQuadrature& q = *ctx.scene.dw;
  const auto pts = ctx.points4("build-dw");
  const std::array<Var, 4> c = q.pair.coords();
  const std::array<const Expr*, 4> pre{&q.congruence_residual, &q.primitive_residual, &q.transport_residual, &q.c_residual};
  const char* names[4] = {"congruence", "primitive", "transport", "c_equation"};
  const auto res = ctx.map<std::array<double, 4>>(pts.size(), [&](std::size_t i) {
    DoubleEnv env;
    for (int k = 0; k < 4; ++k) env.set(c[k], pts[i][k]);
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k) out[k] = std::fabs(evaluate(*pre[k], env));
    return out;
  });
  for (int k = 0; k < 4; ++k) {
    std::vector<double> v;
    for (const auto& r : res) v.push_back(r[k]);
    ctx.check(std::string("precondition:") + names[k], "precondition", max_of(v), 1e-10);
  }
  lax_checks(ctx, build_lax(ctx.scene.surface, q.pair), pts, false);
  ctx.quantities["pair"] = {{"phi0", {q.pair.phi0[0].str(), q.pair.phi0[1].str()}},
                            {"phi1", {q.pair.phi1[0].str(), q.pair.phi1[1].str()}},
                            {"alpha0", {q.pair.alpha0[0].str(), q.pair.alpha0[1].str()}},
                            {"alpha1", {q.pair.alpha1[0].str(), q.pair.alpha1[1].str()}}};
}

void cmd_build_twistfree(Context& ctx) {
  if (!ctx.scene.twist_free) throw SceneError("build-twistfree needs a build section of kind twistfree");
  const TwistFree& tf = *ctx.scene.twist_free;
  const auto pts = ctx.points4("build-twistfree");
  const std::array<Var, 4> c = tf.pair.coords();
  const auto res = ctx.map<std::array<double, 4>>(pts.size(), [&](std::size_t i) {
    DoubleEnv env;
    for (int k = 0; k < 4; ++k) env.set(c[k], pts[i][k]);
    std::array<double, 4> out{std::fabs(evaluate(tf.congruence_residual, env))};
    for (int k = 0; k < 3; ++k) out[k + 1] = std::fabs(evaluate(tf.time_residuals[k], env));
    return out;
  });
  for (int k = 0; k < 4; ++k) {
    std::vector<double> v;
    for (const auto& r : res) v.push_back(r[k]);
    ctx.check(k == 0 ? "precondition:congruence" : "precondition:time" + std::to_string(k - 1), "precondition",
              max_of(v), 1e-10);
  }
  lax_checks(ctx, build_lax(ctx.scene.surface, tf.pair), pts, true);
  ctx.quantities["Q"] = tf.Q.str();
}

void cmd_build_nullkahler(Context& ctx) {
  if (!ctx.scene.null_kahler) throw SceneError("build-nullkahler needs a build section of kind nullkahler");
  const NullKahler& nk = *ctx.scene.null_kahler;
  const auto pts = ctx.points4("build-nullkahler");
  const int order = std::max(ctx.opts.order, 2);
  const auto res = ctx.map<NullKahlerChecks>(pts.size(), [&](std::size_t i) { return null_kahler_checks(nk, pts[i], order); });
  auto col = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : res) v.push_back(get(r));
    return max_of(v);
  };
  ctx.check("d_omega", "d_omega", col([](const NullKahlerChecks& r) { return r.d_omega; }), 1e-12);
  ctx.check("j_squared", "j_squared", col([](const NullKahlerChecks& r) { return r.j_squared; }), 0.0);
  ctx.check("compatibility", "compatibility", col([](const NullKahlerChecks& r) { return r.compatibility; }), 1e-10);
  ctx.check("killing", "killing", col([](const NullKahlerChecks& r) { return r.killing; }), 1e-12);
  ctx.check("weyl_minus", "weyl_minus", col([](const NullKahlerChecks& r) { return r.curvature.weyl_minus_norm; }), 1e-8);
  const double ricci = col([](const NullKahlerChecks& r) { return r.curvature.ricci_norm; });
  ctx.optional_check("ricci", ricci);
  ctx.quantities["ricci"] = ricci;
  ctx.quantities["weyl_plus"] = col([](const NullKahlerChecks& r) { return r.curvature.weyl_plus_norm; });
  ctx.quantities["omega_asd"] = col([](const NullKahlerChecks& r) { return r.omega_asd; });
  ctx.quantities["j_isotropy"] = col([](const NullKahlerChecks& r) { return r.j_isotropy; });
  ctx.quantities["literal_j_compatibility"] = col([](const NullKahlerChecks& r) { return r.literal_j_compatibility; });
}

void cmd_gauge_report(Context& ctx) {
  const auto pts = ctx.points4("gauge-report");
  const ProjectivePair& pr = ctx.pair("gauge-report");
  const auto samples = ctx.map<GaugeSample>(pts.size(), [&](std::size_t i) { return gauge_sample(pr, pts[i]); });
  GaugeSample w;
  for (const auto& s : samples) w = max_merge(w, s);
  const GaugeFlags f = gauge_flags(w, ctx.tolerance("gauge", 1e-12));
  const std::vector<std::pair<const char*, bool>> flags{{"sdiff2", f.sdiff2},
                                                        {"hdiff2", f.hdiff2},
                                                        {"phi_in_sdiff2", f.phi_in_sdiff2},
                                                        {"hdiff2_phi_sdiff", f.hdiff2_phi_sdiff},
                                                        {"aff1_translational", f.aff1_translational},
                                                        {"o_times_diff1", f.o_times_diff1},
                                                        {"area_flat", f.area_flat}};
  ordered_json fj = ordered_json::object();
  for (const auto& [k, v] : flags) fj[k] = v;
  ctx.quantities["flags"] = fj;
  ctx.quantities["maxima"] = {{"div_phi", w.div_phi},           {"div_alpha", w.div_alpha},
                              {"div_variation", w.div_variation}, {"t_dependence", w.t_dependence},
                              {"z_curvature", w.z_curvature},     {"phi_z_dependence", w.phi_z_dependence},
                              {"area_curvature", w.area_curvature}, {"area_variation", w.area_variation}};
  if (ctx.scene.expect.contains("flags")) {
    const auto& want = ctx.scene.expect["flags"];
    for (auto it = want.begin(); it != want.end(); ++it) {
      if (!fj.contains(it.key())) throw SceneError("expect.flags: unknown flag '" + it.key() + "'");
      ctx.flag_check("flag:" + it.key(), fj[it.key()] == it.value());
    }
  }
}

void cmd_divisor2(Context& ctx) {
  if (ctx.scene.divisor2.size() != 2) throw SceneError("divisor2 needs two congruence entries");
  const auto pts = ctx.points2();
  const double tol = ctx.tolerance("divisor", 1e-8);
  const DivisorTwoReport r = divisor_two_report(ctx.scene.surface, ctx.scene.divisor2[0], ctx.scene.divisor2[1], pts, tol);
  ctx.check("dc_residual", "dc", r.dc_residual, 1e-8);
  ctx.flag_check("verdict_consistency", r.consistent);
  ctx.quantities["r_sym"] = r.r_sym;
  ctx.quantities["r_skew"] = r.r_skew;
  ctx.quantities["f_sum"] = r.f_sum;
  ctx.quantities["f_diff"] = r.f_diff;
  ctx.quantities["verdicts"] = {{"r_symmetric", r.r_symmetric},
                                {"sum_flat", r.sum_flat},
                                {"r_skew", r.r_skew_only},
                                {"diff_flat", r.diff_flat}};
  for (const char* k : {"r_symmetric", "r_skew"})
    if (ctx.scene.expect.contains(k))
      ctx.flag_check(std::string("verdict:") + k, ctx.quantities["verdicts"][k] == ctx.scene.expect[k]);
}

void cmd_ward(Context& ctx) {
  if (!ctx.scene.ward) throw SceneError("ward needs a ward section");
  const WardSpec& w = *ctx.scene.ward;
  const WardTransport a = ward_transport(ctx.scene.surface, w.rho, w.x, w.y, w.lambda, w.length, w.step);
  const WardTransport b = ward_transport(ctx.scene.surface, w.rho, w.x, w.y, w.lambda, w.length, w.step / 2);
  ctx.check("step_halving", "ward", std::fabs(a.value - b.value), 1e-9);
  if (w.expect) ctx.check("expected", "ward_expected", std::fabs(b.value - *w.expect), 1e-9);
  ctx.quantities["transport"] = b.value;
  ctx.quantities["end"] = {{"x", b.end.x}, {"y", b.end.y}, {"lambda", b.end.lambda()}};
}

void cmd_projective_field(Context& ctx) {
  if (ctx.scene.projective_fields.empty()) throw SceneError("projective-field needs a projective_fields section");
  const auto pts = ctx.points2();
  for (const auto& [name, V] : ctx.scene.projective_fields) {
    const auto res = ctx.map<double>(pts.size(), [&](std::size_t i) {
      return projective_field_residual(ctx.scene.surface, V, std::span(&pts[i], 1));
    });
    ctx.check("projective:" + name, "projective", max_of(res), 1e-10);
  }
}

using Command = void (*)(Context&);

const std::vector<std::pair<std::string, Command>>& commands() {
  static const std::vector<std::pair<std::string, Command>> table{
      {"verify-lax", cmd_verify_lax},
      {"verify-pair", cmd_verify_pair},
      {"certify-selfdual", cmd_certify_selfdual},
      {"curvature", cmd_curvature},
      {"killing", cmd_killing},
      {"frobenius", cmd_frobenius},
      {"congruence", cmd_congruence},
      {"build-dw", cmd_build_dw},
      {"build-twistfree", cmd_build_twistfree},
      {"build-nullkahler", cmd_build_nullkahler},
      {"gauge-report", cmd_gauge_report},
      {"divisor2", cmd_divisor2},
      {"ward", cmd_ward},
      {"projective-field", cmd_projective_field},
  };
  return table;
}

ordered_json header(const std::string& command, const std::filesystem::path& path) {
  ordered_json r;
  r["tool"] = "sdp";
  r["version"] = kVersion;
  r["command"] = command;
  r["scene_path"] = path.filename().string();
  return r;
}

int severity(int code) {
  // scene errors outrank domain errors outrank verdict failures
  switch (code) {
    case kSceneError: return 3;
    case kDomainFailure: return 2;
    case kVerdictFailure: return 1;
    default: return 0;
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, f] : commands()) n.push_back(k);
    n.push_back("batch");
    return n;
  }();
  return names;
}

RunResult run(const std::string& command, const std::filesystem::path& path, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out;
  ordered_json& rep = out.report;
  rep = header(command, path);
  auto finish = [&](int code) {
    out.exit_code = code;
    rep["exit_code"] = code;
    rep["pass"] = code == kPass;
    if (opts.wall_time)
      rep["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };

  try {
    const Scene scene = load_scene(path, opts.params);
    rep["scene"] = scene.name;
    rep["scene_digest"] = scene.digest;

    if (command == "batch") {
      if (scene.batch.empty()) throw SceneError("batch needs a batch section");
      RunOptions sub = opts;
      sub.wall_time = false;
      sub.params.clear();
      ordered_json runs = ordered_json::array();
      int worst = kPass;
      for (const auto& e : scene.batch) {
        RunResult r = run(e.command, e.scene, sub);
        if (severity(r.exit_code) > severity(worst)) worst = r.exit_code;
        runs.push_back(std::move(r.report));
      }
      rep["runs"] = std::move(runs);
      return finish(worst);
    }

    auto it = std::find_if(commands().begin(), commands().end(), [&](const auto& c) { return c.first == command; });
    if (it == commands().end()) throw SceneError("unknown command '" + command + "'");

    Context ctx(scene, opts);
    rep["seed"] = ctx.seed();
    rep["samples"] = ctx.count();
    rep["order"] = opts.order;
    if (!opts.params.empty()) rep["params"] = opts.params;
    it->second(ctx);
    bool ok = true;
    for (const auto& c : ctx.checks) ok = ok && c["pass"].get<bool>();
    rep["checks"] = std::move(ctx.checks);
    rep["quantities"] = std::move(ctx.quantities);
    return finish(ok ? kPass : kVerdictFailure);
  } catch (const SceneError& e) {
    rep["error"] = {{"kind", "scene"}, {"message", e.what()}};
    return finish(kSceneError);
  } catch (const ParseError& e) {
    rep["error"] = {{"kind", "scene"}, {"message", e.what()}};
    return finish(kSceneError);
  } catch (const DomainError& e) {
    rep["error"] = {{"kind", "domain"}, {"message", e.what()}};
    return finish(kDomainFailure);
  } catch (const std::invalid_argument& e) {
    rep["error"] = {{"kind", "domain"}, {"message", e.what()}};
    return finish(kDomainFailure);
  }
}

std::string render(const nlohmann::ordered_json& report) { return report.dump(2) + "\n"; }

}  // namespace sdp
