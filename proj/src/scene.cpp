#include "sdp/scene.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sdp {

namespace {

using nlohmann::ordered_json;

std::string substitute_params(const std::string& src, const SceneParams& params) {
  if (params.empty()) return src;
  std::string out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      // numbers, including exponents, are copied whole
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      out.append(src, i, j - i);
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      const std::string id = src.substr(i, j - i);
      if (auto it = params.find(id); it != params.end()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "(%.17g)", it->second);
        out += buf;
      } else {
        out += id;
      }
      i = j;
    } else {
      out += c;
      ++i;
    }
  }
  return out;
}

struct Reader {
  std::vector<Var> allowed;
  SceneParams params;

  Expr expr(const ordered_json& j, const std::string& where) const {
    std::string text;
    if (j.is_string())
      text = j.get<std::string>();
    else if (j.is_number())
      text = j.dump();
    else
      throw SceneError(where + ": expected an expression string");
    try {
      return parse(substitute_params(text, params), allowed);
    } catch (const ParseError& e) {
      throw SceneError(where + ": " + e.what());
    }
  }

  template <std::size_t N>
  std::array<Expr, N> exprs(const ordered_json& j, const std::string& where) const {
    if (!j.is_array() || j.size() != N) throw SceneError(where + ": expected " + std::to_string(N) + " expressions");
    std::array<Expr, N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = expr(j[i], where + "[" + std::to_string(i) + "]");
    return out;
  }

  Expr optional_expr(const ordered_json& obj, const char* key, const std::string& where, double fallback = 0.0) const {
    return obj.contains(key) ? expr(obj[key], where + "." + key) : Expr(fallback);
  }
};

double number(const ordered_json& j, const std::string& where) {
  if (!j.is_number()) throw SceneError(where + ": expected a number");
  return j.get<double>();
}

Var var_named(const std::string& name, const std::string& where) {
  Var v;
  if (!var_from_name(name, v)) throw SceneError(where + ": unknown variable '" + name + "'");
  return v;
}

void only_keys(const ordered_json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw SceneError(where + ": expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw SceneError(where + ": unexpected key '" + it.key() + "'");
}

ProjectiveSurface read_projective(const ordered_json& j, const Reader& r) {
  only_keys(j, {"spray", "gamma"}, "projective");
  if (j.contains("spray") == j.contains("gamma")) throw SceneError("projective: give exactly one of spray, gamma");
  if (j.contains("spray")) return ProjectiveSurface::from_spray(r.exprs<4>(j["spray"], "projective.spray"));
  const ordered_json& g = j["gamma"];
  if (!g.is_object()) throw SceneError("projective.gamma: expected an object");
  std::array<Expr, 6> out;
  out.fill(Expr(0.0));
  for (auto it = g.begin(); it != g.end(); ++it) {
    const std::string& k = it.key();
    if (k.size() != 3 || k.find_first_not_of("01") != std::string::npos)
      throw SceneError("projective.gamma: bad index '" + k + "'");
    out[christoffel_slot(k[0] - '0', k[1] - '0', k[2] - '0')] = r.expr(it.value(), "projective.gamma." + k);
  }
  for (auto it = g.begin(); it != g.end(); ++it) {
    const std::string& k = it.key();
    const std::string swapped{k[0], k[2], k[1]};
    if (swapped != k && g.contains(swapped) && g[swapped] != it.value())
      throw SceneError("projective.gamma: " + k + " and " + swapped + " differ");
  }
  return ProjectiveSurface::from_christoffel(out);
}

ProjectivePair read_pair(const ordered_json& j, const Reader& r) {
  only_keys(j, {"fiber", "phi0", "phi1", "alpha0", "alpha1", "c0", "c1"}, "pair");
  ProjectivePair p;
  if (!j.contains("fiber") || !j["fiber"].is_array() || j["fiber"].size() != 2)
    throw SceneError("pair.fiber: expected two variable names");
  for (int i = 0; i < 2; ++i) p.fiber[i] = var_named(j["fiber"][i].get<std::string>(), "pair.fiber");
  auto field = [&](const char* key) {
    return j.contains(key) ? r.exprs<2>(j[key], std::string("pair.") + key) : VField{Expr(0.0), Expr(0.0)};
  };
  p.phi0 = field("phi0");
  p.phi1 = field("phi1");
  p.alpha0 = field("alpha0");
  p.alpha1 = field("alpha1");
  p.c0 = r.optional_expr(j, "c0", "pair");
  p.c1 = r.optional_expr(j, "c1", "pair");
  return p;
}

void require_coords(const Scene& s, std::initializer_list<Var> vars, const std::string& what) {
  for (Var v : vars)
    if (std::find(s.coords.begin(), s.coords.end(), v) == s.coords.end())
      throw SceneError(what + " needs coordinate '" + std::string(var_name(v)) + "'");
}

void read_build(Scene& s, const ordered_json& j, const Reader& r) {
  if (!j.contains("kind") || !j["kind"].is_string()) throw SceneError("build.kind: expected a string");
  s.build_kind = j["kind"].get<std::string>();
  if (s.build_kind == "dw") {
    only_keys(j, {"kind", "gamma", "c", "H", "G", "C"}, "build");
    require_coords(s, {Var::t, Var::z}, "build dw");
    const double c = j.contains("c") ? number(j["c"], "build.c") : 0.0;
    if (!j.contains("gamma") || !j.contains("H") || !j.contains("G")) throw SceneError("build dw: needs gamma, H, G");
    s.dw = dw_quadrature_build(s.surface, r.expr(j["gamma"], "build.gamma"), c, r.expr(j["H"], "build.H"),
                               r.expr(j["G"], "build.G"), r.optional_expr(j, "C", "build"));
    s.pair = s.dw->pair;
  } else if (s.build_kind == "twistfree") {
    only_keys(j, {"kind", "beta", "p", "q"}, "build");
    require_coords(s, {Var::t, Var::z}, "build twistfree");
    if (!j.contains("beta")) throw SceneError("build twistfree: needs beta");
    s.twist_free = twist_free_normal_form(s.surface, r.expr(j["beta"], "build.beta"), r.optional_expr(j, "p", "build"),
                                          r.optional_expr(j, "q", "build"));
    s.pair = s.twist_free->pair;
  } else if (s.build_kind == "nullkahler") {
    only_keys(j, {"kind", "a", "c", "f"}, "build");
    require_coords(s, {Var::t, Var::z}, "build nullkahler");
    s.null_kahler = build_null_kahler(r.optional_expr(j, "a", "build"), r.optional_expr(j, "c", "build"),
                                      r.optional_expr(j, "f", "build", 1.0));
    s.surface = s.null_kahler->surface;
    s.pair = s.null_kahler->pair;
    s.factor = s.null_kahler->factor;
  } else {
    throw SceneError("build.kind: unknown kind '" + s.build_kind + "'");
  }
}

WeightedCongruence read_weighted(const ordered_json& j, const Reader& r, const ProjectiveSurface& P,
                                 const std::string& where) {
  only_keys(j, {"beta", "phi", "rho"}, where);
  if (j.contains("beta")) {
    if (j.contains("phi") || j.contains("rho")) throw SceneError(where + ": beta excludes phi, rho");
    return congruence_connection(P, r.expr(j["beta"], where + ".beta"));
  }
  if (!j.contains("phi")) throw SceneError(where + ": needs beta or phi");
  WeightedCongruence w;
  w.phi = r.exprs<2>(j["phi"], where + ".phi");
  if (j.contains("rho")) w.rho = r.exprs<2>(j["rho"], where + ".rho");
  return w;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scene load_scene(const std::filesystem::path& path, const SceneParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError("cannot read scene file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path, params);
}

Scene parse_scene(const std::string& text, const std::filesystem::path& origin, const SceneParams& overrides) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SceneError(std::string("scene is not valid JSON: ") + e.what());
  }
  try {
    only_keys(j, {"name", "description", "coords", "params", "projective", "pair", "build", "metric", "fields",
                  "killing_field", "distributions", "congruences", "probes", "divisor2", "ward",
                  "projective_fields", "sampling", "tolerances", "expect", "batch"},
              "scene");
    Scene s;
    s.path = origin;
    s.digest = fnv1a_hex(text);
    s.name = j.value("name", origin.stem().string());

    if (!j.contains("coords") || !j["coords"].is_array() || j["coords"].empty())
      throw SceneError("coords: expected a nonempty list of variable names");
    for (const auto& c : j["coords"]) {
      const Var v = var_named(c.get<std::string>(), "coords");
      if (v == Var::lambda) throw SceneError("coords: lambda is reserved for the spectral parameter");
      if (std::find(s.coords.begin(), s.coords.end(), v) != s.coords.end()) throw SceneError("coords: duplicate");
      s.coords.push_back(v);
    }
    require_coords(s, {Var::x, Var::y}, "scene");

    Reader r{s.coords, {}};
    if (j.contains("params")) {
      if (!j["params"].is_object()) throw SceneError("params: expected an object");
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
        Var clash;
        if (var_from_name(it.key(), clash)) throw SceneError("params: '" + it.key() + "' shadows a variable");
        r.params[it.key()] = number(it.value(), "params." + it.key());
      }
    }
    for (const auto& [k, v] : overrides) {
      if (!r.params.count(k)) throw SceneError("parameter '" + k + "' is not declared by the scene");
      r.params[k] = v;
    }

    if (j.contains("projective")) s.surface = read_projective(j["projective"], r);
    if (j.contains("pair")) {
      s.pair = read_pair(j["pair"], r);
      require_coords(s, {s.pair->fiber[0], s.pair->fiber[1]}, "pair");
    }
    if (j.contains("build")) {
      if (j.contains("pair")) throw SceneError("scene: give either pair or build");
      read_build(s, j["build"], r);
    }
    if (j.contains("metric")) {
      only_keys(j["metric"], {"factor"}, "metric");
      if (j["metric"].contains("factor")) s.factor = s.factor * r.expr(j["metric"]["factor"], "metric.factor");
    }
    if (j.contains("fields")) {
      if (!j["fields"].is_object()) throw SceneError("fields: expected an object");
      for (auto it = j["fields"].begin(); it != j["fields"].end(); ++it)
        s.fields[it.key()] = r.exprs<4>(it.value(), "fields." + it.key());
    }
    if (j.contains("killing_field")) s.killing_field = j["killing_field"].get<std::string>();
    if (j.contains("distributions")) {
      for (const auto& d : j["distributions"]) {
        std::vector<std::string> names = d.get<std::vector<std::string>>();
        for (const auto& n : names)
          if (!s.fields.count(n)) throw SceneError("distributions: unknown field '" + n + "'");
        s.distributions.push_back(std::move(names));
      }
    }
    if (j.contains("congruences")) {
      if (!j["congruences"].is_object()) throw SceneError("congruences: expected an object");
      for (auto it = j["congruences"].begin(); it != j["congruences"].end(); ++it)
        s.congruences[it.key()] = r.expr(it.value(), "congruences." + it.key());
    }
    if (j.contains("probes"))
      for (const auto& p : j["probes"]) {
        if (!p.is_array() || p.size() != 2) throw SceneError("probes: expected [x, y] pairs");
        s.probes.push_back({number(p[0], "probes"), number(p[1], "probes")});
      }
    if (j.contains("divisor2")) {
      if (!j["divisor2"].is_array() || j["divisor2"].size() != 2) throw SceneError("divisor2: expected two entries");
      for (int i = 0; i < 2; ++i)
        s.divisor2.push_back(read_weighted(j["divisor2"][i], r, s.surface, "divisor2[" + std::to_string(i) + "]"));
    }
    if (j.contains("ward")) {
      const auto& w = j["ward"];
      only_keys(w, {"rho", "start", "length", "step", "expect"}, "ward");
      WardSpec spec;
      spec.rho = r.exprs<2>(w.at("rho"), "ward.rho");
      const auto& st = w.at("start");
      if (!st.is_array() || st.size() != 3) throw SceneError("ward.start: expected [x, y, lambda]");
      spec.x = number(st[0], "ward.start");
      spec.y = number(st[1], "ward.start");
      spec.lambda = number(st[2], "ward.start");
      if (w.contains("length")) spec.length = number(w["length"], "ward.length");
      if (w.contains("step")) spec.step = number(w["step"], "ward.step");
      if (!(spec.step > 0.0) || !(spec.length >= 0.0)) throw SceneError("ward: step must be positive, length nonnegative");
      if (w.contains("expect")) spec.expect = number(w["expect"], "ward.expect");
      s.ward = spec;
    }
    if (j.contains("projective_fields")) {
      if (!j["projective_fields"].is_object()) throw SceneError("projective_fields: expected an object");
      for (auto it = j["projective_fields"].begin(); it != j["projective_fields"].end(); ++it)
        s.projective_fields[it.key()] = r.exprs<2>(it.value(), "projective_fields." + it.key());
    }
    if (j.contains("sampling")) {
      const auto& sm = j["sampling"];
      only_keys(sm, {"box", "count", "seed", "exclude"}, "sampling");
      if (sm.contains("box")) {
        if (!sm["box"].is_object()) throw SceneError("sampling.box: expected an object");
        for (auto it = sm["box"].begin(); it != sm["box"].end(); ++it) {
          const Var v = var_named(it.key(), "sampling.box");
          if (std::find(s.coords.begin(), s.coords.end(), v) == s.coords.end())
            throw SceneError("sampling.box: '" + it.key() + "' is not a declared coordinate");
          const auto& range = it.value();
          if (!range.is_array() || range.size() != 2) throw SceneError("sampling.box: expected [lo, hi]");
          const double lo = number(range[0], "sampling.box"), hi = number(range[1], "sampling.box");
          if (!(lo <= hi)) throw SceneError("sampling.box: empty range for '" + it.key() + "'");
          s.sampler.vars.push_back(v);
          s.sampler.ranges.push_back({lo, hi});
        }
      }
      if (sm.contains("count")) s.count = sm["count"].get<int>();
      if (sm.contains("seed")) s.seed = sm["seed"].get<std::uint64_t>();
      if (sm.contains("exclude"))
        for (const auto& e : sm["exclude"]) {
          only_keys(e, {"expr", "guard"}, "sampling.exclude");
          s.sampler.exclusions.push_back({r.expr(e.at("expr"), "sampling.exclude"), number(e.at("guard"), "sampling.exclude")});
        }
    }
    if (s.count < 1) throw SceneError("sampling.count: must be positive");
    if (j.contains("tolerances")) {
      if (!j["tolerances"].is_object()) throw SceneError("tolerances: expected an object");
      for (auto it = j["tolerances"].begin(); it != j["tolerances"].end(); ++it)
        s.tolerances[it.key()] = number(it.value(), "tolerances." + it.key());
    }
    if (j.contains("expect")) {
      if (!j["expect"].is_object()) throw SceneError("expect: expected an object");
      s.expect = j["expect"];
    }
    if (j.contains("batch"))
      for (const auto& b : j["batch"]) {
        only_keys(b, {"command", "scene"}, "batch");
        std::filesystem::path p = b.at("scene").get<std::string>();
        if (p.is_relative()) p = origin.parent_path() / p;
        s.batch.push_back({b.at("command").get<std::string>(), p});
      }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SceneError(std::string("malformed scene: ") + e.what());
  }
}

}  // namespace sdp
