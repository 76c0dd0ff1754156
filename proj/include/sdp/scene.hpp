#pragma once

// Scene files: JSON descriptions of a projective surface, a pair (given or
// built), fields, congruences, divisor data, sampling box and tolerances.
// Everything is parsed and checked on load.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdp/conformal.hpp"
#include "sdp/minitwistor.hpp"
#include "sdp/pairs.hpp"
#include "sdp/sampling.hpp"

namespace sdp {

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WardSpec {
  Vector2Expr rho;
  double x = 0.0, y = 0.0, lambda = 0.0, length = 1.0, step = 0.01;
  std::optional<double> expect;
};

struct Scene {
  std::string name;
  std::string digest;  // FNV-1a of the file bytes
  std::filesystem::path path;
  std::vector<Var> coords;

  ProjectiveSurface surface;
  std::optional<ProjectivePair> pair;
  Expr factor{1.0};

  // at most one of these, from the "build" section
  std::string build_kind;
  std::optional<DwQuadrature> dw;
  std::optional<TwistFree> twist_free;
  std::optional<NullKahler> null_kahler;

  std::map<std::string, VectorExpr> fields;
  std::vector<std::vector<std::string>> distributions;
  std::string killing_field = "K";
  std::map<std::string, Expr> congruences;
  std::vector<Point2> probes;
  std::vector<WeightedCongruence> divisor2;
  std::optional<WardSpec> ward;
  std::map<std::string, Vector2Expr> projective_fields;

  BoxSampler sampler;
  int count = 32;
  std::uint64_t seed = 1;
  std::map<std::string, double> tolerances;
  nlohmann::ordered_json expect = nlohmann::ordered_json::object();

  struct BatchEntry {
    std::string command;
    std::filesystem::path scene;
  };
  std::vector<BatchEntry> batch;
};

/// Numeric parameters replace identifiers of the same name in every
/// expression before parsing.
using SceneParams = std::map<std::string, double>;

/// Throws SceneError (or ParseError) on malformed scenes.
Scene load_scene(const std::filesystem::path& path, const SceneParams& params = {});
Scene parse_scene(const std::string& text, const std::filesystem::path& origin, const SceneParams& params = {});

std::string fnv1a_hex(const std::string& bytes);

}  // namespace sdp
