#pragma once

// Seeded Halton points over a box, with declared singular loci excluded.

#include <cstdint>
#include <utility>
#include <vector>

#include "sdp/expr.hpp"

namespace sdp {

struct Exclusion {
  Expr expr;
  double guard = 0.0;  // points with |expr| <= guard are skipped
};

struct BoxSampler {
  std::vector<Var> vars;
  std::vector<std::pair<double, double>> ranges;
  std::vector<Exclusion> exclusions;

  /// The first `count` accepted points of the shifted Halton sequence; a
  /// larger count extends the same sequence.  Throws DomainError when the
  /// exclusions reject nearly everything.
  std::vector<std::vector<double>> sample(int count, std::uint64_t seed) const;
  DoubleEnv env(const std::vector<double>& point) const;
};

/// Radical inverse of i in the given base.
double radical_inverse(std::uint64_t i, int base);

}  // namespace sdp
