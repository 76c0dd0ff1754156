#include "sdp/sampling.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sdp/jet.hpp"

namespace sdp {

namespace {
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

std::vector<std::vector<double>> BoxSampler::sample(int count, std::uint64_t seed) const {
  const std::size_t dim = vars.size();
  if (dim > std::size(kPrimes)) throw std::invalid_argument("too many sampled variables");
  // Cranley-Patterson shift per dimension
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> shift(dim);
  for (double& s : shift) s = U(rng);

  std::vector<std::vector<double>> out;
  const std::uint64_t limit = 100ull * static_cast<std::uint64_t>(std::max(count, 1)) + 1000;
  for (std::uint64_t i = 1; static_cast<int>(out.size()) < count; ++i) {
    if (i > limit) throw DomainError("sampling box is almost entirely excluded");
    std::vector<double> p(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double u = radical_inverse(i, kPrimes[d]) + shift[d];
      u -= std::floor(u);
      p[d] = ranges[d].first + u * (ranges[d].second - ranges[d].first);
    }
    const DoubleEnv e = env(p);
    bool ok = true;
    for (const Exclusion& x : exclusions) {
      double v = 0.0;
      try {
        v = evaluate(x.expr, e);
      } catch (const DomainError&) {
        ok = false;
        break;
      }
      if (!std::isfinite(v) || std::fabs(v) <= x.guard) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(std::move(p));
  }
  return out;
}

DoubleEnv BoxSampler::env(const std::vector<double>& point) const {
  DoubleEnv e;
  for (std::size_t d = 0; d < vars.size(); ++d) e.set(vars[d], point[d]);
  return e;
}

}  // namespace sdp
