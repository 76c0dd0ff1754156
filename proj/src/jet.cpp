#include "sdp/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace sdp {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void enumerate(int nvars, int order, std::vector<MultiIndex>& out) {
  // graded order: all degree-0 entries, then degree 1, ...
  for (int deg = 0; deg <= order; ++deg) {
    MultiIndex mu{};
    // recursive fill of the remaining degree into the variables
    auto rec = [&](auto&& self, int var, int left) -> void {
      if (var == nvars - 1) {
        mu[var] = static_cast<std::uint8_t>(left);
        out.push_back(mu);
        return;
      }
      for (int k = left; k >= 0; --k) {
        mu[var] = static_cast<std::uint8_t>(k);
        self(self, var + 1, left - k);
      }
      mu[var] = 0;
    };
    if (nvars == 0) {
      if (deg == 0) out.push_back(mu);
      continue;
    }
    rec(rec, 0, deg);
  }
}

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  if (nvars < 0 || nvars > kMaxJetVars) throw std::invalid_argument("jet: unsupported variable count");
  if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet: unsupported order");
  enumerate(nvars, order, multi_);

  int table = 1;
  for (int v = 0; v < nvars; ++v) table *= (order + 1);
  lookup_.assign(table, -1);
  degree_.resize(multi_.size());
  for (std::size_t i = 0; i < multi_.size(); ++i) {
    int deg = 0;
    for (int v = 0; v < nvars; ++v) deg += multi_[i][v];
    degree_[i] = deg;
    lookup_[encode(multi_[i])] = static_cast<int>(i);
  }

  unit_.assign(nvars, -1);
  for (int v = 0; v < nvars && order >= 1; ++v) {
    MultiIndex e{};
    e[v] = 1;
    unit_[v] = index_of(e);
  }

  for (std::size_t i = 0; i < multi_.size(); ++i) {
    for (std::size_t j = 0; j < multi_.size(); ++j) {
      if (degree_[i] + degree_[j] > order) continue;
      MultiIndex s{};
      for (int v = 0; v < nvars; ++v) s[v] = static_cast<std::uint8_t>(multi_[i][v] + multi_[j][v]);
      products_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                           static_cast<std::uint16_t>(index_of(s))});
    }
  }

  deriv_.resize(nvars);
  if (order >= 1) {
    auto lower = JetLayout::get(nvars, order - 1);
    for (int v = 0; v < nvars; ++v) {
      for (int dst = 0; dst < lower->size(); ++dst) {
        MultiIndex mu = lower->multi_index(dst);
        mu[v] = static_cast<std::uint8_t>(mu[v] + 1);
        const int src = index_of(mu);
        deriv_[v].push_back({static_cast<std::uint16_t>(src), static_cast<std::uint16_t>(dst),
                             static_cast<double>(mu[v])});
      }
    }
  }
}

int JetLayout::encode(const MultiIndex& mu) const {
  int code = 0;
  for (int v = 0; v < nvars_; ++v) code = code * (order_ + 1) + mu[v];
  return code;
}

int JetLayout::index_of(const MultiIndex& mu) const {
  int deg = 0;
  for (int v = 0; v < nvars_; ++v) deg += mu[v];
  for (int v = nvars_; v < kMaxJetVars; ++v)
    if (mu[v] != 0) return -1;
  if (deg > order_) return -1;
  return lookup_[encode(mu)];
}

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find({nvars, order});
    if (it != cache.end()) return it->second;
  }
  // constructed outside the lock: the constructor recurses into get() for order-1
  auto layout = std::make_shared<const JetLayout>(nvars, order);
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(std::make_pair(nvars, order), layout);
  return it->second;
}

Jet::Jet(std::shared_ptr<const JetLayout> layout, double value)
    : layout_(std::move(layout)), c_(layout_->size(), 0.0) {
  c_[0] = value;
}

Jet Jet::variable(std::shared_ptr<const JetLayout> layout, int var, double value) {
  Jet j(layout, value);
  if (layout->order() >= 1) j.c_[layout->unit_index(var)] = 1.0;
  return j;
}

double Jet::coeff(const MultiIndex& mu) const {
  const int i = layout_->index_of(mu);
  if (i < 0) throw std::out_of_range("jet: multi-index outside truncation order");
  return c_[i];
}

double Jet::extract(const MultiIndex& mu) const {
  double f = 1.0;
  for (int v = 0; v < kMaxJetVars; ++v) f *= factorial(mu[v]);
  return coeff(mu) * f;
}

double Jet::extract(std::initializer_list<int> mu) const {
  if (static_cast<int>(mu.size()) > nvars()) throw std::out_of_range("jet: multi-index has too many entries");
  MultiIndex m{};
  int v = 0;
  for (int k : mu) {
    if (k < 0) throw std::out_of_range("jet: negative multi-index entry");
    m[v++] = static_cast<std::uint8_t>(k);
  }
  return extract(m);
}

double Jet::d(int var) const {
  if (order() < 1) throw std::out_of_range("jet: no first derivatives at order 0");
  return c_[layout_->unit_index(var)];
}

Jet Jet::derivative(int var) const {
  if (order() < 1) throw std::out_of_range("jet: cannot differentiate an order-0 jet");
  Jet out(JetLayout::get(nvars(), order() - 1));
  for (const auto& t : layout_->derivative_terms(var)) out.c_[t.dst] = t.factor * c_[t.src];
  return out;
}

Jet Jet::truncate(int order) const {
  if (order >= this->order()) return *this;
  Jet out(JetLayout::get(nvars(), order));
  // graded storage: the lower layout is a prefix of this one
  std::copy_n(c_.begin(), out.c_.size(), out.c_.begin());
  return out;
}

void Jet::require_same(const Jet& o) const {
  if (layout_ != o.layout_) throw std::invalid_argument("jet: mismatched order or variable set");
}

Jet& Jet::operator+=(const Jet& o) {
  require_same(o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_same(o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }
Jet& Jet::operator/=(const Jet& o) { return *this = *this / o; }
Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}
Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}
Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}
Jet& Jet::operator/=(double s) {
  if (s == 0.0) throw DomainError("division by zero");
  for (double& v : c_) v /= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.require_same(b);
  Jet out(a.layout_);
  out.c_[0] = 0.0;
  for (const auto& p : a.layout_->products()) out.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
  return out;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet compose(const Jet& a, std::span<const double> taylor) {
  const int k = a.order();
  if (static_cast<int>(taylor.size()) != k + 1) throw std::invalid_argument("jet: taylor series length");
  Jet h = a;
  h.coeffs()[0] = 0.0;
  // Horner in h; h^(k+1) vanishes under truncation
  Jet out(a.layout(), taylor[k]);
  for (int i = k - 1; i >= 0; --i) {
    out = out * h;
    out += taylor[i];
  }
  return out;
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  std::vector<double> t(a.order() + 1);
  const double cyc[4] = {s, c, -s, -c};
  for (int i = 0; i <= a.order(); ++i) t[i] = cyc[i % 4] / factorial(i);
  return compose(a, t);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  std::vector<double> t(a.order() + 1);
  const double cyc[4] = {c, -s, -c, s};
  for (int i = 0; i <= a.order(); ++i) t[i] = cyc[i % 4] / factorial(i);
  return compose(a, t);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  std::vector<double> t(a.order() + 1);
  for (int i = 0; i <= a.order(); ++i) t[i] = e / factorial(i);
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double x = a.value();
  if (!(x > 0.0)) throw DomainError("log of nonpositive value");
  std::vector<double> t(a.order() + 1);
  t[0] = std::log(x);
  // d^k log / dx^k = (-1)^(k-1) (k-1)! / x^k, divided by k!
  for (int i = 1; i <= a.order(); ++i) t[i] = ((i % 2) ? 1.0 : -1.0) / (i * std::pow(x, i));
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  const double x = a.value();
  if (x < 0.0 || (x == 0.0 && a.order() > 0)) throw DomainError("sqrt outside its domain");
  std::vector<double> t(a.order() + 1);
  // binomial series (x + h)^(1/2) = sum C(1/2, k) x^(1/2-k) h^k
  double binom = 1.0;
  for (int i = 0; i <= a.order(); ++i) {
    t[i] = binom * std::pow(x, 0.5 - i);
    binom *= (0.5 - i) / (i + 1);
  }
  return compose(a, t);
}

Jet reciprocal(const Jet& a) {
  const double x = a.value();
  if (x == 0.0) throw DomainError("division by a jet with zero constant term");
  std::vector<double> t(a.order() + 1);
  double p = 1.0 / x;
  for (int i = 0; i <= a.order(); ++i) {
    t[i] = ((i % 2) ? -1.0 : 1.0) * p;
    p /= x;
  }
  return compose(a, t);
}

Jet pow(const Jet& a, int n) {
  if (n < 0) return pow(reciprocal(a), -n);
  Jet result(a.layout(), 1.0);
  Jet base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

std::vector<Jet> seed_point(std::span<const double> point, int order) {
  auto layout = JetLayout::get(static_cast<int>(point.size()), order);
  std::vector<Jet> out;
  out.reserve(point.size());
  for (std::size_t v = 0; v < point.size(); ++v) out.push_back(Jet::variable(layout, static_cast<int>(v), point[v]));
  return out;
}

}  // namespace sdp
