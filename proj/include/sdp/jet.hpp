#pragma once

// Truncated multivariate Taylor polynomials ("jets").
//
// A jet of order k in n variables stores the Taylor coefficients of an
// analytic function at a base point for every multi-index of total degree
// <= k, using the convention coeffs[mu] = (d^mu f)(p) / mu!.  With that
// convention multiplication is a plain truncated convolution and every
// elementary function is applied by composing its 1-d Taylor series with
// the non-constant part of the argument.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdp {

inline constexpr int kMaxJetVars = 5;
inline constexpr int kMaxJetOrder = 6;

/// Raised for evaluations at analytic singularities (division by a jet with
/// zero constant term, log or sqrt outside their domain, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

/// Shared, immutable indexing tables for one (nvars, order) pair.
class JetLayout {
 public:
  struct Product {
    std::uint16_t lhs, rhs, out;
  };
  struct DerivTerm {
    std::uint16_t src;  // index in this layout
    std::uint16_t dst;  // index in the order-1 layout
    double factor;
  };

  static std::shared_ptr<const JetLayout> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(multi_.size()); }

  const MultiIndex& multi_index(int i) const { return multi_[i]; }
  int degree(int i) const { return degree_[i]; }
  /// -1 when the multi-index is outside the layout.
  int index_of(const MultiIndex& mu) const;
  int unit_index(int var) const { return unit_[var]; }

  const std::vector<Product>& products() const { return products_; }
  const std::vector<DerivTerm>& derivative_terms(int var) const { return deriv_[var]; }

  JetLayout(int nvars, int order);

 private:
  int nvars_;
  int order_;
  std::vector<MultiIndex> multi_;
  std::vector<int> degree_;
  std::vector<int> unit_;
  std::vector<int> lookup_;  // dense table over (order+1)^nvars encodings
  std::vector<Product> products_;
  std::vector<std::vector<DerivTerm>> deriv_;

  int encode(const MultiIndex& mu) const;
};

class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const JetLayout> layout, double value = 0.0);

  static Jet constant(std::shared_ptr<const JetLayout> layout, double value) {
    return Jet(std::move(layout), value);
  }
  /// Coordinate function `var` seeded at `value`.
  static Jet variable(std::shared_ptr<const JetLayout> layout, int var, double value);

  const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
  int order() const { return layout_->order(); }
  int nvars() const { return layout_->nvars(); }
  bool valid() const { return layout_ != nullptr; }

  double value() const { return c_[0]; }
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }
  double coeff(const MultiIndex& mu) const;

  /// Partial derivative d^mu f at the base point (= coeff * mu!).
  double extract(const MultiIndex& mu) const;
  double extract(std::initializer_list<int> mu) const;
  /// First partial derivative at the base point.
  double d(int var) const;

  /// Jet of df/dvar, one order lower.
  Jet derivative(int var) const;
  /// Drop every coefficient above `order`.
  Jet truncate(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);

  friend Jet operator-(Jet a) {
    for (double& v : a.c_) v = -v;
    return a;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, double s) { return a /= s; }
  friend Jet operator/(double s, const Jet& a);

 private:
  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> c_;

  void require_same(const Jet& o) const;
};

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);
Jet pow(const Jet& a, int n);

/// Compose the 1-d Taylor series sum_k taylor[k] * h^k with h = a - a(0).
/// taylor.size() must be order+1.
Jet compose(const Jet& a, std::span<const double> taylor);

/// Seeds for a set of coordinates with values `point`.
std::vector<Jet> seed_point(std::span<const double> point, int order);

}  // namespace sdp
