#include "sdp/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace sdp {

JetEnv seed_env(std::span<const Var> coords, std::span<const double> values, int order) {
  if (coords.size() != values.size()) throw std::invalid_argument("seed_env: coordinate/value count mismatch");
  auto layout = JetLayout::get(static_cast<int>(coords.size()), order);
  JetEnv env(layout);
  for (std::size_t i = 0; i < coords.size(); ++i)
    env.set(coords[i], Jet::variable(layout, static_cast<int>(i), values[i]));
  return env;
}

JetVec evaluate_all(std::span<const Expr> es, const JetEnv& env) {
  JetVec out;
  out.reserve(es.size());
  for (const Expr& e : es) out.push_back(evaluate(e, env));
  return out;
}

Jet apply(const JetVec& X, const Jet& f) {
  const int k = f.order() - 1;
  Jet out(JetLayout::get(f.nvars(), k));
  for (std::size_t j = 0; j < X.size(); ++j) out += X[j].truncate(k) * f.derivative(static_cast<int>(j));
  return out;
}

JetVec bracket(const JetVec& X, const JetVec& Y) {
  JetVec out;
  out.reserve(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) out.push_back(apply(X, Y[i]) - apply(Y, X[i]));
  return out;
}

void match_orders(std::vector<Jet*> jets) {
  int k = kMaxJetOrder;
  for (Jet* j : jets) k = std::min(k, j->order());
  for (Jet* j : jets) *j = j->truncate(k);
}

std::vector<double> values(const JetVec& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const Jet& j : v) out.push_back(j.value());
  return out;
}

namespace {

Eigen::MatrixXd basis_matrix(std::size_t n, const std::vector<std::vector<double>>& basis) {
  Eigen::MatrixXd A(n, basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) A(i, j) = basis[j][i];
  return A;
}

}  // namespace

std::vector<double> span_coefficients(std::span<const double> v, const std::vector<std::vector<double>>& basis) {
  const Eigen::MatrixXd A = basis_matrix(v.size(), basis);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return std::vector<double>(c.data(), c.data() + c.size());
}

double span_residual(std::span<const double> v, const std::vector<std::vector<double>>& basis) {
  if (basis.empty()) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
  const Eigen::MatrixXd A = basis_matrix(v.size(), basis);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return (A * c - b).norm();
}

JetMat inverse(const JetMat& m) {
  const std::size_t n = m.size();
  JetMat a = m;
  JetMat inv(n);
  const auto& layout = m[0][0].layout();
  for (std::size_t i = 0; i < n; ++i) {
    inv[i].assign(n, Jet(layout));
    inv[i][i] = Jet(layout, 1.0);
  }
  double scale = 0.0;
  for (const auto& row : m)
    for (const Jet& e : row) scale = std::max(scale, std::fabs(e.value()));
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col].value()) > std::fabs(a[piv][col].value())) piv = r;
    if (!(std::fabs(a[piv][col].value()) > 1e-14 * std::max(scale, 1e-300)))
      throw DomainError("singular matrix in jet inversion");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const Jet r = reciprocal(a[col][col]);
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] = a[col][j] * r;
      inv[col][j] = inv[col][j] * r;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const Jet f = a[i][col];
      bool zero = true;
      for (double c : f.coeffs()) zero = zero && c == 0.0;
      if (zero) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] -= f * a[col][j];
        inv[i][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

JetVec solve(const JetMat& m, const JetVec& b) {
  const JetMat inv = inverse(m);
  JetVec x(b.size(), Jet(b[0].layout()));
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) x[i] += inv[i][j] * b[j];
  return x;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace sdp
