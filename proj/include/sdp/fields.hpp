#pragma once

// Jet-valued vector fields on a coordinate chart, brackets, span residuals
// and small dense linear algebra shared by the geometry modules.

#include <span>
#include <vector>

#include "sdp/expr.hpp"
#include "sdp/jet.hpp"

namespace sdp {

using JetVec = std::vector<Jet>;
using JetMat = std::vector<std::vector<Jet>>;

/// Seeds one jet per chart coordinate; `values[i]` is the value of
/// `coords[i]`.  Extra bindings can be added to the returned environment.
JetEnv seed_env(std::span<const Var> coords, std::span<const double> values, int order);

JetVec evaluate_all(std::span<const Expr> es, const JetEnv& env);

/// Lie bracket [X, Y]; components are derivatives along the jet variables,
/// so the result is one order lower.
JetVec bracket(const JetVec& X, const JetVec& Y);

/// X(f), one order lower.
Jet apply(const JetVec& X, const Jet& f);

/// Common order: truncates every jet to the lowest order present.
void match_orders(std::vector<Jet*> jets);

std::vector<double> values(const JetVec& v);

/// Norm of the component of v orthogonal (Euclidean) to span(basis).
double span_residual(std::span<const double> v, const std::vector<std::vector<double>>& basis);

/// Least-squares coefficients of v in the basis.
std::vector<double> span_coefficients(std::span<const double> v, const std::vector<std::vector<double>>& basis);

/// Inverse of an n x n jet matrix (Gauss-Jordan, pivots on constant terms).
JetMat inverse(const JetMat& m);
/// Solves m x = b at jet level.
JetVec solve(const JetMat& m, const JetVec& b);

double max_abs(std::span<const double> v);

}  // namespace sdp
