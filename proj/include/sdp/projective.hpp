#pragma once

// Projective structures on a surface with coordinates (x, y) = (x0, x1):
// Christoffel/spray dictionary, projective change, Ricci-type curvature,
// Cotton tensor, lifted spray, geodesics and geodesic congruences.

#include <array>
#include <functional>
#include <vector>

#include "sdp/expr.hpp"
#include "sdp/fields.hpp"

namespace sdp {

using Mat2 = std::array<std::array<double, 2>, 2>;
using JetMat2 = std::array<std::array<Jet, 2>, 2>;

/// Storage slot of Gamma^i_jk (symmetric in j, k): 000 001 011 100 101 111.
int christoffel_slot(int i, int j, int k);

/// Jets of the six stored Christoffel symbols.
struct ChristoffelJets {
  std::array<Jet, 6> g;
  const Jet& operator()(int i, int j, int k) const { return g[christoffel_slot(i, j, k)]; }
  int order() const { return g[0].order(); }
};

class ProjectiveSurface {
 public:
  ProjectiveSurface();  // flat
  /// Slots in christoffel_slot order.
  static ProjectiveSurface from_christoffel(const std::array<Expr, 6>& gamma);
  /// Canonical representative with the given spray coefficients.
  static ProjectiveSurface from_spray(const std::array<Expr, 4>& a);

  const Expr& gamma(int i, int j, int k) const { return g_[christoffel_slot(i, j, k)]; }
  const std::array<Expr, 6>& christoffels() const { return g_; }

  ChristoffelJets christoffel_jets(const JetEnv& env) const;

 private:
  std::array<Expr, 6> g_;
};

/// a0..a3 of a(lambda) = a0 + a1 lambda + a2 lambda^2 + a3 lambda^3.
std::array<Expr, 4> spray_coeffs(const ProjectiveSurface& P);

/// Gamma^A_BC + g_B delta^A_C + g_C delta^A_B.
ProjectiveSurface projective_change(const ProjectiveSurface& P, const Expr& g0, const Expr& g1);
ChristoffelJets projective_change(const ChristoffelJets& G, const Jet& g0, const Jet& g1);

/// a(s), a'(s), a''(s) for symbolic s.
Expr spray_poly(const std::array<Expr, 4>& a, const Expr& s);
Expr spray_poly_d1(const std::array<Expr, 4>& a, const Expr& s);
Expr spray_poly_d2(const std::array<Expr, 4>& a, const Expr& s);

/// Full curvature R^A_{B,01} = R(d0, d1) dB, indexed [A][B]; one order lower
/// than the Christoffel jets.
JetMat2 curvature_01(const ChristoffelJets& G);

/// The reconstruction B(r)(d0, d1) dB as [A][B].
Mat2 reconstruct_curvature(const Mat2& r);
JetMat2 reconstruct_curvature(const JetMat2& r);

/// r^D solving R = B(r); one order lower than the Christoffel jets.
JetMat2 ricci_type(const ChristoffelJets& G);

Mat2 ricci_from_connection(const ProjectiveSurface& P, double x, double y);
Mat2 curvature_at(const ProjectiveSurface& P, double x, double y);

/// Cotton tensor C_Z = (D_x r)(y, Z) - (D_y r)(x, Z), two components.
std::array<double, 2> cotton(const ProjectiveSurface& P, double x, double y);

/// Velocity of (x, y, pi0, pi1) under the lifted spray.
std::array<double, 4> lifted_spray(const ProjectiveSurface& P, const std::array<double, 4>& state);

/// Point of a geodesic in P(TN).  In the inverted chart `slope` holds
/// mu = 1/lambda.  `ell` is the accumulated value of the optional transport
/// integrand.
struct GeodesicPoint {
  double x = 0.0, y = 0.0, slope = 0.0;
  bool inverted = false;
  double ell = 0.0;
  double lambda() const;
};

/// Integrand of an optional scalar ODE carried along the path:
/// d ell / d tau = f(x, y, dx/dtau, dy/dtau).
using TransportIntegrand = std::function<double(double, double, double, double)>;

/// RK4 integral curve of d_x + lambda d_y + a(lambda) d_lambda.  The curve
/// parameter is x in the lambda chart and y in the 1/lambda chart, so a unit
/// of `length` advances the current affine coordinate by one.  Charts swap at
/// step boundaries when |slope| > 1.
std::vector<GeodesicPoint> integrate_geodesic(const ProjectiveSurface& P, double x, double y, double lambda,
                                              double length, double step,
                                              const TransportIntegrand& transport = nullptr);

struct CongruenceSample {
  double residual = 0.0;     // beta_x + beta beta_y - a(beta)
  std::array<double, 3> b{};  // b(lambda) = b0 + b1 lambda + b2 lambda^2
};

/// `point` binds x, y and any further variables beta depends on (e.g. z).
CongruenceSample congruence_residual(const ProjectiveSurface& P, const Expr& beta, const DoubleEnv& point);

}  // namespace sdp
