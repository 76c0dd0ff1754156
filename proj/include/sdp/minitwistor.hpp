#pragma once

// Surface-side calculus of the minitwistor correspondence: geodesic
// congruences with their line-bundle connections (abelian pairs), degree two
// divisors through the Weyl connection of c = phi1 phi2, transport along
// geodesics and projective vector fields.
//
// Line bundles are trivialized over the chart, so a connection is a 1-form
// rho = rho0 dx + rho1 dy.  A weighted vector field phi is handled through
// psi = (-phi1, phi0), its image in O(2) (x) T*N, and O(w) carries the
// connection (w/3) Gamma^c_ac dx^a in the coordinate trivialization.

#include <array>
#include <span>

#include "sdp/projective.hpp"

namespace sdp {

using Point2 = std::array<double, 2>;
using Vector2Expr = std::array<Expr, 2>;

struct WeightedCongruence {
  Vector2Expr phi;                            // components along d_x, d_y
  Vector2Expr rho{Expr(0.0), Expr(0.0)};      // connection 1-form on L
};

/// The slope field phi = d_x + beta d_y with its canonical connection in
/// closed form (solving the (11) and (01) equations symbolically).
WeightedCongruence congruence_connection(const ProjectiveSurface& P, const Expr& beta);

/// Max over points of |sym(D^rho psi)| (entries 00, 11 and the symmetrized 01).
double abelian_pair_residual(const ProjectiveSurface& P, const WeightedCongruence& c, std::span<const Point2> points);

struct CanonicalConnection {
  std::array<double, 2> rho{};
  double residual = 0.0;   // leftover |sym(D^rho psi)| of the least-squares solve
  double skew = 0.0;       // (D^rho psi)_01 - (D^rho psi)_10
  double r_phi_phi = 0.0;  // r(phi, phi) for the representative with D^rho psi = 0
};

/// Throws DomainError when phi vanishes at the point.
CanonicalConnection canonical_connection_from_congruence(const ProjectiveSurface& P, const Vector2Expr& phi,
                                                         const Point2& point);

struct DivisorTwoPoint {
  double dc_residual = 0.0;  // max |(D + [gamma_W]) c| over the six components
  std::array<double, 2> gamma{};
  double r_sym = 0.0, r_skew = 0.0;  // max |sym r|, |skew r| of the Weyl connection
  double f1 = 0.0, f2 = 0.0;         // F^j = d rho_j (dx dy component)
};

struct DivisorTwoReport {
  std::vector<DivisorTwoPoint> points;
  double dc_residual = 0.0, r_sym = 0.0, r_skew = 0.0, f_sum = 0.0, f_diff = 0.0;
  bool r_symmetric = false, sum_flat = false;  // these two should agree
  bool r_skew_only = false, diff_flat = false;  // and these
  bool consistent = false;
};

/// Throws DomainError when phi1, phi2 are dependent at a point.
DivisorTwoReport divisor_two_report(const ProjectiveSurface& P, const WeightedCongruence& c1,
                                    const WeightedCongruence& c2, std::span<const Point2> points, double tol = 1e-8);

struct WardTransport {
  double value = 1.0;
  GeodesicPoint end;
};

/// Parallel transport of the trivialized fiber along the geodesic through
/// (x, y) with slope lambda: exp(-integral of rho).
WardTransport ward_transport(const ProjectiveSurface& P, const Vector2Expr& rho, double x, double y, double lambda,
                             double length, double step);

/// Slopes at which the prolonged bracket is sampled.
inline constexpr std::array<double, 5> kFieldSlopes{-1.5, -0.5, 0.0, 0.5, 1.5};

/// Max over points and slopes of the part of [V~, S] outside span{S}, with
/// V~ = V0 d_x + V1 d_y + (V1_x + lambda (V1_y - V0_x) - lambda^2 V0_y) d_lambda.
double projective_field_residual(const ProjectiveSurface& P, const Vector2Expr& V, std::span<const Point2> points);

}  // namespace sdp
