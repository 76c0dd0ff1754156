#pragma once

// Projective pairs (alpha, phi) with values in vertical vector fields on a
// two-dimensional fiber, their Lax pairs and integrability residuals, and
// the explicit constructions over a projective surface.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "sdp/expr.hpp"
#include "sdp/projective.hpp"

namespace sdp {

/// Components along (fiber[0], fiber[1]).
using VField = std::array<Expr, 2>;

struct ProjectivePair {
  std::array<Var, 2> fiber{Var::w1, Var::w2};
  VField alpha0{}, alpha1{}, phi0{}, phi1{};
  Expr c0{}, c1{};

  /// x, y, fiber[0], fiber[1].
  std::array<Var, 4> coords() const { return {Var::x, Var::y, fiber[0], fiber[1]}; }
};

/// Vector fields on (x, y, fiber[0], fiber[1], lambda), polynomial in lambda.
/// The `inv` fields are the same pair in the chart mu = 1/lambda, with the
/// variable `lambda` standing for mu.
struct LaxPair {
  std::array<Var, 5> coords{};
  std::array<Expr, 5> L0{}, L1{};
  std::array<Expr, 5> L0_inv{}, L1_inv{};
};

LaxPair build_lax(const ProjectiveSurface& P, const ProjectivePair& pair);

inline constexpr std::array<double, 7> kLambdaSamples{0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0};
inline constexpr std::array<double, 2> kInverseSamples{0.5, -0.5};

struct LaxSample {
  double residual = 0.0;          // max over lambda samples of |[L0,L1] - b L0|
  double inverse_residual = 0.0;  // same in the 1/lambda chart
  double bracket_norm = 0.0;      // max |[L0, L1]|
  std::array<double, 4> b{};      // cubic fitted to the projection coefficients
  double fit_residual = 0.0;      // misfit of the cubic over the 7 samples

  /// Integrability defect: span residuals plus the failure of b to be quadratic.
  /// With a one-dimensional effective fiber the span residual vanishes
  /// identically and only the last two terms carry information.
  double defect() const { return std::max({residual, inverse_residual, fit_residual, std::fabs(b[3])}); }
};

/// `point` = (x, y, fiber[0], fiber[1]).
LaxSample lax_residual(const LaxPair& L, const std::array<double, 4>& point);

/// Max component of the three displayed vertical-vector equations.
double projective_pair_residual(const ProjectiveSurface& P, const ProjectivePair& pair,
                                const std::array<double, 4>& point);

/// Vertical field bracket [u, v] on the fiber coordinates, symbolic.
VField fiber_bracket(const ProjectivePair& pair, const VField& u, const VField& v);

/// Output of the quadrature construction; the *_residual expressions vanish
/// exactly when the corresponding precondition holds.
struct DwQuadrature {
  ProjectivePair pair;
  Expr beta, E, F, C, D;
  Expr congruence_residual;  // gamma_x + gamma gamma_y - a(gamma)
  Expr primitive_residual;   // G_z - H
  Expr transport_residual;   // H_x + beta H_y + (E + beta F) H_z
  Expr c_residual;           // C_z - (H_y + F H_z)
};

/// Fiber (t, z).  `C` defaults to 0, which is admissible when H_y + F H_z = 0.
DwQuadrature dw_quadrature_build(const ProjectiveSurface& P, const Expr& gamma, double c_twist, const Expr& H,
                                 const Expr& G, const Expr& C = Expr(0.0));

/// H at (x, y, z) for the transport equation of the quadrature builder, by
/// following the characteristic dy/dx = beta, dz/dx = E + beta F back to the
/// slice x = x0, where H = h0(y, z).
double dw_transport_characteristic(const ProjectiveSurface& P, const Expr& gamma, double c_twist, const Expr& h0,
                                   double x0, double x, double y, double z, int steps = 400);

struct TwistFree {
  ProjectivePair pair;
  Expr Q;  // coefficient of z d_z in L1, polynomial in lambda
  Expr congruence_residual;
  std::array<Expr, 3> time_residuals;  // conditions on the optional (p, q) extension
};

/// Diff_1 normal form with multiplier b = -a'(lambda)/3, fiber (t, z).  The
/// optional time extension adds p d_t to phi0 and q d_t to phi1 with p, q
/// functions of (x, y); p = q = 0 gives a pure Diff_1 pair.
TwistFree twist_free_normal_form(const ProjectiveSurface& P, const Expr& beta, const Expr& p = Expr(0.0),
                                 const Expr& q = Expr(0.0));

/// L0 = d_z + lambda d_t, L1 = d_x + a z d_t + lambda(d_y + c d_t) + a d_lambda
/// over the projective structure with a0 = a; fiber (t, z).
ProjectiveSurface null_kahler_surface(const Expr& a);
ProjectivePair null_kahler_pair(const Expr& a, const Expr& c);

/// Maxima at one point of the quantities behind the gauge flags.  Fiber
/// coordinates are read as (t, z) = (fiber[0], fiber[1]) for the flags that
/// single out a line.
struct GaugeSample {
  double div_phi = 0.0;        // |div phi_i|
  double div_alpha = 0.0;      // |div alpha_i|
  double div_variation = 0.0;  // |d_w div| over phi and alpha
  double t_dependence = 0.0;   // |d_t| of every component
  double z_curvature = 0.0;    // |d_z^2| of every component
  double phi_z_dependence = 0.0;  // |d_z| of phi components
  double area_curvature = 0.0;    // d_x A_1 - d_y A_0 with A_i = div alpha_i
  double area_variation = 0.0;    // |d_w A_i|
};

GaugeSample gauge_sample(const ProjectivePair& pair, const std::array<double, 4>& point);

struct GaugeFlags {
  bool sdiff2 = false;
  bool hdiff2 = false;
  bool phi_in_sdiff2 = false;
  bool hdiff2_phi_sdiff = false;
  bool aff1_translational = false;
  bool o_times_diff1 = false;
  bool area_flat = false;
};

GaugeFlags gauge_flags(const GaugeSample& worst, double tol);
GaugeSample max_merge(const GaugeSample& a, const GaugeSample& b);

}  // namespace sdp
