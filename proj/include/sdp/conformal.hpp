#pragma once

// The 4-metric of a Lax pair and its curvature: Levi-Civita connection,
// Riemann, Ricci, Weyl and its split under the Hodge star, plus the
// metric-level checks (Killing fields, twist, null planes, Frobenius,
// null-Kahler structure).
//
// Coordinates are (x, y, w1, w2) with the fiber pair in the last two slots;
// every jet below is a jet in these four variables in that order.

#include <array>
#include <span>
#include <vector>

#include "sdp/fields.hpp"
#include "sdp/pairs.hpp"

namespace sdp {

/// Orientation sign, applied to theta^{00'} ^ theta^{01'} ^ theta^{10'} ^ theta^{11'}.
/// Fixed so that the null-Kahler family has vanishing Weyl^- (see the
/// calibration test).
inline constexpr int kOrientationSign = 1;

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;
/// T[a][b][c][d]
using Tensor4 = std::array<std::array<Mat4, 4>, 4>;
using VectorExpr = std::array<Expr, 4>;

/// X[A] for A = 00', 01', 10', 11', components along the four coordinates.
struct Frame4 {
  std::array<Var, 4> coords{};
  std::array<VectorExpr, 4> X{};
};

/// X_{00'} = phi0, X_{01'} = phi1, X_{10'} = d_x + alpha0, X_{11'} = d_y + alpha1,
/// read off L0 and L1 at lambda = 0 and their lambda-derivatives.
Frame4 frame_from_lax(const LaxPair& L);
Frame4 frame_from_pair(const ProjectivePair& pair);

struct Metric4 {
  JetEnv env;          // the seeded coordinates, for evaluating further fields
  JetMat frame;        // frame[i][A]: column A is X_A
  JetMat coframe;      // coframe[A][i]: row A is theta^A
  JetMat g;            // g[i][j]
  double coframe_det = 0.0;

  explicit Metric4(JetEnv e) : env(std::move(e)) {}
  int order() const { return env.layout->order(); }
  Mat4 values() const;
};

/// g = factor (theta^{00'} theta^{11'} - theta^{01'} theta^{10'}) with the
/// symmetric product ab = a (x) b + b (x) a.  Throws DomainError on a
/// singular frame.
Metric4 metric_from_frame(const Frame4& F, const Vec4& point, int order, const Expr& factor = Expr(1.0));
Metric4 metric_from_lax(const LaxPair& L, const Vec4& point, int order, const Expr& factor = Expr(1.0));

/// Gamma^a_bc as jets one order below the metric.
std::array<JetMat, 4> levi_civita(const Metric4& m);

struct Curvature {
  Mat4 g{}, ginv{};
  Tensor4 riemann{};  // R^a_bcd, R(d_c, d_d) d_b = R^a_bcd d_a
  Mat4 ricci{};       // R_bd = R^a_bad
  double scalar = 0.0;
  Tensor4 weyl{}, weyl_plus{}, weyl_minus{};  // W^a_bcd; the star acts on (c, d)
  double volume_sign = 1.0;                   // orientation times sign det theta
  int positive = 0, negative = 0;             // signature counts

  double riemann_norm = 0.0, ricci_norm = 0.0, tf_ricci_norm = 0.0;
  double weyl_norm = 0.0, weyl_plus_norm = 0.0, weyl_minus_norm = 0.0;
  double star_defect = 0.0;       // |** - 1| on 2-forms
  double projector_defect = 0.0;  // |P+^2 - P+|, |P-^2 - P-|
};

/// Needs metric jets of order >= 2.
Curvature curvature(const Metric4& m, int sigma = kOrientationSign);

/// Hodge star of a 2-form F_ab (antisymmetric) under the metric and
/// orientation of `c`.
Mat4 hodge_star(const Curvature& c, const Mat4& F);

struct KillingReport {
  double lie_norm = 0.0;            // max |L_K g|
  double conformal_residual = 0.0;  // max |trace-free part of L_K g|
  double norm_kk = 0.0;             // g(K, K)
  double twist = 0.0;               // *(alpha ^ d alpha) = twist alpha (Euclidean projection)
  double twist_transverse = 0.0;    // part of *(alpha ^ d alpha) not along alpha
  double geodesic_residual = 0.0;   // D_K K off the K line, Euclidean
};

/// Needs metric jets of order >= 1.
KillingReport killing_report(const Metric4& m, const VectorExpr& K);

/// The two null 2-planes span{K, X+} and span{K, X-} inside K^perp, for a
/// null K.  Jets of the metric's order.
struct NullPlanes {
  JetVec K, plus, minus;
};
NullPlanes null_planes(const Metric4& m, const VectorExpr& K);

/// Max over pairs of the part of [V_i, V_j] outside span(fields) (least
/// squares).  Jets of order >= 1; throws DomainError on dependent fields.
double frobenius_residual(const std::vector<JetVec>& fields);
double frobenius_residual(std::span<const VectorExpr> fields, const std::array<Var, 4>& coords, const Vec4& point);

/// (1/Delta)[(dt - C dx - D dy)(u dx + v dy) - (dz - E dx - F dy)(p dx + q dy)],
/// Delta = p v - q u, for a pair with fiber (t, z) written as
/// phi0 = p d_t + u d_z, phi1 = q d_t + v d_z, alpha0 = C d_t + E d_z,
/// alpha1 = D d_t + F d_z.  This is the frame metric in closed form.
Mat4 dw_metric(const ProjectivePair& pair, const Vec4& point);

struct NullKahler {
  ProjectiveSurface surface;
  ProjectivePair pair;
  LaxPair lax;
  Expr factor;
};

/// a, c functions of (x, y); f a function of (x, z).  Fiber (t, z).
NullKahler build_null_kahler(const Expr& a, const Expr& c, const Expr& f);

/// J = dz (x) d_t + dx (x) (d_y + c d_t) as J[out][in] on (x, y, t, z).
Mat4 null_kahler_J(const NullKahler& nk, const Vec4& point);

struct NullKahlerChecks {
  double d_omega = 0.0;        // max |d omega|
  double j_squared = 0.0;      // max |J^2|
  double compatibility = 0.0;  // max |omega(U, V) - g(JU, V)|
  double literal_j_compatibility = 0.0;  // same for dz (x) d_t + dx (x) d_y
  double j_isotropy = 0.0;     // max |g(JU, JV)|
  double killing = 0.0;        // max |L_{d_t} g|
  double omega_sd = 0.0;       // |*omega - omega|
  double omega_asd = 0.0;      // |*omega + omega|
  Curvature curvature;
};

NullKahlerChecks null_kahler_checks(const NullKahler& nk, const Vec4& point, int order = 3);

struct SelfdualCertificate {
  bool pass = false;
  bool lax_ok = false;
  double lax_defect = 0.0;
  double weyl_minus = 0.0;
  double weyl_plus = 0.0;
};

/// Weyl^- below tol at every point; `lax_ok` records whether the Lax pair
/// itself certifies (otherwise a pass is vacuous and reported as a failure).
SelfdualCertificate certify_selfdual(const LaxPair& L, std::span<const Vec4> points, double tol,
                                     const Expr& factor = Expr(1.0), int order = 3, double lax_tol = 1e-10);

double max_abs(const Tensor4& t);

}  // namespace sdp
