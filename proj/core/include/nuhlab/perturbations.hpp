#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "nuhlab/lyapunov.hpp"
#include "nuhlab/map_expr.hpp"

namespace nuhlab {

class SupportContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotResolved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Phase space layout T^{dim-2} x T^2: base (hyperbolic) coordinates first,
/// the two center coordinates last. The saved fiber sits over p* in the first
/// base factor.
struct SupportRegion {
  double eps = 0.2;
  double p_star0 = 0.6;
  double p_star1 = 0.2;
  double r_v = 0.02;  // radius of V around the saved fiber (first base factor)
  int dim = 4;        // 4: A x T, 6: A x A x T

  int center_first() const { return dim - 2; }
  CenterLayout layout() const { return {dim, dim - 2}; }
  double center() const { return 0.5 * eps; }
  bool in_m_eps(const TorusPoint& x) const;
  bool in_a_eps(const TorusPoint& x) const;
  bool in_v(const TorusPoint& x) const;
  void validate() const;
  bool operator==(const SupportRegion&) const = default;
};

/// A gadget map together with the region it was built for.
struct Gadget {
  MapExpr map;
  SupportRegion region;
};

/// Shub-Wilkinson coupling. A base shear x_target += a sin(2 pi k x_drive) o(y1) b(y2)
/// couples the stable/unstable plane to the center (o odd, b even, both supported
/// in the disc of radius support*eps about the center of [0, eps]^2), and a center
/// twist about the same point with angle twist * sin(2 pi k' x_target + phase)
/// turns the sheared center toward the contracting direction.
struct ShearParams {
  double amplitude = 0.05;
  double twist = 1.0;
  int target = 1;  // base coordinate receiving the shear (0 or 1); the other drives it
  int drive_frequency = 1;
  int twist_frequency = 10;
  double twist_phase = 0.25;
  double support = 0.25;  // support radius / eps; <= 0.25 keeps the gadget inside A^eps
  double plateau = 0.5;
  double hole = 0.02;     // half-width of the base strip about p* where the gadget vanishes
  double aspect = 1.0;    // twist ellipse semi-axes support*eps*aspect and support*eps/aspect
};

/// Angle profile theta * bump(x0) bump(x1) (1 - bump_hole(x_guard)) about p*.
struct RotationParams {
  double angle = 1.5707963267948966;
  double base_radius = 0.1;  // half-side of the base box about p* carrying the rotation
  double hole = 0.03;        // half-width of the strip about p* where the angle vanishes
  double disc = 0.5;         // center disc radius / eps (<= 0.5 keeps it inside M^eps)
  double plateau = 0.5;
};

/// Off-center center twist whose angle varies along the base:
/// amplitude * sin(2 pi k x0 + phase), about c + (offset*eps, 0).
struct AccessibilityParams {
  double amplitude = 0.3;
  int frequency = 1;
  double phase = 0.0;
  double offset = 1.0 / 32.0;  // center shift / eps
  double radius = 0.46875;     // disc radius / eps; offset + radius <= 0.5
  double plateau = 0.5;
  double hole = 0.02;
};

Gadget sw_shear(const SupportRegion& region, const ShearParams& params);
Gadget bm_rotation(const SupportRegion& region, const RotationParams& params);
Gadget dw_accessibility_shear(const SupportRegion& region, const AccessibilityParams& params);
/// outer o inner; regions must agree.
Gadget compose_gadgets(const Gadget& outer, const Gadget& inner);
Gadget identity_gadget(const SupportRegion& region);

enum class Variant { T4, T6 };

/// f = h~ o (A x T) o h (T4) or h~ o (A x A x T) o h (T6).
struct PipelineSpec {
  IntMat a;
  MapExpr t = MapExpr::identity(2);
  MapExpr h = MapExpr::identity(4);
  MapExpr h_tilde = MapExpr::identity(4);
  MapExpr product = MapExpr::identity(4);
  MapExpr f = MapExpr::identity(4);
  MapExpr f_inverse = MapExpr::identity(4);
  SupportRegion region;
  Variant variant = Variant::T4;
};

PipelineSpec assemble_f(const IntMat& a, const MapExpr& t, const Gadget& h, const Gadget& h_tilde);

/// Integration domains (all products T^{dim-2} x D with D in the center torus).
enum class Domain { Torus, MEps, AEps, MEpsMinusAEps, OutsideMEps };
std::string domain_name(Domain d);
double domain_volume(Domain d, double eps);

struct IntegralOptions {
  long long samples = 10000;  // antithetic pairs count as two samples
  int horizon = 24;           // forward and backward steps for the center bundle
  bool antithetic = true;     // pair w with its center reflection about (eps/2, eps/2)
  bool absolute = false;      // integrate |g| instead of g
  std::uint64_t seed = 1;
  std::uint64_t task = 0;     // base task id of the substreams
  int threads = 1;
  double min_conditioning = 1e-6;
};

struct IntegralEstimate {
  std::string region;
  double estimate = 0.0;  // integral over the domain (volume * mean)
  double stderr_ = 0.0;
  long long n = 0;        // samples used
  long long excluded = 0; // samples dropped because the splitting was not resolved
  bool flagged = false;   // excluded fraction above 1%
  std::uint64_t seed = 0;
  double lower99() const { return estimate - 2.5758293035489 * stderr_; }
  double upper99() const { return estimate + 2.5758293035489 * stderr_; }
};

/// Integrand log|det Df|E^c(w)| in center-graph coordinates (sum of the two
/// one-step central growth rates).
double central_log_jacobian(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& w, int horizon,
                            CenterLayout layout, double min_conditioning = 1e-6);

IntegralEstimate integrated_central_exponent(const MapExpr& f, const MapExpr& f_inverse,
                                             const SupportRegion& region, Domain domain,
                                             const IntegralOptions& options);

struct LocalizationRatio {
  IntegralEstimate outside;  // int over M \ A^eps of |g| (sum of two strata)
  IntegralEstimate inside;   // int over A^eps of g
  double ratio = 0.0;
  double stderr_ = 0.0;
  bool below(double factor) const { return ratio + stderr_ < factor; }
};

/// Throws NotResolved when the 99% interval of the A^eps integral contains 0.
LocalizationRatio localization_ratio(const MapExpr& f, const MapExpr& f_inverse, const SupportRegion& region,
                                     const IntegralOptions& options);

}  // namespace nuhlab
