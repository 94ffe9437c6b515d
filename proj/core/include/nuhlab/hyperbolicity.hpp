#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nuhlab/lyapunov.hpp"
#include "nuhlab/map_expr.hpp"

namespace nuhlab {

class LoopNotClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constant reference splitting E^u + E^s + E^c of A x Id (or A x A x Id):
/// eigenvectors of A in each hyperbolic factor, the last two coordinates as center.
struct ReferenceSplitting {
  Mat unstable;  // dim x k
  Mat stable;    // dim x k
  Mat center;    // dim x 2
  double lambda = 1.0;  // |unstable eigenvalue| of A

  static ReferenceSplitting of(const IntMat& a, int dim);
  int dim() const { return static_cast<int>(unstable.rows()); }
  /// Coordinates of v in the basis [unstable | stable | center].
  Vec coefficients(const Vec& v) const;
  /// [unstable | center | stable]: a Benettin starting frame in descending growth order.
  Mat ordered_frame() const;
};

struct ConeField {
  ReferenceSplitting splitting;
  double aperture_u = 0.3;
  double aperture_s = 0.3;
  /// Throws std::invalid_argument unless both apertures lie in (0, pi/4).
  void validate() const;
};

/// Worst cases over all samples. Cone vectors are u + tan(a) (w_s + w_c) with u in
/// the axis space and |w_s|, |w_c| <= 1; the image under Df^n is split along the
/// reference splitting. For the stable cone the same is done with Df^{-n}.
/// n > 1 tests an iterate, which is how domination shows up when the center
/// map has large one-step derivatives but bounded powers.
struct ConeMargins {
  double expansion_u = 0.0;     // min |P_u Df v| / |P_u v|
  double angle_u = 0.0;         // max |P_s Df v| / (tan(a) |P_u Df v|): < 1 means strictly inside
  double center_u = 0.0;        // max |P_c Df v| / (tan(a) |P_u Df v|)
  double expansion_s = 0.0;     // same for the stable cone under Df^{-1}
  double angle_s = 0.0;
  double center_s = 0.0;
  long long samples = 0;
  /// Strict invariance of both cones with expansion > 1.
  bool invariant() const {
    return expansion_u > 1.0 && expansion_s > 1.0 && angle_u < 1.0 && angle_s < 1.0 && center_u < 1.0 &&
           center_s < 1.0;
  }
  double worst_margin() const;
};

ConeMargins verify_cone_invariance(const MapExpr& f, const MapExpr& f_inverse, const ConeField& cones,
                                   long long n_samples, int n_steps, std::uint64_t seed, int threads = 1);

/// Per-step margins of the n-th iterate: M_c is the center block of Df^n.
struct BunchingReport {
  double margin = 0.0;  // min over resolved samples of (log(lambda_u) - log(||M_c|| ||M_c^{-1}||)) / n
  double worst_ratio = 1.0;  // max ||M_c|| ||M_c^{-1}||
  int n_steps = 1;
  long long resolved = 0;
  long long excluded = 0;
};

BunchingReport bunching_check(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                              long long n_samples, std::uint64_t seed, int horizon = 24, int n_steps = 1,
                              int threads = 1);

enum class LeafType { Stable, Unstable };

/// Approximate local leaf: f^depth (or f^-depth) of a short segment through
/// f^-depth(x) (resp. f^depth(x)) along the reference direction, re-sampled to
/// uniform arc length after each step. Points are lifted (not reduced mod 1),
/// points.front() is the base point.
struct LeafPolyline {
  TorusPoint base;
  LeafType type = LeafType::Unstable;
  std::vector<Vec> points;
  std::vector<double> arclength;
  int refinement = 0;  // number of segments
  bool truncated = false;  // the leaf left the cone about the reference direction

  /// Point at which the projection of (p - base) on `axis` equals s (linear
  /// interpolation); throws std::out_of_range if the leaf is too short.
  Vec at_projection(const Vec& axis, double s) const;
};

struct LeafOptions {
  int refinement = 16;  // samples per leaf length; the polyline is refined further where it stretches
  int depth = 4;
  double max_gap = 0.02;  // largest torus distance between consecutive samples
  double cone_aperture = 0.5;  // truncation test against the reference direction
};

/// Leaf of signed base length `length` along the first reference direction of the given type.
LeafPolyline approximate_leaf(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                              const TorusPoint& x, LeafType type, double length, const LeafOptions& options);

struct HolonomyResult {
  TorusPoint base;
  double legs[4] = {0, 0, 0, 0};  // signed projections on the reference directions
  TorusPoint endpoint;
  Eigen::Vector2d displacement = Eigen::Vector2d::Zero();
  double error = 0.0;      // |displacement(depth) - displacement(depth + 1)|
  double closure = 0.0;    // max base-coordinate mismatch of the closed loop
  bool significant() const { return displacement.norm() > 3.0 * error; }
  /// |displacement| <= 3 error + absolute floor for rounding.
  bool zero_within_error(double floor = 1e-12) const { return displacement.norm() <= 3.0 * error + floor; }
};

/// u-leg, s-leg, u-leg, s-leg; the last two lengths are found by Newton shooting
/// so that the base coordinates return to the start within 1e-8. Leg endpoints
/// are single seed points pushed through f^depth (not interpolated from a
/// polyline), and the error compares leaf growth depths depth and depth + 1.
HolonomyResult su_quadrilateral(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                                const TorusPoint& x, double leg_u, double leg_s, const LeafOptions& options);

struct ReachRaster {
  int width = 0;
  int height = 0;
  double lo0 = 0.0, lo1 = 0.0, hi0 = 0.0, hi1 = 0.0;  // center box covered
  std::vector<TorusPoint> points;
  std::vector<double> magnitude;  // NaN for failed cells
  std::vector<double> error;
  std::vector<int> attempts;  // quadrilaterals tried per cell
  std::vector<std::string> failures;
  double significant_fraction() const;
  double zero_fraction(double floor = 1e-12) const;
};

/// su_quadrilateral on a width x width grid of cell centers over the center box
/// [lo, hi]^2; base coordinates drawn from Philox substream (seed, cell).
/// Each cell tries a fixed list of leg orientations and scales at depth and
/// depth - 1, keeping the first significant loop (the product map gives zero
/// displacement for all of them).
ReachRaster accessibility_reach(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                                double lo, double hi, int width, double leg, const LeafOptions& options,
                                std::uint64_t seed, int threads = 1);

/// Holonomy magnitudes at x, f(x), ..., f^{n-1}(x): the extended class along an orbit.
std::vector<double> orbit_reach(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                                const TorusPoint& x, int n, double leg, const LeafOptions& options);

}  // namespace nuhlab
