#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nuhlab/map_expr.hpp"

namespace nuhlab {

class NonFiniteJacobian : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SplittingNotResolved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Finite-time Lyapunov spectrum with its convergence history.
struct LyapunovEstimate {
  Vec exponents;   // descending
  int horizon = 0;
  int renorm = 1;
  Vec log_sums;    // accumulated log|R_ii| per frame column
  std::vector<std::pair<int, Vec>> checkpoints;

  double sum() const { return exponents.sum(); }
};

/// Benettin / QR propagation of an orthonormal frame for n steps, re-orthonormalized
/// every `renorm` steps. `checkpoint_every` > 0 records the running averages.
/// `initial` (d x d, orthonormalized here) replaces the identity frame; ordering
/// its columns by expected growth avoids long column-swap transients.
LyapunovEstimate benettin_spectrum(const MapExpr& f, const TorusPoint& x, int n, int renorm = 1,
                                   int checkpoint_every = 0, const Mat& initial = Mat());

/// Modified Gram-Schmidt in place; returns the diagonal of R (signed).
Vec orthonormalize(Mat& frame);

/// Center-coordinate layout of a skew map on T^{2k} x T^2: the center plane is
/// spanned by the last two coordinates and there are k unstable and k stable
/// directions.
struct CenterLayout {
  int dim = 4;
  int center_first = 2;  // index of the first center coordinate
  int hyperbolic_pairs() const { return (dim - 2) / 2; }
};

/// Orthonormal 2-frame spanning the estimated center bundle at a point.
struct CenterPlaneEstimate {
  TorusPoint base;
  Mat frame;              // dim x 2, orthonormal
  double residual = 0.0;  // invariance defect of Df * E^c(x) against E^c(f(x)); < 0 if not computed
  double transversality = 0.0;  // smallest singular value of the center-coordinate block of the frame
};

/// Invariant-bundle data along the orbit x, f(x), ..., f^n(x).
///
/// Forward covectors (annihilating E^cs) are obtained by pulling back a generic
/// frame through n_forward further steps; backward covectors (annihilating
/// E^cu) by pushing a generic frame along the exact backward orbit of x, then
/// forward along the stored orbit. Center frames are the orthogonal complement.
class CenterBundleSweep {
 public:
  CenterBundleSweep(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& x, int n, int n_forward,
                    int n_backward, CenterLayout layout = {});

  int length() const { return n_; }
  const TorusPoint& point(int k) const { return points_[static_cast<std::size_t>(k)]; }
  const Mat& jacobian(int k) const { return jacobians_[static_cast<std::size_t>(k)]; }
  /// Orthonormal center frame at orbit index k in [0, n].
  Mat center_frame(int k) const;
  /// Smallest singular value of [forward covectors | backward covectors].
  double conditioning(int k) const;

 private:
  CenterLayout layout_;
  int n_;
  std::vector<TorusPoint> points_;
  std::vector<Mat> jacobians_;
  std::vector<Mat> forward_covectors_;
  std::vector<Mat> backward_covectors_;
};

/// Center plane at x from forward/backward iteration. The backward orbit uses
/// the closed-form inverse of f.
CenterPlaneEstimate estimate_center_plane(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& x,
                                          int n_forward, int n_backward, CenterLayout layout = {},
                                          bool compute_residual = true, double min_conditioning = 1e-6);

/// Linear map induced by Df on the center plane, expressed in center coordinates:
/// M = P_c Df Q (P_c Q)^{-1}, where P_c projects onto the center coordinates.
/// Using the center-coordinate parametrization removes the coboundary that an
/// orthonormal frame would add to the one-step growth.
Eigen::Matrix2d center_block(const Mat& jac, const Mat& frame, CenterLayout layout = {});

/// Central exponents of f at x: Benettin restricted to the transported center
/// plane, re-anchored on the estimated bundle at every step.
struct CentralExponents {
  double first = 0.0;   // larger
  double second = 0.0;  // smaller
  int horizon = 0;
  bool used_splitting = true;  // false: fell back to the middle pair of the full spectrum
};

CentralExponents central_exponents(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& x, int n,
                                   int n_anchor = 24, CenterLayout layout = {});

/// Middle pair of the sorted full spectrum (fallback classification).
CentralExponents middle_exponents(const LyapunovEstimate& est);

}  // namespace nuhlab
