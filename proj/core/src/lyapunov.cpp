#include "nuhlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nuhlab {

Vec orthonormalize(Mat& frame) {
  const int cols = static_cast<int>(frame.cols());
  Vec diag(cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < j; ++i) {
      double r = frame.col(i).dot(frame.col(j));
      frame.col(j) -= r * frame.col(i);
    }
    double nrm = frame.col(j).norm();
    diag[j] = nrm;
    if (nrm > 0.0) frame.col(j) /= nrm;
  }
  return diag;
}

namespace {

void check_finite(const Mat& m, const TorusPoint& at, int step) {
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "non-finite Jacobian entry at step " << step << ", point (";
    for (int i = 0; i < at.dim(); ++i) os << (i ? "," : "") << at[i];
    os << ")";
    throw NonFiniteJacobian(os.str());
  }
}

}  // namespace

LyapunovEstimate benettin_spectrum(const MapExpr& f, const TorusPoint& x, int n, int renorm, int checkpoint_every,
                                   const Mat& initial) {
  if (renorm < 1 || n < renorm) throw std::invalid_argument("benettin_spectrum: need n >= renorm >= 1");
  if (x.dim() != f.dim()) throw DimensionError("benettin_spectrum: dimension mismatch");
  const int d = f.dim();
  LyapunovEstimate est;
  est.horizon = n;
  est.renorm = renorm;
  est.log_sums = Vec::Zero(d);
  Mat frame = Mat::Identity(d, d);
  if (initial.size() > 0) {
    if (initial.rows() != d || initial.cols() != d) throw DimensionError("benettin_spectrum: initial frame must be d x d");
    frame = initial;
    orthonormalize(frame);
  }
  Vec p = x.coords();
  for (int k = 1; k <= n; ++k) {
    Vec before = p;
    f.apply_with_jacobian(p, frame);
    check_finite(frame, TorusPoint(before), k);
    if (k % renorm == 0 || k == n) {
      Vec r = orthonormalize(frame);
      for (int i = 0; i < d; ++i) est.log_sums[i] += std::log(r[i]);
    }
    if (checkpoint_every > 0 && k % checkpoint_every == 0) est.checkpoints.emplace_back(k, est.log_sums / k);
  }
  est.exponents = est.log_sums / static_cast<double>(n);
  std::sort(est.exponents.data(), est.exponents.data() + d, std::greater<>());
  return est;
}

namespace {

Mat generic_frame(int d, int cols, double seed) {
  Mat m(d, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < d; ++r) m(r, c) = std::sin(seed * (r + 1) + 1.7 * (c + 1)) + 0.1 * (r == c);
  orthonormalize(m);
  return m;
}

}  // namespace

CenterBundleSweep::CenterBundleSweep(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& x, int n,
                                     int n_forward, int n_backward, CenterLayout layout)
    : layout_(layout), n_(n) {
  if (f.dim() != layout.dim || x.dim() != layout.dim)
    throw DimensionError("CenterBundleSweep: layout does not match map dimension");
  if (n < 0 || n_forward < 1 || n_backward < 1) throw std::invalid_argument("CenterBundleSweep: bad horizons");
  const int d = layout.dim;
  const int h = layout.hyperbolic_pairs();
  const int total = n + n_forward;

  points_.reserve(static_cast<std::size_t>(total));
  jacobians_.reserve(static_cast<std::size_t>(total));
  Vec p = x.coords();
  for (int i = 0; i < total; ++i) {
    points_.emplace_back(p);
    Mat j = Mat::Identity(d, d);
    f.apply_with_jacobian(p, j);
    check_finite(j, points_.back(), i);
    jacobians_.push_back(std::move(j));
  }

  forward_covectors_.assign(static_cast<std::size_t>(n) + 1, Mat());
  Mat nu = generic_frame(d, h, 0.731);
  for (int i = total - 1; i >= 0; --i) {
    Mat next = jacobians_[static_cast<std::size_t>(i)].transpose() * nu;
    orthonormalize(next);
    nu = std::move(next);
    if (i <= n) forward_covectors_[static_cast<std::size_t>(i)] = nu;
  }

  // Exact backward orbit of x, then push the covector frame forward to x.
  std::vector<Vec> past;
  past.reserve(static_cast<std::size_t>(n_backward));
  Vec z = x.coords();
  for (int i = 0; i < n_backward; ++i) {
    f_inverse.apply(z);
    past.push_back(z);
  }
  Mat mu = generic_frame(d, h, 1.913);
  for (int i = n_backward - 1; i >= 0; --i) {
    Vec q = past[static_cast<std::size_t>(i)];
    Mat j = Mat::Identity(d, d);
    f.apply_with_jacobian(q, j);
    check_finite(j, TorusPoint(past[static_cast<std::size_t>(i)]), -i - 1);
    Mat next = j.inverse().transpose() * mu;
    orthonormalize(next);
    mu = std::move(next);
  }
  backward_covectors_.assign(static_cast<std::size_t>(n) + 1, Mat());
  backward_covectors_[0] = mu;
  for (int i = 0; i < n; ++i) {
    Mat next = jacobians_[static_cast<std::size_t>(i)].inverse().transpose() * mu;
    orthonormalize(next);
    mu = std::move(next);
    backward_covectors_[static_cast<std::size_t>(i) + 1] = mu;
  }
}

double CenterBundleSweep::conditioning(int k) const {
  const int d = layout_.dim;
  const int h = layout_.hyperbolic_pairs();
  Mat both(d, 2 * h);
  both << forward_covectors_[static_cast<std::size_t>(k)], backward_covectors_[static_cast<std::size_t>(k)];
  Eigen::JacobiSVD<Mat> svd(both);
  return svd.singularValues().minCoeff();
}

Mat CenterBundleSweep::center_frame(int k) const {
  const int d = layout_.dim;
  const int h = layout_.hyperbolic_pairs();
  Mat full(d, d);
  full.leftCols(h) = forward_covectors_[static_cast<std::size_t>(k)];
  full.middleCols(h, h) = backward_covectors_[static_cast<std::size_t>(k)];
  Mat eye = Mat::Identity(d, d);
  full.col(2 * h) = eye.col(layout_.center_first);
  full.col(2 * h + 1) = eye.col(layout_.center_first + 1);
  Mat cols = full.leftCols(2 * h + 2);
  orthonormalize(cols);
  return cols.rightCols(2);
}

Eigen::Matrix2d center_block(const Mat& jac, const Mat& frame, CenterLayout layout) {
  Mat image = jac * frame;
  Eigen::Matrix2d pc_image = image.middleRows(layout.center_first, 2);
  Eigen::Matrix2d pc_frame = frame.middleRows(layout.center_first, 2);
  return pc_image * pc_frame.inverse();
}

CenterPlaneEstimate estimate_center_plane(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& x,
                                          int n_forward, int n_backward, CenterLayout layout, bool compute_residual,
                                          double min_conditioning) {
  CenterBundleSweep sweep(f, f_inverse, x, 0, n_forward, n_backward, layout);
  double cond = sweep.conditioning(0);
  if (!(cond >= min_conditioning))
    throw SplittingNotResolved("splitting not resolved at x (conditioning " + std::to_string(cond) + ")");
  CenterPlaneEstimate out;
  out.base = x;
  out.frame = sweep.center_frame(0);
  Eigen::Matrix2d pc = out.frame.middleRows(layout.center_first, 2);
  out.transversality = Eigen::JacobiSVD<Eigen::Matrix2d>(pc).singularValues().minCoeff();
  out.residual = -1.0;
  if (compute_residual) {
    // Independent estimate at f(x), compared against the pushed-forward plane.
    TorusPoint fx = f.eval(x);
    CenterPlaneEstimate next = estimate_center_plane(f, f_inverse, fx, n_forward, n_backward, layout, false,
                                                     min_conditioning);
    Mat image = sweep.jacobian(0) * out.frame;
    orthonormalize(image);
    Mat defect = image - next.frame * (next.frame.transpose() * image);
    out.residual = defect.norm();
  }
  return out;
}

CentralExponents middle_exponents(const LyapunovEstimate& est) {
  const int d = static_cast<int>(est.exponents.size());
  CentralExponents c;
  c.first = est.exponents[d / 2 - 1];
  c.second = est.exponents[d / 2];
  c.horizon = est.horizon;
  c.used_splitting = false;
  return c;
}

CentralExponents central_exponents(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& x, int n,
                                   int n_anchor, CenterLayout layout) {
  if (n < 1) throw std::invalid_argument("central_exponents: n must be >= 1");
  CenterBundleSweep sweep(f, f_inverse, x, n, n_anchor, n_anchor, layout);
  // Propagate a 2-frame in center coordinates with the induced center blocks.
  Eigen::Matrix2d frame = Eigen::Matrix2d::Identity();
  double s1 = 0.0, s2 = 0.0;
  for (int k = 0; k < n; ++k) {
    Eigen::Matrix2d m = center_block(sweep.jacobian(k), sweep.center_frame(k), layout);
    frame = m * frame;
    double r11 = frame.col(0).norm();
    frame.col(0) /= r11;
    double r12 = frame.col(0).dot(frame.col(1));
    frame.col(1) -= r12 * frame.col(0);
    double r22 = frame.col(1).norm();
    frame.col(1) /= r22;
    s1 += std::log(r11);
    s2 += std::log(r22);
  }
  CentralExponents c;
  c.first = std::max(s1, s2) / n;
  c.second = std::min(s1, s2) / n;
  c.horizon = n;
  return c;
}

}  // namespace nuhlab
