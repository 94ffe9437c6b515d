#include "nuhlab/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nuhlab/parallel.hpp"
#include "nuhlab/rng.hpp"

namespace nuhlab {

namespace {

Vec wrap_signed_vec(const Vec& d) {
  Vec out = d;
  for (int i = 0; i < out.size(); ++i) out[i] = wrap_signed(out[i]);
  return out;
}

TorusPoint random_point(Stream& rng, int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform();
  return TorusPoint(v);
}

struct Split {
  Vec u, s, c;
};

Split split_of(const ReferenceSplitting& r, const Vec& v) {
  Vec coef = r.coefficients(v);
  const int k = static_cast<int>(r.unstable.cols());
  return {coef.head(k), coef.segment(k, k), coef.tail(2)};
}

}  // namespace

ReferenceSplitting ReferenceSplitting::of(const IntMat& a, int dim) {
  if (a.rows() != 2 || a.cols() != 2) throw DimensionError("reference splitting: A must be 2x2");
  if (dim != 4 && dim != 6) throw DimensionError("reference splitting: dimension must be 4 or 6");
  Eigen::Matrix2d m = a.cast<double>();
  Eigen::EigenSolver<Eigen::Matrix2d> es(m);
  if (es.eigenvalues().imag().cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("reference splitting: A is not hyperbolic");
  Eigen::Vector2d ev = es.eigenvalues().real();
  int iu = std::abs(ev[0]) > std::abs(ev[1]) ? 0 : 1;
  if (!(std::abs(ev[iu]) > 1.0)) throw std::invalid_argument("reference splitting: A is not hyperbolic");
  Eigen::Vector2d eu = es.eigenvectors().real().col(iu).normalized();
  Eigen::Vector2d es_ = es.eigenvectors().real().col(1 - iu).normalized();
  const int k = (dim - 2) / 2;
  ReferenceSplitting r;
  r.lambda = std::abs(ev[iu]);
  r.unstable = Mat::Zero(dim, k);
  r.stable = Mat::Zero(dim, k);
  r.center = Mat::Zero(dim, 2);
  for (int i = 0; i < k; ++i) {
    r.unstable.block(2 * i, i, 2, 1) = eu;
    r.stable.block(2 * i, i, 2, 1) = es_;
  }
  r.center(dim - 2, 0) = 1.0;
  r.center(dim - 1, 1) = 1.0;
  return r;
}

Mat ReferenceSplitting::ordered_frame() const {
  Mat b(dim(), dim());
  b << unstable, center, stable;
  return b;
}

Vec ReferenceSplitting::coefficients(const Vec& v) const {
  const int d = dim();
  Mat b(d, d);
  b << unstable, stable, center;
  return b.partialPivLu().solve(v);
}

void ConeField::validate() const {
  const double quarter = std::acos(-1.0) / 4.0;
  if (!(aperture_u > 0.0 && aperture_u < quarter && aperture_s > 0.0 && aperture_s < quarter))
    throw std::invalid_argument("cone field: apertures must lie in (0, pi/4)");
}

double ConeMargins::worst_margin() const {
  return std::min({expansion_u - 1.0, expansion_s - 1.0, 1.0 - angle_u, 1.0 - angle_s, 1.0 - center_u,
                   1.0 - center_s});
}

namespace {

// Cone test vectors at one point: axis unit vectors combined with unit or zero
// transverse parts at the cone boundary, plus two random interior vectors.
void cone_probe(const Mat& jac, const ReferenceSplitting& r, const Mat& axis, const Mat& other, double aperture,
                bool forward_stable_is_other, Stream& rng, double& expansion, double& angle, double& center) {
  const int k = static_cast<int>(axis.cols());
  const double t = std::tan(aperture);
  // Cone: |P_other v| <= t |P_axis v| and |P_c v| <= t |P_axis v|; |wo|, |wc| <= 1.
  auto eval = [&](const Eigen::VectorXd& ua, const Eigen::VectorXd& wo, const Eigen::Vector2d& wc) {
    Vec v = axis * ua + t * ua.norm() * (other * wo + r.center * wc);
    Split s = split_of(r, Vec(jac * v));
    Vec img_axis = forward_stable_is_other ? s.u : s.s;
    Vec img_other = forward_stable_is_other ? s.s : s.u;
    double a = img_axis.norm();
    expansion = std::min(expansion, a / ua.norm());
    angle = std::max(angle, img_other.norm() / (t * a));
    center = std::max(center, s.c.norm() / (t * a));
  };
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd ua = Eigen::VectorXd::Unit(k, i);
    std::vector<Eigen::VectorXd> wos = {Eigen::VectorXd::Zero(k)};
    for (int j = 0; j < k; ++j) {
      wos.push_back(Eigen::VectorXd::Unit(k, j));
      wos.push_back(-Eigen::VectorXd::Unit(k, j));
    }
    std::vector<Eigen::Vector2d> wcs = {Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
    for (const auto& wo : wos)
      for (const auto& wc : wcs) eval(ua, wo, wc);
  }
  for (int rep = 0; rep < 2; ++rep) {
    Eigen::VectorXd ua(k), wo(k);
    for (int i = 0; i < k; ++i) ua[i] = rng.uniform(-1.0, 1.0), wo[i] = rng.uniform(-1.0, 1.0);
    if (ua.norm() == 0.0) ua[0] = 1.0;
    if (wo.norm() > 1.0) wo.normalize();
    Eigen::Vector2d wc(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (wc.norm() > 1.0) wc.normalize();
    eval(ua, wo, wc);
  }
}

Mat iterate_jacobian(const MapExpr& f, const TorusPoint& x, int n) {
  Mat jac = Mat::Identity(f.dim(), f.dim());
  TorusPoint y = x;
  for (int k = 0; k < std::max(1, n); ++k) {
    auto [next, j] = f.eval_with_jacobian(y);
    jac = j * jac;
    y = next;
  }
  return jac;
}

}  // namespace

ConeMargins verify_cone_invariance(const MapExpr& f, const MapExpr& f_inverse, const ConeField& cones,
                                   long long n_samples, int n_steps, std::uint64_t seed, int threads) {
  cones.validate();
  const auto& r = cones.splitting;
  if (f.dim() != r.dim()) throw DimensionError("verify_cone_invariance: map and splitting dimensions differ");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<ConeMargins> parts(static_cast<std::size_t>(n_samples));
  parallel_for(parts.size(), threads, [&](std::size_t i) {
    Stream rng(seed, i);
    ConeMargins m;
    m.expansion_u = m.expansion_s = inf;
    TorusPoint x = random_point(rng, f.dim());
    cone_probe(iterate_jacobian(f, x, n_steps), r, r.unstable, r.stable, cones.aperture_u, true, rng, m.expansion_u,
               m.angle_u, m.center_u);
    cone_probe(iterate_jacobian(f_inverse, x, n_steps), r, r.stable, r.unstable, cones.aperture_s, false, rng,
               m.expansion_s, m.angle_s, m.center_s);
    m.samples = 1;
    parts[i] = m;
  });
  ConeMargins out;
  out.expansion_u = out.expansion_s = inf;
  for (const auto& m : parts) {
    out.expansion_u = std::min(out.expansion_u, m.expansion_u);
    out.expansion_s = std::min(out.expansion_s, m.expansion_s);
    out.angle_u = std::max(out.angle_u, m.angle_u);
    out.angle_s = std::max(out.angle_s, m.angle_s);
    out.center_u = std::max(out.center_u, m.center_u);
    out.center_s = std::max(out.center_s, m.center_s);
    out.samples += m.samples;
  }
  return out;
}

BunchingReport bunching_check(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                              long long n_samples, std::uint64_t seed, int horizon, int n_steps, int threads) {
  const int dim = f.dim();
  const int n = std::max(1, n_steps);
  CenterLayout layout{dim, dim - 2};
  struct Part {
    bool ok = false;
    double margin = 0.0, ratio = 1.0;
  };
  std::vector<Part> parts(static_cast<std::size_t>(n_samples));
  parallel_for(parts.size(), threads, [&](std::size_t i) {
    Stream rng(seed, i);
    TorusPoint x = random_point(rng, dim);
    try {
      CenterPlaneEstimate plane = estimate_center_plane(f, f_inverse, x, horizon, horizon, layout, false);
      Mat jac = iterate_jacobian(f, x, n);
      Eigen::Matrix2d mc = center_block(jac, plane.frame, layout);
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(mc);
      double ratio = svd.singularValues()[0] / svd.singularValues()[1];
      double lu = std::numeric_limits<double>::infinity(), ls = 0.0;
      for (int c = 0; c < splitting.unstable.cols(); ++c) {
        lu = std::min(lu, split_of(splitting, Vec(jac * splitting.unstable.col(c))).u.norm());
        ls = std::max(ls, split_of(splitting, Vec(jac * splitting.stable.col(c))).s.norm());
      }
      if (!std::isfinite(ratio)) return;
      parts[i] = {true, (std::min(std::log(lu), -std::log(ls)) - std::log(ratio)) / n, ratio};
    } catch (const SplittingNotResolved&) {
    } catch (const NonFiniteJacobian&) {
    }
  });
  BunchingReport out;
  out.n_steps = n;
  out.margin = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    if (!p.ok) {
      ++out.excluded;
      continue;
    }
    ++out.resolved;
    out.margin = std::min(out.margin, p.margin);
    out.worst_ratio = std::max(out.worst_ratio, p.ratio);
  }
  return out;
}

Vec LeafPolyline::at_projection(const Vec& axis, double s) const {
  const Vec& p0 = points.front();
  double prev = 0.0;
  for (std::size_t j = 1; j < points.size(); ++j) {
    double cur = (points[j] - p0).dot(axis);
    if ((s >= prev && s <= cur) || (s <= prev && s >= cur)) {
      double w = cur == prev ? 0.0 : (s - prev) / (cur - prev);
      return points[j - 1] + w * (points[j] - points[j - 1]);
    }
    prev = cur;
  }
  throw std::out_of_range("leaf too short for the requested leg");
}

namespace {

LeafPolyline grow_leaf(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                       const TorusPoint& x, LeafType type, double length, double reach_factor,
                       const LeafOptions& options) {
  if (options.refinement < 2 || options.depth < 1) throw std::invalid_argument("approximate_leaf: bad options");
  const bool unstable = type == LeafType::Unstable;
  const MapExpr& grow = unstable ? f : f_inverse;
  const MapExpr& back = unstable ? f_inverse : f;
  Vec axis = unstable ? Vec(splitting.unstable.col(0)) : Vec(splitting.stable.col(0));
  const int n = options.refinement;
  const double t_cone = std::tan(options.cone_aperture);

  TorusPoint pre = x;
  for (int k = 0; k < options.depth; ++k) pre = back.eval(pre);
  double reach = reach_factor * length / std::pow(splitting.lambda, options.depth);

  LeafPolyline leaf;
  leaf.base = x;
  leaf.type = type;
  leaf.refinement = n;
  std::vector<Vec> pts(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) pts[static_cast<std::size_t>(j)] = pre.coords() + (reach * j / n) * axis;

  const double base_span = std::abs(reach_factor * length);
  for (int step = 0; step < options.depth; ++step) {
    // Images with midpoint insertion wherever a chord would exceed max_gap.
    std::vector<Vec> img;
    Vec prev_reduced;
    auto push = [&](const Vec& q) {
      img.push_back(img.empty() ? q : Vec(img.back() + wrap_signed_vec(q - prev_reduced)));
      prev_reduced = q;
    };
    std::vector<Vec> stack;
    Vec prev_pre = pts.front();
    push(grow.eval(TorusPoint(prev_pre)).coords());
    for (std::size_t j = 1; j < pts.size(); ++j) {
      stack.assign(1, pts[j]);
      while (!stack.empty()) {
        Vec target = stack.back();
        Vec q = grow.eval(TorusPoint(target)).coords();
        double gap = wrap_signed_vec(q - prev_reduced).norm();
        if (gap > options.max_gap && (target - prev_pre).norm() > 1e-15) {
          if (img.size() > 2000000) throw std::out_of_range("leaf refinement limit reached");
          stack.push_back(0.5 * (prev_pre + target));
          continue;
        }
        push(q);
        prev_pre = target;
        stack.pop_back();
      }
    }
    std::vector<double> arc(img.size(), 0.0);
    for (std::size_t j = 1; j < img.size(); ++j) {
      Vec seg = img[j] - img[j - 1];
      arc[j] = arc[j - 1] + seg.norm();
      Split s = split_of(splitting, seg);
      double along = unstable ? s.u[0] : s.s[0];
      double across = (s.c.norm() + (unstable ? s.s.norm() : s.u.norm()) +
                       (unstable ? s.u.tail(s.u.size() - 1).norm() : s.s.tail(s.s.size() - 1).norm()));
      if (std::abs(along) * t_cone < across) leaf.truncated = true;
    }
    // Uniform arc-length resampling at density n per leaf length; both ends are kept.
    double total = arc.back();
    int count = n;
    if (base_span > 0.0) count = std::max(n, static_cast<int>(std::ceil(n * total / base_span)));
    count = std::max(count, static_cast<int>(std::ceil(total / options.max_gap)));
    pts.assign(static_cast<std::size_t>(count) + 1, Vec());
    std::size_t seg = 1;
    for (int j = 0; j <= count; ++j) {
      double target = total * j / count;
      while (seg + 1 < arc.size() && arc[seg] < target) ++seg;
      double span = arc[seg] - arc[seg - 1];
      double w = span > 0.0 ? std::clamp((target - arc[seg - 1]) / span, 0.0, 1.0) : 0.0;
      pts[static_cast<std::size_t>(j)] = img[seg - 1] + w * (img[seg] - img[seg - 1]);
    }
    pts.front() = img.front();
    pts.back() = img.back();
  }
  // Lift so that the first point is x itself up to rounding.
  Vec shift = x.coords() - pts.front();
  for (int i = 0; i < shift.size(); ++i) shift[i] = std::round(shift[i]);
  for (auto& p : pts) p += shift;
  leaf.points = std::move(pts);
  leaf.arclength.assign(leaf.points.size(), 0.0);
  for (std::size_t j = 1; j < leaf.points.size(); ++j)
    leaf.arclength[j] = leaf.arclength[j - 1] + (leaf.points[j] - leaf.points[j - 1]).norm();
  return leaf;
}

}  // namespace

LeafPolyline approximate_leaf(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                              const TorusPoint& x, LeafType type, double length, const LeafOptions& options) {
  if (options.refinement < 2 || options.depth < 1) throw std::invalid_argument("approximate_leaf: bad options");
  Vec axis = type == LeafType::Unstable ? Vec(splitting.unstable.col(0)) : Vec(splitting.stable.col(0));
  // The seed segment is scaled by lambda^-depth; where f expands less than A the
  // leaf comes out short and is regrown from a longer seed.
  double factor = 1.5;
  LeafPolyline leaf;
  for (int attempt = 0; attempt < 6; ++attempt) {
    leaf = grow_leaf(f, f_inverse, splitting, x, type, length, factor, options);
    double reached = (leaf.points.back() - leaf.points.front()).dot(axis);
    if (length == 0.0 || reached / length >= 1.2) break;
    factor *= reached / length > 0.05 ? 1.5 * length / reached : 20.0;
  }
  return leaf;
}

namespace {

// Leg endpoint on the approximate leaf through z: the image of a single seed
// point pre + tau * axis under f^depth (f^-depth for stable legs), with tau
// solved so that the projection on the axis equals s. Smooth in s and z, which
// the loop shooting relies on.
TorusPoint walk(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& r, const TorusPoint& z,
                LeafType type, double s, int depth, double* tau_hint = nullptr) {
  const bool unstable = type == LeafType::Unstable;
  const MapExpr& grow = unstable ? f : f_inverse;
  const MapExpr& back = unstable ? f_inverse : f;
  Vec axis = unstable ? Vec(r.unstable.col(0)) : Vec(r.stable.col(0));
  TorusPoint pre = z;
  for (int k = 0; k < depth; ++k) pre = back.eval(pre);
  auto image = [&](double tau) {
    TorusPoint y(Vec(pre.coords() + tau * axis));
    for (int k = 0; k < depth; ++k) y = grow.eval(y);
    return y;
  };
  // Displacements are taken from the image of the seed point itself, which
  // cancels the round-trip error of f^depth o f^-depth.
  const TorusPoint anchor = image(0.0);
  auto offset = [&](const TorusPoint& y) { return wrap_signed_vec(y.coords() - anchor.coords()); };
  if (s == 0.0) return z;
  // March from the seed to the first crossing of the target projection, then
  // refine inside that bracket (the projection need not be monotone far out).
  const double scale = std::pow(r.lambda, depth);
  auto g = [&](double tau) { return offset(image(tau)).dot(axis) - s; };
  const double tol = 1e-11;
  // Local secant from a previous solution keeps repeated calls on one branch.
  if (tau_hint && *tau_hint != 0.0 && (*tau_hint > 0.0) == (s > 0.0)) {
    double a0 = *tau_hint, a1 = *tau_hint * (1.0 + 1e-4);
    double b0 = g(a0), b1 = g(a1);
    for (int it = 0; it < 30 && std::abs(b1) > tol && b1 != b0; ++it) {
      double a2 = a1 - b1 * (a1 - a0) / (b1 - b0);
      a0 = a1;
      b0 = b1;
      a1 = a2;
      b1 = g(a1);
    }
    if (std::abs(b1) <= tol && std::abs(a1 - *tau_hint) < 0.5 * std::abs(*tau_hint)) {
      *tau_hint = a1;
      return TorusPoint(Vec(z.coords() + offset(image(a1))));
    }
  }
  // Steps start at 1/16 of the linear guess and grow geometrically, since
  // coupling to the center can slow the base growth of a leg severalfold.
  double step = s / scale / 16.0;
  double t0 = 0.0, g0 = -s, t1 = 0.0, g1 = 0.0;
  bool bracketed = false;
  for (int k = 1; k <= 256; ++k) {
    t1 = t0 + step;
    g1 = g(t1);
    if (std::abs(g1 - g0) > 0.25) break;  // wrapped around the torus: the leaf is no longer local
    if ((g0 <= 0.0) != (g1 <= 0.0)) {
      bracketed = true;
      break;
    }
    t0 = t1;
    g0 = g1;
    if (k % 16 == 0) step *= 1.5;
  }
  if (!bracketed) throw LoopNotClosed("leg endpoint not found (leaf shorter than the leg)");
  double tm = t1, gm = g1;
  for (int it = 0; it < 200 && std::abs(gm) > tol; ++it) {
    // Regula falsi step, falling back to bisection when it stalls at an end.
    tm = t1 - g1 * (t1 - t0) / (g1 - g0);
    if (!(tm > std::min(t0, t1) && tm < std::max(t0, t1)) || it % 3 == 2) tm = 0.5 * (t0 + t1);
    gm = g(tm);
    if ((gm <= 0.0) == (g0 <= 0.0)) {
      t0 = tm;
      g0 = gm;
    } else {
      t1 = tm;
  if (tau_hint) *tau_hint = t1;
      g1 = gm;
    }
  }
  if (!(std::abs(gm) <= tol))
    throw LoopNotClosed("leg endpoint not found (residual " + std::to_string(gm) + ")");
  t1 = tm;
  if (tau_hint) *tau_hint = t1;
  return TorusPoint(Vec(z.coords() + offset(image(t1))));
}

struct LoopOutcome {
  TorusPoint end;
  double s3 = 0.0, t4 = 0.0;
  double closure = 0.0;
};

LoopOutcome close_loop(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& r, const TorusPoint& x,
                       double leg_u, double leg_s, int o) {
  const int nb = r.dim() - 2;
  TorusPoint p1 = walk(f, f_inverse, r, x, LeafType::Unstable, leg_u, o);
  TorusPoint p2 = walk(f, f_inverse, r, p1, LeafType::Stable, leg_s, o);
  double hint3 = 0.0, hint4 = 0.0;
  auto residual = [&](double s3, double t4, TorusPoint* end) {
    TorusPoint p3 = walk(f, f_inverse, r, p2, LeafType::Unstable, s3, o, &hint3);
    TorusPoint p4 = walk(f, f_inverse, r, p3, LeafType::Stable, t4, o, &hint4);
    Vec res(nb);
    for (int i = 0; i < nb; ++i) res[i] = wrap_signed(p4[i] - x[i]);
    if (end) *end = p4;
    return res;
  };
  double s3 = -leg_u, t4 = -leg_s;
  TorusPoint end;
  Vec res = residual(s3, t4, &end);
  const double h = 1e-7;
  for (int it = 0; it < 40 && res.cwiseAbs().maxCoeff() >= 1e-10; ++it) {
    Mat jac(nb, 2);
    jac.col(0) = (residual(s3 + h, t4, nullptr) - res) / h;
    jac.col(1) = (residual(s3, t4 + h, nullptr) - res) / h;
    Eigen::Vector2d step = jac.colPivHouseholderQr().solve(res);
    // Backtrack while the step does not reduce the residual.
    double lambda = 1.0;
    for (int bt = 0; bt < 8; ++bt, lambda *= 0.5) {
      TorusPoint trial_end;
      Vec trial = residual(s3 - lambda * step[0], t4 - lambda * step[1], &trial_end);
      if (trial.norm() < res.norm() || bt == 7) {
        s3 -= lambda * step[0];
        t4 -= lambda * step[1];
        res = trial;
        end = trial_end;
        break;
      }
    }
  }
  return {end, s3, t4, res.cwiseAbs().maxCoeff()};
}

}  // namespace

HolonomyResult su_quadrilateral(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                                const TorusPoint& x, double leg_u, double leg_s, const LeafOptions& options) {
  if (f.dim() != splitting.dim()) throw DimensionError("su_quadrilateral: map and splitting dimensions differ");
  // Two levels of leaf growth: depth and depth + 1.
  LeafOptions fine = options;
  fine.depth = options.depth + 1;
  LoopOutcome coarse = close_loop(f, f_inverse, splitting, x, leg_u, leg_s, options.depth);
  LoopOutcome best = close_loop(f, f_inverse, splitting, x, leg_u, leg_s, fine.depth);
  double closure = std::max(coarse.closure, best.closure);
  if (!(closure < 1e-8)) throw LoopNotClosed("loop not closed (base residual " + std::to_string(closure) + ")");
  const int d = splitting.dim();
  auto disp = [&](const TorusPoint& e) {
    return Eigen::Vector2d(wrap_signed(e[d - 2] - x[d - 2]), wrap_signed(e[d - 1] - x[d - 1]));
  };
  HolonomyResult out;
  out.base = x;
  out.legs[0] = leg_u;
  out.legs[1] = leg_s;
  out.legs[2] = best.s3;
  out.legs[3] = best.t4;
  out.endpoint = best.end;
  out.displacement = disp(best.end);
  out.error = (disp(coarse.end) - out.displacement).norm();
  out.closure = closure;
  return out;
}

double ReachRaster::significant_fraction() const {
  if (magnitude.empty()) return 0.0;
  long long n = 0;
  for (std::size_t i = 0; i < magnitude.size(); ++i)
    if (std::isfinite(magnitude[i]) && magnitude[i] > 3.0 * error[i]) ++n;
  return static_cast<double>(n) / static_cast<double>(magnitude.size());
}

double ReachRaster::zero_fraction(double floor) const {
  if (magnitude.empty()) return 0.0;
  long long n = 0;
  for (std::size_t i = 0; i < magnitude.size(); ++i)
    if (std::isfinite(magnitude[i]) && magnitude[i] <= 3.0 * error[i] + floor) ++n;
  return static_cast<double>(n) / static_cast<double>(magnitude.size());
}

ReachRaster accessibility_reach(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                                double lo, double hi, int width, double leg, const LeafOptions& options,
                                std::uint64_t seed, int threads) {
  if (width < 1) throw std::invalid_argument("accessibility_reach: width must be positive");
  const int d = f.dim();
  ReachRaster out;
  out.width = out.height = width;
  out.lo0 = out.lo1 = lo;
  out.hi0 = out.hi1 = hi;
  const std::size_t cells = static_cast<std::size_t>(width) * width;
  out.points.resize(cells);
  out.magnitude.assign(cells, std::nan(""));
  out.error.assign(cells, std::nan(""));
  out.attempts.assign(cells, 0);
  std::vector<std::string> fail(cells);
  parallel_for(cells, threads, [&](std::size_t i) {
    int row = static_cast<int>(i) / width, col = static_cast<int>(i) % width;
    Stream rng(seed, i);
    Vec v(d);
    for (int k = 0; k < d - 2; ++k) v[k] = rng.uniform();
    v[d - 2] = lo + (col + 0.5) * (hi - lo) / width;
    v[d - 1] = hi - (row + 0.5) * (hi - lo) / width;  // row 0 on top
    out.points[i] = TorusPoint(v);
    // Loops tried in order until one is significant; a cell fails only if none closes.
    static constexpr double kScales[][2] = {{1, 1}, {-1, 1}, {1, -1}, {0.5, 0.5}, {-0.5, -0.5}, {0.25, 0.25}};
    std::string last_error;
    bool any = false;
    for (int depth : {options.depth, options.depth - 1}) {
      if (depth < 1) continue;
      LeafOptions o = options;
      o.depth = depth;
      for (const auto& sc : kScales) {
        ++out.attempts[i];
        try {
          HolonomyResult h = su_quadrilateral(f, f_inverse, splitting, out.points[i], sc[0] * leg, sc[1] * leg, o);
          if (!any || h.significant() || h.error < out.error[i]) {
            out.magnitude[i] = h.displacement.norm();
            out.error[i] = h.error;
          }
          any = true;
          if (h.significant()) break;
        } catch (const std::exception& e) {
          last_error = e.what();
        }
      }
      if (any && out.magnitude[i] > 3.0 * out.error[i]) break;
    }
    if (!any) fail[i] = "cell " + std::to_string(row) + "," + std::to_string(col) + ": " + last_error;
  });
  for (auto& s : fail)
    if (!s.empty()) out.failures.push_back(std::move(s));
  return out;
}

std::vector<double> orbit_reach(const MapExpr& f, const MapExpr& f_inverse, const ReferenceSplitting& splitting,
                                const TorusPoint& x, int n, double leg, const LeafOptions& options) {
  std::vector<double> out;
  TorusPoint y = x;
  for (int k = 0; k < n; ++k) {
    try {
      out.push_back(su_quadrilateral(f, f_inverse, splitting, y, leg, leg, options).displacement.norm());
    } catch (const std::exception&) {
      out.push_back(std::nan(""));
    }
    y = f.eval(y);
  }
  return out;
}

}  // namespace nuhlab
