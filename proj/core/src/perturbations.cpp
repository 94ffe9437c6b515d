#include "nuhlab/perturbations.hpp"

#include <cmath>
#include <vector>

#include "nuhlab/parallel.hpp"
#include "nuhlab/rng.hpp"

namespace nuhlab {

namespace {

bool in_box(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Vanishes exactly on |x - center| <= hole.
Profile strip_guard(double center, double hole) { return Profile::not_bump(center, 2.0 * hole, 0.5); }

void check_hole(const SupportRegion& region, double hole, const char* who) {
  if (!(hole >= region.r_v))
    throw SupportContractError(std::string("support contract violated: ") + who + " guard strip half-width " +
                               std::to_string(hole) + " is smaller than the radius of V " +
                               std::to_string(region.r_v));
  if (!(hole < 0.25)) throw SupportContractError(std::string(who) + ": guard strip too wide");
}

}  // namespace

bool SupportRegion::in_m_eps(const TorusPoint& x) const {
  int c = center_first();
  return in_box(x[c], 0.0, eps) && in_box(x[c + 1], 0.0, eps);
}

bool SupportRegion::in_a_eps(const TorusPoint& x) const {
  int c = center_first();
  return in_box(x[c], 0.25 * eps, 0.75 * eps) && in_box(x[c + 1], 0.25 * eps, 0.75 * eps);
}

bool SupportRegion::in_v(const TorusPoint& x) const {
  double d0 = wrap_signed(x[0] - p_star0), d1 = wrap_signed(x[1] - p_star1);
  return std::hypot(d0, d1) < r_v;
}

void SupportRegion::validate() const {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("support region: eps must lie in (0, 1/2)");
  if (dim != 4 && dim != 6) throw DimensionError("support region: dimension must be 4 or 6");
  if (!(r_v > 0.0 && r_v < 0.25)) throw std::invalid_argument("support region: r_V must lie in (0, 1/4)");
}

Gadget identity_gadget(const SupportRegion& region) {
  region.validate();
  return {MapExpr::identity(region.dim), region};
}

Gadget sw_shear(const SupportRegion& region, const ShearParams& p) {
  region.validate();
  if (p.target != 0 && p.target != 1) throw std::invalid_argument("sw_shear: target must be base coordinate 0 or 1");
  if (!(p.support > 0.0 && p.support <= 0.5))
    throw SupportContractError("support contract violated: sw_shear support radius must lie in (0, eps/2]");
  if (!(p.plateau >= 0.0 && p.plateau < 1.0)) throw std::invalid_argument("sw_shear: plateau must lie in [0, 1)");
  if (!(p.aspect > 0.0)) throw std::invalid_argument("sw_shear: aspect must be positive");
  check_hole(region, p.hole, "sw_shear");
  if (p.amplitude == 0.0) return identity_gadget(region);

  const int c1 = region.center_first(), c2 = c1 + 1;
  const int drive = 1 - p.target;
  const double c = region.center(), r = p.support * region.eps;
  const Profile guard = strip_guard(drive == 0 ? region.p_star0 : region.p_star1, p.hole);

  ShearSpec shear;
  shear.dim = region.dim;
  shear.target = p.target;
  shear.amplitude = p.amplitude;
  shear.factors = {{drive, Profile::sine(p.drive_frequency, 0.0)},
                   {drive, guard},
                   {c1, Profile::odd_bump(c, r, p.plateau)},
                   {c2, Profile::bump(c, r, p.plateau)}};
  MapExpr out = MapExpr::shear(shear);
  if (p.twist != 0.0) {
    TwistSpec tw;
    tw.dim = region.dim;
    tw.first = c1;
    tw.second = c2;
    tw.center_first = c;
    tw.center_second = c;
    tw.radius = r / std::max(p.aspect, 1.0 / p.aspect);
    tw.aspect = p.aspect;
    tw.plateau = p.plateau;
    tw.amplitude = p.twist;
    tw.factors = {{p.target, Profile::sine(p.twist_frequency, p.twist_phase)}, {drive, guard}};
    out = MapExpr::compose(MapExpr::twist(tw), out);
  }
  return {out, region};
}

Gadget bm_rotation(const SupportRegion& region, const RotationParams& p) {
  region.validate();
  if (!(p.disc > 0.0 && p.disc <= 0.5))
    throw SupportContractError("support contract violated: bm_rotation disc leaves M^eps");
  check_hole(region, p.hole, "bm_rotation");
  if (!(p.base_radius > p.hole && p.base_radius < 0.5))
    throw SupportContractError("support contract violated: bm_rotation base box must enclose the guard strip");
  if (p.angle == 0.0) return identity_gadget(region);

  TwistSpec tw;
  tw.dim = region.dim;
  tw.first = region.center_first();
  tw.second = tw.first + 1;
  tw.center_first = region.center();
  tw.center_second = region.center();
  tw.radius = p.disc * region.eps;
  tw.plateau = p.plateau;
  tw.amplitude = p.angle;
  tw.factors = {{0, Profile::bump(region.p_star0, p.base_radius, 0.5)},
                {1, Profile::bump(region.p_star1, p.base_radius, 0.5)},
                {1, strip_guard(region.p_star1, p.hole)}};
  return {MapExpr::twist(tw), region};
}

Gadget dw_accessibility_shear(const SupportRegion& region, const AccessibilityParams& p) {
  region.validate();
  if (!(p.radius > 0.0 && p.offset >= 0.0 && p.offset + p.radius <= 0.5))
    throw SupportContractError("support contract violated: dw disc leaves M^eps");
  check_hole(region, p.hole, "dw_accessibility_shear");
  if (p.amplitude == 0.0) return identity_gadget(region);

  TwistSpec tw;
  tw.dim = region.dim;
  tw.first = region.center_first();
  tw.second = tw.first + 1;
  tw.center_first = region.center() + p.offset * region.eps;
  tw.center_second = region.center();
  tw.radius = p.radius * region.eps;
  tw.plateau = p.plateau;
  tw.amplitude = p.amplitude;
  tw.factors = {{0, Profile::sine(p.frequency, p.phase)}, {1, strip_guard(region.p_star1, p.hole)}};
  return {MapExpr::twist(tw), region};
}

Gadget compose_gadgets(const Gadget& outer, const Gadget& inner) {
  if (!(outer.region == inner.region)) throw std::invalid_argument("compose_gadgets: mismatched regions");
  return {MapExpr::compose(outer.map, inner.map), outer.region};
}

PipelineSpec assemble_f(const IntMat& a, const MapExpr& t, const Gadget& h, const Gadget& h_tilde) {
  if (!(h.region == h_tilde.region)) throw std::invalid_argument("assemble_f: mismatched regions");
  const SupportRegion& region = h.region;
  region.validate();
  if (a.rows() != 2 || a.cols() != 2) throw DimensionError("assemble_f: A must be 2 x 2");
  if (t.dim() != 2) throw DimensionError("assemble_f: T must act on T^2");
  if (h.map.dim() != region.dim || h_tilde.map.dim() != region.dim)
    throw DimensionError("assemble_f: gadget dimension does not match the region");

  PipelineSpec s;
  s.a = a;
  s.t = t;
  s.h = h.map;
  s.h_tilde = h_tilde.map;
  s.region = region;
  s.variant = region.dim == 6 ? Variant::T6 : Variant::T4;
  MapExpr la = MapExpr::linear(a);
  MapExpr base = s.variant == Variant::T6 ? MapExpr::product(la, la) : la;
  s.product = MapExpr::product(base, t);
  s.f = MapExpr::compose_all({s.h_tilde, s.product, s.h});
  s.f_inverse = s.f.inverse();
  return s;
}

std::string domain_name(Domain d) {
  switch (d) {
    case Domain::Torus:
      return "M";
    case Domain::MEps:
      return "M_eps";
    case Domain::AEps:
      return "A_eps";
    case Domain::MEpsMinusAEps:
      return "M_eps\\A_eps";
    case Domain::OutsideMEps:
      return "M\\M_eps";
  }
  return "?";
}

double domain_volume(Domain d, double eps) {
  switch (d) {
    case Domain::Torus:
      return 1.0;
    case Domain::MEps:
      return eps * eps;
    case Domain::AEps:
      return 0.25 * eps * eps;
    case Domain::MEpsMinusAEps:
      return 0.75 * eps * eps;
    case Domain::OutsideMEps:
      return 1.0 - eps * eps;
  }
  return 0.0;
}

double central_log_jacobian(const MapExpr& f, const MapExpr& f_inverse, const TorusPoint& w, int horizon,
                            CenterLayout layout, double min_conditioning) {
  CenterPlaneEstimate est = estimate_center_plane(f, f_inverse, w, horizon, horizon, layout, false, min_conditioning);
  Eigen::Matrix2d m = center_block(f.jacobian(w).matrix, est.frame, layout);
  return std::log(std::abs(m.determinant()));
}

namespace {

TorusPoint sample_domain(Stream& rng, const SupportRegion& region, Domain domain) {
  Vec x(region.dim);
  const int c = region.center_first();
  for (int i = 0; i < c; ++i) x[i] = rng.uniform();
  const double e = region.eps;
  for (;;) {
    double y1 = 0.0, y2 = 0.0;
    switch (domain) {
      case Domain::Torus:
      case Domain::OutsideMEps:
        y1 = rng.uniform();
        y2 = rng.uniform();
        break;
      case Domain::MEps:
      case Domain::MEpsMinusAEps:
        y1 = e * rng.uniform();
        y2 = e * rng.uniform();
        break;
      case Domain::AEps:
        y1 = 0.25 * e + 0.5 * e * rng.uniform();
        y2 = 0.25 * e + 0.5 * e * rng.uniform();
        break;
    }
    x[c] = y1;
    x[c + 1] = y2;
    TorusPoint p(x);
    if (domain == Domain::MEpsMinusAEps && region.in_a_eps(p)) continue;
    if (domain == Domain::OutsideMEps && region.in_m_eps(p)) continue;
    return p;
  }
}

TorusPoint reflect_center(const TorusPoint& p, const SupportRegion& region) {
  Vec x = p.coords();
  const int c = region.center_first();
  x[c] = wrap_unit(region.eps - x[c]);
  x[c + 1] = wrap_unit(region.eps - x[c + 1]);
  return TorusPoint(x);
}

}  // namespace

IntegralEstimate integrated_central_exponent(const MapExpr& f, const MapExpr& f_inverse,
                                             const SupportRegion& region, Domain domain,
                                             const IntegralOptions& opt) {
  region.validate();
  if (f.dim() != region.dim) throw DimensionError("integrated_central_exponent: map and region dimensions differ");
  if (opt.samples < 2) throw std::invalid_argument("integrated_central_exponent: need at least two samples");
  const int per = opt.antithetic ? 2 : 1;
  const std::size_t units = static_cast<std::size_t>(opt.samples / per);
  const CenterLayout layout = region.layout();

  std::vector<double> value(units, 0.0);
  std::vector<char> ok(units, 1);
  parallel_for(units, opt.threads, [&](std::size_t i) {
    Stream rng(opt.seed, opt.task + i);
    TorusPoint w = sample_domain(rng, region, domain);
    try {
      double g = central_log_jacobian(f, f_inverse, w, opt.horizon, layout, opt.min_conditioning);
      if (opt.absolute) g = std::abs(g);
      if (opt.antithetic) {
        double g2 = central_log_jacobian(f, f_inverse, reflect_center(w, region), opt.horizon, layout,
                                         opt.min_conditioning);
        if (opt.absolute) g2 = std::abs(g2);
        g = 0.5 * (g + g2);
      }
      if (!std::isfinite(g)) throw NonFiniteJacobian("non-finite integrand");
      value[i] = g;
    } catch (const SplittingNotResolved&) {
      ok[i] = 0;
    } catch (const NonFiniteJacobian&) {
      ok[i] = 0;
    }
  });

  double sum = 0.0, sum2 = 0.0;
  long long used = 0;
  for (std::size_t i = 0; i < units; ++i) {
    if (!ok[i]) continue;
    sum += value[i];
    ++used;
  }
  IntegralEstimate out;
  out.region = domain_name(domain);
  out.seed = opt.seed;
  out.n = used * per;
  out.excluded = static_cast<long long>(units - static_cast<std::size_t>(used)) * per;
  out.flagged = out.excluded > 0.01 * static_cast<double>(units * per);
  if (used < 2) throw NotResolved("integrated_central_exponent: fewer than two resolved samples");
  const double mean = sum / static_cast<double>(used);
  for (std::size_t i = 0; i < units; ++i)
    if (ok[i]) sum2 += (value[i] - mean) * (value[i] - mean);
  const double var = sum2 / static_cast<double>(used - 1);
  const double vol = domain_volume(domain, region.eps);
  out.estimate = vol * mean;
  out.stderr_ = vol * std::sqrt(var / static_cast<double>(used));
  return out;
}

LocalizationRatio localization_ratio(const MapExpr& f, const MapExpr& f_inverse, const SupportRegion& region,
                                     const IntegralOptions& options) {
  constexpr std::uint64_t kStride = 1ULL << 40;
  IntegralOptions o = options;
  o.absolute = true;
  o.task = options.task;
  IntegralEstimate ring = integrated_central_exponent(f, f_inverse, region, Domain::MEpsMinusAEps, o);
  o.task = options.task + kStride;
  IntegralEstimate far = integrated_central_exponent(f, f_inverse, region, Domain::OutsideMEps, o);
  o.absolute = false;
  o.task = options.task + 2 * kStride;
  IntegralEstimate inside = integrated_central_exponent(f, f_inverse, region, Domain::AEps, o);

  LocalizationRatio r;
  r.outside.region = "M\\A_eps";
  r.outside.seed = options.seed;
  r.outside.estimate = ring.estimate + far.estimate;
  r.outside.stderr_ = std::hypot(ring.stderr_, far.stderr_);
  r.outside.n = ring.n + far.n;
  r.outside.excluded = ring.excluded + far.excluded;
  r.outside.flagged = ring.flagged || far.flagged;
  r.inside = inside;
  if (inside.lower99() <= 0.0 && inside.upper99() >= 0.0)
    throw NotResolved("central contribution not resolved: 99% interval of the A_eps integral contains 0");
  const double d = std::abs(inside.estimate);
  r.ratio = r.outside.estimate / d;
  double rel_n = r.outside.estimate > 0.0 ? r.outside.stderr_ / r.outside.estimate : 0.0;
  double rel_d = inside.stderr_ / d;
  r.stderr_ = r.outside.estimate > 0.0 ? r.ratio * std::hypot(rel_n, rel_d) : r.outside.stderr_ / d;
  return r;
}

}  // namespace nuhlab
