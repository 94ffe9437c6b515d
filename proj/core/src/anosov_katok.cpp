#include "nuhlab/anosov_katok.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nuhlab {

namespace {

double op_norm2(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

MapExpr rotation2(double alpha) {
  Vec off(2);
  off << alpha, 0.0;
  return MapExpr::translation(off);
}

}  // namespace

void Rearrangement::validate() const {
  if (!(square > 0.0 && square < 0.5)) throw StageError("rearrangement: square side must lie in (0, 1/2)");
  if (!(band >= square && band < 0.5)) throw StageError("rearrangement: band height must lie in [square, 1/2)");
  if (!(margin > 0.0)) throw StageError("rearrangement: margin must be positive");
  if (!(square + margin < 1.0 - margin)) throw StageError("rearrangement: margin leaves no room for the ramps");
  if (windings_u < 0 || windings_v < 0) throw StageError("rearrangement: windings must be >= 0");
}

MapExpr Rearrangement::map() const {
  validate();
  double start = square + margin, end = 1.0 - margin;
  std::vector<MapExpr> parts;
  if (windings_u > 0)
    parts.push_back(MapExpr::shear({2, 0, 1.0, {{1, Profile::ramp(start, end, windings_u)}}}));
  if (windings_v > 0)
    parts.push_back(MapExpr::shear({2, 1, 1.0, {{0, Profile::ramp(start, end, windings_v)}}}));
  if (parts.empty()) return MapExpr::identity(2);
  return MapExpr::compose_all(parts);
}

MapExpr Rearrangement::inverse_map() const { return map().inverse(); }

AKStage build_stage(const std::optional<AKStage>& prev, const StageParams& params, const Rearrangement& geometry) {
  geometry.validate();
  if (params.q < 1) throw StageError("build_stage: q must be >= 1");
  if (params.subdivision < 1) throw StageError("build_stage: subdivision must be >= 1");
  if (prev && params.q % prev->params.q != 0)
    throw StageError("build_stage: q_" + std::to_string(prev->index + 1) + " = " + std::to_string(params.q) +
                     " is not a multiple of q_" + std::to_string(prev->index) + " = " +
                     std::to_string(prev->params.q));
  if (!(params.width > 0.0)) throw StageError("build_stage: smoothing width must be positive");

  AKStage st;
  st.index = prev ? prev->index + 1 : 1;
  st.params = params;
  const int cells = params.q * params.subdivision;
  const double cell = 1.0 / cells;
  st.disc_radius = std::min(0.5 * geometry.band, 0.5 * cell);
  if (params.width >= st.disc_radius)
    throw StageError("build_stage: smoothing width " + std::to_string(params.width) +
                     " too large for subdivision (disc radius " + std::to_string(st.disc_radius) + ")");

  if (params.angle != 0.0) {
    TwistSpec tw;
    tw.dim = 2;
    tw.first = 0;
    tw.second = 1;
    tw.center_first = 0.5 * cell;
    tw.center_second = 0.5 * geometry.band;
    tw.radius = st.disc_radius;
    tw.plateau = (st.disc_radius - params.width) / st.disc_radius;
    tw.amplitude = params.angle;
    tw.period = cells > 1 ? cell : 0.0;
    st.gadget = MapExpr::twist(tw);
  }
  MapExpr base = prev ? prev->conjugacy : geometry.map();
  st.conjugacy = params.angle != 0.0 ? MapExpr::compose(base, st.gadget) : base;
  return st;
}

AKMap::AKMap(std::vector<AKStage> stages, Rearrangement geometry, int closing_p, int closing_q)
    : stages_(std::move(stages)), geometry_(geometry), closing_p_(closing_p), closing_q_(closing_q) {
  if (stages_.empty()) throw StageError("ak_map: empty stage list");
  if (closing_q_ < 1) throw StageError("ak_map: closing denominator must be >= 1");
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (stages_[i].index != static_cast<int>(i) + 1) throw StageError("ak_map: stage indices out of order");
    if (i > 0 && stages_[i].params.q % stages_[i - 1].params.q != 0)
      throw StageError("ak_map: denominators do not refine");
  }
  if (closing_q_ % stages_.back().params.q != 0)
    throw StageError("ak_map: closing denominator is not a multiple of the last stage denominator");

  MapExpr phi = geometry_.map();
  realized_.push_back(
      MapExpr::compose_all({phi, rotation2(stages_.front().rotation()), phi.inverse()}));
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const MapExpr& h = stages_[i].conjugacy;
    realized_.push_back(MapExpr::compose_all({h, rotation2(next_rotation(static_cast<int>(i) + 1)), h.inverse()}));
  }
}

double AKMap::next_rotation(int n) const {
  if (n < static_cast<int>(stages_.size())) return stages_[static_cast<std::size_t>(n)].rotation();
  return closing_rotation();
}

int AKMap::next_denominator(int n) const {
  if (n < static_cast<int>(stages_.size())) return stages_[static_cast<std::size_t>(n)].params.q;
  return closing_q_;
}

MapExpr AKMap::stage_map(int n) const {
  if (n < 0 || n >= static_cast<int>(realized_.size())) throw std::out_of_range("stage_map: bad stage index");
  return realized_[static_cast<std::size_t>(n)];
}

std::vector<StageCloseness> AKMap::closeness(int grid) const {
  std::vector<StageCloseness> out;
  const Mat eye = Mat::Identity(2, 2);
  for (int n = 1; n <= static_cast<int>(stages_.size()); ++n) {
    StageCloseness c;
    c.index = n;
    c.power = next_denominator(n);
    const MapExpr& tn = realized_[static_cast<std::size_t>(n)];
    const MapExpr& tp = realized_[static_cast<std::size_t>(n) - 1];
    const MapExpr& h = stages_[static_cast<std::size_t>(n) - 1].conjugacy;
    const MapExpr hinv = h.inverse();
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        TorusPoint x{(i + 0.5) / grid, (j + 0.5) / grid};
        auto [yn, jn] = tn.eval_with_jacobian(x);
        auto [yp, jp] = tp.eval_with_jacobian(x);
        c.c0_to_previous = std::max(c.c0_to_previous, torus_distance(yn, yp));
        c.c1_to_previous = std::max(c.c1_to_previous, (jn - jp).cwiseAbs().maxCoeff());
        c.c0_to_identity = std::max(c.c0_to_identity, torus_distance(yn, x));
        c.c1_to_identity = std::max(c.c1_to_identity, (jn - eye).cwiseAbs().maxCoeff());
        Vec z = x.coords();
        Mat dhinv = Mat::Identity(2, 2);
        hinv.apply_with_jacobian(z, dhinv);
        Mat dh = h.jacobian(TorusPoint(z)).matrix;
        c.derivative_bound = std::max(c.derivative_bound, op_norm2(dh) * op_norm2(dhinv));
        Vec p = x.coords();
        for (int k = 0; k < c.power; ++k) tn.apply(p);
        c.power_defect = std::max(c.power_defect, torus_distance(TorusPoint(p), x));
      }
    out.push_back(c);
  }
  return out;
}

AKMap ak_map(const std::vector<AKStage>& stages, const Rearrangement& geometry, int closing_p, int closing_q) {
  return AKMap(stages, geometry, closing_p, closing_q);
}

AKMap build_ak_map(const std::vector<StageParams>& params, const Rearrangement& geometry, int closing_p,
                   int closing_q) {
  std::vector<AKStage> stages;
  std::optional<AKStage> prev;
  for (const auto& p : params) {
    AKStage st = build_stage(prev, p, geometry);
    stages.push_back(st);
    prev = st;
  }
  return AKMap(std::move(stages), geometry, closing_p, closing_q);
}

InvariantSetSpec::InvariantSetSpec(Rearrangement geometry, int stage_index)
    : geometry_(geometry), stage_(stage_index), phi_(geometry.map()), phi_inv_(geometry.inverse_map()) {}

double InvariantSetSpec::model_height(const TorusPoint& x) const {
  Vec z = x.coords();
  if (shift_x_ != 0.0 || shift_y_ != 0.0) {
    z[0] = wrap_unit(z[0] - shift_x_);
    z[1] = wrap_unit(z[1] - shift_y_);
  }
  phi_inv_.apply(z);
  return z[1];
}

bool InvariantSetSpec::contains(const TorusPoint& x, double tolerance) const {
  double v = model_height(x);
  return !(v > tolerance && v < geometry_.band - tolerance);
}

TorusPoint InvariantSetSpec::sample(double u1, double u2) const {
  Vec z(2);
  z << u1, geometry_.band + (1.0 - geometry_.band) * u2;
  z[1] = wrap_unit(z[1]);
  phi_.apply(z);
  z[0] = wrap_unit(z[0] + shift_x_);
  z[1] = wrap_unit(z[1] + shift_y_);
  return TorusPoint(z);
}

InvariantSetSpec InvariantSetSpec::shifted(double dx, double dy) const {
  InvariantSetSpec s = *this;
  s.shift_x_ = wrap_unit(shift_x_ + dx);
  s.shift_y_ = wrap_unit(shift_y_ + dy);
  return s;
}

InvariantSetSpec invariant_set(const AKMap& ak) {
  return InvariantSetSpec(ak.geometry(), static_cast<int>(ak.stages().size()));
}

double transitivity_probe(const MapExpr& t, const TorusPoint& seed, long long n, double delta) {
  if (!(delta > 0.0) || n < 1) throw std::invalid_argument("transitivity_probe: need delta > 0 and N >= 1");
  if (t.dim() != 2 || seed.dim() != 2) throw DimensionError("transitivity_probe: expects a map of T^2");
  const int m = static_cast<int>(std::ceil(1.0 / delta - 1e-12));
  std::vector<char> seen(static_cast<std::size_t>(m) * m, 0);
  long long covered = 0;
  Vec p = seed.coords();
  for (long long k = 0; k < n; ++k) {
    int i = std::min(m - 1, static_cast<int>(p[0] * m));
    int j = std::min(m - 1, static_cast<int>(p[1] * m));
    char& s = seen[static_cast<std::size_t>(i) * m + j];
    if (!s) {
      s = 1;
      ++covered;
    }
    t.apply(p);
  }
  return static_cast<double>(covered) / (static_cast<double>(m) * m);
}

std::vector<long long> convergent_denominators(double x, int max_terms) {
  std::vector<long long> q;
  long long q_prev = 0, q_cur = 1;
  double r = x - std::floor(x);
  for (int k = 0; k < max_terms && r > 1e-12; ++k) {
    double inv = 1.0 / r;
    long long a = static_cast<long long>(std::floor(inv));
    r = inv - a;
    long long q_next = a * q_cur + q_prev;
    q_prev = q_cur;
    q_cur = q_next;
    q.push_back(q_cur);
    if (q_cur > 1000000000LL) break;
  }
  return q;
}

}  // namespace nuhlab
