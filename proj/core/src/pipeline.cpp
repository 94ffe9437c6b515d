#include "nuhlab/pipeline.hpp"

#include <algorithm>

namespace nuhlab {

IntMat config_matrix(const RunConfig& c) {
  IntMat a(2, 2);
  a << c.matrix[0], c.matrix[1], c.matrix[2], c.matrix[3];
  return a;
}

Rearrangement config_geometry(const RunConfig& c) {
  return {c.eps, c.eps, c.ak_margin, c.ak_windings_v, c.ak_windings_u};
}

std::vector<StageParams> config_stages(const RunConfig& c) {
  std::vector<StageParams> out;
  for (std::size_t i = 0; i < c.ak_q.size(); ++i) {
    int q = static_cast<int>(c.ak_q[i]), s = static_cast<int>(c.ak_subdivision[i]);
    double rho = std::min(0.5 * c.eps, 0.5 / (static_cast<double>(q) * s));
    double angle = i + 1 == c.ak_q.size() ? c.ak_last_angle : c.ak_angle;
    out.push_back({1, q, s, rho * c.ak_width, angle});
  }
  return out;
}

SupportRegion config_region(const RunConfig& c) {
  SupportRegion r;
  r.eps = c.eps;
  r.p_star0 = c.p_star0;
  r.p_star1 = c.p_star1;
  r.r_v = c.r_v;
  r.dim = c.dim();
  return r;
}

ShearParams config_shear(const RunConfig& c) {
  ShearParams p;
  p.amplitude = c.sw_amplitude;
  p.twist = c.sw_twist;
  p.target = c.sw_target;
  p.drive_frequency = c.sw_drive_frequency;
  p.twist_frequency = c.sw_twist_frequency;
  p.twist_phase = c.sw_twist_phase;
  p.support = c.sw_support;
  p.plateau = c.sw_plateau;
  p.hole = c.sw_hole;
  p.aspect = c.sw_aspect;
  return p;
}

RotationParams config_rotation(const RunConfig& c) {
  return {c.bm_angle, c.bm_base_radius, c.bm_hole, c.bm_disc, c.bm_plateau};
}

AccessibilityParams config_accessibility(const RunConfig& c) {
  return {c.dw_amplitude, c.dw_frequency, c.dw_phase, c.dw_offset, c.dw_radius, c.dw_plateau, c.dw_hole};
}

Pipeline build_pipeline(const RunConfig& config) {
  config.validate();
  SupportRegion region = config_region(config);
  region.validate();
  IntMat a = config_matrix(config);
  AKMap ak = build_ak_map(config_stages(config), config_geometry(config), config.ak_closing_p, config.ak_closing_q);
  InvariantSetSpec k = invariant_set(ak);
  MapExpr t = ak.map();
  Gadget sw = sw_shear(region, config_shear(config));
  Gadget bm = bm_rotation(region, config_rotation(config));
  Gadget dw = dw_accessibility_shear(region, config_accessibility(config));
  Gadget h = compose_gadgets(sw, bm);
  Gadget id = identity_gadget(region);
  PipelineSpec full = assemble_f(a, t, h, dw);
  PipelineSpec sw_only = assemble_f(a, t, sw, id);
  PipelineSpec product = assemble_f(a, t, id, id);
  return Pipeline{config, region, std::move(ak), std::move(k), sw, bm, dw, h, dw, full, sw_only, product};
}

}  // namespace nuhlab
