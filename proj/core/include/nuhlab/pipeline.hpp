#pragma once

#include <vector>

#include "nuhlab/anosov_katok.hpp"
#include "nuhlab/config.hpp"
#include "nuhlab/perturbations.hpp"

namespace nuhlab {

/// Everything a run needs, built from one config.
struct Pipeline {
  RunConfig config;
  SupportRegion region;
  AKMap ak;
  InvariantSetSpec k;
  Gadget sw;
  Gadget bm;
  Gadget dw;
  Gadget h;        // sw o bm
  Gadget h_tilde;  // dw
  PipelineSpec full;     // h~ o (A x T) o h
  PipelineSpec sw_only;  // id o (A x T) o sw
  PipelineSpec product;  // A x T
};

IntMat config_matrix(const RunConfig& config);
Rearrangement config_geometry(const RunConfig& config);
/// Stage disc radius min(eps/2, 1/(2 q s)), smoothing width ak.width * radius.
std::vector<StageParams> config_stages(const RunConfig& config);
SupportRegion config_region(const RunConfig& config);
ShearParams config_shear(const RunConfig& config);
RotationParams config_rotation(const RunConfig& config);
AccessibilityParams config_accessibility(const RunConfig& config);

/// Throws SupportContractError, StageError or ConfigError on invalid parameters.
Pipeline build_pipeline(const RunConfig& config);

}  // namespace nuhlab
