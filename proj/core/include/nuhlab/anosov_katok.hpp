#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "nuhlab/map_expr.hpp"

namespace nuhlab {

class StageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fixed area-preserving rearrangement of T^2 used by every stage.
///
/// Model coordinates (u, v): the transitivity region is the band v in (0, band)
/// and the invariant tube is v in [band, 1]. The rearrangement is
/// P_u o P_v with P_v: v += windings_v * ramp(u) and P_u: u += windings_u * ramp(v),
/// both ramps flat on [-margin, square + margin], so it is the identity on a
/// neighborhood of the square [0, square]^2.
struct Rearrangement {
  double square = 0.1;   // side of the avoided square
  double band = 0.1;     // band height in model coordinates (>= square)
  double margin = 0.05;
  int windings_v = 6;
  int windings_u = 1;

  MapExpr map() const;          // model -> torus
  MapExpr inverse_map() const;  // torus -> model
  void validate() const;
};

struct StageParams {
  int p = 1;            // rotation number p/q of this stage
  int q = 2;
  int subdivision = 4;  // discs per period 1/q
  double width = 0.03;  // smoothing width of each disc (support radius minus plateau radius)
  double angle = 0.5;   // peak twist angle of the disc gadgets (0: identity stage)
};

/// One stage of the successive-conjugation construction.
struct AKStage {
  int index = 1;
  StageParams params;
  double disc_radius = 0.0;
  MapExpr gadget = MapExpr::identity(2);     // h_n, acting in model coordinates
  MapExpr conjugacy = MapExpr::identity(2);  // H_n = Phi o h_1 o ... o h_n
  double rotation() const { return static_cast<double>(params.p) / params.q; }
};

/// Builds stage n from the previous one (or from the rearrangement when prev is empty).
AKStage build_stage(const std::optional<AKStage>& prev, const StageParams& params, const Rearrangement& geometry);

/// Closeness diagnostics measured on an n x n validation grid.
struct StageCloseness {
  int index = 0;
  double c0_to_previous = 0.0;  // sup distance T_n vs T_{n-1} (T_0 = the rearranged rigid rotation)
  double c1_to_previous = 0.0;  // sup |DT_n - DT_{n-1}| (max entry)
  double c0_to_identity = 0.0;
  double c1_to_identity = 0.0;
  double power_defect = 0.0;    // sup distance of T_n^{q_{n+1}} to the identity
  int power = 0;
  double derivative_bound = 0.0;  // max ||DH_n|| * ||DH_n^{-1}|| over the grid
};

/// Finite-stage construction T_n = H_n o R_{p_{n+1}/q_{n+1}} o H_n^{-1}; the last
/// stage uses the closing rotation.
class AKMap {
 public:
  AKMap(std::vector<AKStage> stages, Rearrangement geometry, int closing_p, int closing_q);

  const std::vector<AKStage>& stages() const { return stages_; }
  const Rearrangement& geometry() const { return geometry_; }
  int closing_p() const { return closing_p_; }
  int closing_q() const { return closing_q_; }
  double closing_rotation() const { return static_cast<double>(closing_p_) / closing_q_; }

  /// Realized map of stage n (1-based); n = 0 is the rearranged rotation by p_1/q_1.
  MapExpr stage_map(int n) const;
  /// The final realized map.
  MapExpr map() const { return stage_map(static_cast<int>(stages_.size())); }

  /// Rotation number used by the realized map of stage n, and its denominator.
  double next_rotation(int n) const;
  int next_denominator(int n) const;

  std::vector<StageCloseness> closeness(int grid) const;

 private:
  std::vector<AKStage> stages_;
  Rearrangement geometry_;
  int closing_p_;
  int closing_q_;
  std::vector<MapExpr> realized_;
};

AKMap ak_map(const std::vector<AKStage>& stages, const Rearrangement& geometry, int closing_p, int closing_q);

/// Convenience: builds all stages from parameters.
AKMap build_ak_map(const std::vector<StageParams>& params, const Rearrangement& geometry, int closing_p,
                   int closing_q);

/// K = Phi(T^1 x [band, 1]): a closed tube avoiding the open square (0, square)^2.
class InvariantSetSpec {
 public:
  InvariantSetSpec(Rearrangement geometry, int stage_index);

  /// Model height v in [0, 1) of Phi^{-1}(x).
  double model_height(const TorusPoint& x) const;
  /// Member iff the model height lies within `tolerance` of [band, 1].
  bool contains(const TorusPoint& x, double tolerance = 0.0) const;
  /// Closed-form Lebesgue measure 1 - band.
  double measure() const { return 1.0 - geometry_.band; }
  /// Declared lower bound 1 - square; slack = measure - bound.
  double declared_lower_bound() const { return 1.0 - geometry_.square; }
  int stage_index() const { return stage_; }
  const Rearrangement& geometry() const { return geometry_; }
  /// Random point of K: Phi of a uniform model point in the tube (u1, u2 uniform in [0,1)).
  TorusPoint sample(double u1, double u2) const;
  /// Copy shifted rigidly by (dx, dy) in torus coordinates (negative control).
  InvariantSetSpec shifted(double dx, double dy) const;

 private:
  Rearrangement geometry_;
  int stage_;
  MapExpr phi_;
  MapExpr phi_inv_;
  double shift_x_ = 0.0;
  double shift_y_ = 0.0;
};

InvariantSetSpec invariant_set(const AKMap& ak);

/// Fraction of cells of the delta-grid of T^2 visited by the length-N orbit of seed.
double transitivity_probe(const MapExpr& t, const TorusPoint& seed, long long n, double delta);

/// Continued-fraction convergent denominators of x (up to max_terms).
std::vector<long long> convergent_denominators(double x, int max_terms = 12);

}  // namespace nuhlab
