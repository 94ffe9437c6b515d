#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace nuhlab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every tunable of a run. Serialized as flat `key = value` lines (see
/// describe_config_keys() for the documented key set).
struct RunConfig {
  // geometry
  double eps = 0.2;
  std::vector<long long> matrix = {5, 3, 3, 2};
  double p_star0 = 0.6;
  double p_star1 = 0.2;
  double r_v = 0.02;
  std::string variant = "t4";

  // Anosov-Katok map T
  double ak_margin = 0.05;
  int ak_windings_v = 6;
  int ak_windings_u = 1;
  std::vector<long long> ak_q = {2, 12, 120};
  std::vector<long long> ak_subdivision = {4, 2, 1};
  double ak_angle = 0.5;
  double ak_last_angle = 0.05;
  double ak_width = 0.5;  // disc smoothing width / disc radius
  int ak_closing_p = 1;
  int ak_closing_q = 840;

  // sw coupling
  double sw_amplitude = 0.05;
  double sw_twist = 1.0;
  int sw_target = 1;
  int sw_drive_frequency = 1;
  int sw_twist_frequency = 10;
  double sw_twist_phase = 0.25;
  double sw_support = 0.25;
  double sw_plateau = 0.5;
  double sw_hole = 0.02;
  double sw_aspect = 1.0;

  // bm rotation
  double bm_angle = 1.5707963267948966;
  double bm_base_radius = 0.1;
  double bm_hole = 0.03;
  double bm_disc = 0.5;
  double bm_plateau = 0.5;

  // dw accessibility twist
  double dw_amplitude = 0.3;
  int dw_frequency = 1;
  double dw_phase = 0.0;
  double dw_offset = 0.03125;
  double dw_radius = 0.46875;
  double dw_plateau = 0.5;
  double dw_hole = 0.02;

  // estimators
  long long validation_samples = 10000;
  int lyapunov_n = 10000;
  int lyapunov_samples = 64;
  int lyapunov_checkpoint = 1000;
  int central_anchor = 24;
  long long integral_samples = 20000;
  int integral_horizon = 24;
  int access_grid = 10;
  double access_leg = 0.02;
  int access_refinement = 64;
  int access_depth = 4;
  int survey_center_grid = 64;
  int survey_base_grid = 16;
  int survey_n_time = 10000;
  double survey_threshold_factor = 5.0;
  double density_delta = 0.1;
  long long audit_samples = 10000;
  int audit_n_time = 1000;
  long long avoidance_samples = 10000;
  int avoidance_n = 1000;

  std::uint64_t seed = 1;

  int dim() const { return variant == "t6" ? 6 : 4; }
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Canonical text: one `key = value` per line, keys sorted, doubles in
/// round-trip precision. parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies one `key = value` assignment.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
std::map<std::string, std::string> config_entries(const RunConfig& config);
std::vector<std::pair<std::string, std::string>> describe_config_keys();

/// Hex SHA-256 of the canonical serialization.
std::string config_hash(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace nuhlab
