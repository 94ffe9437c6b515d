#include "nuhlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "nuhlab/io.hpp"

namespace nuhlab {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config: " + key + ": not a number: '" + v + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ConfigError("config: " + key + ": not an integer: '" + v + "'");
  return out;
}

std::vector<long long> parse_list(const std::string& key, const std::string& v) {
  std::vector<long long> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
  if (out.empty()) throw ConfigError("config: " + key + ": empty list");
  return out;
}

std::string fmt_list(const std::vector<long long>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  const char* name;
  const char* doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <class T>
Field num(const char* name, const char* doc, T RunConfig::*m) {
  Field f{name, doc, nullptr, nullptr};
  if constexpr (std::is_same_v<T, double>) {
    f.get = [m](const RunConfig& c) { return format_double(c.*m); };
    f.set = [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_double(k, v); };
  } else {
    f.get = [m](const RunConfig& c) { return std::to_string(c.*m); };
    f.set = [m](RunConfig& c, const std::string& k, const std::string& v) {
      long long x = parse_int(k, v);
      if constexpr (std::is_same_v<T, int>) {
        if (x < INT32_MIN || x > INT32_MAX) throw ConfigError("config: " + k + ": out of range");
      }
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (x < 0) throw ConfigError("config: " + k + ": must be non-negative");
      }
      c.*m = static_cast<T>(x);
    };
  }
  return f;
}

Field list(const char* name, const char* doc, std::vector<long long> RunConfig::*m) {
  return {name, doc, [m](const RunConfig& c) { return fmt_list(c.*m); },
          [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = parse_list(k, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      num("eps", "size of the perturbation box [0, eps]^2 in the center torus", &RunConfig::eps),
      list("matrix", "hyperbolic matrix A, row-major a,b,c,d", &RunConfig::matrix),
      num("p_star0", "saved fiber: fixed point of A, first coordinate", &RunConfig::p_star0),
      num("p_star1", "saved fiber: fixed point of A, second coordinate", &RunConfig::p_star1),
      num("r_v", "radius of the neighborhood V of the saved fiber", &RunConfig::r_v),
      {"variant", "t4 (A x T) or t6 (A x A x T)", [](const RunConfig& c) { return c.variant; },
       [](RunConfig& c, const std::string&, const std::string& v) { c.variant = v; }},
      num("ak.margin", "flat margin of the rearrangement ramps", &RunConfig::ak_margin),
      num("ak.windings_v", "windings of the vertical rearrangement shear", &RunConfig::ak_windings_v),
      num("ak.windings_u", "windings of the horizontal rearrangement shear", &RunConfig::ak_windings_u),
      list("ak.q", "stage rotation denominators", &RunConfig::ak_q),
      list("ak.subdivision", "discs per period for each stage", &RunConfig::ak_subdivision),
      num("ak.angle", "peak disc twist angle of the stages", &RunConfig::ak_angle),
      num("ak.last_angle", "peak disc twist angle of the last stage", &RunConfig::ak_last_angle),
      num("ak.width", "disc smoothing width relative to the disc radius", &RunConfig::ak_width),
      num("ak.closing_p", "closing rotation numerator", &RunConfig::ak_closing_p),
      num("ak.closing_q", "closing rotation denominator", &RunConfig::ak_closing_q),
      num("sw.amplitude", "base shear amplitude", &RunConfig::sw_amplitude),
      num("sw.twist", "center twist amplitude", &RunConfig::sw_twist),
      num("sw.target", "base coordinate receiving the shear (0 or 1)", &RunConfig::sw_target),
      num("sw.drive_frequency", "frequency of the shear drive", &RunConfig::sw_drive_frequency),
      num("sw.twist_frequency", "frequency of the twist drive", &RunConfig::sw_twist_frequency),
      num("sw.twist_phase", "phase of the twist drive", &RunConfig::sw_twist_phase),
      num("sw.support", "support radius / eps", &RunConfig::sw_support),
      num("sw.plateau", "radial plateau fraction", &RunConfig::sw_plateau),
      num("sw.hole", "half-width of the guard strip about p*", &RunConfig::sw_hole),
      num("sw.aspect", "twist ellipse aspect", &RunConfig::sw_aspect),
      num("bm.angle", "rotation angle", &RunConfig::bm_angle),
      num("bm.base_radius", "half-side of the base box about p*", &RunConfig::bm_base_radius),
      num("bm.hole", "half-width of the guard strip about p*", &RunConfig::bm_hole),
      num("bm.disc", "center disc radius / eps", &RunConfig::bm_disc),
      num("bm.plateau", "radial plateau fraction", &RunConfig::bm_plateau),
      num("dw.amplitude", "twist amplitude", &RunConfig::dw_amplitude),
      num("dw.frequency", "frequency along the base", &RunConfig::dw_frequency),
      num("dw.phase", "phase along the base", &RunConfig::dw_phase),
      num("dw.offset", "center shift / eps", &RunConfig::dw_offset),
      num("dw.radius", "disc radius / eps", &RunConfig::dw_radius),
      num("dw.plateau", "radial plateau fraction", &RunConfig::dw_plateau),
      num("dw.hole", "half-width of the guard strip about p*", &RunConfig::dw_hole),
      num("validation.samples", "points per structural check", &RunConfig::validation_samples),
      num("lyapunov.n", "orbit length of spectrum estimates", &RunConfig::lyapunov_n),
      num("lyapunov.samples", "sample points for the lyapunov command", &RunConfig::lyapunov_samples),
      num("lyapunov.checkpoint", "checkpoint spacing of exponent traces", &RunConfig::lyapunov_checkpoint),
      num("central.anchor", "forward/backward steps used to anchor the center bundle", &RunConfig::central_anchor),
      num("integral.samples", "Monte Carlo samples per integral", &RunConfig::integral_samples),
      num("integral.horizon", "center bundle horizon of the integrand", &RunConfig::integral_horizon),
      num("access.grid", "holonomy raster side over A^eps", &RunConfig::access_grid),
      num("access.leg", "su-quadrilateral leg length", &RunConfig::access_leg),
      num("access.refinement", "leaf samples per unit leg at the coarse level", &RunConfig::access_refinement),
      num("access.depth", "leaf growth depth (error compares depth and depth + 1)", &RunConfig::access_depth),
      num("survey.center_grid", "survey cells per center axis", &RunConfig::survey_center_grid),
      num("survey.base_grid", "base grid per axis the cell base points are drawn from", &RunConfig::survey_base_grid),
      num("survey.n_time", "orbit length of the survey exponents", &RunConfig::survey_n_time),
      num("survey.threshold_factor", "threshold / noise floor", &RunConfig::survey_threshold_factor),
      num("density.delta", "ball size of the density audit", &RunConfig::density_delta),
      num("audit.samples", "K samples in the invariance audit", &RunConfig::audit_samples),
      num("audit.n_time", "orbit length of the invariance audit", &RunConfig::audit_n_time),
      num("avoidance.samples", "samples of the avoidance statistic", &RunConfig::avoidance_samples),
      num("avoidance.n", "orbit length of the avoidance statistic", &RunConfig::avoidance_n),
      num("seed", "RNG seed", &RunConfig::seed),
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  need(eps > 0.0 && eps <= 0.25, "eps must lie in (0, 0.25]");
  need(matrix.size() == 4, "matrix needs 4 entries");
  need(variant == "t4" || variant == "t6", "variant must be t4 or t6");
  need(ak_q.size() == ak_subdivision.size() && !ak_q.empty(), "ak.q and ak.subdivision must have equal length");
  for (auto q : ak_q) need(q >= 1, "ak.q entries must be positive");
  for (auto s : ak_subdivision) need(s >= 1, "ak.subdivision entries must be positive");
  need(ak_closing_q >= 1, "ak.closing_q must be positive");
  need(ak_width > 0.0 && ak_width < 1.0, "ak.width must lie in (0, 1)");
  need(sw_target == 0 || sw_target == 1, "sw.target must be 0 or 1");
  need(validation_samples > 0 && lyapunov_n > 0 && lyapunov_samples > 0, "sample counts must be positive");
  need(integral_samples >= 2 && integral_horizon > 0, "integral settings must be positive");
  need(access_grid > 0 && access_leg > 0.0 && access_refinement >= 4 && access_depth >= 1 && access_depth <= 6, "access settings out of range");
  need(survey_center_grid > 0 && survey_base_grid > 0 && survey_n_time > 0, "survey settings must be positive");
  need(survey_threshold_factor > 0.0, "survey.threshold_factor must be positive");
  need(density_delta > 0.0 && density_delta <= 0.5, "density.delta must lie in (0, 0.5]");
  need(audit_samples > 0 && audit_n_time > 0 && avoidance_samples > 0 && avoidance_n > 0,
       "audit settings must be positive");
  need(lyapunov_checkpoint >= 0 && central_anchor > 0, "lyapunov settings out of range");
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.name) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

std::map<std::string, std::string> config_entries(const RunConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.name] = f.get(config);
  return out;
}

std::vector<std::pair<std::string, std::string>> describe_config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.name, f.doc);
  return out;
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected 'key = value'");
    set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const RunConfig& config) { return sha256_hex(serialize_config(config)); }

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

}  // namespace nuhlab
