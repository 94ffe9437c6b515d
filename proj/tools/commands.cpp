#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "nuhlab/hyperbolicity.hpp"
#include "nuhlab/lyapunov.hpp"
#include "nuhlab/parallel.hpp"
#include "nuhlab/pipeline.hpp"
#include "nuhlab/rng.hpp"
#include "nuhlab/survey.hpp"

namespace nuhlab::cli {

namespace fs = std::filesystem;

namespace {

// Substream task bases, one per consumer.
constexpr std::uint64_t kTaskVolume = 0x1000000000ULL;
constexpr std::uint64_t kTaskSupport = 0x1100000000ULL;
constexpr std::uint64_t kTaskRestriction = 0x1200000000ULL;
constexpr std::uint64_t kTaskLyapunov = 0x2000000000ULL;
constexpr std::uint64_t kTaskIntegrals = 0x3000000000ULL;
constexpr std::uint64_t kTaskAccess = 0x4000000000ULL;

std::string fmt(double v) { return format_double(v); }
std::string fmt(long long v) { return std::to_string(v); }

void add(CommandResult& r, RunDirectory& dir, Check c) {
  dir.record_check(c.name, c.passed, "value=" + c.value + " bound=" + c.bound);
  r.checks.push_back(std::move(c));
}

TorusPoint uniform_point(int dim, Stream& rng) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform();
  return TorusPoint(v);
}

TorusPoint outside_m_eps(const SupportRegion& region, Stream& rng) {
  for (;;) {
    TorusPoint x = uniform_point(region.dim, rng);
    if (!region.in_m_eps(x)) return x;
  }
}

/// Base inside V, center inside M^eps, where the gadgets would otherwise act.
TorusPoint inside_v(const SupportRegion& region, Stream& rng) {
  Vec v(region.dim);
  double r = 0.999 * region.r_v * std::sqrt(rng.uniform()), a = 2.0 * std::numbers::pi * rng.uniform();
  v[0] = region.p_star0 + r * std::cos(a);
  v[1] = region.p_star1 + r * std::sin(a);
  for (int i = 2; i < region.dim - 2; ++i) v[i] = rng.uniform();
  v[region.dim - 2] = region.eps * rng.uniform();
  v[region.dim - 1] = region.eps * rng.uniform();
  return TorusPoint(v);
}

bool bit_equal(const TorusPoint& a, const TorusPoint& b) {
  for (int i = 0; i < a.dim(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  return true;
}

/// max | |det Df(x)| - 1 | over n uniform points.
double volume_defect(const MapExpr& map, long long n, std::uint64_t seed, std::uint64_t task, int threads) {
  std::vector<double> d(static_cast<std::size_t>(n));
  parallel_for(d.size(), threads, [&](std::size_t i) {
    Stream rng(seed, task + i);
    d[i] = std::abs(std::abs(map.jacobian(uniform_point(map.dim(), rng)).matrix.determinant()) - 1.0);
  });
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

/// Number of sampled points not fixed bit-exactly.
long long moved_points(const MapExpr& map, long long n, const std::function<TorusPoint(Stream&)>& sample,
                       std::uint64_t seed, std::uint64_t task, int threads) {
  std::vector<char> moved(static_cast<std::size_t>(n), 0);
  parallel_for(moved.size(), threads, [&](std::size_t i) {
    Stream rng(seed, task + i);
    TorusPoint x = sample(rng);
    moved[i] = bit_equal(map.eval(x), x) ? 0 : 1;
  });
  return std::count(moved.begin(), moved.end(), 1);
}

std::vector<std::string> coord_header(const std::string& prefix, int n) {
  std::vector<std::string> h;
  for (int i = 0; i < n; ++i) h.push_back(prefix + std::to_string(i + 1));
  return h;
}

std::string validation_csv(const CommandResult& r) {
  CsvTable t({"check", "criterion", "value", "bound", "passed"});
  for (const auto& c : r.checks) t.row({c.name, std::to_string(c.criterion), c.value, c.bound, c.passed ? "1" : "0"});
  return t.str();
}

}  // namespace

bool CommandResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

CommandResult cmd_build(const Context& ctx, RunDirectory& dir) {
  const RunConfig& c = ctx.config;
  Pipeline p = build_pipeline(c);
  const SupportRegion& region = p.region;
  const long long n = c.validation_samples;
  const int th = ctx.threads;
  CommandResult r;

  struct Named {
    std::string name;
    MapExpr map;
  };
  std::vector<Named> maps = {{"A", MapExpr::linear(config_matrix(c))},
                             {"T", p.ak.map()},
                             {"h", p.full.h},
                             {"h_tilde", p.full.h_tilde},
                             {"f", p.full.f}};
  for (std::size_t k = 0; k < maps.size(); ++k) {
    double v = volume_defect(maps[k].map, n, c.seed, kTaskVolume + (k << 32), th);
    add(r, dir, {"volume." + maps[k].name, 1, v <= tol::kVolume, fmt(v), fmt(tol::kVolume)});
  }

  {
    std::vector<double> gap(static_cast<std::size_t>(std::min<long long>(n, 1000)));
    std::vector<double> fd(gap.size());
    parallel_for(gap.size(), th, [&](std::size_t i) {
      Stream rng(c.seed, kTaskVolume + (7ULL << 32) + i);
      TorusPoint x = uniform_point(region.dim, rng);
      gap[i] = torus_distance(p.full.f_inverse.eval(p.full.f.eval(x)), x);
      fd[i] = jacobian_fd_check(p.full.f, x, 1e-8);
    });
    double g = *std::max_element(gap.begin(), gap.end()), j = *std::max_element(fd.begin(), fd.end());
    add(r, dir, {"inverse.f", 0, g <= tol::kInverse, fmt(g), fmt(tol::kInverse)});
    add(r, dir, {"jacobian_fd.f", 0, j <= tol::kJacobianFd, fmt(j), fmt(tol::kJacobianFd)});
  }

  auto outside = [&](Stream& rng) { return outside_m_eps(region, rng); };
  auto in_v = [&](Stream& rng) { return inside_v(region, rng); };
  const std::pair<std::string, MapExpr> gadgets[] = {{"h", p.full.h}, {"h_tilde", p.full.h_tilde}};
  for (std::size_t k = 0; k < 2; ++k) {
    long long a = moved_points(gadgets[k].second, n, outside, c.seed, kTaskSupport + (2 * k << 32), th);
    long long b = moved_points(gadgets[k].second, n, in_v, c.seed, kTaskSupport + ((2 * k + 1) << 32), th);
    add(r, dir, {"support." + gadgets[k].first + ".outside_m_eps", 4, a == 0, fmt(a) + "/" + fmt(n) + " moved", "0"});
    add(r, dir, {"support." + gadgets[k].first + ".in_v", 4, b == 0, fmt(b) + "/" + fmt(n) + " moved", "0"});
  }

  double measure = p.k.measure();
  add(r, dir, {"k.measure", 8, measure >= 1.0 - c.eps, fmt(measure), ">= " + fmt(1.0 - c.eps)});
  {
    std::vector<char> diff(static_cast<std::size_t>(n), 0);
    parallel_for(diff.size(), th, [&](std::size_t i) {
      Stream rng(c.seed, kTaskRestriction + i);
      Vec v(region.dim);
      for (int j = 0; j < region.dim - 2; ++j) v[j] = rng.uniform();
      double u1 = rng.uniform(), u2 = rng.uniform();
      TorusPoint ck = p.k.sample(u1, u2);
      v[region.dim - 2] = ck[0];
      v[region.dim - 1] = ck[1];
      TorusPoint x(v);
      diff[i] = bit_equal(p.full.f.eval(x), p.full.product.eval(x)) ? 0 : 1;
    });
    long long m = std::count(diff.begin(), diff.end(), 1);
    add(r, dir, {"k.restriction_bit_exact", 8, m == 0, fmt(m) + "/" + fmt(n) + " differ", "0"});
  }

  {
    CsvTable t({"stage", "q", "subdivision", "disc_radius", "c0_to_previous", "c1_to_previous", "c0_to_identity",
                "c1_to_identity", "power", "power_defect", "derivative_bound"});
    auto close = p.ak.closeness(64);
    for (std::size_t i = 0; i < close.size(); ++i) {
      const auto& s = close[i];
      const auto& st = p.ak.stages()[i];
      t.row({std::to_string(s.index), std::to_string(st.params.q), std::to_string(st.params.subdivision), fmt(st.disc_radius),
             fmt(s.c0_to_previous), fmt(s.c1_to_previous), fmt(s.c0_to_identity), fmt(s.c1_to_identity),
             std::to_string(s.power), fmt(s.power_defect), fmt(s.derivative_bound)});
      dir.record_bound("ak.stage" + std::to_string(s.index) + ".derivative_bound", fmt(s.derivative_bound));
    }
    dir.write("build/ak_stages.csv", t.str());
  }

  std::ostringstream desc;
  desc << "variant " << c.variant << "\n";
  desc << "dim " << region.dim << "\n";
  if (c.sw_amplitude == 0.0) desc << "note sw gadget is trivial (amplitude 0)\n";
  if (c.bm_angle == 0.0) desc << "note bm gadget is trivial (angle 0)\n";
  if (c.dw_amplitude == 0.0) desc << "note dw gadget is trivial (amplitude 0)\n";
  desc << "T " << p.ak.map().describe() << "\n";
  desc << "h " << p.full.h.describe() << "\n";
  desc << "h_tilde " << p.full.h_tilde.describe() << "\n";
  desc << "f " << p.full.f.describe() << "\n";
  dir.write("build/pipeline.txt", desc.str());
  dir.write("build/validation.csv", validation_csv(r));
  dir.record_bound("k.measure", fmt(measure));
  dir.write_manifest();
  return r;
}

CommandResult cmd_lyapunov(const Context& ctx, RunDirectory& dir) {
  const RunConfig& c = ctx.config;
  Pipeline p = build_pipeline(c);
  const int d = p.region.dim;
  const int n = c.lyapunov_n;
  CommandResult r;

  const Mat frame = ReferenceSplitting::of(config_matrix(c), d).ordered_frame();
  const auto samples = static_cast<std::size_t>(c.lyapunov_samples);
  std::vector<TorusPoint> pts(samples);
  std::vector<LyapunovEstimate> spectra(samples);
  std::vector<CentralExponents> central(samples);
  parallel_for(samples, ctx.threads, [&](std::size_t i) {
    Stream rng(c.seed, kTaskLyapunov + i);
    pts[i] = uniform_point(d, rng);
    spectra[i] = benettin_spectrum(p.full.f, pts[i], n, 1, c.lyapunov_checkpoint, frame);
    try {
      central[i] = central_exponents(p.full.f, p.full.f_inverse, pts[i], n, c.central_anchor, p.region.layout());
    } catch (const SplittingNotResolved&) {
      central[i] = middle_exponents(spectra[i]);
    }
  });

  std::vector<std::string> head = {"sample"};
  for (auto& s : coord_header("x", d)) head.push_back(s);
  for (auto& s : coord_header("l", d)) head.push_back(s);
  for (std::string s : {"sum", "central_first", "central_second", "splitting"}) head.push_back(s);
  CsvTable spec_csv(head);
  std::vector<std::string> chead = {"sample", "step"};
  for (auto& s : coord_header("l", d)) chead.push_back(s);
  CsvTable conv_csv(chead);
  double worst_sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<std::string> row = {std::to_string(i)};
    for (int k = 0; k < d; ++k) row.push_back(fmt(pts[i][k]));
    for (int k = 0; k < d; ++k) row.push_back(fmt(spectra[i].exponents[k]));
    double sum = spectra[i].sum();
    worst_sum = std::max(worst_sum, std::abs(sum));
    row.push_back(fmt(sum));
    row.push_back(fmt(central[i].first));
    row.push_back(fmt(central[i].second));
    row.push_back(central[i].used_splitting ? "1" : "0");
    spec_csv.row(row);
    for (const auto& [step, ex] : spectra[i].checkpoints) {
      std::vector<std::string> cr = {std::to_string(i), std::to_string(step)};
      for (int k = 0; k < d; ++k) cr.push_back(fmt(ex[k]));
      conv_csv.row(cr);
    }
  }

  // Oracles: the cat map and A x Id.
  CsvTable oracle_csv({"map", "sample", "l1", "l2", "l3", "l4", "expected_l1", "error"});
  const double cat = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  const MapExpr cat_map = MapExpr::linear({{2, 1}, {1, 1}});
  const IntMat a = config_matrix(c);
  const double tr = static_cast<double>(a(0, 0) + a(1, 1));
  const double log_lambda = std::log(0.5 * (tr + std::sqrt(tr * tr - 4.0)));
  IntMat a_id = IntMat::Identity(4, 4);
  a_id.topLeftCorner(2, 2) = a;
  const MapExpr a_times_id = MapExpr::linear(a_id);
  const Mat a_frame = ReferenceSplitting::of(a, 4).ordered_frame();
  double cat_err = 0.0, aid_err = 0.0, aid_zero = 0.0;
  for (int i = 0; i < 8; ++i) {
    Stream rng(c.seed, kTaskLyapunov + (1ULL << 32) + i);
    TorusPoint x2 = uniform_point(2, rng), x4 = uniform_point(4, rng);
    Vec e = benettin_spectrum(cat_map, x2, 10000).exponents;
    double err = std::max(std::abs(e[0] - cat), std::abs(e[1] + cat));
    cat_err = std::max(cat_err, err);
    worst_sum = std::max(worst_sum, std::abs(e.sum()));
    oracle_csv.row({"cat", std::to_string(i), fmt(e[0]), fmt(e[1]), "", "", fmt(cat), fmt(err)});
    Vec g = benettin_spectrum(a_times_id, x4, 10000, 1, 0, a_frame).exponents;
    double gerr = std::max(std::abs(g[0] - log_lambda), std::abs(g[3] + log_lambda));
    aid_err = std::max(aid_err, gerr);
    aid_zero = std::max({aid_zero, std::abs(g[1]), std::abs(g[2])});
    worst_sum = std::max(worst_sum, std::abs(g.sum()));
    oracle_csv.row({"A_x_Id", std::to_string(i), fmt(g[0]), fmt(g[1]), fmt(g[2]), fmt(g[3]), fmt(log_lambda),
                    fmt(gerr)});
  }
  add(r, dir, {"oracle.cat_map", 2, cat_err <= tol::kCatMap, fmt(cat_err), fmt(tol::kCatMap)});
  add(r, dir, {"oracle.a_times_id.hyperbolic", 2, aid_err <= tol::kCatMap, fmt(aid_err), fmt(tol::kCatMap)});
  add(r, dir, {"oracle.a_times_id.zeros_exact", 2, aid_zero == 0.0, fmt(aid_zero), "0"});
  add(r, dir, {"spectra.zero_sum", 3, worst_sum <= tol::kZeroSum, fmt(worst_sum), fmt(tol::kZeroSum)});

  dir.write("lyapunov/spectra.csv", spec_csv.str());
  dir.write("lyapunov/convergence.csv", conv_csv.str());
  dir.write("lyapunov/oracles.csv", oracle_csv.str());
  dir.record_bound("lyapunov.max_abs_sum", fmt(worst_sum));
  dir.write_manifest();
  return r;
}

namespace {

void integral_row(CsvTable& t, const std::string& pipeline, const IntegralEstimate& e) {
  t.row({pipeline, e.region, fmt(e.estimate), fmt(e.stderr_), fmt(e.lower99()), fmt(e.upper99()), fmt(e.n),
         fmt(e.excluded), e.flagged ? "1" : "0"});
}

}  // namespace

CommandResult cmd_integrals(const Context& ctx, RunDirectory& dir) {
  const RunConfig& c = ctx.config;
  Pipeline p = build_pipeline(c);
  CommandResult r;
  IntegralOptions opt;
  opt.samples = c.integral_samples;
  opt.horizon = c.integral_horizon;
  opt.seed = c.seed;
  opt.threads = ctx.threads;
  auto with_task = [&](std::uint64_t k) {
    IntegralOptions o = opt;
    o.task = kTaskIntegrals + (k << 32);
    return o;
  };

  CsvTable est({"pipeline", "region", "estimate", "stderr", "lower99", "upper99", "n", "excluded", "flagged"});
  IntegralEstimate m_eps =
      integrated_central_exponent(p.full.f, p.full.f_inverse, p.region, Domain::MEps, with_task(0));
  IntegralEstimate whole =
      integrated_central_exponent(p.full.f, p.full.f_inverse, p.region, Domain::Torus, with_task(1));
  integral_row(est, "full", m_eps);
  integral_row(est, "full", whole);
  add(r, dir, {"integral.m_eps.negative", 5, m_eps.upper99() < 0.0, fmt(m_eps.estimate) + " upper99 " +
               fmt(m_eps.upper99()), "upper99 < 0"});
  double gap = std::abs(whole.estimate - m_eps.estimate);
  double combined = tol::kZ99 * std::hypot(whole.stderr_, m_eps.stderr_);
  add(r, dir, {"integral.m_equals_m_eps", 5, gap <= combined, fmt(gap), "<= " + fmt(combined)});
  dir.record_bound("integral.m_eps", fmt(m_eps.estimate));
  dir.record_bound("integral.m_eps.stderr", fmt(m_eps.stderr_));

  CsvTable loc({"pipeline", "ratio", "stderr", "factor", "inside", "inside_stderr", "outside", "outside_stderr",
                "passed"});
  const std::tuple<std::string, const PipelineSpec*, double, std::uint64_t> runs[] = {
      {"sw_only", &p.sw_only, tol::kSwLocalization, 2}, {"full", &p.full, tol::kFullLocalization, 5}};
  for (const auto& [name, spec, factor, task] : runs) {
    try {
      LocalizationRatio lr = localization_ratio(spec->f, spec->f_inverse, p.region, with_task(task));
      bool ok = lr.below(factor);
      loc.row({name, fmt(lr.ratio), fmt(lr.stderr_), fmt(factor), fmt(lr.inside.estimate), fmt(lr.inside.stderr_),
               fmt(lr.outside.estimate), fmt(lr.outside.stderr_), ok ? "1" : "0"});
      integral_row(est, name, lr.inside);
      integral_row(est, name, lr.outside);
      add(r, dir, {"localization." + name, 6, ok, fmt(lr.ratio) + " + " + fmt(lr.stderr_), "< " + fmt(factor)});
      dir.record_bound("localization." + name, fmt(lr.ratio));
    } catch (const NotResolved& e) {
      loc.row({name, "nan", "nan", fmt(factor), "", "", "", "", "0"});
      add(r, dir, {"localization." + name, 6, false, e.what(), "< " + fmt(factor)});
    }
  }
  dir.write("integrals/estimates.csv", est.str());
  dir.write("integrals/localization.csv", loc.str());
  dir.write_manifest();
  return r;
}

namespace {

void reach_rows(CsvTable& t, const std::string& map, const ReachRaster& rr) {
  const int d = rr.points.empty() ? 0 : rr.points.front().dim();
  for (int row = 0; row < rr.height; ++row)
    for (int col = 0; col < rr.width; ++col) {
      std::size_t i = static_cast<std::size_t>(row) * rr.width + col;
      double m = rr.magnitude[i], e = rr.error[i];
      bool sig = std::isfinite(m) && m > 3.0 * e;
      t.row({map, std::to_string(row), std::to_string(col), fmt(rr.points[i][d - 2]), fmt(rr.points[i][d - 1]), fmt(m),
             fmt(e), sig ? "1" : "0", std::to_string(rr.attempts[i])});
    }
}

}  // namespace

CommandResult cmd_access(const Context& ctx, RunDirectory& dir) {
  const RunConfig& c = ctx.config;
  Pipeline p = build_pipeline(c);
  const int d = p.region.dim;
  CommandResult r;
  ReferenceSplitting split = ReferenceSplitting::of(config_matrix(c), d);
  LeafOptions lo;
  lo.refinement = c.access_refinement;
  lo.depth = c.access_depth;
  const double a = 0.25 * c.eps, b = 0.75 * c.eps;

  ReachRaster full = accessibility_reach(p.full.f, p.full.f_inverse, split, a, b, c.access_grid, c.access_leg, lo,
                                         c.seed ^ kTaskAccess, ctx.threads);
  ReachRaster control = accessibility_reach(p.product.f, p.product.f_inverse, split, a, b, c.access_grid,
                                            c.access_leg, lo, c.seed ^ kTaskAccess, ctx.threads);
  double sig = full.significant_fraction(), zero = control.zero_fraction();
  add(r, dir, {"access.full.significant_fraction", 7, sig >= tol::kReachFraction, fmt(sig),
               ">= " + fmt(tol::kReachFraction)});
  add(r, dir, {"access.product.zero_fraction", 7, zero == 1.0, fmt(zero), "1"});
  dir.record_bound("access.failed_cells", std::to_string(full.failures.size()));

  CsvTable t({"map", "row", "col", "c1", "c2", "displacement", "error", "significant", "attempts"});
  reach_rows(t, "full", full);
  reach_rows(t, "product", control);
  dir.write("access/reach.csv", t.str());
  std::vector<double> logs(full.magnitude.size());
  std::transform(full.magnitude.begin(), full.magnitude.end(), logs.begin(),
                 [](double m) { return std::isfinite(m) ? std::log10(std::max(m, 1e-12)) : std::nan(""); });
  dir.write("access/reach.pgm", graymap_from_values(full.width, full.height, logs, -12.0, 0.0).encode(true));
  {
    std::string f;
    for (const auto& s : full.failures) f += s + "\n";
    dir.write("access/failures.txt", f);
  }

  // Extended class along an orbit through the first cell.
  std::vector<double> orbit = orbit_reach(p.full.f, p.full.f_inverse, split, full.points.front(), 16, c.access_leg, lo);
  CsvTable ot({"step", "displacement"});
  for (std::size_t k = 0; k < orbit.size(); ++k) ot.row({std::to_string(k), fmt(orbit[k])});
  dir.write("access/orbit.csv", ot.str());

  // Domination diagnostics on an iterate (reported, not gated).
  ConeField cones{split, 0.3, 0.3};
  CsvTable dt({"map", "n_steps", "expansion_u", "angle_u", "center_u", "expansion_s", "angle_s", "center_s",
               "invariant", "bunching_margin", "bunching_worst_ratio"});
  const std::pair<std::string, const PipelineSpec*> dom[] = {{"product", &p.product}, {"full", &p.full}};
  for (const auto& [name, spec] : dom) {
    ConeMargins m = verify_cone_invariance(spec->f, spec->f_inverse, cones, 200, tol::kDominationSteps, c.seed,
                                           ctx.threads);
    BunchingReport bu = bunching_check(spec->f, spec->f_inverse, split, 200, c.seed, c.central_anchor,
                                       tol::kDominationSteps, ctx.threads);
    dt.row({name, std::to_string(tol::kDominationSteps), fmt(m.expansion_u), fmt(m.angle_u), fmt(m.center_u),
            fmt(m.expansion_s), fmt(m.angle_s), fmt(m.center_s), m.invariant() ? "1" : "0", fmt(bu.margin),
            fmt(bu.worst_ratio)});
    dir.record_bound("domination." + name + ".bunching_margin", fmt(bu.margin));
  }
  dir.write("access/domination.csv", dt.str());
  dir.write_manifest();
  return r;
}

namespace {

constexpr std::uint64_t kTaskSurvey = 0x5000000000ULL;

/// Labels as gray levels: negative 0, zero 128, undecided 255.
Graymap label_map(const SurveyRaster& r) {
  Graymap g;
  g.width = g.height = r.width;
  for (const auto& cell : r.cells)
    g.pixels.push_back(cell.label == CentralLabel::NegativeCentral ? 0
                       : cell.label == CentralLabel::ZeroCentral  ? 128
                                                                   : 255);
  return g;
}

std::vector<TorusPoint> label_subset(const SurveyRaster& r, CentralLabel label, std::size_t cap) {
  std::vector<TorusPoint> out;
  for (const auto& cell : r.cells)
    if (cell.label == label && out.size() < cap) out.push_back(cell.point);
  return out;
}

}  // namespace

CommandResult cmd_survey(const Context& ctx, RunDirectory& dir) {
  const RunConfig& c = ctx.config;
  Pipeline p = build_pipeline(c);
  const int d = p.region.dim;
  CommandResult r;

  SurveyGrid grid{c.survey_center_grid, c.survey_base_grid, c.seed, kTaskSurvey};
  const Mat frame = ReferenceSplitting::of(config_matrix(c), d).ordered_frame();
  SurveyOptions opt{c.survey_n_time, c.central_anchor, ctx.threads, frame};
  std::vector<TorusPoint> pts = survey_points(d, grid);
  std::vector<CentralExponents> calibration = central_pairs(p.product.f, p.product.f_inverse, pts, opt);
  const double floor = noise_floor(calibration);
  const double threshold = c.survey_threshold_factor * std::max(floor, 1e-12);
  std::vector<CentralExponents> pairs = central_pairs(p.full.f, p.full.f_inverse, pts, opt);
  SurveyRaster raster = label_raster(pts, pairs, threshold, opt.n_time, opt.n_anchor, c.seed);
  dir.record_bound("survey.noise_floor", fmt(floor));
  dir.record_bound("survey.threshold", fmt(threshold));

  // 9(a): nonempty negative class containing every A^eps cell.
  long long a_cells = 0, a_negative = 0;
  for (const auto& cell : raster.cells)
    if (p.region.in_a_eps(cell.point)) {
      ++a_cells;
      if (cell.label == CentralLabel::NegativeCentral) ++a_negative;
    }
  add(r, dir, {"survey.negative_class_contains_a_eps", 9, raster.negative.count > 0 && a_negative == a_cells,
               fmt(raster.negative.count) + " negative cells, " + fmt(a_negative) + "/" + fmt(a_cells) +
                   " A^eps cells negative",
               "nonempty, all A^eps cells"});
  add(r, dir, {"survey.zero_central_measure", 9, raster.zero.upper >= 1.0 - c.eps,
               fmt(raster.zero.fraction) + " [" + fmt(raster.zero.lower) + ", " + fmt(raster.zero.upper) + "]",
               "upper99 >= " + fmt(1.0 - c.eps)});
  DensityReport density = density_audit(raster, p.full.f, c.density_delta, opt.n_time, ctx.threads);
  add(r, dir, {"survey.density", 9, density.fraction() >= tol::kDensityFraction, fmt(density.fraction()),
               ">= " + fmt(tol::kDensityFraction)});

  long long k_cells = 0, k_mismatch = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    TorusPoint center{pts[i][d - 2], pts[i][d - 1]};
    if (!p.k.contains(center)) continue;
    ++k_cells;
    if (std::bit_cast<std::uint64_t>(pairs[i].first) != std::bit_cast<std::uint64_t>(calibration[i].first) ||
        std::bit_cast<std::uint64_t>(pairs[i].second) != std::bit_cast<std::uint64_t>(calibration[i].second))
      ++k_mismatch;
  }
  add(r, dir, {"survey.k_cells_match_product", 0, k_mismatch == 0, fmt(k_mismatch) + "/" + fmt(k_cells), "0"});

  SignatureReport sig = k_spectrum_signature(p.full.f, p.k, c.lyapunov_samples, c.survey_n_time, floor, c.seed,
                                             ctx.threads, frame);
  add(r, dir, {"survey.k_spectrum_signature", 9, sig.passed == sig.samples,
               fmt(sig.passed) + "/" + fmt(sig.samples) + " max central " + fmt(sig.max_central),
               "all, tolerance " + fmt(floor)});
  add(r, dir, {"k.central_exponents_zero", 8, sig.max_central <= floor, fmt(sig.max_central), "<= " + fmt(floor)});

  MapExpr t = p.ak.map();
  KAuditReport audit = k_invariance_audit(t, p.k, p.k, c.audit_samples, c.audit_n_time, c.seed, ctx.threads);
  InvariantSetSpec shifted = p.k.shifted(0.5 * c.eps, 0.5 * c.eps);
  KAuditReport control = k_invariance_audit(t, shifted, p.k, c.audit_samples, c.audit_n_time, c.seed, ctx.threads);
  add(r, dir, {"k.invariance_audit", 8, audit.passed == audit.samples, fmt(audit.fraction()), "1"});
  add(r, dir, {"k.invariance_shifted_control", 8, control.fraction() < 1.0, fmt(control.fraction()), "< 1"});

  Proportion avoid_k = avoidance_statistics(t, c.avoidance_samples, c.avoidance_n, 0.0, c.eps, &p.k, c.seed,
                                            ctx.threads);
  Proportion avoid_u = avoidance_statistics(t, c.avoidance_samples, c.avoidance_n, 0.0, c.eps, nullptr, c.seed,
                                            ctx.threads);
  add(r, dir, {"avoidance.k_samples", 0, avoid_k.count == avoid_k.total, fmt(avoid_k.fraction), "1"});
  add(r, dir, {"avoidance.uniform", 0, avoid_u.upper >= 1.0 - c.eps, fmt(avoid_u.fraction),
               "upper99 >= " + fmt(1.0 - c.eps)});

  Dispersion disp_neg = birkhoff_dispersion(p.full.f, label_subset(raster, CentralLabel::NegativeCentral, 256),
                                            opt.n_time, ctx.threads);
  Dispersion disp_zero = birkhoff_dispersion(p.full.f, label_subset(raster, CentralLabel::ZeroCentral, 256),
                                             opt.n_time, ctx.threads);

  {
    std::vector<std::string> head = {"row", "col"};
    for (auto& h : coord_header("x", d)) head.push_back(h);
    for (std::string h : {"first", "second", "splitting", "label", "product_first", "product_second"}) head.push_back(h);
    CsvTable cells(head);
    for (int row = 0; row < raster.width; ++row)
      for (int col = 0; col < raster.width; ++col) {
        std::size_t i = static_cast<std::size_t>(row) * raster.width + col;
        const SurveyCell& cell = raster.cells[i];
        std::vector<std::string> line = {std::to_string(row), std::to_string(col)};
        for (int k = 0; k < d; ++k) line.push_back(fmt(cell.point[k]));
        line.push_back(fmt(cell.first));
        line.push_back(fmt(cell.second));
        line.push_back(cell.used_splitting ? "1" : "0");
        line.push_back(label_name(cell.label));
        line.push_back(fmt(calibration[i].first));
        line.push_back(fmt(calibration[i].second));
        cells.row(line);
      }
    dir.write("survey/cells.csv", cells.str());
  }
  {
    CsvTable sum({"class", "count", "total", "fraction", "lower99", "upper99"});
    const std::pair<std::string, const Proportion*> cls[] = {
        {"negative-central", &raster.negative}, {"zero-central", &raster.zero}, {"undecided", &raster.undecided}};
    for (const auto& [name, pr] : cls)
      sum.row({name, fmt(pr->count), fmt(pr->total), fmt(pr->fraction), fmt(pr->lower), fmt(pr->upper)});
    dir.write("survey/summary.csv", sum.str());

    CsvTable meta({"key", "value"});
    meta.row({"n_time", std::to_string(opt.n_time)});
    meta.row({"n_anchor", std::to_string(opt.n_anchor)});
    meta.row({"noise_floor", fmt(floor)});
    meta.row({"threshold", fmt(threshold)});
    meta.row({"seed", std::to_string(c.seed)});
    meta.row({"center_grid", std::to_string(grid.center_grid)});
    meta.row({"base_grid", std::to_string(grid.base_grid)});
    dir.write("survey/metadata.csv", meta.str());
  }
  dir.write("survey/labels.pgm", label_map(raster).encode(true));
  {
    std::vector<double> upper(raster.cells.size());
    std::transform(raster.cells.begin(), raster.cells.end(), upper.begin(),
                   [](const SurveyCell& cell) { return std::max(cell.first, cell.second); });
    dir.write("survey/upper_central.pgm",
              graymap_from_values(raster.width, raster.width, upper, -2.0 * threshold, 2.0 * threshold).encode(true));
  }
  {
    CsvTable dt({"ball_c1", "ball_c2", "passed"});
    std::vector<std::pair<double, double>> failed = density.failures;
    std::sort(failed.begin(), failed.end());
    const int m = static_cast<int>(std::ceil(1.0 / c.density_delta - 1e-12));
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        std::pair<double, double> ctr{(a + 0.5) / m, (b + 0.5) / m};
        bool ok = !std::binary_search(failed.begin(), failed.end(), ctr);
        dt.row({fmt(ctr.first), fmt(ctr.second), ok ? "1" : "0"});
      }
    dir.write("survey/density.csv", dt.str());
    dir.record_bound("survey.density_passed_by_entry", std::to_string(density.passed_by_entry));
  }
  {
    CsvTable kt({"audit", "samples", "passed", "n_time", "fraction"});
    kt.row({"k", fmt(audit.samples), fmt(audit.passed), std::to_string(audit.n_time), fmt(audit.fraction())});
    kt.row({"k_shifted", fmt(control.samples), fmt(control.passed), std::to_string(control.n_time),
            fmt(control.fraction())});
    dir.write("survey/k_audit.csv", kt.str());
    CsvTable at({"samples_from", "n", "count", "total", "fraction", "lower99", "upper99"});
    at.row({"k", std::to_string(c.avoidance_n), fmt(avoid_k.count), fmt(avoid_k.total), fmt(avoid_k.fraction),
            fmt(avoid_k.lower), fmt(avoid_k.upper)});
    at.row({"uniform", std::to_string(c.avoidance_n), fmt(avoid_u.count), fmt(avoid_u.total), fmt(avoid_u.fraction),
            fmt(avoid_u.lower), fmt(avoid_u.upper)});
    dir.write("survey/avoidance.csv", at.str());
  }
  {
    std::vector<std::string> head = {"sample"};
    for (auto& h : coord_header("l", d)) head.push_back(h);
    head.push_back("sum");
    CsvTable st(head);
    for (std::size_t i = 0; i < sig.spectra.size(); ++i) {
      std::vector<std::string> line = {std::to_string(i)};
      for (int k = 0; k < d; ++k) line.push_back(fmt(sig.spectra[i][k]));
      line.push_back(fmt(sig.spectra[i].sum()));
      st.row(line);
    }
    dir.write("survey/k_signature.csv", st.str());
    CsvTable bt({"class", "samples", "mean", "stddev"});
    bt.row({"negative-central", fmt(disp_neg.samples), fmt(disp_neg.mean), fmt(disp_neg.stddev)});
    bt.row({"zero-central", fmt(disp_zero.samples), fmt(disp_zero.mean), fmt(disp_zero.stddev)});
    dir.write("survey/birkhoff.csv", bt.str());
  }
  dir.write_manifest();
  return r;
}

std::vector<std::string> compare_trees(const std::string& a, const std::string& b) {
  auto listed = [](const std::string& root) { return RunDirectory::listed_files(root); };
  auto read = [](const fs::path& path) { return read_file(path.string()); };
  std::vector<std::string> out;
  auto fa = listed(a), fb = listed(b);
  if (fa.empty() || fb.empty()) out.push_back("manifest missing or empty");
  for (const auto& [rel, sum] : fa) {
    if (rel.rfind("check/", 0) == 0) continue;
    if (!fb.count(rel)) {
      out.push_back("only in first tree: " + rel);
      continue;
    }
    if (read(fs::path(a) / rel) != read(fs::path(b) / rel)) out.push_back("differs: " + rel);
  }
  for (const auto& [rel, sum] : fb)
    if (rel.rfind("check/", 0) != 0 && !fa.count(rel)) out.push_back("only in second tree: " + rel);
  return out;
}

namespace {

const char* const kTitles[] = {"",
                               "volume preservation",
                               "spectrum oracle",
                               "zero-sum conservation",
                               "support contracts",
                               "negative integrated central exponent",
                               "localization ratios",
                               "accessibility evidence",
                               "elliptic set",
                               "exponent signature",
                               "determinism"};

std::vector<Check> run_all(const Context& ctx, RunDirectory& dir) {
  std::vector<Check> all;
  for (auto* cmd : {&cmd_build, &cmd_lyapunov, &cmd_integrals, &cmd_access, &cmd_survey}) {
    CommandResult r = (*cmd)(ctx, dir);
    all.insert(all.end(), r.checks.begin(), r.checks.end());
  }
  return all;
}

}  // namespace

std::vector<CriterionResult> cmd_check(const Context& ctx, RunDirectory& dir) {
  std::vector<Check> checks = run_all(ctx, dir);

  fs::path scratch = fs::path(dir.root()).lexically_normal();
  scratch = scratch.parent_path() / (scratch.filename().string() + ".rerun");
  fs::remove_all(scratch);
  std::vector<std::string> diffs;
  {
    RunDirectory again(scratch.string(), config_hash(ctx.config), serialize_config(ctx.config));
    run_all(ctx, again);
    diffs = compare_trees(dir.root(), scratch.string());
  }
  fs::remove_all(scratch);

  std::vector<CriterionResult> out;
  for (int id = 1; id <= 10; ++id) {
    CriterionResult cr{id, kTitles[id], true, ""};
    if (id == 10) {
      cr.passed = diffs.empty();
      cr.detail = diffs.empty() ? "rerun byte-identical" : diffs.front();
    } else {
      int n = 0;
      for (const auto& ch : checks) {
        if (ch.criterion != id) continue;
        ++n;
        cr.passed = cr.passed && ch.passed;
        if (!cr.detail.empty()) cr.detail += "; ";
        cr.detail += ch.name + (ch.passed ? " ok " : " FAIL ") + ch.value;
      }
      if (n == 0) {
        cr.passed = false;
        cr.detail = "no checks";
      }
    }
    dir.record_check("criterion." + std::to_string(id), cr.passed, cr.detail);
    out.push_back(cr);
  }
  CsvTable t({"criterion", "title", "passed", "detail"});
  for (const auto& cr : out) t.row({std::to_string(cr.id), cr.title, cr.passed ? "1" : "0", cr.detail});
  dir.write("check/acceptance.csv", t.str());
  dir.write_manifest();
  return out;
}

}  // namespace nuhlab::cli
