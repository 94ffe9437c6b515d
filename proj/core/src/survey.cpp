#include "nuhlab/survey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "nuhlab/parallel.hpp"
#include "nuhlab/rng.hpp"

namespace nuhlab {

std::string label_name(CentralLabel label) {
  switch (label) {
    case CentralLabel::NegativeCentral:
      return "negative-central";
    case CentralLabel::ZeroCentral:
      return "zero-central";
    case CentralLabel::Undecided:
      break;
  }
  return "undecided";
}

CentralLabel classify_pair(double first, double second, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("classify_pair: threshold must be positive");
  if (first < -threshold && second < -threshold) return CentralLabel::NegativeCentral;
  double half = 0.5 * threshold;
  if (std::abs(first) < half && std::abs(second) < half) return CentralLabel::ZeroCentral;
  return CentralLabel::Undecided;
}

Proportion wilson_interval(long long count, long long total, double z) {
  Proportion p;
  p.count = count;
  p.total = total;
  if (total <= 0) return p;
  double n = static_cast<double>(total), phat = count / n, z2 = z * z;
  double denom = 1.0 + z2 / n;
  double mid = (phat + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  p.fraction = phat;
  p.lower = std::max(0.0, mid - half);
  p.upper = std::min(1.0, mid + half);
  return p;
}

std::vector<TorusPoint> survey_points(int dim, const SurveyGrid& grid) {
  if (grid.center_grid < 1 || grid.base_grid < 1) throw std::invalid_argument("survey_points: grids must be positive");
  const int w = grid.center_grid;
  std::vector<TorusPoint> out;
  out.reserve(static_cast<std::size_t>(w) * w);
  for (int row = 0; row < w; ++row)
    for (int col = 0; col < w; ++col) {
      Stream rng(grid.seed, grid.task + static_cast<std::uint64_t>(row) * w + col);
      Vec v(dim);
      for (int k = 0; k < dim - 2; ++k) {
        int idx = std::min(grid.base_grid - 1, static_cast<int>(rng.uniform() * grid.base_grid));
        v[k] = (idx + 0.5) / grid.base_grid;
      }
      v[dim - 2] = (col + 0.5) / w;
      v[dim - 1] = 1.0 - (row + 0.5) / w;
      out.emplace_back(v);
    }
  return out;
}

std::size_t SurveyRaster::cell_of(const TorusPoint& x) const {
  int d = x.dim();
  int col = std::min(width - 1, static_cast<int>(x[d - 2] * width));
  int row = std::min(width - 1, static_cast<int>((1.0 - x[d - 1]) * width));
  return static_cast<std::size_t>(row) * width + col;
}

std::vector<CentralExponents> central_pairs(const MapExpr& f, const MapExpr& f_inverse,
                                            const std::vector<TorusPoint>& points, const SurveyOptions& options) {
  std::vector<CentralExponents> out(points.size());
  const CenterLayout layout{f.dim(), f.dim() - 2};
  parallel_for(points.size(), options.threads, [&](std::size_t i) {
    try {
      out[i] = central_exponents(f, f_inverse, points[i], options.n_time, options.n_anchor, layout);
    } catch (const SplittingNotResolved&) {
      out[i] = middle_exponents(benettin_spectrum(f, points[i], options.n_time, 1, 0, options.frame));
    }
  });
  return out;
}

double noise_floor(const std::vector<CentralExponents>& pairs) {
  double m = 0.0;
  for (const auto& p : pairs) m = std::max({m, std::abs(p.first), std::abs(p.second)});
  return m;
}

SurveyRaster label_raster(const std::vector<TorusPoint>& points, const std::vector<CentralExponents>& pairs,
                          double threshold, int n_time, int n_anchor, std::uint64_t seed) {
  if (points.size() != pairs.size()) throw std::invalid_argument("label_raster: size mismatch");
  int w = static_cast<int>(std::lround(std::sqrt(static_cast<double>(points.size()))));
  if (static_cast<std::size_t>(w) * w != points.size()) throw std::invalid_argument("label_raster: raster must be square");
  SurveyRaster r;
  r.width = w;
  r.n_time = n_time;
  r.n_anchor = n_anchor;
  r.threshold = threshold;
  r.seed = seed;
  long long counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    SurveyCell c{points[i], pairs[i].first, pairs[i].second, pairs[i].used_splitting,
                 classify_pair(pairs[i].first, pairs[i].second, threshold)};
    ++counts[static_cast<int>(c.label)];
    r.cells.push_back(c);
  }
  auto n = static_cast<long long>(points.size());
  r.negative = wilson_interval(counts[0], n);
  r.zero = wilson_interval(counts[1], n);
  r.undecided = wilson_interval(counts[2], n);
  return r;
}

SurveyRaster classify_phase_space(const MapExpr& f, const MapExpr& f_inverse, const std::vector<TorusPoint>& points,
                                  double threshold, const SurveyOptions& options, std::uint64_t seed) {
  return label_raster(points, central_pairs(f, f_inverse, points, options), threshold, options.n_time,
                      options.n_anchor, seed);
}

KAuditReport k_invariance_audit(const MapExpr& t, const InvariantSetSpec& k, const InvariantSetSpec& sample_from,
                                long long n_samples, int n_time, std::uint64_t seed, int threads, double tolerance) {
  if (t.dim() != 2) throw std::invalid_argument("k_invariance_audit: T must act on T^2");
  std::vector<char> ok(static_cast<std::size_t>(n_samples), 0);
  parallel_for(ok.size(), threads, [&](std::size_t i) {
    Stream rng(seed, 0x6000000000ULL + i);
    double u1 = rng.uniform(), u2 = rng.uniform();
    TorusPoint x = sample_from.sample(u1, u2);
    if (!k.contains(x, tolerance)) return;
    for (int s = 0; s < n_time; ++s) {
      x = t.eval(x);
      if (!k.contains(x, tolerance)) return;
    }
    ok[i] = 1;
  });
  KAuditReport r;
  r.samples = n_samples;
  r.n_time = n_time;
  r.passed = std::count(ok.begin(), ok.end(), 1);
  return r;
}

DensityReport density_audit(const SurveyRaster& raster, const MapExpr& f, double delta, int n_entry, int threads) {
  if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("density_audit: delta must lie in (0, 1/2]");
  const std::size_t cells = raster.cells.size();
  const int d = f.dim();
  auto center_of = [&](std::size_t i) {
    const TorusPoint& p = raster.cells[i].point;
    return std::pair<double, double>{p[d - 2], p[d - 1]};
  };
  const int m = static_cast<int>(std::ceil(1.0 / delta - 1e-12));
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(m) * m);
  std::vector<std::pair<double, double>> centers(members.size());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      std::size_t ball = static_cast<std::size_t>(a) * m + b;
      centers[ball] = {(a + 0.5) / m, (b + 0.5) / m};
      for (std::size_t i = 0; i < cells; ++i) {
        auto [x, y] = center_of(i);
        double dx = wrap_signed(x - centers[ball].first), dy = wrap_signed(y - centers[ball].second);
        if (dx * dx + dy * dy <= delta * delta) members[ball].push_back(i);
      }
    }
  auto negative = [&](std::size_t i) { return raster.cells[i].label == CentralLabel::NegativeCentral; };

  std::vector<char> has_negative(members.size(), 0);
  std::vector<char> need_entry(cells, 0);
  for (std::size_t ball = 0; ball < members.size(); ++ball) {
    has_negative[ball] = std::any_of(members[ball].begin(), members[ball].end(), negative);
    if (!has_negative[ball])
      for (std::size_t i : members[ball]) need_entry[i] = 1;
  }
  std::vector<char> enters(cells, 0);
  parallel_for(cells, threads, [&](std::size_t i) {
    if (!need_entry[i]) return;
    TorusPoint x = raster.cells[i].point;
    for (int s = 0; s < n_entry; ++s) {
      x = f.eval(x);
      if (negative(raster.cell_of(x))) {
        enters[i] = 1;
        return;
      }
    }
  });

  DensityReport r;
  r.delta = delta;
  r.balls = static_cast<int>(members.size());
  for (std::size_t ball = 0; ball < members.size(); ++ball) {
    bool by_entry = !has_negative[ball] && std::any_of(members[ball].begin(), members[ball].end(),
                                                       [&](std::size_t i) { return enters[i] != 0; });
    if (has_negative[ball] || by_entry) {
      ++r.passed;
      if (by_entry) ++r.passed_by_entry;
    } else {
      r.failures.push_back(centers[ball]);
    }
  }
  return r;
}

Proportion avoidance_statistics(const MapExpr& t, long long n_samples, int n, double lo, double hi,
                                const InvariantSetSpec* k, std::uint64_t seed, int threads) {
  if (n < 1) throw std::invalid_argument("avoidance_statistics: N must be at least 1");
  if (t.dim() != 2) throw std::invalid_argument("avoidance_statistics: T must act on T^2");
  std::vector<char> avoided(static_cast<std::size_t>(n_samples), 0);
  auto inside = [&](const TorusPoint& x) { return x[0] >= lo && x[0] < hi && x[1] >= lo && x[1] < hi; };
  parallel_for(avoided.size(), threads, [&](std::size_t i) {
    Stream rng(seed, 0x7000000000ULL + i);
    double u1 = rng.uniform(), u2 = rng.uniform();
    TorusPoint x = k ? k->sample(u1, u2) : TorusPoint{u1, u2};
    if (inside(x)) return;
    for (int s = 0; s < n; ++s) {
      x = t.eval(x);
      if (inside(x)) return;
    }
    avoided[i] = 1;
  });
  return wilson_interval(std::count(avoided.begin(), avoided.end(), 1), n_samples);
}

Dispersion birkhoff_dispersion(const MapExpr& f, const std::vector<TorusPoint>& points, int n, int threads) {
  if (n < 1) throw std::invalid_argument("birkhoff_dispersion: n must be at least 1");
  const int d = f.dim();
  std::vector<double> avg(points.size(), 0.0);
  parallel_for(points.size(), threads, [&](std::size_t i) {
    TorusPoint x = points[i];
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      s += std::cos(2.0 * std::numbers::pi * x[d - 2]) + std::cos(2.0 * std::numbers::pi * x[d - 1]);
      x = f.eval(x);
    }
    avg[i] = s / n;
  });
  Dispersion out;
  out.samples = static_cast<long long>(points.size());
  if (points.empty()) return out;
  for (double a : avg) out.mean += a;
  out.mean /= static_cast<double>(avg.size());
  double ss = 0.0;
  for (double a : avg) ss += (a - out.mean) * (a - out.mean);
  out.stddev = avg.size() > 1 ? std::sqrt(ss / static_cast<double>(avg.size() - 1)) : 0.0;
  return out;
}

SignatureReport k_spectrum_signature(const MapExpr& f, const InvariantSetSpec& k, long long n_samples, int n_time,
                                     double tolerance, std::uint64_t seed, int threads, const Mat& frame) {
  const int d = f.dim(), pairs = (d - 2) / 2;
  SignatureReport r;
  r.samples = n_samples;
  r.tolerance = tolerance;
  r.spectra.resize(static_cast<std::size_t>(n_samples));
  parallel_for(r.spectra.size(), threads, [&](std::size_t i) {
    Stream rng(seed, 0x8000000000ULL + i);
    Vec v(d);
    for (int j = 0; j < d - 2; ++j) v[j] = rng.uniform();
    double u1 = rng.uniform(), u2 = rng.uniform();
    TorusPoint c = k.sample(u1, u2);
    v[d - 2] = c[0];
    v[d - 1] = c[1];
    r.spectra[i] = benettin_spectrum(f, TorusPoint(v), n_time, 1, 0, frame).exponents;
  });
  r.min_hyperbolic = std::numeric_limits<double>::infinity();
  for (const Vec& e : r.spectra) {
    bool ok = true;
    for (int j = 0; j < pairs; ++j) {
      ok = ok && e[j] > tolerance && e[d - 1 - j] < -tolerance;
      r.min_hyperbolic = std::min({r.min_hyperbolic, std::abs(e[j]), std::abs(e[d - 1 - j])});
    }
    for (int j = pairs; j < pairs + 2; ++j) {
      ok = ok && std::abs(e[j]) <= tolerance;
      r.max_central = std::max(r.max_central, std::abs(e[j]));
    }
    if (ok) ++r.passed;
  }
  return r;
}

}  // namespace nuhlab
