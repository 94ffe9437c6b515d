#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nuhlab/anosov_katok.hpp"
#include "nuhlab/lyapunov.hpp"
#include "nuhlab/map_expr.hpp"

namespace nuhlab {

enum class CentralLabel { NegativeCentral = 0, ZeroCentral = 1, Undecided = 2 };
std::string label_name(CentralLabel label);

/// Both < -threshold: negative; both inside (-threshold/2, threshold/2): zero; else undecided.
CentralLabel classify_pair(double first, double second, double threshold);

/// Binomial proportion with a Wilson score interval.
struct Proportion {
  long long count = 0;
  long long total = 0;
  double fraction = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
Proportion wilson_interval(long long count, long long total, double z = 2.5758293035489);

struct SurveyGrid {
  int center_grid = 64;  // cells per center coordinate
  int base_grid = 16;    // base coordinates snap to this grid
  std::uint64_t seed = 1;
  std::uint64_t task = 0x5000000000ULL;
};

/// Cell i = row * center_grid + col has center coordinates at the cell center
/// (row 0 on top, second center coordinate decreasing down the rows) and base
/// coordinates on base-grid centers chosen by Philox substream (seed, task + i).
std::vector<TorusPoint> survey_points(int dim, const SurveyGrid& grid);

struct SurveyCell {
  TorusPoint point;
  double first = 0.0;
  double second = 0.0;
  bool used_splitting = true;
  CentralLabel label = CentralLabel::Undecided;
};

struct SurveyRaster {
  int width = 0;   // = height
  int n_time = 0;
  int n_anchor = 0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::vector<SurveyCell> cells;
  Proportion negative, zero, undecided;

  const SurveyCell& at(int row, int col) const { return cells[static_cast<std::size_t>(row) * width + col]; }
  /// Raster cell whose center box contains the center coordinates of x.
  std::size_t cell_of(const TorusPoint& x) const;
};

struct SurveyOptions {
  int n_time = 10000;
  int n_anchor = 24;
  int threads = 1;
  Mat frame;  // Benettin starting frame for the fallback (empty: identity)
};

/// Central exponent pair at each point: the splitting estimator, with the
/// middle pair of the full spectrum as fallback where the splitting is not resolved.
std::vector<CentralExponents> central_pairs(const MapExpr& f, const MapExpr& f_inverse,
                                            const std::vector<TorusPoint>& points, const SurveyOptions& options);

/// max over points of max(|first|, |second|).
double noise_floor(const std::vector<CentralExponents>& pairs);

SurveyRaster classify_phase_space(const MapExpr& f, const MapExpr& f_inverse, const std::vector<TorusPoint>& points,
                                  double threshold, const SurveyOptions& options, std::uint64_t seed = 0);
/// Labels precomputed pairs (same layout as survey_points).
SurveyRaster label_raster(const std::vector<TorusPoint>& points, const std::vector<CentralExponents>& pairs,
                          double threshold, int n_time, int n_anchor, std::uint64_t seed);

struct KAuditReport {
  long long samples = 0;
  long long passed = 0;
  int n_time = 0;
  double fraction() const { return samples ? static_cast<double>(passed) / samples : 0.0; }
};

/// Fraction of sampled K-points (drawn from `sample_from`) whose length-n_time
/// T-orbit stays in `k` within the box tolerance. Passing a shifted copy as `k`
/// while sampling from the original is the negative control.
KAuditReport k_invariance_audit(const MapExpr& t, const InvariantSetSpec& k, const InvariantSetSpec& sample_from,
                                long long n_samples, int n_time, std::uint64_t seed, int threads = 1,
                                double tolerance = 1e-9);

struct DensityReport {
  double delta = 0.0;
  int balls = 0;
  int passed = 0;
  int passed_by_entry = 0;  // balls with no negative cell that passed through an orbit entry
  std::vector<std::pair<double, double>> failures;  // ball centers (center coordinates)
  double fraction() const { return balls ? static_cast<double>(passed) / balls : 0.0; }
};

/// Balls of radius delta centered on the delta-grid of the center torus. A ball
/// passes if it holds a negative-central cell, or a cell whose f-orbit of
/// length n_entry lands in a negative-central cell.
DensityReport density_audit(const SurveyRaster& raster, const MapExpr& f, double delta, int n_entry, int threads = 1);

/// Fraction of sampled points whose length-n T-orbit never enters the box
/// [lo, hi]^2 (half-open). With k given, samples are drawn from k, otherwise uniformly.
Proportion avoidance_statistics(const MapExpr& t, long long n_samples, int n, double lo, double hi,
                                const InvariantSetSpec* k, std::uint64_t seed, int threads = 1);

struct Dispersion {
  long long samples = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Birkhoff averages of cos(2 pi x_c1) + cos(2 pi x_c2) over length-n orbits,
/// summarized across the given points.
Dispersion birkhoff_dispersion(const MapExpr& f, const std::vector<TorusPoint>& points, int n, int threads = 1);

struct SignatureReport {
  long long samples = 0;
  long long passed = 0;
  double tolerance = 0.0;
  double max_central = 0.0;      // max |central exponent| over samples
  double min_hyperbolic = 0.0;   // min |hyperbolic exponent| over samples
  std::vector<Vec> spectra;      // descending, one per sample
};

/// Full Benettin spectrum at points with base uniform and center drawn from K.
/// A sample passes when its k = (dim - 2) / 2 largest exponents exceed
/// `tolerance`, the k smallest are below -tolerance, and the middle pair lies
/// within `tolerance` of 0.
SignatureReport k_spectrum_signature(const MapExpr& f, const InvariantSetSpec& k, long long n_samples, int n_time,
                                     double tolerance, std::uint64_t seed, int threads = 1,
                                     const Mat& frame = Mat());

}  // namespace nuhlab
