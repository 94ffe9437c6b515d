#include <gtest/gtest.h>

#include <cmath>

#include "nuhlab/hyperbolicity.hpp"
#include "nuhlab/pipeline.hpp"
#include "nuhlab/rng.hpp"
#include "nuhlab/survey.hpp"

using namespace nuhlab;

TEST(Classify, Table) {
  EXPECT_EQ(classify_pair(-0.01, -0.02, 0.005), CentralLabel::NegativeCentral);
  EXPECT_EQ(classify_pair(0.001, -0.002, 0.005), CentralLabel::ZeroCentral);
  EXPECT_EQ(classify_pair(0.004, -0.004, 0.005), CentralLabel::Undecided);
  EXPECT_EQ(classify_pair(0.004, -0.01, 0.005), CentralLabel::Undecided);
  EXPECT_EQ(label_name(CentralLabel::ZeroCentral), "zero-central");
}

// Reference values from an independent statistics package.
TEST(Wilson, MatchesReference) {
  Proportion a = wilson_interval(8007, 10000);
  EXPECT_NEAR(a.lower, 0.7902123313118488, 1e-12);
  EXPECT_NEAR(a.upper, 0.8107889105784485, 1e-12);
  Proportion b = wilson_interval(0, 4096);
  EXPECT_NEAR(b.lower, 0.0, 1e-15);
  EXPECT_NEAR(b.upper, 0.0016172281395349457, 1e-12);
  Proportion c = wilson_interval(3600, 4096);
  EXPECT_NEAR(c.lower, 0.8651596541811075, 1e-12);
  EXPECT_NEAR(c.upper, 0.8914272901194011, 1e-12);
}

TEST(Grid, PointsLayout) {
  SurveyGrid g;
  g.center_grid = 8;
  g.base_grid = 4;
  std::vector<TorusPoint> pts = survey_points(4, g);
  ASSERT_EQ(pts.size(), 64u);
  EXPECT_DOUBLE_EQ(pts[0][2], 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(pts[0][3], 15.0 / 16.0);
  EXPECT_DOUBLE_EQ(pts[9][2], 3.0 / 16.0);
  EXPECT_DOUBLE_EQ(pts[9][3], 13.0 / 16.0);
  for (const TorusPoint& x : pts)
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::fmod(x[i] * 4.0, 1.0), 0.5, 1e-12);
  EXPECT_EQ(survey_points(4, g)[17].coords(), pts[17].coords());
}

namespace {

MapExpr a_times_id() {
  IntMat m = IntMat::Identity(4, 4);
  m.topLeftCorner(2, 2) << 5, 3, 3, 2;
  return MapExpr::linear(m);
}

}  // namespace

TEST(Survey, LinearProductIsZeroCentralEverywhere) {
  MapExpr f = a_times_id();
  SurveyGrid g;
  g.center_grid = 6;
  std::vector<TorusPoint> pts = survey_points(4, g);
  SurveyOptions o;
  o.n_time = 500;
  SurveyRaster r = classify_phase_space(f, f.inverse(), pts, 1e-3, o, 1);
  EXPECT_EQ(r.zero.count, 36);
  EXPECT_EQ(r.negative.count + r.undecided.count, 0);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(r.cell_of(pts[i]), i);

  DensityReport d = density_audit(r, f, 0.25, 20);
  EXPECT_EQ(d.passed, 0);
  EXPECT_EQ(d.balls, 16);
}

// Property: label counts partition the raster.
TEST(Survey, LabelCountsPartition) {
  SurveyGrid g;
  g.center_grid = 5;
  std::vector<TorusPoint> pts = survey_points(4, g);
  std::vector<CentralExponents> pairs;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double v = (static_cast<double>(i) - 12.0) * 1e-3;
    pairs.push_back({v, v - 1e-3});
  }
  for (double threshold : {1e-4, 2e-3, 5e-2}) {
    SurveyRaster r = label_raster(pts, pairs, threshold, 10, 24, 1);
    EXPECT_EQ(r.negative.count + r.zero.count + r.undecided.count, 25);
    EXPECT_EQ(r.zero.total, 25);
  }
}

TEST(Survey, KCellsMatchTheProduct) {
  Pipeline p = build_pipeline(RunConfig{});
  std::vector<TorusPoint> pts;
  Stream rng(5, 0);
  for (int i = 0; i < 12; ++i) {
    Vec v(4);
    v << rng.uniform(), rng.uniform(), 0, 0;
    double u1 = rng.uniform(), u2 = rng.uniform();
    TorusPoint c = p.k.sample(u1, u2);
    v[2] = c[0];
    v[3] = c[1];
    pts.emplace_back(v);
  }
  SurveyOptions o;
  o.n_time = 300;
  std::vector<CentralExponents> full = central_pairs(p.full.f, p.full.f_inverse, pts, o);
  std::vector<CentralExponents> prod = central_pairs(p.product.f, p.product.f_inverse, pts, o);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(full[i].first, prod[i].first, 1e-9);
    EXPECT_NEAR(full[i].second, prod[i].second, 1e-9);
  }
}

TEST(Dispersion, IdentityOrbitAverages) {
  std::vector<TorusPoint> pts = {TorusPoint{0.1, 0.2, 0.0, 0.0}, TorusPoint{0.1, 0.2, 0.25, 0.5}};
  Dispersion d = birkhoff_dispersion(MapExpr::identity(4), pts, 50);
  EXPECT_EQ(d.samples, 2);
  EXPECT_NEAR(d.mean, 0.5, 1e-12);
  EXPECT_NEAR(d.stddev, std::sqrt(4.5), 1e-12);
}
