#include <gtest/gtest.h>

#include <cmath>

#include "nuhlab/hyperbolicity.hpp"
#include "nuhlab/lyapunov.hpp"
#include "nuhlab/pipeline.hpp"
#include "nuhlab/rng.hpp"

using namespace nuhlab;

namespace {

// log of the golden ratio squared, the expanding eigenvalue of [[2,1],[1,1]].
const double kCat = std::log((3.0 + std::sqrt(5.0)) / 2.0);
// log of the expanding eigenvalue of [[5,3],[3,2]].
const double kA = std::log((7.0 + std::sqrt(45.0)) / 2.0);

MapExpr a_times_id() {
  IntMat m = IntMat::Identity(4, 4);
  m(0, 0) = 5;
  m(0, 1) = 3;
  m(1, 0) = 3;
  m(1, 1) = 2;
  return MapExpr::linear(m);
}

}  // namespace

TEST(Orthonormalize, QTimesRReproducesFrame) {
  Mat m(3, 3);
  m << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  Mat q = m;
  Vec r = orthonormalize(q);
  EXPECT_LT((q.transpose() * q - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(std::abs(r.prod()), std::abs(m.determinant()), 1e-12);
}

TEST(Benettin, CatMapOracle) {
  MapExpr cat = MapExpr::linear({{2, 1}, {1, 1}});
  LyapunovEstimate e = benettin_spectrum(cat, TorusPoint{0.3, 0.7}, 10000);
  EXPECT_NEAR(e.exponents[0], kCat, 1e-3);
  EXPECT_NEAR(e.exponents[1], -kCat, 1e-3);
}

TEST(Benettin, ProductWithIdentityHasExactZeros) {
  MapExpr f = a_times_id();
  Mat ordered = ReferenceSplitting::of(f.matrix().topLeftCorner(2, 2), 4).ordered_frame();
  for (const Mat& frame : {Mat(), ordered}) {
    LyapunovEstimate e = benettin_spectrum(f, TorusPoint{0.1, 0.2, 0.3, 0.4}, 10000, 1, 0, frame);
    EXPECT_NEAR(e.exponents[0], kA, 1e-3);
    EXPECT_EQ(e.exponents[1], 0.0);
    EXPECT_EQ(e.exponents[2], 0.0);
    EXPECT_NEAR(e.exponents[3], -kA, 1e-3);
  }
}

TEST(Benettin, CheckpointsRecorded) {
  LyapunovEstimate e = benettin_spectrum(a_times_id(), TorusPoint{0.1, 0.2, 0.3, 0.4}, 1000, 1, 100);
  ASSERT_EQ(e.checkpoints.size(), 10u);
  EXPECT_EQ(e.checkpoints.back().first, 1000);
}

TEST(Benettin, RejectsBadArguments) {
  EXPECT_THROW(benettin_spectrum(a_times_id(), TorusPoint{0.1, 0.2, 0.3, 0.4}, 5, 10), std::invalid_argument);
  EXPECT_THROW(benettin_spectrum(a_times_id(), TorusPoint{0.1, 0.2}, 5), DimensionError);
}

// Property: volume preservation forces every spectrum to sum to zero.
TEST(Benettin, SpectraOfThePipelineSumToZero) {
  Pipeline p = build_pipeline(RunConfig{});
  Mat frame = ReferenceSplitting::of(config_matrix(p.config), 4).ordered_frame();
  Stream rng(11, 0);
  for (int i = 0; i < 8; ++i) {
    Vec v(4);
    for (int k = 0; k < 4; ++k) v[k] = rng.uniform();
    if (i < 4) v.tail(2) << 0.05 + 0.1 * rng.uniform(), 0.05 + 0.1 * rng.uniform();
    LyapunovEstimate e = benettin_spectrum(p.full.f, TorusPoint(v), 3000, 1, 0, frame);
    EXPECT_LT(std::abs(e.sum()), 1e-6);
  }
}

TEST(CentralExponents, ZeroForProductWithIdentity) {
  MapExpr f = a_times_id();
  CentralExponents c = central_exponents(f, f.inverse(), TorusPoint{0.3, 0.1, 0.5, 0.5}, 2000);
  EXPECT_LT(std::abs(c.first), 1e-12);
  EXPECT_LT(std::abs(c.second), 1e-12);
}

// The splitting estimator and the middle pair of the sorted spectrum estimate
// the same numbers.
TEST(CentralExponents, AgreesWithMiddlePair) {
  Pipeline p = build_pipeline(RunConfig{});
  Mat frame = ReferenceSplitting::of(config_matrix(p.config), 4).ordered_frame();
  TorusPoint x{0.3, 0.7, 0.1, 0.1};
  CentralExponents c = central_exponents(p.full.f, p.full.f_inverse, x, 10000, 24, p.region.layout());
  CentralExponents m = middle_exponents(benettin_spectrum(p.full.f, x, 10000, 1, 0, frame));
  EXPECT_NEAR(c.first, m.first, 1e-3);
  EXPECT_NEAR(c.second, m.second, 1e-3);
  EXPECT_LT(c.first + c.second, 0.0);
}

TEST(CenterPlane, TransversalForTheProduct) {
  MapExpr f = a_times_id();
  CenterPlaneEstimate e = estimate_center_plane(f, f.inverse(), TorusPoint{0.2, 0.4, 0.6, 0.8}, 20, 20);
  EXPECT_NEAR(e.transversality, 1.0, 1e-9);
  EXPECT_LT(e.residual, 1e-9);
}
