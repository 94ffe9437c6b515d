#include <gtest/gtest.h>

#include <cmath>

#include "nuhlab/hyperbolicity.hpp"
#include "nuhlab/pipeline.hpp"

using namespace nuhlab;

namespace {

const Pipeline& pipeline() {
  static const Pipeline p = build_pipeline(RunConfig{});
  return p;
}

ReferenceSplitting splitting() { return ReferenceSplitting::of(config_matrix(RunConfig{}), 4); }

}  // namespace

TEST(Splitting, EigenvectorsOfA) {
  ReferenceSplitting s = splitting();
  Eigen::Matrix2d a;
  a << 5, 3, 3, 2;
  EXPECT_NEAR(s.lambda, (7.0 + std::sqrt(45.0)) / 2.0, 1e-12);
  Eigen::Vector2d u = s.unstable.col(0).head(2);
  Eigen::Vector2d v = s.stable.col(0).head(2);
  EXPECT_LT((a * u - s.lambda * u).norm(), 1e-12);
  EXPECT_LT((a * v - v / s.lambda).norm(), 1e-12);
  EXPECT_EQ(s.center.col(0).tail(2), Eigen::Vector2d(1, 0));
}

TEST(Splitting, CoefficientsReconstruct) {
  ReferenceSplitting s = splitting();
  Vec v(4);
  v << 0.3, -1.2, 0.5, 2.0;
  Vec c = s.coefficients(v);
  Mat basis(4, 4);
  basis << s.unstable, s.stable, s.center;
  EXPECT_LT((basis * c - v).norm(), 1e-12);
}

TEST(Cones, ApertureValidation) {
  ConeField c{splitting(), 0.3, 0.3};
  EXPECT_NO_THROW(c.validate());
  c.aperture_u = 2.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Cones, InvariantUnderIterates) {
  const Pipeline& p = pipeline();
  ConeField c{splitting(), 0.3, 0.3};
  IntMat a = IntMat::Identity(4, 4);
  a.topLeftCorner(2, 2) << 5, 3, 3, 2;
  MapExpr linear = MapExpr::linear(a);
  ConeMargins m = verify_cone_invariance(linear, linear.inverse(), c, 20, 1, 3);
  EXPECT_TRUE(m.invariant());
  EXPECT_NEAR(m.angle_u, 1.0 / (c.splitting.lambda * c.splitting.lambda), 1e-9);
  // One step of T can stretch the center by more than lambda; twelve steps cannot.
  EXPECT_FALSE(verify_cone_invariance(p.product.f, p.product.f_inverse, c, 50, 1, 3).invariant());
  EXPECT_TRUE(verify_cone_invariance(p.product.f, p.product.f_inverse, c, 50, 12, 3).invariant());
  EXPECT_TRUE(verify_cone_invariance(p.full.f, p.full.f_inverse, c, 50, 12, 3).invariant());
}

TEST(Bunching, ProductMarginPositive) {
  const Pipeline& p = pipeline();
  BunchingReport b = bunching_check(p.product.f, p.product.f_inverse, splitting(), 20, 5, 24, 12);
  EXPECT_GT(b.margin, 0.0);
  EXPECT_EQ(b.excluded, 0);
}

TEST(Leaves, ProductLeafIsAStraightSegment) {
  const Pipeline& p = pipeline();
  ReferenceSplitting s = splitting();
  TorusPoint x{0.3, 0.4, 0.1, 0.1};
  LeafPolyline leaf = approximate_leaf(p.product.f, p.product.f_inverse, s, x, LeafType::Unstable, 0.02, LeafOptions{});
  ASSERT_GE(leaf.points.size(), 2u);
  for (const Vec& q : leaf.points) {
    Vec d = q - leaf.points.front();
    Vec c = s.coefficients(d);
    EXPECT_LT(std::abs(c[1]), 1e-9);
    EXPECT_LT(c.tail(2).norm(), 1e-12);
  }
}

TEST(Quadrilateral, ProductHolonomyVanishes) {
  const Pipeline& p = pipeline();
  HolonomyResult r = su_quadrilateral(p.product.f, p.product.f_inverse, splitting(), TorusPoint{0.3, 0.4, 0.1, 0.1},
                                      0.02, 0.02, LeafOptions{});
  EXPECT_TRUE(r.zero_within_error());
  EXPECT_LT(r.closure, 1e-9);
}

TEST(Quadrilateral, FullHolonomyIsResolved) {
  const Pipeline& p = pipeline();
  HolonomyResult r = su_quadrilateral(p.full.f, p.full.f_inverse, splitting(), TorusPoint{0.3, 0.4, 0.1, 0.1},
                                      0.02, 0.02, LeafOptions{});
  EXPECT_TRUE(r.significant());
  EXPECT_LT(r.closure, 1e-9);
}

TEST(Reach, SmallGrid) {
  const Pipeline& p = pipeline();
  LeafOptions o;
  o.refinement = 64;
  ReachRaster full = accessibility_reach(p.full.f, p.full.f_inverse, splitting(), 0.05, 0.15, 3, 0.02, o, 1);
  ReachRaster prod = accessibility_reach(p.product.f, p.product.f_inverse, splitting(), 0.05, 0.15, 3, 0.02, o, 1);
  EXPECT_EQ(full.points.size(), 9u);
  EXPECT_DOUBLE_EQ(full.significant_fraction(), 1.0);
  EXPECT_DOUBLE_EQ(prod.zero_fraction(), 1.0);
  EXPECT_DOUBLE_EQ(prod.significant_fraction(), 0.0);
}
