#include <gtest/gtest.h>

#include <cmath>

#include "nuhlab/map_expr.hpp"
#include "nuhlab/rng.hpp"

using namespace nuhlab;

namespace {

TorusPoint random_point(int dim, Stream& rng) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform();
  return TorusPoint(v);
}

MapExpr sample_shear() {
  ShearSpec s;
  s.dim = 4;
  s.target = 1;
  s.amplitude = 0.07;
  s.factors = {{0, Profile::sine(2, 0.1)}, {2, Profile::bump(0.3, 0.2, 0.5)}};
  return MapExpr::shear(s);
}

MapExpr sample_twist() {
  TwistSpec t;
  t.dim = 4;
  t.first = 2;
  t.second = 3;
  t.center_first = 0.4;
  t.center_second = 0.6;
  t.radius = 0.2;
  t.amplitude = 1.3;
  t.aspect = 1.5;
  t.factors = {{0, Profile::sine(1, 0.0)}};
  return MapExpr::twist(t);
}

std::vector<MapExpr> zoo() {
  MapExpr a = MapExpr::linear({{5, 3}, {3, 2}});
  Vec off(4);
  off << 0.1, 0.25, 1.0 / 3.0, 0.7;
  return {MapExpr::product(a, MapExpr::identity(2)),
          MapExpr::translation(off),
          sample_shear(),
          sample_twist(),
          MapExpr::compose_all({sample_twist(), MapExpr::product(a, MapExpr::identity(2)), sample_shear()})};
}

}  // namespace

TEST(Torus, WrapsIntoUnitInterval) {
  EXPECT_EQ(wrap_unit(1.25), 0.25);
  EXPECT_EQ(wrap_unit(-0.25), 0.75);
  EXPECT_EQ(wrap_unit(1.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_signed(0.9), -0.1);
  TorusPoint a{0.95, 0.5}, b{0.05, 0.5};
  EXPECT_NEAR(torus_distance(a, b), 0.1, 1e-15);
}

TEST(Linear, IntegerDeterminantAndRejection) {
  IntMat m(2, 2);
  m << 5, 3, 3, 2;
  EXPECT_EQ(int_determinant(m), 1);
  IntMat bad(2, 2);
  bad << 2, 0, 0, 1;
  EXPECT_THROW(MapExpr::linear(bad), std::invalid_argument);
}

TEST(Linear, FixedPointsOfA) {
  IntMat m(2, 2);
  m << 5, 3, 3, 2;
  auto fp = fixed_points_of_linear(m);
  // |det(A - I)| = |4 * 1 - 9| = 5 fixed points, all fixed by A.
  ASSERT_EQ(fp.size(), 5u);
  MapExpr a = MapExpr::linear(m);
  for (const auto& p : fp) EXPECT_LT(torus_distance(a.eval(p), p), 1e-12);
  bool found = false;
  for (const auto& p : fp) found = found || (std::abs(p[0] - 0.6) < 1e-12 && std::abs(p[1] - 0.2) < 1e-12);
  EXPECT_TRUE(found);
}

// Property: every node kind is volume preserving, inverts in closed form and
// has an analytic Jacobian matching central differences.
TEST(MapProperties, VolumeInverseJacobian) {
  Stream rng(7, 0);
  for (const MapExpr& f : zoo()) {
    MapExpr g = f.inverse();
    for (int i = 0; i < 500; ++i) {
      TorusPoint x = random_point(4, rng);
      EXPECT_NEAR(std::abs(f.jacobian(x).matrix.determinant()), 1.0, 1e-10) << f.describe();
      EXPECT_LT(torus_distance(g.eval(f.eval(x)), x), 1e-12) << f.describe();
      EXPECT_LT(jacobian_fd_check(f, x, 1e-7), 1e-5) << f.describe();
    }
  }
}

TEST(MapProperties, ChainRuleOfComposition) {
  MapExpr f = sample_shear(), g = sample_twist();
  MapExpr fg = MapExpr::compose(f, g);
  Stream rng(8, 0);
  for (int i = 0; i < 200; ++i) {
    TorusPoint x = random_point(4, rng);
    Mat expect = f.jacobian(g.eval(x)).matrix * g.jacobian(x).matrix;
    EXPECT_LT((fg.jacobian(x).matrix - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Shear, ZeroAmplitudeIsIdentity) {
  ShearSpec s;
  s.dim = 4;
  s.target = 0;
  s.amplitude = 0.0;
  s.factors = {{1, Profile::sine(1, 0.0)}};
  MapExpr f = MapExpr::shear(s);
  TorusPoint x{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(f.eval(x).coords(), x.coords());
}

TEST(Shear, TargetAmongFactorsRejected) {
  ShearSpec s;
  s.dim = 2;
  s.target = 0;
  s.amplitude = 0.1;
  s.factors = {{0, Profile::sine(1, 0.0)}};
  EXPECT_THROW(MapExpr::shear(s), std::invalid_argument);
}

TEST(Twist, IdentityOutsideDisc) {
  MapExpr t = sample_twist();
  TorusPoint far{0.3, 0.3, 0.9, 0.1};
  EXPECT_EQ(t.eval(far).coords(), far.coords());
}

TEST(Iterate, OrbitLengthAndStreaming) {
  MapExpr a = MapExpr::linear({{2, 1}, {1, 1}});
  auto orbit = iterate(a, TorusPoint{0.1, 0.2}, 5);
  ASSERT_EQ(orbit.size(), 5u);
  int count = 0;
  for_each_orbit_point(a, TorusPoint{0.1, 0.2}, 5, [&](int k, const TorusPoint& p) {
    EXPECT_EQ(p.coords(), orbit[static_cast<std::size_t>(k)].coords());
    ++count;
  });
  EXPECT_EQ(count, 5);
}
