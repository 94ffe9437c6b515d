#include <gtest/gtest.h>

#include <cmath>

#include "nuhlab/perturbations.hpp"
#include "nuhlab/pipeline.hpp"
#include "nuhlab/rng.hpp"

using namespace nuhlab;

namespace {

const Pipeline& pipeline() {
  static const Pipeline p = build_pipeline(RunConfig{});
  return p;
}

TorusPoint uniform(int dim, Stream& rng) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.uniform();
  return TorusPoint(v);
}

}  // namespace

TEST(Region, Predicates) {
  SupportRegion r;
  EXPECT_TRUE(r.in_m_eps(TorusPoint{0.5, 0.5, 0.1, 0.1}));
  EXPECT_FALSE(r.in_m_eps(TorusPoint{0.5, 0.5, 0.3, 0.1}));
  EXPECT_TRUE(r.in_a_eps(TorusPoint{0.5, 0.5, 0.1, 0.1}));
  EXPECT_FALSE(r.in_a_eps(TorusPoint{0.5, 0.5, 0.02, 0.1}));
  EXPECT_TRUE(r.in_v(TorusPoint{0.6, 0.2, 0.1, 0.1}));
  EXPECT_DOUBLE_EQ(domain_volume(Domain::AEps, 0.2), 0.01);
}

TEST(Gadgets, ZeroAmplitudeIsIdentity) {
  SupportRegion r;
  ShearParams sp;
  sp.amplitude = 0.0;
  EXPECT_EQ(sw_shear(r, sp).map.kind(), MapExpr::Kind::Identity);
}

TEST(Gadgets, SupportContractRejected) {
  SupportRegion r;
  ShearParams sp;
  sp.support = 0.9;
  EXPECT_THROW(sw_shear(r, sp), SupportContractError);
  RotationParams rp;
  rp.disc = 0.8;
  EXPECT_THROW(bm_rotation(r, rp), SupportContractError);
}

// Property: h and h~ fix every point outside M^eps and over V bit-exactly, and
// preserve volume everywhere.
TEST(Gadgets, SupportAndVolumeProperties) {
  const Pipeline& p = pipeline();
  Stream rng(21, 0);
  for (const MapExpr& g : {p.full.h, p.full.h_tilde}) {
    for (int i = 0; i < 3000; ++i) {
      TorusPoint x = uniform(4, rng);
      if (!p.region.in_m_eps(x)) EXPECT_EQ(g.eval(x).coords(), x.coords());
      Vec v = x.coords();
      double r = 0.99 * p.region.r_v * rng.uniform();
      v[0] = p.region.p_star0 + r;
      v[1] = p.region.p_star1;
      v[2] = 0.2 * rng.uniform();
      v[3] = 0.2 * rng.uniform();
      TorusPoint y(v);
      EXPECT_EQ(g.eval(y).coords(), y.coords());
      EXPECT_NEAR(std::abs(g.jacobian(x).matrix.determinant()), 1.0, 1e-10);
    }
  }
}

TEST(Assembly, FEqualsProductOffMEpsAlongOrbitStep) {
  const Pipeline& p = pipeline();
  Stream rng(22, 0);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    TorusPoint x = uniform(4, rng);
    TorusPoint y = p.full.product.eval(x);
    if (p.region.in_m_eps(x) || p.region.in_m_eps(y)) continue;
    EXPECT_EQ(p.full.f.eval(x).coords(), y.coords());
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Assembly, T6HasSixCoordinates) {
  RunConfig c;
  c.variant = "t6";
  Pipeline p = build_pipeline(c);
  EXPECT_EQ(p.full.f.dim(), 6);
  EXPECT_EQ(p.full.variant, Variant::T6);
}

TEST(Integrals, ReproducibleFromSeed) {
  const Pipeline& p = pipeline();
  IntegralOptions o;
  o.samples = 400;
  IntegralEstimate a = integrated_central_exponent(p.full.f, p.full.f_inverse, p.region, Domain::MEps, o);
  IntegralEstimate b = integrated_central_exponent(p.full.f, p.full.f_inverse, p.region, Domain::MEps, o);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stderr_, b.stderr_);
  EXPECT_TRUE(std::isfinite(a.estimate));
}

TEST(Integrals, ProductMapIntegrandVanishes) {
  const Pipeline& p = pipeline();
  IntegralOptions o;
  o.samples = 200;
  IntegralEstimate e = integrated_central_exponent(p.product.f, p.product.f_inverse, p.region, Domain::MEps, o);
  EXPECT_LT(std::abs(e.estimate), 1e-9);
}
