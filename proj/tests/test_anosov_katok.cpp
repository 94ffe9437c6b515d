#include <gtest/gtest.h>

#include "nuhlab/anosov_katok.hpp"
#include "nuhlab/config.hpp"
#include "nuhlab/pipeline.hpp"
#include "nuhlab/rng.hpp"
#include "nuhlab/survey.hpp"

using namespace nuhlab;

namespace {

const AKMap& default_ak() {
  static const AKMap ak = build_pipeline(RunConfig{}).ak;
  return ak;
}

}  // namespace

TEST(Rearrangement, IdentityOnTheSquare) {
  Rearrangement g{0.2, 0.2, 0.05, 6, 1};
  MapExpr phi = g.map();
  Stream rng(3, 0);
  for (int i = 0; i < 1000; ++i) {
    TorusPoint x{0.2 * rng.uniform(), 0.2 * rng.uniform()};
    EXPECT_EQ(phi.eval(x).coords(), x.coords());
  }
}

TEST(Rearrangement, RejectsBadGeometry) {
  EXPECT_THROW((Rearrangement{0.2, 0.1, 0.05, 6, 1}.validate()), StageError);
  EXPECT_THROW((Rearrangement{0.6, 0.6, 0.05, 6, 1}.validate()), StageError);
}

TEST(Stages, DenominatorsMustDivide) {
  Rearrangement g{0.2, 0.2, 0.05, 6, 1};
  std::vector<StageParams> bad = {{1, 2, 4, 0.03, 0.5}, {1, 5, 2, 0.01, 0.5}};
  EXPECT_THROW(build_ak_map(bad, g, 1, 840), StageError);
}

TEST(Stages, PeriodicPowersAndVolume) {
  for (const auto& s : default_ak().closeness(32)) EXPECT_LT(s.power_defect, 1e-9) << "stage " << s.index;
  MapExpr t = default_ak().map();
  Stream rng(4, 0);
  for (int i = 0; i < 2000; ++i) {
    TorusPoint x{rng.uniform(), rng.uniform()};
    EXPECT_NEAR(std::abs(t.jacobian(x).matrix.determinant()), 1.0, 1e-8);
  }
}

TEST(InvariantSet, ClosedFormMeasure) {
  const InvariantSetSpec k = invariant_set(default_ak());
  EXPECT_DOUBLE_EQ(k.measure(), 0.8);
  EXPECT_GE(k.measure(), k.declared_lower_bound());
}

// Property: samples of K avoid the open square (0, eps)^2.
TEST(InvariantSet, SamplesAvoidTheSquare) {
  const InvariantSetSpec k = invariant_set(default_ak());
  Stream rng(5, 0);
  for (int i = 0; i < 5000; ++i) {
    TorusPoint x = k.sample(rng.uniform(), rng.uniform());
    EXPECT_TRUE(k.contains(x, 1e-9));
    EXPECT_FALSE(x[0] > 0.0 && x[0] < 0.2 && x[1] > 0.0 && x[1] < 0.2);
  }
}

TEST(InvariantSet, RotationStagePreservesTube) {
  const InvariantSetSpec k = invariant_set(default_ak());
  KAuditReport r = k_invariance_audit(default_ak().stage_map(0), k, k, 500, 200, 1);
  EXPECT_EQ(r.passed, r.samples);
}

TEST(InvariantSet, AuditAndShiftedControl) {
  const InvariantSetSpec k = invariant_set(default_ak());
  KAuditReport ok = k_invariance_audit(default_ak().map(), k, k, 500, 300, 2);
  EXPECT_EQ(ok.fraction(), 1.0);
  KAuditReport bad = k_invariance_audit(default_ak().map(), k.shifted(0.1, 0.1), k, 500, 300, 2);
  EXPECT_LT(bad.fraction(), 1.0);
}

TEST(Avoidance, TrivialBoxes) {
  const InvariantSetSpec k = invariant_set(default_ak());
  MapExpr t = default_ak().map();
  EXPECT_EQ(avoidance_statistics(t, 300, 200, 0.0, 0.2, &k, 3).fraction, 1.0);
  EXPECT_EQ(avoidance_statistics(t, 300, 5, 0.0, 1.0, nullptr, 3).fraction, 0.0);
}

TEST(Transitivity, FinalStageSpreadsFurtherThanRotation) {
  TorusPoint seed{0.5, 0.05};
  double rot = transitivity_probe(default_ak().stage_map(0), seed, 100000, 0.05);
  double fin = transitivity_probe(default_ak().map(), seed, 100000, 0.05);
  EXPECT_GT(fin, rot);
}

TEST(ContinuedFractions, Denominators) {
  auto d = convergent_denominators(1.0 / 840.0, 4);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d.back(), 840);
}
