#include <gtest/gtest.h>

#include <cmath>

#include "pacvote/bounds.hpp"
#include "pacvote/numerics.hpp"

namespace pacvote {
namespace {

BoundInputs inputs(double gibbs_risk, double disagreement, std::size_t m = 1000, double kl = 5.0,
                   double delta = 0.05) {
  BoundInputs in;
  in.m = m;
  in.delta = delta;
  in.kl_qp = kl;
  in.stats = summary_from_rates(gibbs_risk, disagreement);
  return in;
}

double value_of(const BoundReport& r, const std::string& key) {
  for (const auto& [k, v] : r.diagnostics.values) {
    if (k == key) return v;
  }
  ADD_FAILURE() << "missing diagnostic " << key;
  return 0.0;
}

TEST(Bounds, GibbsBoundExample) {
  const BoundReport r = bound0(inputs(0.30, 0.0));
  EXPECT_NEAR(value_of(r, "tau"), 0.0117, 1e-4);
  EXPECT_NEAR(value_of(r, "r_upper"), 0.373, 1e-3);
  EXPECT_NEAR(r.value, 0.746, 1e-3);
}

TEST(Bounds, CBoundFromRatesExample) {
  const BoundReport r = bound1(inputs(0.30, 0.40));
  EXPECT_NEAR(r.value, 0.834, 1e-3);
  EXPECT_LE(r.value, 1.0);
}

TEST(Bounds, RegionBoundExamples) {
  const BoundReport b2 = bound2(inputs(0.30, 0.40));
  EXPECT_NEAR(value_of(b2, "tau"), 0.0199, 1e-4);
  EXPECT_NEAR(b2.value, 0.679, 1e-3);
  ASSERT_EQ(b2.diagnostics.argmax.size(), 2u);
  const BoundReport b2p = bound2_prime(inputs(0.30, 0.40));
  EXPECT_NEAR(b2p.value, 0.660, 1e-3);
  EXPECT_LE(b2p.value, b2.value);
  EXPECT_LE(b2p.diagnostics.argmax[1], value_of(b2p, "e_cap") + 1e-12);
}

TEST(Bounds, LargeRiskCapsAtOne) {
  EXPECT_EQ(bound0(inputs(0.49, 0.0)).value, 1.0);
  EXPECT_EQ(bound1(inputs(0.49, 0.4)).value, 1.0);
}

TEST(Bounds, SemiSupervisedMatchesLabeledWhenSamplesAgree) {
  BoundInputs in = inputs(0.30, 0.40);
  in.m_unlabeled = in.m;
  EXPECT_DOUBLE_EQ(bound1_semi(in).value, bound1(in).value);
  in.m_unlabeled = 100 * in.m;
  EXPECT_LE(bound1_semi(in).value, bound1(in).value);
  in.m_unlabeled.reset();
  EXPECT_THROW(bound1_semi(in), InputError);
}

TEST(Bounds, AlignedBoundsNeedAlignment) {
  BoundInputs in = inputs(0.30, 0.40, 1000, 0.0);
  EXPECT_THROW(bound3(in), InputError);
  in.aligned = true;
  EXPECT_NO_THROW(bound3(in));
  EXPECT_THROW(bound3_prime(in), InputError);
  in.compression_size = 1;
  EXPECT_GE(bound3_prime(in).value, bound3(in).value);
  in.m = 2;
  EXPECT_THROW(bound3_prime(in), InputError);
}

TEST(Bounds, MonotoneInDeltaAndSampleSize) {
  const BoundId ids[] = {BoundId::B0, BoundId::B1, BoundId::B2, BoundId::B2p};
  for (BoundId id : ids) {
    double prev = 1.0;
    for (double delta : {0.01, 0.05, 0.1, 0.5, 1.0}) {
      const double v = compute_bound(id, inputs(0.25, 0.35, 1000, 5.0, delta)).value;
      EXPECT_LE(v, prev + 1e-9) << to_string(id);
      prev = v;
    }
    prev = 1.0;
    for (std::size_t m : {100u, 300u, 1000u, 3000u, 10000u}) {
      const double v = compute_bound(id, inputs(0.25, 0.35, m, 5.0)).value;
      EXPECT_LE(v, prev + 1e-9) << to_string(id);
      prev = v;
    }
  }
}

TEST(Bounds, ValuesStayInUnitInterval) {
  for (double r = 0.0; r <= 0.6; r += 0.05) {
    for (double d = 0.0; d <= 0.5; d += 0.05) {
      if (r - d / 2.0 < 0.0) continue;
      for (std::size_t m : {1u, 10u, 1000u}) {
        BoundInputs in = inputs(r, d, m, 1.0);
        in.aligned = true;
        in.compression_size = 1;
        in.m_unlabeled = 10 * m;
        for (BoundId id : {BoundId::B0, BoundId::B1, BoundId::B1s, BoundId::B2, BoundId::B2p,
                           BoundId::B3, BoundId::B3p}) {
          if (id == BoundId::B3p && m < 3) continue;
          const double v = compute_bound(id, in).value;
          EXPECT_GE(v, 0.0);
          EXPECT_LE(v, 1.0);
        }
      }
    }
  }
}

TEST(Bounds, InvalidInputs) {
  BoundInputs in = inputs(0.3, 0.4);
  in.m = 0;
  EXPECT_THROW(bound0(in), InputError);
  in = inputs(0.3, 0.4);
  in.delta = 0.0;
  EXPECT_THROW(bound1(in), InputError);
  in.delta = 0.05;
  in.kl_qp = -1.0;
  EXPECT_THROW(bound2(in), InputError);
  EXPECT_THROW(summary_from_rates(0.1, 0.4), InputError);
}

TEST(KlVsUniform, KnownValues) {
  EXPECT_NEAR(kl_qp_vs_uniform(Posterior::uniform(6)), 0.0, 1e-15);
  EXPECT_NEAR(kl_qp_vs_uniform(Posterior({0.5, 0.5, 0.0, 0.0})), std::log(2.0), 1e-15);
  EXPECT_NEAR(kl_qp_vs_uniform(Posterior({1.0, 0.0, 0.0, 0.0})), std::log(4.0), 1e-15);
}

}  // namespace
}  // namespace pacvote
