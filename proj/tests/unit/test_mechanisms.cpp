#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bilateral/distributions.hpp"
#include "bilateral/measures.hpp"
#include "bilateral/mechanisms.hpp"
#include "families.hpp"

using namespace bilateral;
using bilateral::testing::random_discrete;
using bilateral::testing::random_pair;
using bilateral::testing::shipped_families;

namespace {

const double kE = std::exp(1.0);
const double kMinimax = (2.0 + std::sqrt(2.0)) / 4.0;

// Independent oracle for the sample price on a discrete F: triple sum over
// (S, B, p) atoms, a tie between the price draw and a value broken by a fair
// coin.
double brute_sample_gft(const Distribution& F) {
  const auto atoms = discrete_atoms(F);
  double g = 0.0;
  for (const Atom& p : atoms) {
    for (const Atom& s : atoms) {
      for (const Atom& b : atoms) {
        const double seller_ok = s.x < p.x ? 1.0 : (s.x == p.x ? 0.5 : 0.0);
        const double buyer_ok = b.x > p.x ? 1.0 : (b.x == p.x ? 0.5 : 0.0);
        g += p.p * s.p * b.p * seller_ok * buyer_ok * (b.x - s.x);
      }
    }
  }
  return g;
}

std::vector<double> grid_with_atoms(const Distribution& F, int n) {
  const double hi = F.integration_hi(QuadratureConfig{});
  std::vector<double> ps;
  for (int i = 0; i <= n; ++i) ps.push_back(hi * i / n);
  for (const Atom& a : F.atoms()) {
    ps.push_back(a.x);
    ps.push_back(std::nextafter(a.x, -1.0));
    ps.push_back(std::nextafter(a.x, 1e300));
  }
  return ps;
}

}  // namespace

TEST(SamplePrice, Examples) {
  EXPECT_NEAR(sample_price_expected_gft(*make_uniform(0, 1)), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(sample_price_expected_gft(*make_discrete({{0, 0.5}, {1, 0.5}})), 0.125, 1e-15);
  EXPECT_EQ(sample_price_expected_gft(*point_mass(0.3)), 0.0);
  EXPECT_NEAR(brute_sample_gft(*make_discrete({{0, 0.5}, {1, 0.5}})), 0.125, 1e-15);
}

TEST(SamplePrice, WelfareExamples) {
  const auto U = make_uniform(0, 1);
  EXPECT_NEAR(sample_price_expected_welfare(*U), 7.0 / 12.0, 1e-12);
  EXPECT_NEAR(sample_price_expected_welfare(*U) / opt_w(*U), 0.875, 1e-12);
  const auto P = make_power(0.001);
  EXPECT_NEAR(sample_price_expected_welfare(*P) / opt_w(*P), 0.75, 0.01);
  const auto r = evaluate(SamplePrice{}, *point_mass(1.0));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.ratio_w, 1.0);
  EXPECT_EQ(r.ratio_gft, 1.0);
}

TEST(SamplePriceProperty, ExactHalfOnFamilies) {
  for (const auto& f : shipped_families()) {
    const Distribution& F = *f.dist;
    const double og = opt_gft(F);
    EXPECT_NEAR(sample_price_expected_gft(F) / og, 0.5, 1e-6) << f.name;
    EXPECT_NEAR(sample_price_expected_gft_outer(F) / og, 0.5, 1e-6) << f.name;
  }
  for (double r : {0.1, 1.0, 3.0}) {
    const auto F = make_power(r);
    EXPECT_NEAR(sample_price_expected_gft_outer(*F) / opt_gft(*F), 0.5, 1e-6) << r;
  }
}

TEST(SamplePriceProperty, ExactHalfAgainstTripleSum) {
  Rng rng(Seed{44});
  for (int t = 0; t < 200; ++t) {
    const auto F = random_discrete(rng, 2 + t % 10, 0.0, 1.0, t % 2 ? 5 : 0);
    const double og = opt_gft(*F);
    if (og <= 0.0) continue;
    EXPECT_NEAR(brute_sample_gft(*F), 0.5 * og, 1e-14) << "trial " << t;
    EXPECT_NEAR(sample_price_expected_gft_outer(*F), 0.5 * og, 1e-12) << "trial " << t;
  }
}

TEST(SamplePriceProperty, WelfareRatioBetweenThreeQuartersAndOne) {
  Rng rng(Seed{45});
  for (int t = 0; t < 300; ++t) {
    const auto F = random_discrete(rng, 1 + t % 12, 0.0, 1.0 + t % 3, t % 3 ? 0 : 7);
    const double ratio = sample_price_expected_welfare(*F) / opt_w(*F);
    EXPECT_GE(ratio, 0.75 - 1e-12) << "trial " << t;
    EXPECT_LE(ratio, 1.0 + 1e-12) << "trial " << t;
  }
}

TEST(MeanPrice, Examples) {
  const auto u = mean_price_welfare(*make_uniform(0, 1));
  EXPECT_DOUBLE_EQ(u.price, 0.5);
  EXPECT_NEAR(u.welfare, 0.625, 1e-15);
  EXPECT_NEAR(u.welfare_three_quantity, 0.625, 1e-15);
  const auto a = mean_price_welfare(*make_discrete({{0, 0.5}, {1, 0.5}}));
  EXPECT_DOUBLE_EQ(a.price, 0.5);
  EXPECT_DOUBLE_EQ(a.welfare, 0.75);
  EXPECT_DOUBLE_EQ(a.mu1, 0.0);
  EXPECT_DOUBLE_EQ(a.gamma, 0.5);
  const auto c = mean_price_welfare(*point_mass(0.6));
  EXPECT_DOUBLE_EQ(c.price, 0.6);
  EXPECT_DOUBLE_EQ(c.welfare, 0.6);
}

TEST(MeanPriceProperty, MeanDominatesEveryPrice) {
  for (const auto& f : shipped_families()) {
    const Distribution& F = *f.dist;
    const double wm = mean_price_welfare(F).welfare;
    for (double p : grid_with_atoms(F, 1000)) EXPECT_GE(wm, welfare(p, F) - 1e-9) << f.name << " p=" << p;
  }
}

TEST(MeanPriceProperty, ThreeQuantityFormMatches) {
  for (const auto& f : shipped_families()) {
    const auto m = mean_price_welfare(*f.dist);
    EXPECT_NEAR(m.welfare, m.welfare_three_quantity, 1e-9) << f.name;
  }
}

TEST(MeanPriceProperty, StrictlyBestOnSmoothFamilies) {
  for (const DistPtr& F : {make_uniform(0, 1), make_exponential(1.0)}) {
    const double mu = F->mean();
    const double wm = welfare(mu, *F);
    EXPECT_LT(welfare(mu - 0.01, *F), wm);
    EXPECT_LT(welfare(mu + 0.01, *F), wm);
  }
}

TEST(MeanPriceProperty, RatioAboveMinimaxConstant) {
  Rng rng(Seed{46});
  for (int t = 0; t < 500; ++t) {
    const auto F = random_discrete(rng, 1 + t % 6, 0.0, 1.0, t % 2 ? 0 : 20);
    EXPECT_GE(mean_price_welfare(*F).welfare / opt_w(*F), kMinimax - 1e-9) << "trial " << t;
  }
}

TEST(GStar, DegenerateSeller) {
  const auto r = gstar_expected_welfare(*point_mass(0.0), *point_mass(1.0));
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.welfare, 1.0);
}

TEST(GStar, UniformPair) {
  const auto U = make_uniform(0, 1);
  const auto r = gstar_expected_welfare(*U, *U);
  EXPECT_NEAR(r.lo, std::exp(-1.0), 1e-12);
  EXPECT_EQ(r.hi, 1.0);
  EXPECT_GE(r.welfare, (1.0 - 1.0 / kE) * (2.0 / 3.0) + (1.0 / kE) / 6.0);
  const auto mc = mc_oracle(*U, *U, price_rule(GStar{}, *U, *U), 1000000, Seed{5});
  EXPECT_LT(std::abs(mc.w_at_p - r.welfare), 4.0 * *mc.mc_stderr);
}

TEST(GStar, BuyerBelowEverySeller) {
  const auto r = gstar_expected_welfare(*make_uniform(0, 1), *point_mass(0.0));
  EXPECT_NEAR(r.welfare, 0.5, 1e-12);
}

TEST(GStar, ExpectationOfConstantIsOne) {
  for (const auto& f : shipped_families()) {
    EXPECT_NEAR(gstar_expectation(*f.dist, [](double) { return 1.0; }), 1.0, 1e-9) << f.name;
  }
}

TEST(GStarProperty, LowerBoundOnRandomPairs) {
  Rng rng(Seed{47});
  for (int t = 0; t < 100; ++t) {
    const auto [S, B] = random_pair(rng);
    const double bound = (1.0 - 1.0 / kE) * asym_opt_w(*S, *B) + expected_shortfall(*S, *B) / kE;
    EXPECT_GE(gstar_expected_welfare(*S, *B).welfare, bound - 1e-6) << "trial " << t;
  }
}

TEST(Hybrid, SeparatedAtoms) {
  const auto h = hybrid_asym_price(*point_mass(0.0), *point_mass(1.0));
  EXPECT_EQ(h.alpha, 0.0);
  EXPECT_EQ(h.branch, HybridBranch::Separated);
  EXPECT_GE(h.welfare / h.opt_w, 0.75);
  EXPECT_FALSE(h.fallback);
}

TEST(Hybrid, UniformPairTakesGStarBranch) {
  const auto U = make_uniform(0, 1);
  const auto h = hybrid_asym_price(*U, *U);
  EXPECT_NEAR(h.alpha, 0.25, 1e-10);
  EXPECT_EQ(h.branch, HybridBranch::GStarArgmax);
  EXPECT_TRUE(std::isnan(h.p_star));
  EXPECT_GE(h.welfare / h.opt_w, 1.0 - 1.0 / kE + 0.25 / kE);
}

TEST(Hybrid, IdenticalAtoms) {
  const auto h = hybrid_asym_price(*point_mass(1.0), *point_mass(1.0));
  EXPECT_EQ(h.opt_w, 1.0);
  EXPECT_EQ(h.welfare, 1.0);
}

TEST(HybridProperty, GuaranteeOnRandomPairs) {
  Rng rng(Seed{48});
  for (int t = 0; t < 300; ++t) {
    const auto [S, B] = random_pair(rng);
    const auto h = hybrid_asym_price(*S, *B);
    EXPECT_GE(h.welfare / h.opt_w, 1.0 - 1.0 / kE + kHybridMargin - 1e-9) << "trial " << t;
    EXPECT_NEAR(h.welfare, asym_welfare(h.price, *S, *B), 1e-12);
  }
}

TEST(Hybrid, HighQuantileByBisectionAgreesWithQuantile) {
  for (const auto& f : shipped_families()) {
    const Distribution& F = *f.dist;
    EXPECT_NEAR(high_quantile_by_bisection(F), F.quantile(0.8), 1e-9 * std::max(1.0, F.quantile(0.8))) << f.name;
  }
}

TEST(BestFixedPrice, Examples) {
  const auto U = make_uniform(0, 1);
  const auto u = best_fixed_price(*U, *U, 256);
  EXPECT_NEAR(u.price, 0.5, 1e-12);
  EXPECT_NEAR(u.welfare, 0.625, 1e-12);

  const auto s = best_fixed_price(*point_mass(0.3), *point_mass(0.7), 64);
  EXPECT_GE(s.price, 0.3);
  EXPECT_LT(s.price, 0.7);
  EXPECT_EQ(s.welfare, 0.7);
}

// Under B > p >= S, p = 0 already trades the (S = 0, B = 1) pair, so every
// p in [0, 1) is optimal and the lowest one wins.
TEST(BestFixedPrice, TwoAtomsFlatOptimum) {
  const auto F = make_discrete({{0, 0.5}, {1, 0.5}});
  const auto r = best_fixed_price(*F, *F, 64);
  EXPECT_EQ(r.price, 0.0);
  EXPECT_DOUBLE_EQ(r.welfare, 0.75);
  for (double p : {0.001, 0.25, 0.5, 0.999}) EXPECT_DOUBLE_EQ(welfare(p, *F), 0.75);
  EXPECT_DOUBLE_EQ(welfare(1.0, *F), 0.5);
}

TEST(BestFixedPrice, SmallGridThrows) {
  const auto U = make_uniform(0, 1);
  EXPECT_THROW(best_fixed_price(*U, *U, 9), std::invalid_argument);
}

TEST(Evaluate, SamplePriceNeedsSymmetricSetting) {
  const auto U = make_uniform(0, 1);
  const auto V = make_uniform(0, 2);
  EXPECT_THROW(evaluate(SamplePrice{}, *U, *V), std::invalid_argument);
}

TEST(Evaluate, FixedPriceReport) {
  const auto U = make_uniform(0, 1);
  const auto r = evaluate(FixedPrice{0.5}, *U);
  EXPECT_NEAR(r.w_at_p, 0.625, 1e-12);
  EXPECT_NEAR(r.ratio_w, 0.9375, 1e-12);
  EXPECT_NEAR(r.gft_at_p, 0.125, 1e-12);
  ASSERT_TRUE(r.price.has_value());
  EXPECT_EQ(*r.price, 0.5);
}

TEST(Evaluate, MeanPriceUniformRatio) {
  const auto r = evaluate(MeanPrice{}, *make_uniform(0, 1));
  EXPECT_NEAR(r.ratio_w, 0.9375, 1e-12);
}

TEST(QuantileRule, PointMassPostsThatQuantile) {
  const auto U = make_uniform(0, 1);
  const auto r = evaluate(QuantileRule{point_mass(0.5)}, *U, *U);
  EXPECT_NEAR(r.w_at_p, 0.625, 1e-12);
}

// A uniform quantile level posts a draw from F_S: the sample price.
TEST(QuantileRule, UniformLevelIsSamplePrice) {
  const auto U = make_uniform(0, 1);
  const auto r = evaluate(QuantileRule{make_uniform(0, 1)}, *U, *U);
  EXPECT_NEAR(r.w_at_p, 7.0 / 12.0, 1e-9);
}
