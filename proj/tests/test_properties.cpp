#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"

namespace lmtight {
namespace {

using testing::random_sfssm;

TEST(SeriesProperties, EnginesAgree) {
  std::mt19937_64 rng(201);
  for (int trial = 0; trial < 150; ++trial) {
    const auto m = random_sfssm(rng);
    const std::size_t horizon = 8;
    const auto fsa = ptilde_eos_fsa(m, horizon);
    const auto enumerated = ptilde_eos_enumerate(sfssm_as_asm(m), horizon);
    ASSERT_EQ(fsa.horizon(), enumerated.horizon());
    EXPECT_EQ(fsa.exhausted_at, enumerated.exhausted_at);
    for (std::size_t t = 0; t < fsa.horizon(); ++t) EXPECT_NEAR(fsa.values[t], enumerated.values[t], 1e-9);
  }
}

TEST(SeriesProperties, MatchesDefinitionOracle) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 60; ++trial) {
    const auto m = random_sfssm(rng, {4, 2, 0.5});
    const auto oracle = testing::ptilde_by_definition(m, 6);
    const auto fsa = ptilde_eos_fsa(m, 6);
    ASSERT_EQ(fsa.horizon(), oracle.size());
    for (std::size_t t = 0; t < oracle.size(); ++t) EXPECT_NEAR(fsa.values[t], oracle[t], 1e-9);
  }
}

TEST(SeriesProperties, CdfIsMonotoneAndBounded) {
  std::mt19937_64 rng(203);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cdf = termination_cdf(ptilde_eos_fsa(random_sfssm(rng), 100));
    double prev = 0.0;
    for (double c : cdf) {
      EXPECT_GE(c, prev);
      EXPECT_LE(c, 1.0);
      prev = c;
    }
  }
}

TEST(SeriesProperties, CdfConvergesToTerminationProbability) {
  std::mt19937_64 rng(204);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_sfssm(rng);
    if (accessible(m).intersect(coaccessible(m)).empty()) continue;
    const auto t = trim(m);
    if (spectral_radius_estimate(t.transition_sum()).estimate > 0.95) continue;
    ++checked;
    const auto cdf = termination_cdf(ptilde_eos_fsa(m, 500));
    EXPECT_NEAR(cdf.back(), termination_probability(t), 1e-6);
  }
  EXPECT_GT(checked, 50);
}

TEST(SeriesProperties, SurvivalVanishesExactlyForTightModels) {
  std::mt19937_64 rng(205);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_sfssm(rng);
    if (accessible(m).intersect(coaccessible(m)).empty()) continue;
    if (spectral_radius_estimate(trim(m).transition_sum()).estimate > 0.95) continue;
    const auto s = ptilde_eos_fsa(m, 1000);
    const bool numerically_tight = s.hit_one_at.has_value() || s.final_survival() < 1e-6;
    EXPECT_EQ(decide_tight(m).is_tight(), numerically_tight);
    if (!s.hit_one_at && numerically_tight) {
      EXPECT_GT(s.final_sum(), 20.0);
    }
  }
}

TEST(SeriesProperties, MonteCarloWithinThreeHalfwidths) {
  std::mt19937_64 rng(206);
  int checked = 0;
  for (int trial = 0; checked < 15 && trial < 200; ++trial) {
    const auto m = random_sfssm(rng);
    if (accessible(m).intersect(coaccessible(m)).empty()) continue;
    const auto t = trim(m);
    if (spectral_radius_estimate(t.transition_sum()).estimate > 0.9) continue;
    ++checked;
    const double exact = termination_probability(t);
    const std::size_t n = 20'000;
    const auto e = monte_carlo_termination(sfssm_as_asm(m), n, 2000, static_cast<std::uint64_t>(trial));
    const double hw = 1.96 * std::sqrt(std::max(0.0, exact * (1.0 - exact)) / static_cast<double>(n));
    EXPECT_LE(std::abs(e.terminated_fraction - exact), 3.0 * hw + 1e-12)
        << "exact " << exact << " estimate " << e.terminated_fraction;
  }
  EXPECT_EQ(checked, 15);
}

TEST(DualityProperties, ProductBoundedBySum) {
  std::mt19937_64 rng(207);
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + trial % 50);
    for (auto& v : p) v = u(rng) * u(rng);
    const auto r = product_sum_duality_check(p, p.size());
    EXPECT_LE(r.partial_product, std::exp(-r.partial_sum) * (1.0 + 1e-12));
    EXPECT_GT(r.partial_product, 0.0);
  }
}

}  // namespace
}  // namespace lmtight
