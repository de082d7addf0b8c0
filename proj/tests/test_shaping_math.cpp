#include <gtest/gtest.h>

#include <random>

#include "hidm/shaping_math.hpp"
#include "oracles.hpp"

using namespace hidm;

namespace {

AmplitudeDistribution two_point(double p1) { return AmplitudeDistribution(AmplitudeAlphabet(), {p1, 1.0 - p1}); }

}  // namespace

TEST(Alphabet, RejectsEvenUnsortedOrEmptyLevels) {
  EXPECT_THROW(AmplitudeAlphabet(std::vector<int>{}), ValidationError);
  EXPECT_THROW(AmplitudeAlphabet({1, 2}), ValidationError);
  EXPECT_THROW(AmplitudeAlphabet({3, 1}), ValidationError);
  EXPECT_THROW(AmplitudeAlphabet({-1, 1}), ValidationError);
  EXPECT_EQ(AmplitudeAlphabet::odd(4).levels(), (std::vector<int>{1, 3, 5, 7}));
}

TEST(Distribution, RejectsBadSumsAndLengths) {
  EXPECT_THROW(AmplitudeDistribution(AmplitudeAlphabet(), {0.5, 0.6}), ValidationError);
  EXPECT_THROW(AmplitudeDistribution(AmplitudeAlphabet(), {1.0}), ValidationError);
  EXPECT_THROW(AmplitudeDistribution(AmplitudeAlphabet(), {1.5, -0.5}), ValidationError);
  EXPECT_NO_THROW(AmplitudeDistribution(AmplitudeAlphabet(), {0.3, 0.7 + 5e-13}));
}

TEST(Entropy, ReferenceValues) {
  EXPECT_DOUBLE_EQ(entropy_bits(two_point(0.5)), 1.0);
  EXPECT_DOUBLE_EQ(entropy_bits(two_point(1.0)), 0.0);
  EXPECT_NEAR(entropy_bits(two_point(0.8125)), 0.69621, 1e-5);
  EXPECT_NEAR(entropy_bits(two_point(0.8125)), oracle::binary_entropy(0.8125), 1e-15);
}

TEST(MeanEnergy, ReferenceValues) {
  EXPECT_DOUBLE_EQ(mean_energy(two_point(1.0)), 1.0);
  EXPECT_DOUBLE_EQ(mean_energy(two_point(0.5)), 5.0);
  EXPECT_DOUBLE_EQ(mean_energy(two_point(0.8125)), 2.5);
  for (double p : {0.1, 0.37, 0.9}) EXPECT_NEAR(mean_energy(two_point(p)), 9.0 - 8.0 * p, 1e-14);
}

TEST(SolveMb, MaximumEntropyIsUniform) {
  const auto mb = solve_mb(AmplitudeAlphabet(), 1.0);
  EXPECT_EQ(mb.rate_parameter, 0.0);
  EXPECT_DOUBLE_EQ(mb.distribution[0], 0.5);
  EXPECT_DOUBLE_EQ(mb.mean_energy, 5.0);
}

TEST(SolveMb, MatchesBinaryEntropyInverse) {
  const auto half = solve_mb(AmplitudeAlphabet(), 0.5);
  EXPECT_NEAR(half.distribution[0], 0.8900, 1e-3);
  EXPECT_NEAR(half.mean_energy, 1.880, 0.01);
  EXPECT_NEAR(half.distribution[0], oracle::mb_p1(0.5), 1e-9);

  const auto three_q = solve_mb(AmplitudeAlphabet(), 0.75);
  EXPECT_NEAR(three_q.distribution[0], 0.7855, 1e-3);
  EXPECT_NEAR(three_q.mean_energy, 2.716, 0.01);
  EXPECT_NEAR(three_q.mean_energy, oracle::mb_energy(0.75), 1e-8);
}

TEST(SolveMb, ProportionalToGaussianWeights) {
  const auto a = AmplitudeAlphabet::odd(4);
  const auto mb = solve_mb(a, 1.3);
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double ratio = mb.distribution[i] / mb.distribution[0];
    const double expected = std::exp(-mb.rate_parameter * (a[i] * a[i] - a[0] * a[0]));
    EXPECT_NEAR(ratio / expected, 1.0, 1e-9);
    EXPECT_LE(mb.distribution[i], mb.distribution[i - 1]);
  }
}

TEST(SolveMb, OutOfRangeTargetsAreDomainErrors) {
  EXPECT_THROW(solve_mb(AmplitudeAlphabet(), 0.0), DomainError);
  EXPECT_THROW(solve_mb(AmplitudeAlphabet(), -0.1), DomainError);
  EXPECT_THROW(solve_mb(AmplitudeAlphabet(), 1.01), DomainError);
  try {
    solve_mb(AmplitudeAlphabet(), 2.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("(0, 1]"), std::string::npos);
  }
}

TEST(SolveMb, RoundTripsRandomTargets) {
  std::mt19937_64 rng(11);
  for (const std::size_t m : {2u, 4u, 8u}) {
    const auto a = AmplitudeAlphabet::odd(m);
    std::uniform_real_distribution<double> target(1e-3, std::log2(static_cast<double>(m)));
    for (int i = 0; i < 200; ++i) {
      const double h = target(rng);
      EXPECT_NEAR(entropy_bits(solve_mb(a, h).distribution), h, 1e-9);
    }
  }
}

TEST(SolveMb, PicksLowerEnergyBranchOnTwoPoints) {
  for (double h = 0.05; h < 1.0; h += 0.05) {
    const auto mb = solve_mb(AmplitudeAlphabet(), h);
    const double p = mb.distribution[0];
    EXPECT_GE(p, 0.5);
    EXPECT_LT(mb.mean_energy, mean_energy(two_point(1.0 - p)) + 1e-12);
  }
}

TEST(SolveMb, EnergyMonotoneInEntropy) {
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double e = solve_mb(AmplitudeAlphabet(), i / 100.0).mean_energy;
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST(Losses, EnergyAndRate) {
  EXPECT_DOUBLE_EQ(energy_loss_db(5.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(energy_loss_db(3.7, 3.7), 0.0);
  EXPECT_NEAR(energy_loss_db(2.5, 1.880), 1.237, 0.01);
  EXPECT_LT(energy_loss_db(1.5, 2.0), 0.0);
  EXPECT_THROW(energy_loss_db(0.0, 1.0), DomainError);
  EXPECT_THROW(energy_loss_db(1.0, -1.0), DomainError);
  EXPECT_DOUBLE_EQ(rate_loss(0.5, 0.5), 0.0);
  EXPECT_NEAR(rate_loss(0.69621, 0.5), 0.19621, 1e-12);
  EXPECT_NEAR(rate_loss(0.553, 0.5), 0.053, 1e-12);
}
