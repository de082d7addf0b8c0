#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "hidm/analysis.hpp"
#include "hidm/design.hpp"
#include "oracles.hpp"

using namespace hidm;

namespace {

SearchTemplate tpl(double r, unsigned n_b) { return SearchTemplate{r, BitBudget::make(n_b), 2}; }

const Calibration& calibration_075() {
  static const Calibration c = calibrate(tpl(0.75, 12));
  return c;
}

}  // namespace

TEST(EnumerateK, ContainsKnownOptimaInLexOrder) {
  const auto ks = enumerate_k(tpl(0.5, 12), 4, 11);
  EXPECT_NE(std::find(ks.begin(), ks.end(), std::vector<std::uint32_t>{2, 3, 4, 8}), ks.end());
  EXPECT_TRUE(std::is_sorted(ks.begin(), ks.end()));
  for (const auto& k : ks) {
    const auto v = tpl(0.5, 12).instantiate(4, 11, k);
    EXPECT_EQ(v.total_bits * 2, v.block_length);
    EXPECT_TRUE(validate(v, BitBudget::make(12)).empty());
  }
}

TEST(EnumerateK, SmallTwoLayerShape) {
  // M = (2, 4), N = (4, 2) is not a template shape, so enumerate its k directly.
  std::vector<std::vector<std::uint32_t>> ks;
  for (std::uint32_t k1 = 1; k1 <= 4; ++k1)
    for (std::uint32_t k2 = 1; k2 <= 4; ++k2) {
      const auto v = derive({2, 4}, {4, 2}, {k1, k2});
      if (v.total_bits == 4 && validate(v, BitBudget::make(8), ValidationOptions{false}).empty()) ks.push_back(v.k);
    }
  EXPECT_NE(std::find(ks.begin(), ks.end(), std::vector<std::uint32_t>{1, 2}), ks.end());
}

TEST(EnumerateK, NonIntegerTargetIsInfeasible) {
  EXPECT_THROW(enumerate_k(tpl(0.3, 12), 4, 11), InfeasibleError);
  EXPECT_THROW(enumerate_k(tpl(0.5, 12), 1, 11), DomainError);
}

TEST(EnumerateK, TemplateSpaceIsSmall) {
  std::size_t total = 0;
  for (std::uint32_t n1 = 3; n1 <= 12; ++n1)
    if (tpl(0.5, 12).target_bits(4, n1)) total += enumerate_k(tpl(0.5, 12), 4, n1).size();
  EXPECT_LT(total, 300u);
  EXPECT_GT(count_unconstrained_candidates(0.5, 12), 10'000u);
}

TEST(SearchK, RateHalfOptimum) {
  const auto r = search_k(tpl(0.5, 12), 4, 11);
  EXPECT_EQ(r.vectors, fixture::rate_half_optimum());
  EXPECT_NEAR(r.metrics.r_loss, 0.053, 1e-3);
}

TEST(SearchK, RateThreeQuarterFourLayer) {
  EXPECT_EQ(search_k(tpl(0.75, 12), 4, 11).vectors.k, (std::vector<std::uint32_t>{4, 5, 3, 8}));
}

TEST(SearchK, SingleCandidateReturned) {
  // N = 3 * 2 at rate 1/2 leaves 3 bits, and only k = (1, 1) fits four-bit tables.
  const auto t = tpl(0.5, 4);
  const auto ks = enumerate_k(t, 2, 3);
  ASSERT_EQ(ks.size(), 1u);
  EXPECT_EQ(ks.front(), (std::vector<std::uint32_t>{1, 1}));
  const auto r = search_k(t, 2, 3);
  EXPECT_EQ(r.vectors.k, ks.front());
  EXPECT_EQ(r.evaluated, 1u);
}

TEST(SearchK, ThreadCountDoesNotChangeResult) {
  std::vector<TraceRow> a, b;
  const auto r1 = search_k(tpl(0.5, 12), 4, 11, Execution{1}, [&](const TraceRow& r) { a.push_back(r); });
  const auto r2 = search_k(tpl(0.5, 12), 4, 11, Execution{5}, [&](const TraceRow& r) { b.push_back(r); });
  EXPECT_EQ(r1.vectors, r2.vectors);
  EXPECT_EQ(r1.metrics.r_loss, r2.metrics.r_loss);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].k, b[i].k);
    EXPECT_EQ(a[i].r_loss, b[i].r_loss);
  }
}

TEST(SearchK, MetricsMatchFullBuild) {
  const auto r = search_k(tpl(0.75, 12), 4, 11);
  const auto m = metrics(build(r.vectors));
  EXPECT_EQ(r.metrics.r_loss, m.r_loss);
  EXPECT_EQ(r.metrics.e_dm, m.e_dm);
}

TEST(SelectN1, StopsAtFirstWorsening) {
  const auto s = select_n1(tpl(0.5, 12), 4);
  EXPECT_EQ(s.n1, 11u);
  EXPECT_NEAR(s.result.metrics.r_loss, 0.053, 1e-3);
  ASSERT_GE(s.history.size(), 2u);
  EXPECT_EQ(s.history.front().n1, 12u);
}

TEST(SelectN1, FullScanAgrees) {
  const auto s = select_n1(tpl(0.5, 12), 4, Execution{}, true);
  EXPECT_EQ(s.n1, 11u);
  EXPECT_EQ(s.result.vectors, fixture::rate_half_optimum());
}

TEST(Alpha, PiecewiseRule) {
  EXPECT_EQ(alpha_for(0.25), 0.007);
  EXPECT_EQ(alpha_for(0.35), 0.007);
  EXPECT_EQ(alpha_for(0.5), 0.014);
  EXPECT_EQ(alpha_for(0.70), 0.014);
  EXPECT_EQ(alpha_for(0.75), 0.028);
}

TEST(Calibrate, RateThreeQuarterValues) {
  const auto& c = calibration_075();
  const double e_mb = oracle::mb_energy(0.75);
  EXPECT_EQ(c.params.n_3, 44u);
  EXPECT_EQ(c.params.n_3, std::uint64_t{c.three.n1} * 4);
  EXPECT_EQ(c.four.result.vectors.k, (std::vector<std::uint32_t>{4, 5, 3, 8}));
  // The 0.438 dB calibration value belongs to the 2-layer optimum.
  EXPECT_NEAR(energy_loss_db(c.params.e_dm_2, e_mb), 0.438, 1e-3);
  EXPECT_GT(energy_loss_db(c.params.e_dm_2, e_mb), energy_loss_db(c.params.e_dm_4, e_mb));
  EXPECT_DOUBLE_EQ(c.params.alpha, 0.028);
}

TEST(Predict, SevenLayerValues) {
  const auto& p = calibration_075().params;
  const double e_mb = oracle::mb_energy(0.75);
  EXPECT_NEAR(predict_energy_loss(7, p, e_mb).e_loss_db, 0.2093, 0.005);
  EXPECT_NEAR(predict_rate_loss(7, p), 0.0313, 0.001);
  EXPECT_NEAR(predict_energy_loss(7, p, e_mb).e_loss_db - predict_energy_loss(8, p, e_mb).e_loss_db, 4e-3, 1e-3);
  EXPECT_NEAR(predict_rate_loss(7, p) - predict_rate_loss(8, p), 4e-4, 1e-4);
  EXPECT_THROW(predict_energy_loss(4, p, e_mb), DomainError);
  EXPECT_THROW(predict_rate_loss(4, p), DomainError);
}

TEST(Predict, NormalizationSelection) {
  const auto& p = calibration_075().params;
  const double e_mb = oracle::mb_energy(0.75);
  EXPECT_EQ(select_energy_normalization(p, e_mb, 7, 0.2093), EnergyNormalization::PerAmplitude);
  const auto per_word = predict_energy_loss(7, p, e_mb, EnergyNormalization::PerWord);
  EXPECT_GT(std::abs(per_word.e_loss_db - 0.2093), 0.05);
}

TEST(Predict, MonotoneWithPositiveLimit) {
  const auto& p = calibration_075().params;
  const double e_mb = oracle::mb_energy(0.75);
  for (std::size_t L = 5; L < kMaxLayers; ++L) {
    EXPECT_GT(predict_energy_loss(L, p, e_mb).e_loss_db, predict_energy_loss(L + 1, p, e_mb).e_loss_db);
    EXPECT_GT(predict_rate_loss(L, p), predict_rate_loss(L + 1, p));
  }
  EXPECT_GT(energy_limit(p), e_mb);
  EXPECT_GT(rate_limit(p), 0.0);
}

TEST(Predict, NineteenLayerRateHalf) {
  const auto c = calibrate(tpl(0.5, 12));
  EXPECT_NEAR(predict_rate_loss(19, c.params), 0.044, 0.001);
  EXPECT_EQ(std::uint64_t{c.four.n1} << 18, 2'883'584u);
}

TEST(SelectLayers, SevenForRateThreeQuarter) {
  const auto& p = calibration_075().params;
  EXPECT_EQ(select_layers(p, oracle::mb_energy(0.75)), 7u);
  EXPECT_EQ(select_layers(p, oracle::mb_energy(0.75), SaturationThresholds{0.0, 0.0}), kMaxLayers);
}

TEST(SelectLayers, RateHalfSaturatesByEight) {
  for (unsigned n_b : {8u, 12u, 14u}) {
    const auto c = calibrate(tpl(0.5, n_b));
    EXPECT_LE(select_layers(c.params, oracle::mb_energy(0.5)), 8u) << "N_b = " << n_b;
  }
}

TEST(Design, RateThreeQuarterEndToEnd) {
  DesignRequest req;
  req.r_dm = 0.75;
  req.n_b = 12;
  req.mem_limit_bits = 8'000'000;
  const auto r = design(req);
  EXPECT_EQ(r.chosen_layers, 7u);
  EXPECT_EQ(r.mem_dec_estimate, 3'977'216u);
  EXPECT_EQ(r.hardware_estimate, 7'954'432u);
  EXPECT_NEAR(r.predicted_e_loss_db, 0.2093, 0.005);
  EXPECT_NEAR(r.achieved.e_loss_db, 0.21, 0.01);
  EXPECT_NEAR(r.achieved.r_loss, 0.0316, 0.001);
  EXPECT_NEAR(static_cast<double>(r.memory.mem_dec), 3'948'544.0, 0.02 * 3'948'544.0);
  EXPECT_EQ(r.vectors.k.front(), 4u);
  EXPECT_EQ(r.vectors.k.back(), 8u);
  EXPECT_TRUE(validate(r.vectors, BitBudget::make(12)).empty());
  EXPECT_LE(2 * r.memory.mem_dec, req.mem_limit_bits);
}

TEST(Design, TighterLimitDropsLayers) {
  DesignRequest req;
  req.r_dm = 0.75;
  req.n_b = 12;
  req.mem_limit_bits = 4'000'000;
  const auto r = design(req);
  EXPECT_LT(r.chosen_layers, 7u);
  EXPECT_LE(2 * r.memory.mem_dec, req.mem_limit_bits);
  EXPECT_GE(r.attempts.size(), 2u);
}

TEST(Design, ImpossibleLimitIsInfeasible) {
  DesignRequest req;
  req.r_dm = 0.75;
  req.n_b = 12;
  req.mem_limit_bits = 1;
  try {
    design(req);
    FAIL();
  } catch (const InfeasibleDesign& e) {
    EXPECT_FALSE(e.attempts().empty());
    EXPECT_TRUE(e.tightest().has_value());
  }
}

TEST(Design, RejectsOutOfRangeRequests) {
  DesignRequest req;
  req.r_dm = 1.0;
  EXPECT_THROW(design(req), DomainError);
  req.r_dm = 0.5;
  req.n_b = 3;
  EXPECT_THROW(design(req), DomainError);
}

TEST(Design, RateHalfCalibrationReproducesOptimum) {
  DesignRequest req;
  req.r_dm = 0.5;
  req.n_b = 12;
  req.mem_limit_bits = 64'000'000;
  const auto r = design(req);
  EXPECT_EQ(r.k_4, (std::vector<std::uint32_t>{2, 3, 4, 8}));
  EXPECT_EQ(r.n1_4, 11u);
}
