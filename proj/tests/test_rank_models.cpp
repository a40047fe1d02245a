#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "printers.hpp"
#include "oracles.hpp"
#include "spvote/errors.hpp"
#include "spvote/rank_models.hpp"

using namespace spvote;

namespace {

ModelSpec mallows1(double phi, int m) { return ModelSpec::cmm(Ranking::identity(m), CmmParams{{1.0}, {phi}}); }

double total_variation(const SampleSet& s, const ModelSpec& spec) {
  std::map<Ranking, double> freq;
  for (const auto& r : s.rankings) freq[r] += 1.0 / static_cast<double>(s.rankings.size());
  double tv = 0.0;
  for (const auto& r : enumerate_rankings(spec.m())) tv += std::abs(freq[r] - model_prob(r, spec));
  return tv / 2.0;
}

}  // namespace

TEST(MallowsNormalizer, SpecExamples) {
  EXPECT_DOUBLE_EQ(mallows_normalizer(1.0, 3), 6.0);
  EXPECT_NEAR(mallows_normalizer(0.5, 2), 1.5, 1e-15);
  EXPECT_NEAR(mallows_normalizer(0.5, 3), 2.625, 1e-15);
  EXPECT_THROW(mallows_normalizer(0.0, 3), ParameterError);
  EXPECT_THROW(mallows_normalizer(1.5, 3), ParameterError);
}

TEST(MallowsNormalizer, MatchesBruteForce) {
  for (int m = 1; m <= 7; ++m) {
    for (int k = 1; k <= 10; ++k) {
      const double phi = k / 10.0;
      EXPECT_NEAR(mallows_normalizer(phi, m), oracle::brute_z(phi, m), 1e-12 * oracle::brute_z(phi, m));
    }
  }
}

TEST(MallowsProb, SpecExamples) {
  EXPECT_DOUBLE_EQ(mallows_prob(Ranking{0}, Ranking{0}, 0.3), 1.0);
  EXPECT_NEAR(mallows_prob(Ranking{0, 1, 2}, Ranking{0, 1, 2}, 0.5), 1.0 / 2.625, 1e-12);
  EXPECT_NEAR(mallows_prob(Ranking{2, 1, 0}, Ranking{0, 1, 2}, 0.5), 0.125 / 2.625, 1e-12);
}

TEST(MallowsProb, MonotoneInDistance) {
  for (double phi : {0.2, 0.6, 0.95}) {
    const auto center = Ranking{1, 3, 0, 2};
    for (const auto& a : enumerate_rankings(4)) {
      for (const auto& b : enumerate_rankings(4)) {
        if (kendall_tau(a, center) < kendall_tau(b, center)) {
          EXPECT_GE(mallows_prob(a, center, phi), mallows_prob(b, center, phi));
        }
      }
    }
  }
}

TEST(CmmProb, SpecExamples) {
  const auto spec = ModelSpec::cmm(Ranking{0, 1}, CmmParams{{0.3, 0.7}, {0.2, 0.8}});
  EXPECT_NEAR(cmm_prob(Ranking{0, 1}, spec), 0.3 / 1.2 + 0.7 / 1.8, 1e-12);
  EXPECT_NEAR(cmm_prob(Ranking{0, 1}, spec), 0.638889, 1e-6);
  EXPECT_NEAR(cmm_prob(Ranking{1, 0}, spec), 0.361111, 1e-6);
  const auto single = mallows1(0.4, 4);
  for (const auto& r : enumerate_rankings(4)) EXPECT_NEAR(cmm_prob(r, single), mallows_prob(r, Ranking::identity(4), 0.4), 1e-15);
}

TEST(PlProb, SpecExamples) {
  const std::vector<double> flat{1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (const auto& r : enumerate_rankings(3)) EXPECT_NEAR(pl_prob(r, Ranking{0, 1, 2}, flat), 1.0 / 6, 1e-15);
  const std::vector<double> theta{0.5, 0.3, 0.2};
  EXPECT_NEAR(pl_prob(Ranking{0, 1, 2}, Ranking{0, 1, 2}, theta), 0.30, 1e-12);
  EXPECT_NEAR(pl_prob(Ranking{1, 0, 2}, Ranking{0, 1, 2}, theta), 0.3 * 0.5 / 0.7, 1e-12);
  EXPECT_THROW(pl_prob(Ranking{0, 1}, Ranking{0, 1}, {1.0, 0.0}), ParameterError);
}

TEST(PlProb, MatchesOracleForArbitraryCenters) {
  oracle::Generator gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = gen.integer(2, 5);
    auto theta = gen.simplex(m);
    const auto center = gen.permutation(m);
    const auto sigma = gen.permutation(m);
    EXPECT_NEAR(pl_prob(Ranking(sigma), Ranking(center), theta), oracle::plackett_luce(sigma, center, theta), 1e-13);
  }
}

TEST(CmplProb, SpecExamples) {
  const auto spec = ModelSpec::cmpl(Ranking{0, 1}, CmplParams{{0.4, 0.6}, {{0.75, 0.25}, {0.6, 0.4}}});
  EXPECT_NEAR(cmpl_prob(Ranking{0, 1}, spec), 0.66, 1e-12);
  EXPECT_NEAR(cmpl_prob(Ranking{1, 0}, spec), 0.34, 1e-12);
}

TEST(Normalization, RandomSpecsSumToOne) {
  oracle::Generator gen(22);
  for (int m = 1; m <= 6; ++m) {
    for (int trial = 0; trial < 5; ++trial) {
      const int g = gen.integer(1, 3);
      const Ranking truth(gen.permutation(m));
      const auto cmm = ModelSpec::cmm(truth, CmmParams{gen.simplex(g), gen.sorted_dispersions(g)});
      const auto cmpl = ModelSpec::cmpl(truth, CmplParams{gen.simplex(g), gen.dominant_rows(g, m)});
      double a = 0.0;
      double b = 0.0;
      for (const auto& r : enumerate_rankings(m)) {
        a += model_prob(r, cmm);
        b += model_prob(r, cmpl);
      }
      EXPECT_NEAR(a, 1.0, 1e-10);
      EXPECT_NEAR(b, 1.0, 1e-10);
    }
  }
}

TEST(Validation, CmmParams) {
  EXPECT_THROW(ModelSpec::cmm(Ranking{0, 1}, CmmParams{{0.5, 0.6}, {0.1, 0.2}}), ParameterError);
  EXPECT_THROW(ModelSpec::cmm(Ranking{0, 1}, CmmParams{{0.5, 0.5}, {0.3, 0.2}}), ParameterError);
  EXPECT_THROW(ModelSpec::cmm(Ranking{0, 1}, CmmParams{{0.5, 0.5}, {0.3, 1.2}}), ParameterError);
  EXPECT_THROW(ModelSpec::cmm(Ranking{0, 1}, CmmParams{{0.5, 0.5}, {0.0, 0.2}}), ParameterError);
  EXPECT_THROW(ModelSpec::cmm(Ranking{0, 1}, CmmParams{{1.0}, {0.2, 0.3}}), DimensionError);
}

TEST(Validation, CmplParams) {
  EXPECT_THROW(ModelSpec::cmpl(Ranking{0, 1, 2}, CmplParams{{1.0}, {{0.2, 0.3, 0.5}}}), ParameterError);
  EXPECT_THROW(ModelSpec::cmpl(Ranking{0, 1, 2}, CmplParams{{1.0}, {{0.5, 0.3, 0.1}}}), ParameterError);
  EXPECT_THROW(ModelSpec::cmpl(Ranking{0, 1, 2}, CmplParams{{0.5, 0.5}, {{0.4, 0.35, 0.25}, {0.5, 0.3, 0.2}}}),
               ParameterError);
  EXPECT_THROW(ModelSpec::cmpl(Ranking{0, 1, 2}, CmplParams{{1.0}, {{0.5, 0.5}}}), DimensionError);
}

TEST(Dominance, SpecExamples) {
  const std::vector<double> a{0.5, 0.3, 0.2};
  const std::vector<double> b{0.4, 0.35, 0.25};
  EXPECT_TRUE(check_dominance({a, a}));
  EXPECT_TRUE(check_dominance({a, b}));
  EXPECT_FALSE(check_dominance({b, a}));
}

TEST(Dominance, ImpliesHigherCenterProbability) {
  oracle::Generator gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = gen.integer(2, 5);
    const auto rows = gen.dominant_rows(2, m);
    ASSERT_TRUE(check_dominance(rows));
    const auto id = Ranking::identity(m);
    EXPECT_GE(pl_prob(id, id, rows[0]) + 1e-15, pl_prob(id, id, rows[1]));
  }
}

TEST(Sampling, DegenerateDispersionGivesGroundTruth) {
  const Ranking truth{3, 1, 4, 0, 2};
  const auto spec = ModelSpec::cmm(truth, CmmParams{{0.5, 0.5}, {1e-9, 1e-9}});
  for (const auto& r : sample_cmm(spec, 100, 5).rankings) EXPECT_EQ(r, truth);
  std::vector<double> row{1.0, 1e-6, 1e-12, 1e-18, 1e-24};
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  for (auto& x : row) x /= total;
  const auto pl = ModelSpec::cmpl(truth, CmplParams{{1.0}, {row}});
  for (const auto& r : sample_cmpl(pl, 100, 5).rankings) EXPECT_EQ(r, truth);
}

TEST(Sampling, DeterministicGivenSeed) {
  const auto spec = ModelSpec::cmm(Ranking{2, 0, 1, 3}, CmmParams{{0.3, 0.7}, {0.3, 0.8}});
  const auto a = sample_cmm(spec, 200, 9);
  const auto b = sample_cmm(spec, 200, 9);
  EXPECT_EQ(a.rankings, b.rankings);
  EXPECT_EQ(a.groups, b.groups);
  EXPECT_NE(a.rankings, sample_cmm(spec, 200, 10).rankings);
  const auto pl = ModelSpec::cmpl(Ranking{0, 1, 2}, CmplParams{{1.0}, {{0.5, 0.3, 0.2}}});
  EXPECT_EQ(sample_cmpl(pl, 50, 4).rankings, sample_cmpl(pl, 50, 4).rankings);
}

TEST(Sampling, EmpiricalFrequenciesMatchKernels) {
  const auto cmm = mallows1(0.5, 3);
  EXPECT_LE(total_variation(sample_cmm(cmm, 100000, 1), cmm), 0.01);
  const auto cmpl = ModelSpec::cmpl(Ranking{0, 1, 2}, CmplParams{{1.0}, {{0.5, 0.3, 0.2}}});
  EXPECT_LE(total_variation(sample_cmpl(cmpl, 100000, 2), cmpl), 0.01);
}

TEST(Sampling, GroupFrequenciesFollowProportions) {
  const auto spec = ModelSpec::cmm(Ranking{0, 1, 2}, CmmParams{{0.2, 0.8}, {0.3, 0.9}});
  const auto s = sample_cmm(spec, 20000, 3);
  const double share = static_cast<double>(std::count(s.groups.begin(), s.groups.end(), 0)) / 20000.0;
  EXPECT_NEAR(share, 0.2, 0.015);
}

TEST(PartialMarginal, SpecExamples) {
  EXPECT_NEAR(partial_marginal(PartialRanking({2, 0}, 3), mallows1(1.0, 3)), 0.5, 1e-12);
  EXPECT_NEAR(partial_marginal(PartialRanking({0, 1}, 3), mallows1(0.5, 3)), 1.75 / 2.625, 1e-12);
  const auto spec = mallows1(0.3, 4);
  const Ranking r{1, 0, 3, 2};
  EXPECT_NEAR(partial_marginal(PartialRanking(r.order(), 4), spec), model_prob(r, spec), 1e-15);
}

TEST(PartialMarginal, OrderingsOfASubsetSumToOne) {
  const auto spec = ModelSpec::cmpl(Ranking{1, 3, 0, 2}, CmplParams{{0.4, 0.6}, {{0.4, 0.3, 0.2, 0.1}, {0.3, 0.3, 0.2, 0.2}}});
  const std::vector<Alternative> subset{0, 2, 3};
  double total = 0.0;
  for (std::uint64_t i = 0; i < 6; ++i) total += partial_marginal(partial_unrank(RankIndex{i}, subset, 4), spec);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(DistanceDistribution, MatchesEnumeration) {
  for (int m = 2; m <= 6; ++m) {
    for (double phi : {0.1, 0.5, 0.9, 1.0}) {
      const auto pmf = mallows_distance_pmf(phi, m);
      std::vector<double> expected(static_cast<std::size_t>(max_kendall_tau(m) + 1), 0.0);
      const auto perms = oracle::all_perms(m);
      for (const auto& p : perms) expected[static_cast<std::size_t>(oracle::kt(p, perms.front()))] += oracle::mallows(p, perms.front(), phi);
      ASSERT_EQ(pmf.size(), expected.size());
      for (std::size_t d = 0; d < pmf.size(); ++d) EXPECT_NEAR(pmf[d], expected[d], 1e-12);
      const auto moments = mallows_distance_moments(phi, m);
      double mean = 0.0;
      double second = 0.0;
      for (std::size_t d = 0; d < expected.size(); ++d) {
        mean += static_cast<double>(d) * expected[d];
        second += static_cast<double>(d * d) * expected[d];
      }
      EXPECT_NEAR(moments.mean, mean, 1e-10);
      EXPECT_NEAR(moments.sd, std::sqrt(second - mean * mean), 1e-9);
    }
  }
}

TEST(KernelMatrix, MatchesOracle) {
  oracle::Generator gen(24);
  for (int m = 2; m <= 4; ++m) {
    const auto p = gen.simplex(2);
    const auto rows = gen.dominant_rows(2, m);
    const auto spec = ModelSpec::cmpl(Ranking::identity(m), CmplParams{p, rows});
    const KernelMatrix k(spec);
    const auto expected = oracle::kernel(oracle::Mixture{false, p, {}, rows}, m);
    for (std::size_t a = 0; a < k.size(); ++a) {
      for (std::size_t b = 0; b < k.size(); ++b) EXPECT_NEAR(k(a, b), expected[a][b], 1e-13);
    }
  }
}
