#include <gtest/gtest.h>

#include <cmath>

#include "printers.hpp"
#include "spvote/errors.hpp"
#include "spvote/inference.hpp"
#include "spvote/mcmc.hpp"

using namespace spvote;

namespace {

McmcConfig quick(std::uint64_t seed, int iterations = 3000) {
  return McmcConfig{.chains = 4, .iterations = iterations, .warmup = iterations / 3, .proposal_scale = 0.1, .seed = seed, .threads = 1};
}

// Each voter's prediction is drawn from the same mixture component as the vote.
std::vector<RankingPair> synthetic_pairs(const ModelSpec& votes, const ModelSpec& predictions, std::size_t n,
                                         std::uint64_t seed) {
  const auto v = sample_model(votes, n, seed);
  Rng rng(seed + 1);
  std::vector<RankingPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(v.groups[i]);
    const auto prediction = predictions.kind() == ModelKind::Cmm
                                ? draw_mallows(predictions.ground_truth(), predictions.cmm_params().dispersions[g], rng)
                                : draw_pl(predictions.ground_truth(), predictions.cmpl_params().strengths[g], rng);
    out.push_back({v.rankings[i], prediction});
  }
  return out;
}

double column_mean(const PosteriorSamples& s, std::size_t column) {
  double total = 0.0;
  for (const auto& d : s.draws) total += d[column];
  return total / static_cast<double>(s.draws.size());
}

// Mallows log-likelihood of the distances at dispersion phi.
double mallows_loglik(const std::vector<int>& distances, double phi, int m) {
  double z = 1.0;
  for (int i = 1; i <= m; ++i) {
    double level = 0.0;
    for (int k = 0; k < i; ++k) level += std::pow(phi, k);
    z *= level;
  }
  double ll = 0.0;
  for (int d : distances) ll += d * std::log(phi) - std::log(z);
  return ll;
}

double grid_mle(const std::vector<int>& distances, int m) {
  double best = 0.0;
  double best_ll = -INFINITY;
  for (int k = 1; k <= 1000; ++k) {
    const double phi = k / 1000.0;
    const double ll = mallows_loglik(distances, phi, m);
    if (ll > best_ll) {
      best_ll = ll;
      best = phi;
    }
  }
  return best;
}

PosteriorSamples degenerate_fit(std::vector<double> row) {
  PosteriorSamples s;
  s.kind = ModelKind::Cmpl;
  s.groups = 1;
  s.m = static_cast<int>(row.size());
  s.chains = 1;
  s.draws_per_chain = 1;
  std::vector<double> draw{1.0};
  draw.insert(draw.end(), row.begin(), row.end());
  draw.insert(draw.end(), row.begin(), row.end());
  s.draws.push_back(draw);
  return s;
}

}  // namespace

TEST(Mcmc, ConfigValidation) {
  EXPECT_NO_THROW(McmcConfig{}.validate());
  EXPECT_THROW((McmcConfig{.chains = 0}).validate(), ParameterError);
  EXPECT_THROW((McmcConfig{.iterations = 100, .warmup = 100}).validate(), ParameterError);
  EXPECT_THROW((McmcConfig{.proposal_scale = 0.0}).validate(), ParameterError);
}

TEST(Mcmc, SamplesGaussianTarget) {
  const LogTarget target = [](const std::vector<double>& x) {
    return -0.5 * (x[0] * x[0] + (x[1] - 3.0) * (x[1] - 3.0) / 4.0);
  };
  const Initializer init = [](Rng& rng) { return std::vector<double>{2 * rng.uniform() - 1, 2 * rng.uniform() - 1}; };
  const auto runs = run_metropolis(target, init, quick(5, 6000));
  ASSERT_EQ(runs.size(), 4u);
  std::vector<std::vector<double>> first(4), second(4);
  double sum0 = 0, sum1 = 0, sq1 = 0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < runs.size(); ++c) {
    for (const auto& d : runs[c].draws) {
      first[c].push_back(d[0]);
      second[c].push_back(d[1]);
      sum0 += d[0];
      sum1 += d[1];
      sq1 += (d[1] - 3.0) * (d[1] - 3.0);
      ++count;
    }
    const double rate = static_cast<double>(runs[c].accepted) / static_cast<double>(runs[c].proposals);
    EXPECT_GT(rate, 0.1);
    EXPECT_LT(rate, 0.6);
  }
  EXPECT_NEAR(sum0 / count, 0.0, 0.15);
  EXPECT_NEAR(sum1 / count, 3.0, 0.3);
  EXPECT_NEAR(sq1 / count, 4.0, 0.6);
  EXPECT_LT(split_rhat(first), 1.05);
  EXPECT_LT(split_rhat(second), 1.05);
  EXPECT_GT(effective_sample_size(first), 500.0);
}

TEST(Mcmc, DiagnosticsOnKnownChains) {
  Rng rng(7);
  std::vector<std::vector<double>> iid(4), shifted(4);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.normal();
      iid[static_cast<std::size_t>(c)].push_back(x);
      shifted[static_cast<std::size_t>(c)].push_back(x + 2.0 * c);
    }
  }
  EXPECT_NEAR(split_rhat(iid), 1.0, 0.01);
  EXPECT_GT(split_rhat(shifted), 1.5);
  EXPECT_GT(effective_sample_size(iid), 3000.0);
  EXPECT_LT(effective_sample_size(shifted), 100.0);
}

TEST(Mcmc, Quantile) {
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_NEAR(quantile({1, 2, 3, 4}, 0.05), 1.15, 1e-12);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.3), 7.0);
}

TEST(CmmInfer, EmptyDataReturnsPrior) {
  const auto s = cmm_infer({}, 4, 3, PriorSpec::cmm_three_group(), quick(11, 4000));
  const auto mean = s.posterior_mean();
  EXPECT_NEAR(mean[0], 0.25, 0.05);
  EXPECT_NEAR(mean[1], 0.25, 0.05);
  EXPECT_NEAR(mean[2], 0.5, 0.05);
}

TEST(CmmInfer, DeterministicAcrossThreadCounts) {
  const auto spec = ModelSpec::cmm(Ranking{0, 1, 2, 3}, CmmParams{{0.3, 0.7}, {0.2, 0.8}});
  const auto data = to_distances(synthetic_pairs(spec, spec, 100, 3), spec.ground_truth());
  auto cfg = quick(12, 900);
  const auto a = cmm_infer(data, 4, 2, PriorSpec::cmm_default(2), cfg);
  const auto b = cmm_infer(data, 4, 2, PriorSpec::cmm_default(2), cfg);
  cfg.threads = 4;
  const auto c = cmm_infer(data, 4, 2, PriorSpec::cmm_default(2), cfg);
  EXPECT_EQ(a.draws, b.draws);
  EXPECT_EQ(a.draws, c.draws);
  EXPECT_EQ(summary_csv(a), summary_csv(c));
  cfg.seed = 13;
  EXPECT_NE(a.draws, cmm_infer(data, 4, 2, PriorSpec::cmm_default(2), cfg).draws);
}

TEST(CmmInfer, LayoutAndLabelOrder) {
  const auto spec = ModelSpec::cmm(Ranking{0, 1, 2, 3, 4}, CmmParams{{0.3, 0.7}, {0.2, 0.8}});
  const auto data = to_distances(synthetic_pairs(spec, spec, 300, 4), spec.ground_truth());
  const auto s = cmm_infer(data, 5, 2, PriorSpec::cmm_default(2), quick(14, 3000));
  EXPECT_EQ(s.names, (std::vector<std::string>{"p[1]", "p[2]", "phi_vote[1]", "phi_vote[2]", "phi_pred[1]", "phi_pred[2]"}));
  EXPECT_EQ(s.draws.size(), static_cast<std::size_t>(s.chains) * s.draws_per_chain);
  for (std::size_t i = 0; i < s.draws.size(); ++i) {
    const auto p = s.proportions(i);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
    for (double phi : s.vote_dispersions(i)) {
      EXPECT_GT(phi, 0.0);
      EXPECT_LE(phi, 1.0);
    }
  }
  EXPECT_LE(column_mean(s, 2), column_mean(s, 3));
  EXPECT_GT(s.acceptance_rate, 0.1);
  EXPECT_LT(s.acceptance_rate, 0.6);
}

TEST(CmmInfer, Preconditions) {
  EXPECT_THROW(cmm_infer({{7, 0}}, 3, 1, PriorSpec::cmm_default(1), quick(1, 300)), ValidationError);
  EXPECT_THROW(cmm_infer({}, 3, 0, PriorSpec::cmm_default(1), quick(1, 300)), ValidationError);
  EXPECT_THROW(cmm_infer({}, 3, 2, PriorSpec::cmm_default(1), quick(1, 300)), ValidationError);
}

TEST(CmmExactInfer, SingleGroupMatchesGridMle) {
  const Ranking truth{2, 0, 3, 1};
  const auto votes = ModelSpec::cmm(truth, CmmParams{{1.0}, {0.3}});
  const auto predictions = ModelSpec::cmm(truth, CmmParams{{1.0}, {0.6}});
  const auto data = synthetic_pairs(votes, predictions, 400, 21);
  std::vector<int> dv, dp;
  for (const auto& d : to_distances(data, truth)) {
    dv.push_back(d.vote);
    dp.push_back(d.prediction);
  }
  const auto s = cmm_exact_infer(data, truth, 1, PriorSpec::cmm_default(1), quick(22, 3000));
  EXPECT_NEAR(column_mean(s, 1), grid_mle(dv, 4), 0.05);
  EXPECT_NEAR(column_mean(s, 2), grid_mle(dp, 4), 0.05);
}

TEST(CmplInfer, DrawsRespectConstraints) {
  const Ranking truth{1, 2, 0};
  const auto votes = ModelSpec::cmpl(truth, CmplParams{{0.4, 0.6}, {{0.6, 0.25, 0.15}, {0.4, 0.33, 0.27}}});
  const auto data = synthetic_pairs(votes, votes, 300, 31);
  const auto s = cmpl_infer(data, truth, 2, PriorSpec::cmpl_default(2, 3), quick(32, 1500));
  EXPECT_EQ(s.names[2], "theta_vote[1][1]");
  for (std::size_t i = 0; i < s.draws.size(); ++i) {
    const auto rows = s.vote_strengths(i);
    EXPECT_TRUE(check_dominance(rows, 0.0));
    for (const auto& row : rows) EXPECT_TRUE(is_non_increasing(row, 0.0));
    for (const auto& row : s.prediction_strengths(i)) EXPECT_TRUE(is_non_increasing(row, 0.0));
  }
  const auto again = cmpl_infer(data, truth, 2, PriorSpec::cmpl_default(2, 3), quick(32, 1500));
  EXPECT_EQ(s.draws, again.draws);
}

TEST(CmplInfer, EmptyDataReturnsPrior) {
  const auto s = cmpl_infer({}, Ranking{0, 1, 2}, 2, PriorSpec::cmpl_default(2, 3), quick(33, 3000));
  EXPECT_NEAR(s.posterior_mean()[0], 0.5, 0.05);
}

TEST(SummaryCsv, HeaderAndRows) {
  const auto s = cmm_infer({}, 3, 1, PriorSpec::cmm_default(1), quick(41, 600));
  const auto csv = summary_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "parameter,mean,sd,q05,q95,rhat,ess");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 1 + s.names.size());
}

TEST(PredictFull, SingleSubsetFollowsItsStrengths) {
  const std::vector<SubsetFit> fits{{{2, 0, 1}, degenerate_fit({0.5, 0.3, 0.2})}};
  const auto out = predict_full_ranking_cmpl(fits, 3, 0, 10, 1, Ranking{2, 0, 1});
  ASSERT_EQ(out.distribution.size(), 1u);
  EXPECT_EQ(out.distribution.begin()->first, (Ranking{2, 0, 1}));
  EXPECT_EQ(out.kt_histogram, (std::vector<std::size_t>{10, 0, 0, 0}));
}

TEST(PredictFull, StitchesOverlappingSubsets) {
  const std::vector<SubsetFit> fits{{{4, 0, 2}, degenerate_fit({0.5, 0.3, 0.2})},
                                    {{2, 1, 3}, degenerate_fit({0.6, 0.3, 0.1})}};
  // alternative 2 averages 0.2 and 0.6; 0 and 1 tie at 0.3
  const auto out = predict_full_ranking_cmpl(fits, 5, 0, 5, 9);
  ASSERT_EQ(out.replicates.size(), 5u);
  for (const auto& r : out.replicates) EXPECT_EQ(r, (Ranking{4, 2, 0, 1, 3}));
  EXPECT_TRUE(out.kt_histogram.empty());
}

TEST(PredictFull, Errors) {
  const std::vector<SubsetFit> partial{{{0, 1, 2}, degenerate_fit({0.5, 0.3, 0.2})}};
  EXPECT_THROW(predict_full_ranking_cmpl(partial, 4, 0, 5, 1), CoverageError);
  EXPECT_THROW(predict_full_ranking_cmpl(partial, 3, 1, 5, 1), ParameterError);
  EXPECT_THROW(predict_full_ranking_cmpl(partial, 3, 0, 0, 1), ParameterError);
}
