#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spvote/rank_models.hpp"
#include "spvote/rankings.hpp"

namespace spvote {

// Common prior over the m! ground truths, indexed by RankIndex. Empty weights
// stand for the uniform prior.
class Prior {
 public:
  Prior() = default;
  static Prior uniform() { return Prior(); }
  static Prior from_weights(std::vector<double> weights);
  static Prior point_mass(const Ranking& r);

  bool is_uniform() const { return weights_.empty(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t index, std::size_t n) const {
    return weights_.empty() ? 1.0 / static_cast<double>(n) : weights_[index];
  }

 private:
  std::vector<double> weights_;
};

struct FullPosterior {
  std::vector<double> probabilities;  // over m! rankings, RankIndex order
  friend bool operator==(const FullPosterior&, const FullPosterior&) = default;
};
struct ModalRanking {
  Ranking ranking;
  friend bool operator==(const ModalRanking&, const ModalRanking&) = default;
};
struct TopChoice {
  Alternative alternative = 0;
  friend bool operator==(const TopChoice&, const TopChoice&) = default;
};
struct TopSet {
  std::vector<Alternative> alternatives;
  friend bool operator==(const TopSet&, const TopSet&) = default;
};
using PredictionReport = std::variant<FullPosterior, ModalRanking, TopChoice, TopSet>;

struct VoterReport {
  Ranking vote;
  PredictionReport prediction;
  friend bool operator==(const VoterReport&, const VoterReport&) = default;
};

// Reports over a local universe {0..m-1}. `alternatives` maps local indices to
// external ids (the subset tag for partial-SP); empty means the identity map.
struct Profile {
  int m = 0;
  std::vector<Alternative> alternatives;
  std::vector<VoterReport> reports;

  void validate() const;
  Alternative external_id(Alternative local) const {
    return alternatives.empty() ? local : alternatives[static_cast<std::size_t>(local)];
  }
  // Local ranking as an order of external ids.
  std::vector<Alternative> to_external(const Ranking& local) const;
  friend bool operator==(const Profile&, const Profile&) = default;
};

// Pr_g(. | vote): Bayes posterior over the ground truth.
std::vector<double> posterior_ground_truth(const Ranking& vote, const ModelSpec& spec,
                                           const Prior& prior = Prior::uniform());
// Pr_o(. | vote): predicted distribution of another voter's ranking.
std::vector<double> predict_other(const Ranking& vote, const ModelSpec& spec,
                                  const Prior& prior = Prior::uniform());

// Largest m for which the dense m! x m! belief matrices are built.
inline constexpr int kMaxBeliefM = 7;

// Kernel plus prior with the full m! x m! prediction matrix, for callers that
// need Pr_o for many votes under one model.
class BeliefModel {
 public:
  BeliefModel(const ModelSpec& spec, Prior prior = Prior::uniform());

  std::size_t size() const { return kernel_.size(); }
  const KernelMatrix& kernel() const { return kernel_; }
  std::vector<double> posterior(std::size_t vote) const;
  // Row `vote` of Pr_o(other | vote).
  std::vector<double> predict(std::size_t vote) const;
  double predict(std::size_t other, std::size_t vote) const { return predictive_[vote * size() + other]; }
  // argmax_sigma Pr_o(sigma | vote), ties to the lower RankIndex.
  std::size_t modal_prediction(std::size_t vote) const;

 private:
  KernelMatrix kernel_;
  Prior prior_;
  std::vector<double> predictive_;
};

struct PartialPosteriors {
  std::vector<Alternative> subset;   // ascending
  std::vector<double> ground_truth;  // over m! rankings
  std::vector<double> others;        // over k! orderings of the subset, partial_index order
};
PartialPosteriors partial_posteriors(const PartialRanking& vote, const ModelSpec& spec,
                                     const Prior& prior = Prior::uniform());

struct ScoredRanking {
  Ranking ranking;
  double score = 0.0;
};

struct AggregationResult {
  Ranking winner;
  std::vector<ScoredRanking> scores;  // observed vote classes, RankIndex order
  std::vector<std::string> diagnostics;
};

// Additive smoothing applied to empirical prediction frequencies.
double sp_smoothing_epsilon(std::size_t n, int m);

AggregationResult prediction_normalized_votes(const Profile& profile);

// Population-level prediction-normalized vote with f = Pr_s(. | sigma*).
std::vector<double> exact_vbar(const ModelSpec& spec, const Prior& prior = Prior::uniform());

struct VbarBounds {
  double lower = 0.0;
  double upper = 0.0;
};
// f(sigma) / sum_s Pr_s(sigma | s) and f(sigma) / min_s Pr_s(sigma | s), per sigma.
std::vector<VbarBounds> vbar_bounds(const ModelSpec& spec);

enum class SpScoreForm { Ratio, Difference };

AggregationResult sp_vote_modal(const Profile& profile, SpScoreForm form = SpScoreForm::Ratio);

// Full-posterior profiles go through prediction_normalized_votes, modal ones
// through sp_vote_modal.
AggregationResult sp_aggregate(const Profile& profile, SpScoreForm form = SpScoreForm::Ratio);

enum class PartialAggregator { Copeland };

// SP per subset profile, then the winning partial rankings are merged into a
// full ranking of the external ids {0..M-1}.
Ranking partial_sp(const std::vector<Profile>& profiles, PartialAggregator aggregator = PartialAggregator::Copeland);

}  // namespace spvote
