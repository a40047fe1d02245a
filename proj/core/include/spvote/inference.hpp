#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spvote/mcmc.hpp"
#include "spvote/rank_models.hpp"
#include "spvote/rankings.hpp"

namespace spvote {

// Kendall-tau distances of one participant's vote and prediction to the ground truth.
struct DistancePair {
  int vote = 0;
  int prediction = 0;
};

struct RankingPair {
  Ranking vote;
  Ranking prediction;
};

struct NormalPrior {
  double location = 0.0;
  double scale = 1.0;
};

struct PriorSpec {
  std::vector<double> proportion_concentration;  // Dirichlet, one entry per group
  // Mallows mixtures: Normal priors on each group's dispersion, truncated to (0, 1].
  std::vector<NormalPrior> vote_dispersion;
  std::vector<NormalPrior> prediction_dispersion;
  // Plackett-Luce mixtures: Dirichlet concentrations per group row.
  std::vector<std::vector<double>> vote_concentration;
  std::vector<std::vector<double>> prediction_concentration;

  // Evenly spread dispersion locations from 0.1 to 0.8 with scale 0.3.
  static PriorSpec cmm_default(int groups);
  // Dirichlet(2,2,4) proportions and the expert / intermediate / non-expert Normal priors.
  static PriorSpec cmm_three_group();
  // Flat Dirichlet rows, vote concentrations decreasing from G+1 to 2.
  static PriorSpec cmpl_default(int groups, int m);
  // Dirichlet(1,2,3) proportions, vote rows 3/2/1, prediction rows 1.
  static PriorSpec cmpl_three_group(int m);

  int groups() const { return static_cast<int>(proportion_concentration.size()); }
  void validate_cmm(int groups) const;
  void validate_cmpl(int groups, int m) const;
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double rhat = 0.0;
  double ess = 0.0;
};

// Draws on the natural scale. Mallows layout: p[G], vote dispersions[G],
// prediction dispersions[G]. Plackett-Luce layout: p[G], vote rows G x m,
// prediction rows G x m. Groups are ordered expert first in every draw.
struct PosteriorSamples {
  ModelKind kind = ModelKind::Cmm;
  int groups = 0;
  int m = 0;
  int chains = 0;
  std::size_t draws_per_chain = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> draws;  // chain-major
  double acceptance_rate = 0.0;
  std::size_t constraint_rejections = 0;
  std::size_t nonfinite_rejections = 0;
  std::vector<ParameterSummary> summary;
  std::vector<std::string> notes;

  std::vector<double> proportions(std::size_t draw) const;
  std::vector<double> vote_dispersions(std::size_t draw) const;
  std::vector<double> prediction_dispersions(std::size_t draw) const;
  std::vector<std::vector<double>> vote_strengths(std::size_t draw) const;
  std::vector<std::vector<double>> prediction_strengths(std::size_t draw) const;
  std::vector<double> posterior_mean() const;
};

// Gaussian-on-distance likelihood with the exact Mallows mean and standard deviation.
PosteriorSamples cmm_infer(const std::vector<DistancePair>& data, int m, int groups, const PriorSpec& priors,
                           const McmcConfig& cfg);
// Exact Mallows mixture likelihood of each vote and prediction.
PosteriorSamples cmm_exact_infer(const std::vector<RankingPair>& data, const Ranking& ground_truth, int groups,
                                 const PriorSpec& priors, const McmcConfig& cfg);
PosteriorSamples cmpl_infer(const std::vector<RankingPair>& data, const Ranking& ground_truth, int groups,
                            const PriorSpec& priors, const McmcConfig& cfg);

std::vector<DistancePair> to_distances(const std::vector<RankingPair>& data, const Ranking& ground_truth);

// parameter,mean,sd,q05,q95,rhat,ess with six decimals.
std::string summary_csv(const PosteriorSamples& samples);

// A Plackett-Luce fit over a subset; ground_truth lists the subset's external
// ids in the order the fit's strength positions refer to.
struct SubsetFit {
  std::vector<Alternative> ground_truth;
  PosteriorSamples samples;
};

struct FullRankingPrediction {
  std::vector<Ranking> replicates;
  std::map<Ranking, std::size_t> distribution;
  std::vector<std::size_t> kt_histogram;  // empty without a reference
};

// Bootstrap of stitched full rankings for one group (0 = expert): each
// replicate draws one posterior sample per subset, averages each alternative's
// vote strength over the subsets containing it, and ranks by strength.
FullRankingPrediction predict_full_ranking_cmpl(const std::vector<SubsetFit>& fits, int universe_m, int group,
                                                std::size_t bootstrap, std::uint64_t seed,
                                                const std::optional<Ranking>& reference = std::nullopt);

}  // namespace spvote
