#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spvote/rank_models.hpp"
#include "spvote/sp_engine.hpp"

namespace spvote {

enum class AggregatorKind { SpFull, SpModal, Copeland, Borda };

// "sp-full", "sp-modal", "copeland", "borda".
const char* to_string(AggregatorKind kind);
AggregatorKind parse_aggregator(const std::string& text);

// How synthetic SP-modal voters form their reported ranking: the argmax of
// Pr_o(. | vote), or one draw from Pr_o(. | vote).
enum class PredictionMode { BayesModal, PosteriorDraw };

const char* to_string(PredictionMode mode);
PredictionMode parse_prediction_mode(const std::string& text);

// n synthetic voters drawn from the model, each with a rank prediction formed per `mode`.
Profile simulate_profile(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                         PredictionMode mode = PredictionMode::BayesModal);

struct ExperimentConfig {
  ModelSpec model;
  std::vector<AggregatorKind> aggregators;
  std::vector<std::size_t> sample_sizes;
  std::size_t trials = 100;
  std::size_t bootstrap_reps = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  // Draw a fresh uniformly random ground truth for every trial.
  bool randomize_ground_truth = false;
  PredictionMode prediction_mode = PredictionMode::BayesModal;
  unsigned threads = 0;  // 0 = all available cores

  void validate() const;
};

struct BootstrapInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap of the mean.
BootstrapInterval bootstrap_ci(const std::vector<double>& values, std::size_t reps, double level, std::uint64_t seed);

struct ResultRow {
  AggregatorKind aggregator = AggregatorKind::Copeland;
  std::size_t n = 0;
  double mean_kt = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t trials = 0;
  std::vector<double> values;  // per-trial Kendall-tau distance, trial order
};

struct ExperimentResult {
  int m = 0;
  std::vector<ResultRow> rows;  // aggregator-major, in config order
  std::vector<std::string> metadata;

  const ResultRow& row(AggregatorKind aggregator, std::size_t n) const;
};

ExperimentResult run_sample_complexity(const ExperimentConfig& cfg);

struct QuestionData {
  std::string key;
  Profile profile;
  Ranking ground_truth;  // over the profile's local indices
};

struct RealDataConfig {
  std::vector<AggregatorKind> aggregators;
  std::vector<std::size_t> sample_sizes;
  std::size_t trials = 100;
  std::size_t bootstrap_reps = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void validate() const;
};

// Subsamples voters without replacement per question and averages the
// Kendall-tau distance over questions.
ExperimentResult run_real_data(const std::vector<QuestionData>& questions, const RealDataConfig& cfg);

}  // namespace spvote
