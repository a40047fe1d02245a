#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spvote/experiments.hpp"
#include "spvote/inference.hpp"
#include "spvote/rank_models.hpp"
#include "spvote/sp_engine.hpp"

namespace spvote {

// One question's reports. Local indices 0..k-1 map to the sorted external ids
// in profile.alternatives (left empty when the ids already are 0..k-1).
struct QuestionProfile {
  std::string domain;
  std::string question_id;
  std::vector<std::string> participants;  // parallel to profile.reports
  Profile profile;

  friend bool operator==(const QuestionProfile&, const QuestionProfile&) = default;
};

// Keyed by "domain/question_id".
using ProfileSet = std::map<std::string, QuestionProfile>;

std::string question_key(const std::string& domain, const std::string& question_id);

inline constexpr const char* kProfileHeader = "domain,question_id,participant_id,vote,prediction_type,prediction_value";
inline constexpr const char* kGroundTruthHeader = "domain,question_id,ranking";
inline constexpr const char* kResultsHeader = "aggregator,n,mean_kt,ci_lo,ci_hi,trials";

ProfileSet parse_profiles(std::istream& in);
ProfileSet load_profiles(const std::filesystem::path& path);
// Modal, top and top-t predictions only; full posteriors have no CSV form.
std::string format_profiles(const ProfileSet& profiles);
void save_profiles(const ProfileSet& profiles, const std::filesystem::path& path);

// Ground-truth orders over external ids, keyed like ProfileSet.
using GroundTruthSet = std::map<std::string, std::vector<Alternative>>;
GroundTruthSet parse_ground_truth(std::istream& in);
GroundTruthSet load_ground_truth(const std::filesystem::path& path);

// Pairs every question with its ground truth in local indices.
std::vector<QuestionData> join_questions(const ProfileSet& profiles, const GroundTruthSet& truths);

std::string format_results(const ExperimentResult& result);
void save_results(const ExperimentResult& result, const std::filesystem::path& path);
// Rows without per-trial values; numbers carry the six-decimal precision of the file.
ExperimentResult parse_results(std::istream& in);

nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);
ModelSpec load_model(const std::filesystem::path& path);

// {model, aggregators, sample_sizes, trials, bootstrap_reps, confidence, seed,
//  randomize_ground_truth, prediction_mode}
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);

// {mcmc: {chains, iterations, warmup, proposal_scale, seed}, priors: {...}}
McmcConfig mcmc_from_json(const nlohmann::json& j, McmcConfig defaults = {});
PriorSpec priors_from_json(const nlohmann::json& j);
nlohmann::json priors_to_json(const PriorSpec& priors);

nlohmann::json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace spvote
