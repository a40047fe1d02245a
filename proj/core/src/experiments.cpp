#include "spvote/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "spvote/baselines.hpp"
#include "spvote/errors.hpp"
#include "spvote/mcmc.hpp"
#include "spvote/parallel.hpp"

namespace spvote {

namespace {

constexpr std::uint64_t kGroundTruthStream = 0x67742d73;
constexpr std::uint64_t kBootstrapStream = 0x62732d73;

void check_grid(const std::vector<AggregatorKind>& aggregators, const std::vector<std::size_t>& sizes,
                std::size_t trials, std::size_t reps, double confidence) {
  if (aggregators.empty()) throw ParameterError("no aggregators configured");
  std::set<AggregatorKind> distinct(aggregators.begin(), aggregators.end());
  if (distinct.size() != aggregators.size()) throw ParameterError("aggregator listed twice");
  if (sizes.empty()) throw ParameterError("no sample sizes configured");
  if (sizes.front() == 0) throw ParameterError("sample sizes must be positive");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw ParameterError("sample sizes must be strictly increasing");
  }
  if (trials < 1) throw ParameterError("trials must be at least 1");
  if (reps < 1) throw ParameterError("bootstrap_reps must be at least 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ParameterError("confidence must lie in (0, 1)");
}

Ranking random_ranking(int m, Rng& rng) {
  std::vector<Alternative> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  return Ranking(std::move(order));
}

Ranking aggregate(AggregatorKind kind, const Profile& profile, const std::vector<Ranking>& votes) {
  switch (kind) {
    case AggregatorKind::SpFull: return prediction_normalized_votes(profile).winner;
    case AggregatorKind::SpModal: return sp_vote_modal(profile).winner;
    case AggregatorKind::Copeland: return copeland(votes);
    case AggregatorKind::Borda: return borda(votes);
  }
  throw Error("unknown aggregator");
}

bool needs(const std::vector<AggregatorKind>& list, AggregatorKind kind) {
  return std::find(list.begin(), list.end(), kind) != list.end();
}

void fill_rows(ExperimentResult& result, const std::vector<AggregatorKind>& aggregators,
               const std::vector<std::size_t>& sizes, std::vector<std::vector<std::vector<double>>>& kt,
               std::size_t reps, double confidence, std::uint64_t seed) {
  for (std::size_t a = 0; a < aggregators.size(); ++a) {
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      ResultRow row;
      row.aggregator = aggregators[a];
      row.n = sizes[k];
      row.values = std::move(kt[a][k]);
      row.trials = row.values.size();
      const auto ci = bootstrap_ci(row.values, reps, confidence, derive_seed(seed ^ kBootstrapStream, a, k));
      row.mean_kt = ci.mean;
      row.ci_lo = ci.lower;
      row.ci_hi = ci.upper;
      result.rows.push_back(std::move(row));
    }
  }
}

}  // namespace

const char* to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::SpFull: return "sp-full";
    case AggregatorKind::SpModal: return "sp-modal";
    case AggregatorKind::Copeland: return "copeland";
    case AggregatorKind::Borda: return "borda";
  }
  return "?";
}

AggregatorKind parse_aggregator(const std::string& text) {
  if (text == "sp-full" || text == "sp_full") return AggregatorKind::SpFull;
  if (text == "sp-modal" || text == "sp_modal" || text == "sp") return AggregatorKind::SpModal;
  if (text == "copeland") return AggregatorKind::Copeland;
  if (text == "borda") return AggregatorKind::Borda;
  throw ParameterError("unknown aggregator '" + text + "'");
}

const char* to_string(PredictionMode mode) {
  return mode == PredictionMode::BayesModal ? "bayes_modal" : "posterior_draw";
}

PredictionMode parse_prediction_mode(const std::string& text) {
  if (text == "bayes_modal") return PredictionMode::BayesModal;
  if (text == "posterior_draw") return PredictionMode::PosteriorDraw;
  throw ParameterError("unknown prediction mode '" + text + "'");
}

Profile simulate_profile(const ModelSpec& spec, std::size_t n, std::uint64_t seed, PredictionMode mode) {
  const int m = spec.m();
  const BeliefModel belief(spec);
  Rng rng(seed);
  const auto sample = sample_model(spec, n, rng);
  Profile profile{m, {}, {}};
  for (const auto& vote : sample.rankings) {
    const auto v = rank_index(vote).value;
    std::size_t predicted = 0;
    if (mode == PredictionMode::BayesModal) {
      predicted = belief.modal_prediction(v);
    } else {
      const auto row = belief.predict(v);
      predicted = rng.categorical(row);
    }
    profile.reports.push_back({vote, ModalRanking{unrank(RankIndex{predicted}, m)}});
  }
  return profile;
}

void ExperimentConfig::validate() const {
  check_grid(aggregators, sample_sizes, trials, bootstrap_reps, confidence);
  if (needs(aggregators, AggregatorKind::SpFull) || needs(aggregators, AggregatorKind::SpModal)) {
    check_enumerable(model.m());
    if (model.m() > kMaxBeliefM) {
      throw CapacityError("SP aggregators need m <= " + std::to_string(kMaxBeliefM) + " for the m! x m! belief matrix");
    }
  }
}

void RealDataConfig::validate() const {
  check_grid(aggregators, sample_sizes, trials, bootstrap_reps, confidence);
}

const ResultRow& ExperimentResult::row(AggregatorKind aggregator, std::size_t n) const {
  for (const auto& r : rows) {
    if (r.aggregator == aggregator && r.n == n) return r;
  }
  throw ValidationError(std::string("no result row for ") + to_string(aggregator) + " at n=" + std::to_string(n));
}

BootstrapInterval bootstrap_ci(const std::vector<double>& values, std::size_t reps, double level, std::uint64_t seed) {
  if (values.empty()) throw ValidationError("bootstrap_ci needs a non-empty sample");
  if (reps < 1) throw ParameterError("bootstrap_ci needs reps >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("confidence level must lie in (0, 1)");
  const double n = static_cast<double>(values.size());
  BootstrapInterval out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  Rng rng(seed);
  std::vector<double> means(reps);
  for (auto& mean : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[rng.index(values.size())];
    mean = s / n;
  }
  const double tail = (1.0 - level) / 2.0;
  out.lower = std::min(out.mean, quantile(means, tail));
  out.upper = std::max(out.mean, quantile(means, 1.0 - tail));
  return out;
}

ExperimentResult run_sample_complexity(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& spec = cfg.model;
  const int m = spec.m();
  const bool sp_full = needs(cfg.aggregators, AggregatorKind::SpFull);
  const bool sp_modal = needs(cfg.aggregators, AggregatorKind::SpModal);

  std::optional<BeliefModel> belief;
  std::vector<Ranking> modal_table;
  if (sp_full || sp_modal) {
    belief.emplace(spec);
    for (std::size_t v = 0; v < belief->size(); ++v) modal_table.push_back(unrank(RankIndex{belief->modal_prediction(v)}, m));
  }

  const auto n_agg = cfg.aggregators.size();
  const auto n_sizes = cfg.sample_sizes.size();
  // kt[aggregator][size][trial]
  std::vector<std::vector<std::vector<double>>> kt(
      n_agg, std::vector<std::vector<double>>(n_sizes, std::vector<double>(cfg.trials, 0.0)));

  const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
  parallel_for(cfg.trials, threads, [&](std::size_t trial) {
    Ranking truth = spec.ground_truth();
    if (cfg.randomize_ground_truth) {
      Rng gt_rng(derive_seed(cfg.seed, trial, kGroundTruthStream));
      truth = random_ranking(m, gt_rng);
    }
    const auto trial_spec = spec.with_ground_truth(truth);
    for (std::size_t k = 0; k < n_sizes; ++k) {
      Rng rng(derive_seed(cfg.seed, trial, k));
      const auto sample = sample_model(trial_spec, cfg.sample_sizes[k], rng);
      const auto& votes = sample.rankings;

      Profile full_profile{m, {}, {}};
      Profile modal_profile{m, {}, {}};
      for (const auto& vote : votes) {
        const auto v = sp_full || sp_modal ? rank_index(vote).value : 0;
        if (sp_full) full_profile.reports.push_back({vote, FullPosterior{belief->predict(v)}});
        if (sp_modal) {
          Ranking prediction;
          if (cfg.prediction_mode == PredictionMode::BayesModal) {
            prediction = modal_table[v];
          } else {
            const auto row = belief->predict(v);
            prediction = unrank(RankIndex{rng.categorical(row)}, m);
          }
          modal_profile.reports.push_back({vote, ModalRanking{std::move(prediction)}});
        }
      }
      for (std::size_t a = 0; a < n_agg; ++a) {
        const auto kind = cfg.aggregators[a];
        const auto& profile = kind == AggregatorKind::SpFull ? full_profile : modal_profile;
        kt[a][k][trial] = kendall_tau(aggregate(kind, profile, votes), truth);
      }
    }
  });

  ExperimentResult result;
  result.m = m;
  result.metadata.push_back(std::string("model=") + to_string(spec.kind()) + " m=" + std::to_string(m) +
                            " G=" + std::to_string(spec.groups()));
  result.metadata.push_back(std::string("prediction_mode=") + to_string(cfg.prediction_mode));
  result.metadata.push_back(std::string("randomize_ground_truth=") + (cfg.randomize_ground_truth ? "true" : "false"));
  fill_rows(result, cfg.aggregators, cfg.sample_sizes, kt, cfg.bootstrap_reps, cfg.confidence, cfg.seed);
  return result;
}

ExperimentResult run_real_data(const std::vector<QuestionData>& questions, const RealDataConfig& cfg) {
  cfg.validate();
  if (questions.empty()) throw ValidationError("run_real_data needs at least one question");
  if (needs(cfg.aggregators, AggregatorKind::SpFull)) {
    throw ValidationError("sp-full needs full-posterior predictions, which real data does not carry");
  }
  const bool sp_modal = needs(cfg.aggregators, AggregatorKind::SpModal);

  ExperimentResult result;
  // usable report indices per question
  std::vector<std::vector<std::size_t>> pools(questions.size());
  std::size_t excluded = 0;
  for (std::size_t q = 0; q < questions.size(); ++q) {
    const auto& qd = questions[q];
    qd.profile.validate();
    if (qd.ground_truth.size() != qd.profile.m) throw DimensionError("ground truth size differs for question " + qd.key);
    for (std::size_t i = 0; i < qd.profile.reports.size(); ++i) {
      if (!sp_modal || std::holds_alternative<ModalRanking>(qd.profile.reports[i].prediction)) {
        pools[q].push_back(i);
      } else {
        ++excluded;
      }
    }
    if (pools[q].empty()) throw ValidationError("question " + qd.key + " has no usable reports");
    result.m = std::max(result.m, qd.profile.m);
  }
  if (excluded > 0) {
    result.metadata.push_back("excluded " + std::to_string(excluded) + " reports without rank predictions");
  }
  for (std::size_t k = 0; k < cfg.sample_sizes.size(); ++k) {
    for (std::size_t q = 0; q < questions.size(); ++q) {
      if (cfg.sample_sizes[k] > pools[q].size()) {
        result.metadata.push_back("n=" + std::to_string(cfg.sample_sizes[k]) + " clipped to " +
                                  std::to_string(pools[q].size()) + " for question " + questions[q].key);
      }
    }
  }

  const auto n_agg = cfg.aggregators.size();
  const auto n_sizes = cfg.sample_sizes.size();
  std::vector<std::vector<std::vector<double>>> kt(
      n_agg, std::vector<std::vector<double>>(n_sizes, std::vector<double>(cfg.trials, 0.0)));

  const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
  parallel_for(cfg.trials, threads, [&](std::size_t trial) {
    for (std::size_t k = 0; k < n_sizes; ++k) {
      Rng rng(derive_seed(cfg.seed, trial, k));
      std::vector<double> total(n_agg, 0.0);
      for (std::size_t q = 0; q < questions.size(); ++q) {
        const auto& qd = questions[q];
        auto pool = pools[q];
        const auto take = std::min(cfg.sample_sizes[k], pool.size());
        for (std::size_t i = 0; i < take; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
        pool.resize(take);
        std::sort(pool.begin(), pool.end());
        Profile sub{qd.profile.m, qd.profile.alternatives, {}};
        std::vector<Ranking> votes;
        for (auto i : pool) {
          sub.reports.push_back(qd.profile.reports[i]);
          votes.push_back(qd.profile.reports[i].vote);
        }
        for (std::size_t a = 0; a < n_agg; ++a) {
          total[a] += kendall_tau(aggregate(cfg.aggregators[a], sub, votes), qd.ground_truth);
        }
      }
      for (std::size_t a = 0; a < n_agg; ++a) kt[a][k][trial] = total[a] / static_cast<double>(questions.size());
    }
  });

  result.metadata.push_back("questions=" + std::to_string(questions.size()));
  fill_rows(result, cfg.aggregators, cfg.sample_sizes, kt, cfg.bootstrap_reps, cfg.confidence, cfg.seed);
  return result;
}

}  // namespace spvote
