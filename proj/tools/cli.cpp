#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <optional>
#include <ostream>
#include <sstream>

#include "spvote/baselines.hpp"
#include "spvote/dataset_io.hpp"
#include "spvote/errors.hpp"
#include "spvote/experiments.hpp"
#include "spvote/identifiability.hpp"
#include "spvote/inference.hpp"
#include "spvote/sp_engine.hpp"

namespace spvote::cli {

namespace {

using nlohmann::json;

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ParameterError(std::string(flag) + ": not a number list: '" + text + "'");
    }
  }
  if (out.empty()) throw ParameterError(std::string(flag) + ": empty list");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

std::string external_text(const Profile& profile, const Ranking& local) {
  std::string out;
  for (auto a : profile.to_external(local)) {
    if (!out.empty()) out.push_back('>');
    out += std::to_string(a);
  }
  return out;
}

ProfileSet select_questions(ProfileSet all, const std::string& question) {
  if (question.empty()) return all;
  const auto it = all.find(question);
  if (it == all.end()) throw ValidationError("no question '" + question + "' in the profile file");
  ProfileSet one;
  one.insert(*it);
  return one;
}

// Rank-prediction reports of the selected questions, relabelled so that every
// question's ground truth becomes the identity.
std::vector<RankingPair> pooled_pairs(const std::vector<QuestionData>& questions, int& m) {
  std::vector<RankingPair> pairs;
  m = 0;
  for (const auto& q : questions) {
    if (m == 0) m = q.profile.m;
    if (q.profile.m != m) throw ValidationError("pooled questions must share the number of alternatives");
    for (const auto& r : q.profile.reports) {
      if (const auto* modal = std::get_if<ModalRanking>(&r.prediction)) {
        pairs.push_back({relative_to(r.vote, q.ground_truth), relative_to(modal->ranking, q.ground_truth)});
      }
    }
  }
  if (pairs.empty()) throw ValidationError("no reports with rank predictions to fit");
  return pairs;
}

json report_json(const IdentifiabilityReport& r) {
  json j;
  j["lemma"] = to_string(r.lemma);
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["satisfied"] = r.satisfied;
  if (r.partition_s) j["partition_s"] = *r.partition_s;
  if (r.alpha) j["alpha"] = *r.alpha;
  return j;
}

struct InferOptions {
  std::string in;
  std::string truth;
  std::string question;
  std::string config;
  std::string priors = "default";
  int groups = 2;
  std::uint64_t seed = 0;
  int chains = 0;
  int iterations = 0;
  int warmup = 0;
  unsigned threads = 0;
};

void add_infer_flags(CLI::App* cmd, InferOptions& o) {
  cmd->add_option("--in", o.in, "Profiles CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--truth", o.truth, "Ground-truth CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--question", o.question, "Restrict to one question key (domain/question_id)");
  cmd->add_option("--groups", o.groups, "Number of mixture groups")->check(CLI::PositiveNumber);
  cmd->add_option("--config", o.config, "JSON with optional 'mcmc' and 'priors' objects")->check(CLI::ExistingFile);
  cmd->add_option("--priors", o.priors, "Built-in priors when the config has none")
      ->check(CLI::IsMember({"default", "three-group"}));
  cmd->add_option("--seed", o.seed, "Master seed")->required();
  cmd->add_option("--chains", o.chains, "Override chain count");
  cmd->add_option("--iterations", o.iterations, "Override iterations per chain (warmup included)");
  cmd->add_option("--warmup", o.warmup, "Override warmup iterations");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

McmcConfig mcmc_for(const InferOptions& o, const json& config) {
  McmcConfig cfg;
  if (config.contains("mcmc")) cfg = mcmc_from_json(config.at("mcmc"), cfg);
  cfg.seed = o.seed;
  if (o.chains > 0) cfg.chains = o.chains;
  if (o.iterations > 0) cfg.iterations = o.iterations;
  if (o.warmup > 0) cfg.warmup = o.warmup;
  cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

PriorSpec priors_for(const InferOptions& o, const json& config, bool mallows, int m) {
  if (config.contains("priors")) return priors_from_json(config.at("priors"));
  if (o.priors == "three-group") {
    if (o.groups != 3) throw ValidationError("three-group priors need --groups 3");
    return mallows ? PriorSpec::cmm_three_group() : PriorSpec::cmpl_three_group(m);
  }
  return mallows ? PriorSpec::cmm_default(o.groups) : PriorSpec::cmpl_default(o.groups, m);
}

json samples_json(const PosteriorSamples& s) {
  json j;
  j["draws"] = s.draws.size();
  j["acceptance_rate"] = s.acceptance_rate;
  j["constraint_rejections"] = s.constraint_rejections;
  j["nonfinite_rejections"] = s.nonfinite_rejections;
  j["notes"] = s.notes;
  return j;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surprisingly popular voting lab for concentric Mallows and Plackett-Luce mixtures", "spvote"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // simulate
  std::string model_path, out_path, prediction_mode = "bayes_modal", domain = "synthetic", question_id = "q1";
  std::string truth_out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Draw voters with rank predictions from a model spec");
  simulate->add_option("--model", model_path, "ModelSpec JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--n", n, "Number of voters")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Seed")->required();
  simulate->add_option("--out", out_path, "Profiles CSV to write")->required();
  simulate->add_option("--prediction", prediction_mode, "bayes_modal or posterior_draw")
      ->check(CLI::IsMember({"bayes_modal", "posterior_draw"}));
  simulate->add_option("--domain", domain, "Domain label");
  simulate->add_option("--question", question_id, "Question label");
  simulate->add_option("--truth-out", truth_out, "Also write the ground truth CSV");

  // aggregate
  std::string rule, in_path, question, form = "ratio";
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate each question of a profiles CSV");
  aggregate->add_option("--rule", rule, "copeland, borda, sp-modal or partial-sp")
      ->required()
      ->check(CLI::IsMember({"copeland", "borda", "sp-modal", "sp-full", "partial-sp"}));
  aggregate->add_option("--in", in_path, "Profiles CSV")->required()->check(CLI::ExistingFile);
  aggregate->add_option("--question", question, "Restrict to one question key (domain/question_id)");
  aggregate->add_option("--form", form, "SP score form: ratio or difference")
      ->check(CLI::IsMember({"ratio", "difference"}));

  // check-identifiability
  std::string lemma, phi_text, p_text, theta1_text, theta2_text;
  double p1 = 0.0;
  int m = 0;
  int partition = 1;
  auto* check = app.add_subcommand("check-identifiability", "Evaluate an identifiability condition");
  check->add_option("--lemma", lemma, "cmm2, cmmg, cmpl2 or cmplg")->required();
  check->add_option("--p1", p1, "Expert proportion (two-group conditions)");
  check->add_option("--phi", phi_text, "Comma-separated dispersions");
  check->add_option("--p", p_text, "Comma-separated proportions (cmmg)");
  check->add_option("--m", m, "Number of alternatives");
  check->add_option("--theta1", theta1_text, "Expert strengths (cmpl2)");
  check->add_option("--theta2", theta2_text, "Non-expert strengths (cmpl2)");
  check->add_option("--model", model_path, "ModelSpec JSON (general conditions)")->check(CLI::ExistingFile);
  check->add_option("--s", partition, "Partition index, 1 <= s < G");

  // infer
  InferOptions infer_opts;
  std::string infer_model = "cmm";
  auto* infer = app.add_subcommand("infer", "Fit a mixture to votes and rank predictions");
  infer->add_option("--model", infer_model, "cmm (Gaussian distance), cmm-exact or cmpl")
      ->check(CLI::IsMember({"cmm", "cmm-exact", "cmpl"}));
  add_infer_flags(infer, infer_opts);
  infer->add_option("--out", out_path, "Posterior summary CSV")->required();

  // experiment
  std::string config_path, truth_path, aggregators_text = "sp-modal,copeland", sizes_text;
  std::size_t trials = 100, reps = 1000;
  double confidence = 0.95;
  unsigned threads = 0;
  auto* experiment = app.add_subcommand("experiment", "Sample-complexity experiment (synthetic or real data)");
  auto* config_opt = experiment->add_option("--config", config_path, "Synthetic ExperimentConfig JSON")->check(CLI::ExistingFile);
  auto* in_opt = experiment->add_option("--in", in_path, "Real-data profiles CSV")->check(CLI::ExistingFile);
  experiment->add_option("--truth", truth_path, "Real-data ground-truth CSV")->check(CLI::ExistingFile)->needs(in_opt);
  experiment->add_option("--aggregators", aggregators_text, "Real data: comma-separated aggregators");
  experiment->add_option("--sizes", sizes_text, "Real data: comma-separated sample sizes");
  experiment->add_option("--trials", trials, "Real data: trials per size");
  experiment->add_option("--bootstrap", reps, "Real data: bootstrap replicates");
  experiment->add_option("--confidence", confidence, "Real data: confidence level");
  experiment->add_option("--seed", seed, "Master seed (overrides the config)")->required();
  experiment->add_option("--threads", threads, "Worker threads (0 = all cores)");
  experiment->add_option("--out", out_path, "Results CSV")->required();
  config_opt->excludes(in_opt);

  // predict-full
  InferOptions full_opts;
  int group = 0;
  std::size_t bootstrap = 200;
  std::string reference_text;
  auto* predict = app.add_subcommand("predict-full", "Stitch subset Plackett-Luce fits into full rankings");
  add_infer_flags(predict, full_opts);
  predict->add_option("--group", group, "Group index, 0 = most expert");
  predict->add_option("--bootstrap", bootstrap, "Bootstrap replicates")->check(CLI::PositiveNumber);
  predict->add_option("--reference", reference_text, "Reference ranking over external ids, e.g. 0>1>2");
  predict->add_option("--out", out_path, "Optional JSON output file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 1;
  }

  try {
    if (simulate->parsed()) {
      const auto spec = load_model(model_path);
      QuestionProfile q;
      q.domain = domain;
      q.question_id = question_id;
      q.profile = simulate_profile(spec, n, seed, parse_prediction_mode(prediction_mode));
      for (std::size_t i = 0; i < n; ++i) q.participants.push_back("p" + std::to_string(i + 1));
      ProfileSet set;
      set.emplace(question_key(domain, question_id), std::move(q));
      save_profiles(set, out_path);
      if (!truth_out.empty()) {
        write_text(truth_out, std::string(kGroundTruthHeader) + "\n" + domain + "," + question_id + "," +
                                  to_text(spec.ground_truth()) + "\n");
      }
      out << json{{"written", out_path}, {"reports", n}}.dump() << "\n";
    } else if (aggregate->parsed()) {
      const auto profiles = select_questions(load_profiles(in_path), question);
      const auto score_form = form == "ratio" ? SpScoreForm::Ratio : SpScoreForm::Difference;
      if (rule == "partial-sp") {
        std::vector<Profile> subsets;
        for (const auto& [key, q] : profiles) subsets.push_back(q.profile);
        out << json{{"rule", rule}, {"winner", to_text(partial_sp(subsets))}}.dump() << "\n";
      } else {
        const auto kind = parse_aggregator(rule);
        for (const auto& [key, q] : profiles) {
          std::vector<Ranking> votes;
          for (const auto& r : q.profile.reports) votes.push_back(r.vote);
          if (votes.empty()) throw ValidationError("question " + key + " has no reports");
          json j{{"question", key}, {"rule", rule}};
          if (kind == AggregatorKind::Copeland || kind == AggregatorKind::Borda) {
            const auto scores = kind == AggregatorKind::Copeland ? copeland_scores(pairwise_tally(votes)) : borda_scores(votes);
            json by_id = json::object();
            for (int a = 0; a < q.profile.m; ++a) by_id[std::to_string(q.profile.external_id(a))] = scores[static_cast<std::size_t>(a)];
            j["winner"] = external_text(q.profile, order_by_scores(scores));
            j["scores"] = by_id;
          } else {
            const auto result = sp_aggregate(q.profile, score_form);
            json scores = json::array();
            for (const auto& s : result.scores) scores.push_back({{"ranking", external_text(q.profile, s.ranking)}, {"score", s.score}});
            j["winner"] = external_text(q.profile, result.winner);
            j["scores"] = scores;
            j["diagnostics"] = result.diagnostics;
          }
          out << j.dump() << "\n";
        }
      }
    } else if (check->parsed()) {
      const auto tag = parse_lemma_tag(lemma);
      IdentifiabilityReport report;
      switch (tag) {
        case LemmaTag::Cmm2: {
          const auto phi = parse_list(phi_text, "--phi");
          if (phi.size() != 2) throw ParameterError("--phi needs two dispersions");
          if (m < 1) throw ParameterError("--m is required");
          report = cmm_g2_condition(p1, phi[0], phi[1], m);
          break;
        }
        case LemmaTag::CmmG: {
          if (!model_path.empty()) {
            const auto spec = load_model(model_path);
            report = cmm_general_condition(spec.cmm_params(), partition, spec.m());
          } else {
            if (m < 1) throw ParameterError("--m is required");
            report = cmm_general_condition(CmmParams{parse_list(p_text, "--p"), parse_list(phi_text, "--phi")}, partition, m);
          }
          break;
        }
        case LemmaTag::Cmpl2:
          report = cmpl_g2_condition(p1, parse_list(theta1_text, "--theta1"), parse_list(theta2_text, "--theta2"));
          break;
        case LemmaTag::CmplG: {
          if (model_path.empty()) throw ParameterError("--model is required for cmplg");
          report = cmpl_general_condition(load_model(model_path).cmpl_params(), partition);
          break;
        }
      }
      out << report_json(report).dump() << "\n";
    } else if (infer->parsed()) {
      const auto questions = join_questions(select_questions(load_profiles(infer_opts.in), infer_opts.question),
                                            load_ground_truth(infer_opts.truth));
      int qm = 0;
      const auto pairs = pooled_pairs(questions, qm);
      const json config = infer_opts.config.empty() ? json::object() : read_json(infer_opts.config);
      const auto cfg = mcmc_for(infer_opts, config);
      const bool mallows = infer_model != "cmpl";
      const auto priors = priors_for(infer_opts, config, mallows, qm);
      const auto identity = Ranking::identity(qm);
      PosteriorSamples samples;
      if (infer_model == "cmm") {
        samples = cmm_infer(to_distances(pairs, identity), qm, infer_opts.groups, priors, cfg);
      } else if (infer_model == "cmm-exact") {
        samples = cmm_exact_infer(pairs, identity, infer_opts.groups, priors, cfg);
      } else {
        samples = cmpl_infer(pairs, identity, infer_opts.groups, priors, cfg);
      }
      write_text(out_path, summary_csv(samples));
      out << samples_json(samples).dump() << "\n";
    } else if (experiment->parsed()) {
      ExperimentResult result;
      if (!config_path.empty()) {
        auto cfg = experiment_from_json(read_json(config_path));
        cfg.seed = seed;
        cfg.threads = threads;
        result = run_sample_complexity(cfg);
      } else if (!in_path.empty()) {
        if (truth_path.empty()) throw ParameterError("--truth is required with --in");
        RealDataConfig cfg;
        for (const auto& name : split_names(aggregators_text)) cfg.aggregators.push_back(parse_aggregator(name));
        for (double v : parse_list(sizes_text, "--sizes")) {
          if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) throw ParameterError("--sizes must be positive integers");
          cfg.sample_sizes.push_back(static_cast<std::size_t>(v));
        }
        cfg.trials = trials;
        cfg.bootstrap_reps = reps;
        cfg.confidence = confidence;
        cfg.seed = seed;
        cfg.threads = threads;
        result = run_real_data(join_questions(load_profiles(in_path), load_ground_truth(truth_path)), cfg);
      } else {
        throw ParameterError("experiment needs --config or --in/--truth");
      }
      save_results(result, out_path);
      out << json{{"written", out_path}, {"rows", result.rows.size()}, {"metadata", result.metadata}}.dump() << "\n";
    } else if (predict->parsed()) {
      const auto questions = join_questions(select_questions(load_profiles(full_opts.in), full_opts.question),
                                            load_ground_truth(full_opts.truth));
      const json config = full_opts.config.empty() ? json::object() : read_json(full_opts.config);
      const auto cfg = mcmc_for(full_opts, config);
      std::vector<SubsetFit> fits;
      int universe = 0;
      for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& q = questions[i];
        int qm = 0;
        const auto pairs = pooled_pairs({q}, qm);
        auto qcfg = cfg;
        qcfg.seed = derive_seed(cfg.seed, i, 1);
        SubsetFit fit;
        for (auto a : q.ground_truth) {
          fit.ground_truth.push_back(q.profile.external_id(a));
          universe = std::max(universe, fit.ground_truth.back() + 1);
        }
        fit.samples = cmpl_infer(pairs, Ranking::identity(qm), full_opts.groups, priors_for(full_opts, config, false, qm), qcfg);
        fits.push_back(std::move(fit));
      }
      std::optional<Ranking> reference;
      if (!reference_text.empty()) reference = parse_ranking(reference_text);
      const auto prediction =
          predict_full_ranking_cmpl(fits, universe, group, bootstrap, derive_seed(full_opts.seed, 0, 2), reference);
      json dist = json::array();
      for (const auto& [ranking, count] : prediction.distribution) dist.push_back({{"ranking", to_text(ranking)}, {"count", count}});
      json j{{"universe_m", universe}, {"group", group}, {"bootstrap", bootstrap}, {"distribution", dist}};
      if (reference) j["kt_histogram"] = prediction.kt_histogram;
      if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
      out << j.dump() << "\n";
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace spvote::cli
