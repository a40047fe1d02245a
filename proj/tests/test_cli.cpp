#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "printers.hpp"
#include "cli.hpp"
#include "spvote/baselines.hpp"
#include "spvote/dataset_io.hpp"
#include "spvote/experiments.hpp"
#include "spvote/identifiability.hpp"
#include "spvote/inference.hpp"

using namespace spvote;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = SPVOTE_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "spvote_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, AggregateCopelandFixture) {
  const auto r = run({"aggregate", "--rule", "copeland", "--in", (kData / "fixtures" / "copeland3.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["winner"], "0>1>2");
  EXPECT_EQ(j["question"], "toy/q1");
}

TEST(Cli, AggregateMatchesLibrary) {
  const auto path = kData / "fixtures" / "toy_profiles.csv";
  const auto q = load_profiles(path).at("countries/q1");
  std::vector<Ranking> votes;
  for (const auto& rep : q.profile.reports) votes.push_back(rep.vote);
  const auto r = run({"aggregate", "--rule", "borda", "--in", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string want;
  for (auto a : q.profile.to_external(borda(votes))) want += (want.empty() ? "" : ">") + std::to_string(a);
  EXPECT_EQ(json::parse(r.out)["winner"], want);
}

TEST(Cli, CheckIdentifiabilityMatchesLibrary) {
  const auto r = run({"check-identifiability", "--lemma", "cmm2", "--p1", "0.4", "--phi", "0.1,0.9", "--m", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  const auto want = cmm_g2_condition(0.4, 0.1, 0.9, 3);
  EXPECT_EQ(j["satisfied"], true);
  EXPECT_EQ(j["lemma"], "CMM-2");
  EXPECT_DOUBLE_EQ(j["lhs"].get<double>(), want.lhs);
  EXPECT_DOUBLE_EQ(j["rhs"].get<double>(), want.rhs);

  const auto g = run({"check-identifiability", "--lemma", "cmmg", "--model", (kData / "configs" / "cmm_m3.json").string(), "--s", "1"});
  ASSERT_EQ(g.code, 0) << g.err;
  const auto spec = load_model(kData / "configs" / "cmm_m3.json");
  EXPECT_DOUBLE_EQ(json::parse(g.out)["lhs"].get<double>(), cmm_general_condition(spec.cmm_params(), 1, 3).lhs);

  const auto bad = run({"check-identifiability", "--lemma", "cmm2", "--p1", "0.7", "--phi", "0.1,0.9", "--m", "3"});
  EXPECT_EQ(bad.code, 1);
}

TEST(Cli, SimulateIsDeterministicAndMatchesLibrary) {
  const auto model = kData / "configs" / "cmm_m3.json";
  const auto a = scratch("sim_a.csv");
  const auto b = scratch("sim_b.csv");
  ASSERT_EQ(run({"simulate", "--model", model.string(), "--n", "100", "--seed", "7", "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"simulate", "--model", model.string(), "--n", "100", "--seed", "7", "--out", b.string()}).code, 0);
  EXPECT_EQ(read_text(a), read_text(b));
  const auto set = load_profiles(a);
  ASSERT_EQ(set.size(), 1u);
  const auto& profile = set.begin()->second.profile;
  EXPECT_EQ(profile.reports.size(), 100u);
  EXPECT_EQ(profile, simulate_profile(load_model(model), 100, 7));
}

TEST(Cli, ExperimentMatchesLibraryAndIgnoresThreads) {
  const auto config = kData / "configs" / "experiment_small.json";
  const auto a = scratch("exp_a.csv");
  const auto b = scratch("exp_b.csv");
  ASSERT_EQ(run({"experiment", "--config", config.string(), "--seed", "5", "--threads", "1", "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"experiment", "--config", config.string(), "--seed", "5", "--threads", "3", "--out", b.string()}).code, 0);
  EXPECT_EQ(read_text(a), read_text(b));
  auto cfg = experiment_from_json(read_json(config));
  cfg.seed = 5;
  EXPECT_EQ(read_text(a), format_results(run_sample_complexity(cfg)));
}

TEST(Cli, InferMatchesLibrary) {
  const auto model = kData / "configs" / "cmm_m3.json";
  const auto profiles = scratch("infer_profiles.csv");
  const auto truth = scratch("infer_truth.csv");
  ASSERT_EQ(run({"simulate", "--model", model.string(), "--n", "60", "--seed", "3", "--out", profiles.string(), "--truth-out",
                 truth.string()})
                .code,
            0);
  const auto out = scratch("infer_summary.csv");
  const auto r = run({"infer", "--model", "cmm-exact", "--in", profiles.string(), "--truth", truth.string(), "--groups", "2",
                      "--seed", "9", "--chains", "2", "--iterations", "600", "--warmup", "200", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto questions = join_questions(load_profiles(profiles), load_ground_truth(truth));
  std::vector<RankingPair> pairs;
  for (const auto& rep : questions[0].profile.reports) {
    pairs.push_back({rep.vote, std::get<ModalRanking>(rep.prediction).ranking});
  }
  const McmcConfig cfg{.chains = 2, .iterations = 600, .warmup = 200, .seed = 9};
  const auto samples = cmm_exact_infer(pairs, questions[0].ground_truth, 2, PriorSpec::cmm_default(2), cfg);
  EXPECT_EQ(read_text(out), summary_csv(samples));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"aggregate", "--rule", "copeland", "--in", (kData / "fixtures" / "copeland3.csv").string(), "--bogus"}).code, 1);
  EXPECT_EQ(run({"aggregate", "--rule", "kemeny", "--in", (kData / "fixtures" / "copeland3.csv").string()}).code, 1);
  EXPECT_EQ(run({"simulate", "--model", (kData / "configs" / "cmm_m3.json").string(), "--n", "5", "--out", "x.csv"}).code, 1);
  const auto help = run({"aggregate", "--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("--rule"), std::string::npos);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  const auto model = kData / "configs" / "cmm_m3.json";
  const auto r = run({"simulate", "--model", model.string(), "--n", "3", "--seed", "1", "--out", "/nonexistent_dir/x.csv"});
  EXPECT_EQ(r.code, 2) << r.err;
}
