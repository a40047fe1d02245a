#include "spvote/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "spvote/errors.hpp"

namespace spvote {

namespace {

using nlohmann::json;

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv(const std::string& line, long line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back().push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  return fields;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<Alternative> parse_order_field(const std::string& text, long line, const char* field) {
  std::vector<Alternative> order;
  try {
    order = parse_order_text(text);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line, field);
  }
  std::set<Alternative> seen;
  for (auto a : order) {
    if (!seen.insert(a).second) {
      throw ParseError("duplicate alternative " + std::to_string(a) + " in '" + text + "'", line, field);
    }
  }
  return order;
}

Alternative parse_id(const std::string& text, long line, const char* field) {
  const auto order = parse_order_field(text, line, field);
  if (order.size() != 1) throw ParseError("expected a single alternative id, got '" + text + "'", line, field);
  return order.front();
}

std::vector<Alternative> parse_id_set(const std::string& text, long line, const char* field) {
  std::vector<Alternative> out;
  std::set<Alternative> seen;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(',', start);
    const auto token = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    const auto id = parse_id(token, line, field);
    if (!seen.insert(id).second) throw ParseError("duplicate alternative in set '" + text + "'", line, field);
    out.push_back(id);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

struct RawRow {
  long line;
  std::string participant;
  std::vector<Alternative> vote;
  std::string type;
  std::string value;
};

std::string join_ids(const std::vector<Alternative>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += std::to_string(ids[i]);
  }
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ParameterError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string question_key(const std::string& domain, const std::string& question_id) {
  return domain + "/" + question_id;
}

ProfileSet parse_profiles(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  if (strip_cr(line) != kProfileHeader) throw ParseError("header must be '" + std::string(kProfileHeader) + "'", 1);

  struct Pending {
    std::string domain;
    std::string question_id;
    std::vector<RawRow> rows;
    std::set<std::string> participants;
  };
  std::map<std::string, Pending> pending;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line, line_no);
    if (f.size() != 6) throw ParseError("expected 6 fields, found " + std::to_string(f.size()), line_no);
    if (f[0].empty()) throw ParseError("empty domain", line_no, "domain");
    if (f[1].empty()) throw ParseError("empty question id", line_no, "question_id");
    if (f[2].empty()) throw ParseError("empty participant id", line_no, "participant_id");
    if (f[4] != "top" && f[4] != "rank" && f[4] != "top_t") {
      throw ParseError("prediction type must be top, rank or top_t", line_no, "prediction_type");
    }
    auto& q = pending[question_key(f[0], f[1])];
    q.domain = f[0];
    q.question_id = f[1];
    if (!q.participants.insert(f[2]).second) {
      throw ParseError("duplicate participant '" + f[2] + "' for question " + f[1], line_no, "participant_id");
    }
    q.rows.push_back({line_no, f[2], parse_order_field(f[3], line_no, "vote"), f[4], f[5]});
  }

  ProfileSet out;
  for (auto& [key, q] : pending) {
    std::set<Alternative> universe;
    for (const auto& r : q.rows) universe.insert(r.vote.begin(), r.vote.end());
    const std::vector<Alternative> ids(universe.begin(), universe.end());
    std::map<Alternative, Alternative> local;
    for (std::size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<Alternative>(i);
    const auto to_local = [&](const std::vector<Alternative>& ext, long ln, const char* field) {
      std::vector<Alternative> v;
      for (auto a : ext) {
        const auto it = local.find(a);
        if (it == local.end()) throw ParseError("alternative " + std::to_string(a) + " not ranked in this question", ln, field);
        v.push_back(it->second);
      }
      return v;
    };

    QuestionProfile qp;
    qp.domain = q.domain;
    qp.question_id = q.question_id;
    qp.profile.m = static_cast<int>(ids.size());
    bool identity = true;
    for (std::size_t i = 0; i < ids.size(); ++i) identity = identity && ids[i] == static_cast<Alternative>(i);
    if (!identity) qp.profile.alternatives = ids;

    for (const auto& r : q.rows) {
      if (r.vote.size() != ids.size()) {
        throw ParseError("vote ranks " + std::to_string(r.vote.size()) + " of the question's " +
                             std::to_string(ids.size()) + " alternatives",
                         r.line, "vote");
      }
      VoterReport report{Ranking(to_local(r.vote, r.line, "vote")), TopChoice{}};
      if (r.type == "top") {
        report.prediction = TopChoice{to_local({parse_id(r.value, r.line, "prediction_value")}, r.line, "prediction_value")[0]};
      } else if (r.type == "rank") {
        const auto order = parse_order_field(r.value, r.line, "prediction_value");
        if (order.size() != ids.size()) throw ParseError("rank prediction must order every alternative", r.line, "prediction_value");
        report.prediction = ModalRanking{Ranking(to_local(order, r.line, "prediction_value"))};
      } else {
        report.prediction = TopSet{to_local(parse_id_set(r.value, r.line, "prediction_value"), r.line, "prediction_value")};
      }
      qp.participants.push_back(r.participant);
      qp.profile.reports.push_back(std::move(report));
    }
    out.emplace(key, std::move(qp));
  }
  return out;
}

ProfileSet load_profiles(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_profiles(in);
}

std::string format_profiles(const ProfileSet& profiles) {
  std::string out = std::string(kProfileHeader) + "\n";
  for (const auto& [key, q] : profiles) {
    const auto& p = q.profile;
    p.validate();
    if (q.participants.size() != p.reports.size()) throw ValidationError("participant list differs from reports in " + key);
    const auto ext = [&](const std::vector<Alternative>& local) {
      std::vector<Alternative> v;
      for (auto a : local) v.push_back(p.external_id(a));
      return v;
    };
    for (std::size_t i = 0; i < p.reports.size(); ++i) {
      const auto& r = p.reports[i];
      std::string type;
      std::string value;
      if (const auto* top = std::get_if<TopChoice>(&r.prediction)) {
        type = "top";
        value = std::to_string(p.external_id(top->alternative));
      } else if (const auto* modal = std::get_if<ModalRanking>(&r.prediction)) {
        type = "rank";
        value = join_ids(ext(modal->ranking.order()), '>');
      } else if (const auto* set = std::get_if<TopSet>(&r.prediction)) {
        type = "top_t";
        value = join_ids(ext(set->alternatives), ',');
      } else {
        throw ValidationError("full-posterior predictions cannot be written to a profile CSV");
      }
      out += csv_field(q.domain) + "," + csv_field(q.question_id) + "," + csv_field(q.participants[i]) + "," +
             join_ids(ext(r.vote.order()), '>') + "," + type + "," + csv_field(value) + "\n";
    }
  }
  return out;
}

void save_profiles(const ProfileSet& profiles, const std::filesystem::path& path) {
  write_text(path, format_profiles(profiles));
}

GroundTruthSet parse_ground_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  if (strip_cr(line) != kGroundTruthHeader) {
    throw ParseError("header must be '" + std::string(kGroundTruthHeader) + "'", 1);
  }
  GroundTruthSet out;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line, line_no);
    if (f.size() != 3) throw ParseError("expected 3 fields, found " + std::to_string(f.size()), line_no);
    const auto key = question_key(f[0], f[1]);
    if (!out.emplace(key, parse_order_field(f[2], line_no, "ranking")).second) {
      throw ParseError("duplicate ground truth for " + key, line_no, "question_id");
    }
  }
  return out;
}

GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_ground_truth(in);
}

std::vector<QuestionData> join_questions(const ProfileSet& profiles, const GroundTruthSet& truths) {
  std::vector<QuestionData> out;
  for (const auto& [key, q] : profiles) {
    const auto it = truths.find(key);
    if (it == truths.end()) throw ValidationError("no ground truth for question " + key);
    const auto& p = q.profile;
    std::map<Alternative, Alternative> local;
    for (int a = 0; a < p.m; ++a) local[p.external_id(a)] = a;
    std::vector<Alternative> order;
    for (auto ext : it->second) {
      const auto found = local.find(ext);
      if (found == local.end()) throw ValidationError("ground truth for " + key + " names unknown alternative " + std::to_string(ext));
      order.push_back(found->second);
    }
    if (static_cast<int>(order.size()) != p.m) throw ValidationError("ground truth for " + key + " does not rank every alternative");
    out.push_back({key, p, Ranking(std::move(order))});
  }
  return out;
}

std::string format_results(const ExperimentResult& result) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const auto& r : result.rows) {
    out += std::string(to_string(r.aggregator)) + "," + std::to_string(r.n) + "," + fixed6(r.mean_kt) + "," +
           fixed6(r.ci_lo) + "," + fixed6(r.ci_hi) + "," + std::to_string(r.trials) + "\n";
  }
  return out;
}

void save_results(const ExperimentResult& result, const std::filesystem::path& path) {
  write_text(path, format_results(result));
}

ExperimentResult parse_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != kResultsHeader) {
    throw ParseError("header must be '" + std::string(kResultsHeader) + "'", 1);
  }
  ExperimentResult result;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv(line, line_no);
    if (f.size() != 6) throw ParseError("expected 6 fields", line_no);
    ResultRow r;
    try {
      r.aggregator = parse_aggregator(f[0]);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no, "aggregator");
    }
    const auto number = [&](const std::string& s, const char* field) {
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'", line_no, field);
      }
    };
    r.n = static_cast<std::size_t>(number(f[1], "n"));
    r.mean_kt = number(f[2], "mean_kt");
    r.ci_lo = number(f[3], "ci_lo");
    r.ci_hi = number(f[4], "ci_hi");
    r.trials = static_cast<std::size_t>(number(f[5], "trials"));
    result.rows.push_back(std::move(r));
  }
  return result;
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["kind"] = spec.kind() == ModelKind::Cmm ? "cmm" : "cmpl";
  j["m"] = spec.m();
  j["ground_truth"] = spec.ground_truth().order();
  j["proportions"] = spec.proportions();
  if (spec.kind() == ModelKind::Cmm) {
    j["dispersions"] = spec.cmm_params().dispersions;
  } else {
    j["strengths"] = spec.cmpl_params().strengths;
  }
  return j;
}

ModelSpec model_from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("model JSON must be an object");
  auto kind = required<std::string>(j, "kind");
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const int m = required<int>(j, "m");
  Ranking truth = Ranking::identity(m);
  if (j.contains("ground_truth")) {
    if (j.at("ground_truth").is_string()) {
      truth = parse_ranking(j.at("ground_truth").get<std::string>());
    } else {
      truth = Ranking(required<std::vector<Alternative>>(j, "ground_truth"));
    }
  }
  if (truth.size() != m) throw DimensionError("ground_truth length differs from m");
  const auto proportions = required<std::vector<double>>(j, "proportions");
  if (kind == "cmm") {
    return ModelSpec::cmm(truth, CmmParams{proportions, required<std::vector<double>>(j, "dispersions")});
  }
  if (kind == "cmpl") {
    return ModelSpec::cmpl(truth, CmplParams{proportions, required<std::vector<std::vector<double>>>(j, "strengths")});
  }
  throw ParameterError("model kind must be cmm or cmpl");
}

ModelSpec load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("experiment JSON must be an object");
  if (!j.contains("model")) throw ParameterError("missing JSON field 'model'");
  ExperimentConfig cfg{.model = model_from_json(j.at("model")), .aggregators = {}, .sample_sizes = {}};
  for (const auto& name : required<std::vector<std::string>>(j, "aggregators")) cfg.aggregators.push_back(parse_aggregator(name));
  cfg.sample_sizes = required<std::vector<std::size_t>>(j, "sample_sizes");
  cfg.trials = optional_field<std::size_t>(j, "trials", cfg.trials);
  cfg.bootstrap_reps = optional_field<std::size_t>(j, "bootstrap_reps", cfg.bootstrap_reps);
  cfg.confidence = optional_field<double>(j, "confidence", cfg.confidence);
  cfg.seed = optional_field<std::uint64_t>(j, "seed", cfg.seed);
  cfg.randomize_ground_truth = optional_field<bool>(j, "randomize_ground_truth", cfg.randomize_ground_truth);
  cfg.prediction_mode = parse_prediction_mode(optional_field<std::string>(j, "prediction_mode", "bayes_modal"));
  return cfg;
}

json experiment_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = model_to_json(cfg.model);
  std::vector<std::string> names;
  for (auto a : cfg.aggregators) names.emplace_back(to_string(a));
  j["aggregators"] = names;
  j["sample_sizes"] = cfg.sample_sizes;
  j["trials"] = cfg.trials;
  j["bootstrap_reps"] = cfg.bootstrap_reps;
  j["confidence"] = cfg.confidence;
  j["seed"] = cfg.seed;
  j["randomize_ground_truth"] = cfg.randomize_ground_truth;
  j["prediction_mode"] = to_string(cfg.prediction_mode);
  return j;
}

McmcConfig mcmc_from_json(const json& j, McmcConfig cfg) {
  if (!j.is_object()) throw ParameterError("mcmc JSON must be an object");
  cfg.chains = optional_field<int>(j, "chains", cfg.chains);
  cfg.iterations = optional_field<int>(j, "iterations", cfg.iterations);
  cfg.warmup = optional_field<int>(j, "warmup", cfg.warmup);
  cfg.proposal_scale = optional_field<double>(j, "proposal_scale", cfg.proposal_scale);
  cfg.seed = optional_field<std::uint64_t>(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

PriorSpec priors_from_json(const json& j) {
  if (!j.is_object()) throw ParameterError("priors JSON must be an object");
  PriorSpec p;
  p.proportion_concentration = required<std::vector<double>>(j, "proportion");
  const auto normals = [&](const char* key) {
    std::vector<NormalPrior> out;
    for (const auto& pair : optional_field<std::vector<std::vector<double>>>(j, key, {})) {
      if (pair.size() != 2) throw ParameterError(std::string(key) + " entries must be [location, scale]");
      out.push_back({pair[0], pair[1]});
    }
    return out;
  };
  p.vote_dispersion = normals("vote_dispersion");
  p.prediction_dispersion = normals("prediction_dispersion");
  p.vote_concentration = optional_field<std::vector<std::vector<double>>>(j, "vote_concentration", {});
  p.prediction_concentration = optional_field<std::vector<std::vector<double>>>(j, "prediction_concentration", {});
  return p;
}

json priors_to_json(const PriorSpec& p) {
  json j;
  j["proportion"] = p.proportion_concentration;
  const auto pairs = [](const std::vector<NormalPrior>& v) {
    std::vector<std::vector<double>> out;
    for (const auto& n : v) out.push_back({n.location, n.scale});
    return out;
  };
  if (!p.vote_dispersion.empty()) j["vote_dispersion"] = pairs(p.vote_dispersion);
  if (!p.prediction_dispersion.empty()) j["prediction_dispersion"] = pairs(p.prediction_dispersion);
  if (!p.vote_concentration.empty()) j["vote_concentration"] = p.vote_concentration;
  if (!p.prediction_concentration.empty()) j["prediction_concentration"] = p.prediction_concentration;
  return j;
}

json read_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace spvote
