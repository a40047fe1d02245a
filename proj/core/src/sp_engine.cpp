#include "spvote/sp_engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "spvote/baselines.hpp"
#include "spvote/errors.hpp"

namespace spvote {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_prior(const Prior& prior, std::size_t n) {
  if (!prior.is_uniform() && prior.weights().size() != n) {
    throw DimensionError("prior has " + std::to_string(prior.weights().size()) + " weights, model has " +
                         std::to_string(n) + " rankings");
  }
}

void normalize_or_throw(std::vector<double>& v, const char* what) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegeneratePriorError(std::string(what) + ": zero total posterior mass");
  }
  for (auto& x : v) x /= total;
}

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double factorial_real(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

}  // namespace

Prior Prior::from_weights(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("prior weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12 * std::max<double>(1.0, static_cast<double>(weights.size()))) {
    throw ParameterError("prior weights sum to " + std::to_string(total));
  }
  Prior prior;
  prior.weights_ = std::move(weights);
  return prior;
}

Prior Prior::point_mass(const Ranking& r) {
  std::vector<double> w(static_cast<std::size_t>(factorial(r.size())), 0.0);
  w[rank_index(r).value] = 1.0;
  return from_weights(std::move(w));
}

void Profile::validate() const {
  if (m < 1) throw DimensionError("profile needs m >= 1");
  if (!alternatives.empty()) {
    if (static_cast<int>(alternatives.size()) != m) throw DimensionError("alternative map size differs from m");
    std::set<Alternative> distinct(alternatives.begin(), alternatives.end());
    if (static_cast<int>(distinct.size()) != m) throw ParameterError("alternative map repeats an id");
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const auto where = " (report " + std::to_string(i) + ")";
    if (r.vote.size() != m) throw DimensionError("vote size differs from profile m" + where);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, FullPosterior>) {
            if (m > kMaxEnumerationM) throw CapacityError("full posterior reports need m <= 10" + where);
            if (p.probabilities.size() != factorial(m)) throw DimensionError("full posterior length" + where);
            double total = 0.0;
            for (double x : p.probabilities) {
              if (!(x >= 0.0)) throw ParameterError("negative posterior entry" + where);
              total += x;
            }
            if (std::abs(total - 1.0) > 1e-6) throw ParameterError("full posterior not normalized" + where);
          } else if constexpr (std::is_same_v<T, ModalRanking>) {
            if (p.ranking.size() != m) throw DimensionError("modal prediction size differs from m" + where);
          } else if constexpr (std::is_same_v<T, TopChoice>) {
            if (p.alternative < 0 || p.alternative >= m) throw ParameterError("top prediction out of range" + where);
          } else {
            if (p.alternatives.empty()) throw ParameterError("empty top-t prediction" + where);
            std::set<Alternative> s(p.alternatives.begin(), p.alternatives.end());
            if (s.size() != p.alternatives.size()) throw ParameterError("top-t prediction repeats an id" + where);
            if (*s.begin() < 0 || *s.rbegin() >= m) throw ParameterError("top-t prediction out of range" + where);
          }
        },
        r.prediction);
  }
}

std::vector<Alternative> Profile::to_external(const Ranking& local) const {
  std::vector<Alternative> order;
  order.reserve(static_cast<std::size_t>(local.size()));
  for (auto a : local) order.push_back(external_id(a));
  return order;
}

namespace {

const ModelSpec& check_belief_capacity(const ModelSpec& spec) {
  if (spec.m() > kMaxBeliefM) {
    throw CapacityError("belief matrices need m <= " + std::to_string(kMaxBeliefM));
  }
  return spec;
}

}  // namespace

BeliefModel::BeliefModel(const ModelSpec& spec, Prior prior)
    : kernel_(check_belief_capacity(spec)), prior_(std::move(prior)) {
  const auto n = kernel_.size();
  check_prior(prior_, n);
  RowMatrix k(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) k(a, b) = kernel_(a, b);
  }
  RowMatrix post = k;
  for (std::size_t b = 0; b < n; ++b) post.col(b) *= prior_.weight(b, n);
  for (std::size_t v = 0; v < n; ++v) {
    const double total = post.row(v).sum();
    if (!(total > 0.0)) throw DegeneratePriorError("prior gives zero mass to every ground truth compatible with a vote");
    post.row(v) /= total;
  }
  RowMatrix pred = post * k.transpose();
  predictive_.assign(pred.data(), pred.data() + n * n);
}

std::vector<double> BeliefModel::posterior(std::size_t vote) const {
  const auto n = size();
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) out[s] = kernel_(vote, s) * prior_.weight(s, n);
  normalize_or_throw(out, "posterior_ground_truth");
  return out;
}

std::vector<double> BeliefModel::predict(std::size_t vote) const {
  const auto n = size();
  return {predictive_.begin() + static_cast<std::ptrdiff_t>(vote * n),
          predictive_.begin() + static_cast<std::ptrdiff_t>((vote + 1) * n)};
}

std::size_t BeliefModel::modal_prediction(std::size_t vote) const { return argmax_first(predict(vote)); }

std::vector<double> posterior_ground_truth(const Ranking& vote, const ModelSpec& spec, const Prior& prior) {
  if (vote.size() != spec.m()) throw DimensionError("vote size differs from model m");
  check_enumerable(spec.m());
  const auto all = enumerate_rankings(spec.m());
  check_prior(prior, all.size());
  std::vector<double> out(all.size());
  for (std::size_t s = 0; s < all.size(); ++s) out[s] = kernel_prob(vote, all[s], spec) * prior.weight(s, all.size());
  normalize_or_throw(out, "posterior_ground_truth");
  return out;
}

std::vector<double> predict_other(const Ranking& vote, const ModelSpec& spec, const Prior& prior) {
  const auto post = posterior_ground_truth(vote, spec, prior);
  const KernelMatrix k(spec);
  std::vector<double> out(k.size(), 0.0);
  for (std::size_t other = 0; other < k.size(); ++other) {
    double total = 0.0;
    for (std::size_t s = 0; s < k.size(); ++s) total += k(other, s) * post[s];
    out[other] = total;
  }
  return out;
}

PartialPosteriors partial_posteriors(const PartialRanking& vote, const ModelSpec& spec, const Prior& prior) {
  if (vote.ambient_m() != spec.m()) throw DimensionError("partial vote ambient m differs from model m");
  const KernelMatrix k(spec);
  const auto n = k.size();
  check_prior(prior, n);
  PartialPosteriors out;
  out.subset = vote.subset();
  const auto orderings = static_cast<std::size_t>(factorial(vote.size()));

  // restriction class of every full ranking
  const auto all = enumerate_rankings(spec.m());
  std::vector<std::size_t> cls(n);
  for (std::size_t s = 0; s < n; ++s) cls[s] = partial_index(restrict(all[s], out.subset)).value;

  // marginal[c * orderings + j] = Pr_s(ordering j of T | center c)
  std::vector<double> marginal(n * orderings, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t s = 0; s < n; ++s) marginal[c * orderings + cls[s]] += k(s, c);
  }

  const auto observed = partial_index(vote).value;
  out.ground_truth.resize(n);
  for (std::size_t c = 0; c < n; ++c) out.ground_truth[c] = marginal[c * orderings + observed] * prior.weight(c, n);
  normalize_or_throw(out.ground_truth, "partial_posteriors");

  out.others.assign(orderings, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t j = 0; j < orderings; ++j) out.others[j] += marginal[c * orderings + j] * out.ground_truth[c];
  }
  return out;
}

double sp_smoothing_epsilon(std::size_t n, int m) {
  return 1.0 / (2.0 * static_cast<double>(n) * factorial_real(m));
}

AggregationResult prediction_normalized_votes(const Profile& profile) {
  profile.validate();
  if (profile.reports.empty()) throw ValidationError("prediction_normalized_votes needs at least one vote");
  const auto n_rankings = static_cast<std::size_t>(factorial(profile.m));

  // vote class -> (count, summed posterior)
  std::map<std::uint64_t, std::pair<std::size_t, std::vector<double>>> classes;
  for (const auto& r : profile.reports) {
    const auto* full = std::get_if<FullPosterior>(&r.prediction);
    if (full == nullptr) throw ValidationError("prediction_normalized_votes needs full-posterior predictions");
    auto& [count, sum] = classes[rank_index(r.vote).value];
    if (sum.empty()) sum.assign(n_rankings, 0.0);
    ++count;
    for (std::size_t i = 0; i < n_rankings; ++i) sum[i] += full->probabilities[i];
  }

  const auto n = profile.reports.size();
  const double eps = sp_smoothing_epsilon(n, profile.m);
  for (auto& [idx, entry] : classes) {
    auto& [count, sum] = entry;
    for (auto& x : sum) x = x / static_cast<double>(count) + eps;  // smoothed h(. | class)
  }

  AggregationResult result;
  double best = -1.0;
  for (const auto& [sigma, entry] : classes) {
    const double f = static_cast<double>(entry.first) / static_cast<double>(n);
    double ratio_sum = 0.0;
    for (const auto& [other, other_entry] : classes) {
      // h(other | sigma) / h(sigma | other)
      ratio_sum += entry.second[other] / other_entry.second[sigma];
    }
    const double score = f * ratio_sum;
    auto ranking = unrank(RankIndex{sigma}, profile.m);
    if (score > best) {
      best = score;
      result.winner = ranking;
    }
    result.scores.push_back({std::move(ranking), score});
  }
  result.diagnostics.push_back("observed_classes=" + std::to_string(classes.size()));
  std::ostringstream eps_text;
  eps_text << "smoothing_epsilon=" << eps;
  result.diagnostics.push_back(eps_text.str());
  return result;
}

std::vector<double> exact_vbar(const ModelSpec& spec, const Prior& prior) {
  const BeliefModel belief(spec, prior);
  const auto n = belief.size();
  const auto star = rank_index(spec.ground_truth()).value;
  std::vector<double> vbar(n, 0.0);
  for (std::size_t sigma = 0; sigma < n; ++sigma) {
    const double f = belief.kernel()(sigma, star);
    double ratio_sum = 0.0;
    for (std::size_t other = 0; other < n; ++other) {
      ratio_sum += belief.predict(other, sigma) / belief.predict(sigma, other);
    }
    vbar[sigma] = f * ratio_sum;
  }
  return vbar;
}

std::vector<VbarBounds> vbar_bounds(const ModelSpec& spec) {
  const KernelMatrix k(spec);
  const auto n = k.size();
  const auto star = rank_index(spec.ground_truth()).value;
  std::vector<VbarBounds> out(n);
  for (std::size_t sigma = 0; sigma < n; ++sigma) {
    double total = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      total += k(sigma, c);
      smallest = std::min(smallest, k(sigma, c));
    }
    const double f = k(sigma, star);
    out[sigma] = {f / total, f / smallest};
  }
  return out;
}

AggregationResult sp_vote_modal(const Profile& profile, SpScoreForm form) {
  profile.validate();
  if (profile.reports.empty()) throw ValidationError("sp_vote_modal needs at least one report");
  // std::map over Ranking iterates in lexicographic = RankIndex order.
  std::map<Ranking, std::pair<std::size_t, std::size_t>> counts;  // (votes, predictions)
  for (const auto& r : profile.reports) {
    const auto* modal = std::get_if<ModalRanking>(&r.prediction);
    if (modal == nullptr) throw ValidationError("sp_vote_modal needs modal-ranking predictions");
    ++counts[r.vote].first;
    ++counts[modal->ranking].second;
  }
  const auto n = static_cast<double>(profile.reports.size());
  const double eps = sp_smoothing_epsilon(profile.reports.size(), profile.m);

  AggregationResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [sigma, c] : counts) {
    if (c.first == 0) continue;  // only voted rankings can win
    const double f = static_cast<double>(c.first) / n;
    const double g = static_cast<double>(c.second) / n;
    const double score = form == SpScoreForm::Ratio ? (f + eps) / (g + eps) : f - g;
    if (score > best) {
      best = score;
      result.winner = sigma;
    }
    result.scores.push_back({sigma, score});
  }
  result.diagnostics.push_back(form == SpScoreForm::Ratio ? "score=ratio" : "score=difference");
  std::ostringstream eps_text;
  eps_text << "smoothing_epsilon=" << eps;
  result.diagnostics.push_back(eps_text.str());
  return result;
}

AggregationResult sp_aggregate(const Profile& profile, SpScoreForm form) {
  if (profile.reports.empty()) throw ValidationError("SP aggregation needs at least one report");
  const bool all_full = std::all_of(profile.reports.begin(), profile.reports.end(), [](const VoterReport& r) {
    return std::holds_alternative<FullPosterior>(r.prediction);
  });
  if (all_full) return prediction_normalized_votes(profile);
  const bool all_modal = std::all_of(profile.reports.begin(), profile.reports.end(), [](const VoterReport& r) {
    return std::holds_alternative<ModalRanking>(r.prediction);
  });
  if (all_modal) return sp_vote_modal(profile, form);
  throw ValidationError("SP aggregation needs uniformly full-posterior or modal-ranking predictions");
}

Ranking partial_sp(const std::vector<Profile>& profiles, PartialAggregator aggregator) {
  (void)aggregator;  // Copeland is the only supported merge rule
  if (profiles.empty()) throw ValidationError("partial_sp needs at least one subset profile");
  std::set<Alternative> universe;
  for (const auto& p : profiles) {
    for (int a = 0; a < p.m; ++a) universe.insert(p.external_id(a));
  }
  const int m = static_cast<int>(universe.size());
  if (*universe.begin() != 0 || *universe.rbegin() != m - 1) {
    throw CoverageError("subset alternatives must jointly cover ids 0..M-1");
  }

  std::vector<std::vector<Alternative>> winners(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    winners[i] = profiles[i].to_external(sp_aggregate(profiles[i]).winner);
  }

  PairwiseTally tally(m);
  for (const auto& w : winners) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (std::size_t j = i + 1; j < w.size(); ++j) tally.add(w[i], w[j]);
    }
  }
  std::string missing;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if (tally(a, b) + tally(b, a) == 0) missing += (missing.empty() ? "" : ", ") + std::to_string(a) + "-" + std::to_string(b);
    }
  }
  if (!missing.empty()) throw CoverageError("pairs not covered by any subset: " + missing);
  return copeland(tally);
}

}  // namespace spvote
