#include "spvote/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "spvote/baselines.hpp"
#include "spvote/errors.hpp"

namespace spvote {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Each chain starts at the highest-density of this many feasible prior draws.
constexpr int kInitCandidates = 64;
constexpr int kInitAttempts = 4000;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_sum_exp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (top == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

// Additive log-ratio: the last proportion is the reference category.
std::vector<double> alr_inverse(const double* z, int groups) {
  std::vector<double> p(static_cast<std::size_t>(groups));
  double top = 0.0;
  for (int g = 0; g + 1 < groups; ++g) top = std::max(top, z[g]);
  double total = std::exp(-top);
  for (int g = 0; g + 1 < groups; ++g) total += std::exp(z[g] - top);
  for (int g = 0; g + 1 < groups; ++g) p[static_cast<std::size_t>(g)] = std::exp(z[g] - top) / total;
  p.back() = std::exp(-top) / total;
  return p;
}

void alr_forward(const std::vector<double>& p, std::vector<double>& out) {
  for (std::size_t g = 0; g + 1 < p.size(); ++g) out.push_back(std::log(p[g] / p.back()));
}

// log Dirichlet density up to a constant plus the log-ratio Jacobian.
double dirichlet_term(const std::vector<double>& p, const std::vector<double>& alpha) {
  double s = 0.0;
  for (std::size_t g = 0; g < p.size(); ++g) {
    if (!(p[g] > 0.0)) return kNegInf;
    s += alpha[g] * std::log(p[g]);
  }
  return s;
}

std::vector<std::pair<std::pair<int, int>, std::size_t>> count_pairs(const std::vector<DistancePair>& data) {
  std::map<std::pair<int, int>, std::size_t> counts;
  for (const auto& d : data) ++counts[{d.vote, d.prediction}];
  return {counts.begin(), counts.end()};
}

double truncated_normal_draw(const NormalPrior& prior, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double x = prior.location + prior.scale * rng.normal();
    if (x > 1e-3 && x <= 1.0) return x;
  }
  return std::clamp(prior.location, 0.05, 1.0);
}

std::vector<std::string> group_names(const char* stem, int groups) {
  std::vector<std::string> out;
  for (int g = 1; g <= groups; ++g) out.push_back(std::string(stem) + "[" + std::to_string(g) + "]");
  return out;
}

std::vector<std::string> row_names(const char* stem, int groups, int m) {
  std::vector<std::string> out;
  for (int g = 1; g <= groups; ++g) {
    for (int j = 1; j <= m; ++j) out.push_back(std::string(stem) + "[" + std::to_string(g) + "][" + std::to_string(j) + "]");
  }
  return out;
}

std::vector<double> softmax_with_zero(const double* logits, int m) {
  std::vector<double> row(static_cast<std::size_t>(m));
  double top = 0.0;
  for (int j = 0; j + 1 < m; ++j) top = std::max(top, logits[j]);
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    row[static_cast<std::size_t>(j)] = std::exp((j + 1 < m ? logits[j] : 0.0) - top);
    total += row[static_cast<std::size_t>(j)];
  }
  for (auto& x : row) x /= total;
  return row;
}

// Reorders the group blocks of every draw in each chain so that the chain
// mean of `key` is ascending across groups.
void sort_labels(PosteriorSamples& s, const std::function<double(const std::vector<double>&, int)>& key,
                 const std::vector<std::pair<std::size_t, std::size_t>>& blocks) {
  const int groups = s.groups;
  for (int c = 0; c < s.chains; ++c) {
    const auto begin = static_cast<std::size_t>(c) * s.draws_per_chain;
    std::vector<double> mean(static_cast<std::size_t>(groups), 0.0);
    for (std::size_t i = 0; i < s.draws_per_chain; ++i) {
      for (int g = 0; g < groups; ++g) mean[static_cast<std::size_t>(g)] += key(s.draws[begin + i], g);
    }
    std::vector<int> order(static_cast<std::size_t>(groups));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mean[static_cast<std::size_t>(a)] < mean[static_cast<std::size_t>(b)]; });
    if (std::is_sorted(order.begin(), order.end())) continue;
    for (std::size_t i = 0; i < s.draws_per_chain; ++i) {
      auto& draw = s.draws[begin + i];
      const auto original = draw;
      for (const auto& [offset, width] : blocks) {
        for (int g = 0; g < groups; ++g) {
          const auto from = offset + static_cast<std::size_t>(order[static_cast<std::size_t>(g)]) * width;
          const auto to = offset + static_cast<std::size_t>(g) * width;
          std::copy_n(original.begin() + static_cast<std::ptrdiff_t>(from), width, draw.begin() + static_cast<std::ptrdiff_t>(to));
        }
      }
    }
  }
}

void summarize(PosteriorSamples& s) {
  s.summary.clear();
  const std::size_t total = s.draws.size();
  for (std::size_t k = 0; k < s.names.size(); ++k) {
    std::vector<double> all(total);
    std::vector<std::vector<double>> chains(static_cast<std::size_t>(s.chains));
    for (std::size_t i = 0; i < total; ++i) {
      all[i] = s.draws[i][k];
      chains[i / s.draws_per_chain].push_back(all[i]);
    }
    ParameterSummary row;
    row.name = s.names[k];
    row.mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(total);
    double ss = 0.0;
    for (double v : all) ss += (v - row.mean) * (v - row.mean);
    row.sd = total > 1 ? std::sqrt(ss / static_cast<double>(total - 1)) : 0.0;
    row.q05 = quantile(all, 0.05);
    row.q95 = quantile(all, 0.95);
    row.rhat = split_rhat(chains);
    row.ess = effective_sample_size(chains);
    s.summary.push_back(row);
  }
}

template <typename Transform>
PosteriorSamples collect(const std::vector<ChainRun>& runs, const McmcConfig& cfg, Transform to_natural) {
  PosteriorSamples s;
  s.chains = cfg.chains;
  s.draws_per_chain = static_cast<std::size_t>(cfg.iterations - cfg.warmup);
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  for (const auto& run : runs) {
    proposals += run.proposals;
    accepted += run.accepted;
    s.constraint_rejections += run.constraint_rejections;
    s.nonfinite_rejections += run.nonfinite_rejections;
    for (const auto& x : run.draws) s.draws.push_back(to_natural(x));
  }
  s.acceptance_rate = proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  return s;
}

void check_concentration(const std::vector<double>& alpha, const char* what) {
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError(std::string(what) + " concentrations must be positive");
  }
}

void check_normal(const std::vector<NormalPrior>& priors, int groups, const char* what) {
  if (static_cast<int>(priors.size()) != groups) throw DimensionError(std::string(what) + " prior count differs from G");
  for (const auto& p : priors) {
    if (!(p.scale > 0.0) || !std::isfinite(p.location)) throw ParameterError(std::string(what) + " prior scale must be positive");
  }
}

// Shared Mallows-mixture sampler; `group_log_lik(pv, pp, phi_vote, phi_pred)`
// returns per-group log-likelihood contributions summed over the data.
struct CmmProblem {
  int groups;
  const PriorSpec& priors;
  std::function<double(const std::vector<double>& p, const std::vector<double>& phi_vote,
                       const std::vector<double>& phi_pred)>
      log_lik;
};

PosteriorSamples run_cmm(const CmmProblem& problem, int m, const McmcConfig& cfg, const char* likelihood_note) {
  const int groups = problem.groups;
  problem.priors.validate_cmm(groups);
  cfg.validate();
  const auto& priors = problem.priors;
  const auto g = static_cast<std::size_t>(groups);

  const auto unpack = [groups, g](const std::vector<double>& x, std::vector<double>& p, std::vector<double>& pv,
                                  std::vector<double>& pp) {
    p = alr_inverse(x.data(), groups);
    pv.resize(g);
    pp.resize(g);
    for (std::size_t k = 0; k < g; ++k) {
      pv[k] = std::exp(x[g - 1 + k]);
      pp[k] = std::exp(x[2 * g - 1 + k]);
    }
  };

  const LogTarget target = [&](const std::vector<double>& x) {
    for (std::size_t k = g - 1; k < x.size(); ++k) {
      if (x[k] > 0.0) return kNegInf;  // dispersion above 1
    }
    std::vector<double> p, pv, pp;
    unpack(x, p, pv, pp);
    if (!std::is_sorted(pv.begin(), pv.end())) return kNegInf;
    for (std::size_t k = 0; k < g; ++k) {
      if (!(pv[k] > 0.0) || !(pp[k] > 0.0)) return kNegInf;  // underflow on the log scale
    }
    double lp = dirichlet_term(p, priors.proportion_concentration);
    for (std::size_t k = 0; k < g; ++k) {
      lp += log_normal_pdf(pv[k], priors.vote_dispersion[k].location, priors.vote_dispersion[k].scale) + x[g - 1 + k];
      lp += log_normal_pdf(pp[k], priors.prediction_dispersion[k].location, priors.prediction_dispersion[k].scale) +
            x[2 * g - 1 + k];
    }
    return lp + problem.log_lik(p, pv, pp);
  };

  const Initializer init = [&](Rng& rng) {
    std::vector<double> best;
    double best_lp = kNegInf;
    int feasible = 0;
    for (int attempt = 0; attempt < kInitAttempts && feasible < kInitCandidates; ++attempt) {
      auto p = rng.dirichlet(priors.proportion_concentration);
      for (auto& v : p) v = std::max(v, 1e-6);
      std::vector<double> pv(g), pp(g);
      for (std::size_t k = 0; k < g; ++k) {
        pv[k] = truncated_normal_draw(priors.vote_dispersion[k], rng);
        pp[k] = truncated_normal_draw(priors.prediction_dispersion[k], rng);
      }
      std::sort(pv.begin(), pv.end());
      std::vector<double> x;
      alr_forward(p, x);
      for (double v : pv) x.push_back(std::log(v));
      for (double v : pp) x.push_back(std::log(v));
      const double lp = target(x);
      if (!std::isfinite(lp)) continue;
      ++feasible;
      if (best.empty() || lp > best_lp) {
        best = std::move(x);
        best_lp = lp;
      }
    }
    if (best.empty()) throw PreconditionError("no feasible MCMC starting point found");
    return best;
  };

  const auto runs = run_metropolis(target, init, cfg);
  auto s = collect(runs, cfg, [&](const std::vector<double>& x) {
    std::vector<double> p, pv, pp;
    unpack(x, p, pv, pp);
    p.insert(p.end(), pv.begin(), pv.end());
    p.insert(p.end(), pp.begin(), pp.end());
    return p;
  });
  s.kind = ModelKind::Cmm;
  s.groups = groups;
  s.m = m;
  for (const char* stem : {"p", "phi_vote", "phi_pred"}) {
    const auto names = group_names(stem, groups);
    s.names.insert(s.names.end(), names.begin(), names.end());
  }
  sort_labels(
      s, [g](const std::vector<double>& d, int k) { return d[g + static_cast<std::size_t>(k)]; },
      {{0, 1}, {g, 1}, {2 * g, 1}});
  summarize(s);
  s.notes.push_back(likelihood_note);
  s.notes.push_back("dispersion priors truncated to (0, 1]");
  s.notes.push_back("groups ordered by vote dispersion");
  s.notes.push_back("non-finite rejections: " + std::to_string(s.nonfinite_rejections));
  return s;
}

}  // namespace

PriorSpec PriorSpec::cmm_default(int groups) {
  if (groups < 1) throw ParameterError("G must be positive");
  PriorSpec s;
  s.proportion_concentration.assign(static_cast<std::size_t>(groups), 2.0);
  for (int g = 0; g < groups; ++g) {
    const double loc = groups == 1 ? 0.5 : 0.1 + 0.7 * g / (groups - 1);
    s.vote_dispersion.push_back({loc, 0.3});
    s.prediction_dispersion.push_back({loc, 0.3});
  }
  return s;
}

PriorSpec PriorSpec::cmm_three_group() {
  PriorSpec s;
  s.proportion_concentration = {2.0, 2.0, 4.0};
  s.vote_dispersion = {{0.1, 0.2}, {0.4, 0.2}, {0.8, 0.2}};
  s.prediction_dispersion = {{0.4, 0.3}, {0.4, 0.3}, {0.8, 0.3}};
  return s;
}

PriorSpec PriorSpec::cmpl_default(int groups, int m) {
  if (groups < 1 || m < 2) throw ParameterError("need G >= 1 and m >= 2");
  PriorSpec s;
  s.proportion_concentration.assign(static_cast<std::size_t>(groups), 2.0);
  for (int g = 0; g < groups; ++g) {
    s.vote_concentration.emplace_back(static_cast<std::size_t>(m), static_cast<double>(groups + 1 - g));
    s.prediction_concentration.emplace_back(static_cast<std::size_t>(m), 1.0);
  }
  return s;
}

PriorSpec PriorSpec::cmpl_three_group(int m) {
  if (m < 2) throw ParameterError("need m >= 2");
  PriorSpec s;
  s.proportion_concentration = {1.0, 2.0, 3.0};
  for (double a : {3.0, 2.0, 1.0}) {
    s.vote_concentration.emplace_back(static_cast<std::size_t>(m), a);
    s.prediction_concentration.emplace_back(static_cast<std::size_t>(m), 1.0);
  }
  return s;
}

void PriorSpec::validate_cmm(int groups) const {
  if (groups < 1) throw ParameterError("G must be positive");
  if (static_cast<int>(proportion_concentration.size()) != groups) {
    throw DimensionError("proportion prior length differs from G");
  }
  check_concentration(proportion_concentration, "proportion");
  check_normal(vote_dispersion, groups, "vote dispersion");
  check_normal(prediction_dispersion, groups, "prediction dispersion");
}

void PriorSpec::validate_cmpl(int groups, int m) const {
  if (groups < 1) throw ParameterError("G must be positive");
  if (static_cast<int>(proportion_concentration.size()) != groups) {
    throw DimensionError("proportion prior length differs from G");
  }
  check_concentration(proportion_concentration, "proportion");
  for (const auto* rows : {&vote_concentration, &prediction_concentration}) {
    if (static_cast<int>(rows->size()) != groups) throw DimensionError("strength prior row count differs from G");
    for (const auto& row : *rows) {
      if (static_cast<int>(row.size()) != m) throw DimensionError("strength prior row length differs from m");
      check_concentration(row, "strength");
    }
  }
}

std::vector<double> PosteriorSamples::proportions(std::size_t draw) const {
  const auto& d = draws.at(draw);
  return {d.begin(), d.begin() + groups};
}

std::vector<double> PosteriorSamples::vote_dispersions(std::size_t draw) const {
  if (kind != ModelKind::Cmm) throw ValidationError("dispersions exist only for Mallows fits");
  const auto& d = draws.at(draw);
  return {d.begin() + groups, d.begin() + 2 * groups};
}

std::vector<double> PosteriorSamples::prediction_dispersions(std::size_t draw) const {
  if (kind != ModelKind::Cmm) throw ValidationError("dispersions exist only for Mallows fits");
  const auto& d = draws.at(draw);
  return {d.begin() + 2 * groups, d.begin() + 3 * groups};
}

namespace {

std::vector<std::vector<double>> rows_at(const std::vector<double>& d, std::size_t offset, int groups, int m) {
  std::vector<std::vector<double>> rows;
  for (int g = 0; g < groups; ++g) {
    const auto begin = d.begin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(g * m));
    rows.emplace_back(begin, begin + m);
  }
  return rows;
}

}  // namespace

std::vector<std::vector<double>> PosteriorSamples::vote_strengths(std::size_t draw) const {
  if (kind != ModelKind::Cmpl) throw ValidationError("strengths exist only for Plackett-Luce fits");
  return rows_at(draws.at(draw), static_cast<std::size_t>(groups), groups, m);
}

std::vector<std::vector<double>> PosteriorSamples::prediction_strengths(std::size_t draw) const {
  if (kind != ModelKind::Cmpl) throw ValidationError("strengths exist only for Plackett-Luce fits");
  return rows_at(draws.at(draw), static_cast<std::size_t>(groups + groups * m), groups, m);
}

std::vector<double> PosteriorSamples::posterior_mean() const {
  std::vector<double> mean;
  for (const auto& row : summary) mean.push_back(row.mean);
  return mean;
}

std::vector<DistancePair> to_distances(const std::vector<RankingPair>& data, const Ranking& ground_truth) {
  std::vector<DistancePair> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back({kendall_tau(d.vote, ground_truth), kendall_tau(d.prediction, ground_truth)});
  return out;
}

PosteriorSamples cmm_infer(const std::vector<DistancePair>& data, int m, int groups, const PriorSpec& priors,
                           const McmcConfig& cfg) {
  if (m < 2) throw ParameterError("Gaussian distance likelihood needs m >= 2");
  const int max_d = max_kendall_tau(m);
  for (const auto& d : data) {
    if (d.vote < 0 || d.vote > max_d || d.prediction < 0 || d.prediction > max_d) {
      throw ParameterError("distance outside [0, m(m-1)/2]");
    }
  }
  const auto pairs = count_pairs(data);
  CmmProblem problem{groups, priors, [&pairs, m, groups](const std::vector<double>& p, const std::vector<double>& pv,
                                                       const std::vector<double>& pp) {
    const auto g = static_cast<std::size_t>(groups);
    std::vector<DistanceMoments> mv(g), mp(g);
    for (std::size_t k = 0; k < g; ++k) {
      mv[k] = mallows_distance_moments(pv[k], m);
      mp[k] = mallows_distance_moments(pp[k], m);
      if (!(mv[k].sd > 0.0) || !(mp[k].sd > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    }
    double total = 0.0;
    std::vector<double> terms(g);
    for (const auto& [key, count] : pairs) {
      for (std::size_t k = 0; k < g; ++k) {
        terms[k] = std::log(p[k]) + log_normal_pdf(key.first, mv[k].mean, mv[k].sd) +
                   log_normal_pdf(key.second, mp[k].mean, mp[k].sd);
      }
      total += static_cast<double>(count) * log_sum_exp(terms);
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::quiet_NaN();
  }};
  return run_cmm(problem, m, cfg, "likelihood: Gaussian on Kendall-tau distance");
}

PosteriorSamples cmm_exact_infer(const std::vector<RankingPair>& data, const Ranking& ground_truth, int groups,
                                 const PriorSpec& priors, const McmcConfig& cfg) {
  const int m = ground_truth.size();
  if (m < 1) throw ParameterError("empty ground truth");
  for (const auto& d : data) {
    if (d.vote.size() != m || d.prediction.size() != m) throw DimensionError("ranking size differs from ground truth");
  }
  const auto pairs = count_pairs(to_distances(data, ground_truth));
  CmmProblem problem{groups, priors, [&pairs, m, groups](const std::vector<double>& p, const std::vector<double>& pv,
                                                       const std::vector<double>& pp) {
    const auto g = static_cast<std::size_t>(groups);
    std::vector<double> lz_v(g), lz_p(g), lphi_v(g), lphi_p(g);
    for (std::size_t k = 0; k < g; ++k) {
      lz_v[k] = std::log(mallows_normalizer(pv[k], m));
      lz_p[k] = std::log(mallows_normalizer(pp[k], m));
      lphi_v[k] = std::log(pv[k]);
      lphi_p[k] = std::log(pp[k]);
    }
    double total = 0.0;
    std::vector<double> terms(g);
    for (const auto& [key, count] : pairs) {
      for (std::size_t k = 0; k < g; ++k) {
        terms[k] = std::log(p[k]) + key.first * lphi_v[k] - lz_v[k] + key.second * lphi_p[k] - lz_p[k];
      }
      total += static_cast<double>(count) * log_sum_exp(terms);
    }
    return std::isfinite(total) ? total : std::numeric_limits<double>::quiet_NaN();
  }};
  return run_cmm(problem, m, cfg, "likelihood: exact Mallows mixture");
}

PosteriorSamples cmpl_infer(const std::vector<RankingPair>& data, const Ranking& ground_truth, int groups,
                            const PriorSpec& priors, const McmcConfig& cfg) {
  const int m = ground_truth.size();
  if (m < 2) throw ParameterError("Plackett-Luce inference needs m >= 2");
  priors.validate_cmpl(groups, m);
  cfg.validate();
  const auto g = static_cast<std::size_t>(groups);
  const auto mm = static_cast<std::size_t>(m);

  // Distinct rankings as ground-truth positions in choice order.
  std::map<Ranking, std::size_t> ids;
  std::vector<std::vector<int>> relative;
  const auto intern = [&](const Ranking& r) {
    if (r.size() != m) throw DimensionError("ranking size differs from ground truth");
    auto [it, fresh] = ids.try_emplace(r, relative.size());
    if (fresh) {
      const auto pos = ground_truth.positions();
      std::vector<int> rel;
      for (auto a : r) rel.push_back(pos[static_cast<std::size_t>(a)]);
      relative.push_back(std::move(rel));
    }
    return it->second;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pair_counts;
  for (const auto& d : data) ++pair_counts[{intern(d.vote), intern(d.prediction)}];

  const std::size_t logit_block = g * (mm - 1);
  const auto unpack = [&](const std::vector<double>& x, std::vector<double>& p, std::vector<std::vector<double>>& vote,
                          std::vector<std::vector<double>>& pred) {
    p = alr_inverse(x.data(), groups);
    vote.clear();
    pred.clear();
    for (std::size_t k = 0; k < g; ++k) {
      vote.push_back(softmax_with_zero(x.data() + (g - 1) + k * (mm - 1), m));
      pred.push_back(softmax_with_zero(x.data() + (g - 1) + logit_block + k * (mm - 1), m));
    }
  };

  const auto log_pl = [&](const std::vector<int>& rel, const std::vector<double>& row) {
    double tail = 0.0;
    double s = 0.0;
    for (auto it = rel.rbegin(); it != rel.rend(); ++it) {
      const double w = row[static_cast<std::size_t>(*it)];
      tail += w;
      s += std::log(w) - std::log(tail);
    }
    return s;
  };

  const LogTarget target = [&](const std::vector<double>& x) {
    std::vector<double> p;
    std::vector<std::vector<double>> vote, pred;
    unpack(x, p, vote, pred);
    for (std::size_t k = 0; k < g; ++k) {
      if (!is_non_increasing(vote[k], 0.0) || !is_non_increasing(pred[k], 0.0)) return kNegInf;
    }
    if (!check_dominance(vote, 0.0)) return kNegInf;
    double lp = dirichlet_term(p, priors.proportion_concentration);
    for (std::size_t k = 0; k < g; ++k) {
      lp += dirichlet_term(vote[k], priors.vote_concentration[k]);
      lp += dirichlet_term(pred[k], priors.prediction_concentration[k]);
    }
    if (!std::isfinite(lp)) return std::numeric_limits<double>::quiet_NaN();
    // per distinct ranking and group
    std::vector<double> lv(relative.size() * g), lpred(relative.size() * g);
    for (std::size_t r = 0; r < relative.size(); ++r) {
      for (std::size_t k = 0; k < g; ++k) {
        lv[r * g + k] = log_pl(relative[r], vote[k]);
        lpred[r * g + k] = log_pl(relative[r], pred[k]);
      }
    }
    std::vector<double> terms(g);
    for (const auto& [key, count] : pair_counts) {
      for (std::size_t k = 0; k < g; ++k) terms[k] = std::log(p[k]) + lv[key.first * g + k] + lpred[key.second * g + k];
      lp += static_cast<double>(count) * log_sum_exp(terms);
    }
    return std::isfinite(lp) ? lp : std::numeric_limits<double>::quiet_NaN();
  };

  const auto to_logits = [&](const std::vector<double>& row, std::vector<double>& x) {
    for (std::size_t j = 0; j + 1 < mm; ++j) x.push_back(std::log(row[j] / row.back()));
  };

  const auto pack = [&](std::vector<double> p, const std::vector<std::vector<double>>& vote,
                        const std::vector<std::vector<double>>& pred) {
    for (auto& v : p) v = std::max(v, 1e-6);
    std::vector<double> x;
    alr_forward(p, x);
    for (const auto& row : vote) to_logits(row, x);
    for (const auto& row : pred) to_logits(row, x);
    return x;
  };

  const Initializer init = [&](Rng& rng) {
    std::vector<std::vector<double>> vote, pred;
    std::vector<double> p;
    std::vector<double> best;
    double best_lp = kNegInf;
    int feasible = 0;
    for (int attempt = 0; attempt < kInitAttempts && feasible < kInitCandidates; ++attempt) {
      p = rng.dirichlet(priors.proportion_concentration);
      vote.clear();
      pred.clear();
      for (std::size_t k = 0; k < g; ++k) {
        auto v = rng.dirichlet(priors.vote_concentration[k]);
        auto q = rng.dirichlet(priors.prediction_concentration[k]);
        std::sort(v.rbegin(), v.rend());
        std::sort(q.rbegin(), q.rend());
        vote.push_back(std::move(v));
        pred.push_back(std::move(q));
      }
      std::sort(vote.begin(), vote.end(), [](const auto& a, const auto& b) { return a[0] > b[0]; });
      if (!check_dominance(vote, 0.0)) continue;
      auto x = pack(p, vote, pred);
      const double lp = target(x);
      if (!std::isfinite(lp)) continue;
      ++feasible;
      if (best.empty() || lp > best_lp) {
        best = std::move(x);
        best_lp = lp;
      }
    }
    if (!best.empty()) return best;
    // power rows (m - j)^k with k decreasing over groups form a dominance chain
    vote.clear();
    pred.clear();
    for (std::size_t k = 0; k < g; ++k) {
      std::vector<double> row(mm);
      const double power = static_cast<double>(g - k) * 0.5;
      for (std::size_t j = 0; j < mm; ++j) row[j] = std::pow(static_cast<double>(mm - j), power);
      const double total = std::accumulate(row.begin(), row.end(), 0.0);
      for (auto& v : row) v /= total;
      vote.push_back(row);
      pred.push_back(std::move(row));
    }
    return pack(std::vector<double>(g, 1.0 / static_cast<double>(g)), vote, pred);
  };

  const auto runs = run_metropolis(target, init, cfg);
  auto s = collect(runs, cfg, [&](const std::vector<double>& x) {
    std::vector<double> p;
    std::vector<std::vector<double>> vote, pred;
    unpack(x, p, vote, pred);
    for (const auto& row : vote) p.insert(p.end(), row.begin(), row.end());
    for (const auto& row : pred) p.insert(p.end(), row.begin(), row.end());
    return p;
  });
  s.kind = ModelKind::Cmpl;
  s.groups = groups;
  s.m = m;
  s.names = group_names("p", groups);
  for (const char* stem : {"theta_vote", "theta_pred"}) {
    const auto names = row_names(stem, groups, m);
    s.names.insert(s.names.end(), names.begin(), names.end());
  }
  sort_labels(
      s, [g, mm](const std::vector<double>& d, int k) { return -d[g + static_cast<std::size_t>(k) * mm]; },
      {{0, 1}, {g, mm}, {g + g * mm, mm}});
  summarize(s);
  s.notes.push_back("likelihood: Plackett-Luce mixture of votes and predictions");
  s.notes.push_back("monotone rows and vote-row dominance enforced by rejection");
  s.notes.push_back("groups ordered by first-position vote strength");
  s.notes.push_back("non-finite rejections: " + std::to_string(s.nonfinite_rejections));
  return s;
}

std::string summary_csv(const PosteriorSamples& samples) {
  std::string out = "parameter,mean,sd,q05,q95,rhat,ess\n";
  char buf[256];
  for (const auto& r : samples.summary) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.mean, r.sd, r.q05, r.q95, r.rhat, r.ess);
    out += r.name;
    out += buf;
  }
  return out;
}

FullRankingPrediction predict_full_ranking_cmpl(const std::vector<SubsetFit>& fits, int universe_m, int group,
                                                std::size_t bootstrap, std::uint64_t seed,
                                                const std::optional<Ranking>& reference) {
  if (fits.empty()) throw ValidationError("predict_full_ranking_cmpl needs at least one subset fit");
  if (universe_m < 1) throw ParameterError("universe must be non-empty");
  if (bootstrap == 0) throw ParameterError("bootstrap count must be positive");
  if (reference && reference->size() != universe_m) throw DimensionError("reference size differs from universe");
  std::vector<int> covered(static_cast<std::size_t>(universe_m), 0);
  for (const auto& fit : fits) {
    if (fit.samples.kind != ModelKind::Cmpl) throw ValidationError("subset fits must be Plackett-Luce posteriors");
    if (fit.samples.draws.empty()) throw ValidationError("subset fit has no draws");
    if (static_cast<int>(fit.ground_truth.size()) != fit.samples.m) {
      throw DimensionError("subset ground truth size differs from the fit's m");
    }
    if (group < 0 || group >= fit.samples.groups) throw ParameterError("group index out of range");
    std::set<Alternative> seen;
    for (auto a : fit.ground_truth) {
      if (a < 0 || a >= universe_m) throw ParameterError("subset alternative outside the universe");
      if (!seen.insert(a).second) throw ParameterError("subset repeats an alternative");
      ++covered[static_cast<std::size_t>(a)];
    }
  }
  std::string missing;
  for (int a = 0; a < universe_m; ++a) {
    if (covered[static_cast<std::size_t>(a)] == 0) missing += (missing.empty() ? "" : ",") + std::to_string(a);
  }
  if (!missing.empty()) throw CoverageError("alternatives not covered by any subset: " + missing);

  FullRankingPrediction out;
  if (reference) out.kt_histogram.assign(static_cast<std::size_t>(max_kendall_tau(universe_m) + 1), 0);
  Rng rng(seed);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    std::vector<double> strength(static_cast<std::size_t>(universe_m), 0.0);
    for (const auto& fit : fits) {
      const auto draw = rng.index(fit.samples.draws.size());
      const auto row = fit.samples.vote_strengths(draw)[static_cast<std::size_t>(group)];
      for (std::size_t j = 0; j < fit.ground_truth.size(); ++j) strength[static_cast<std::size_t>(fit.ground_truth[j])] += row[j];
    }
    double total = 0.0;
    for (std::size_t a = 0; a < strength.size(); ++a) {
      strength[a] /= covered[a];
      total += strength[a];
    }
    for (auto& v : strength) v /= total;
    auto ranking = order_by_scores(strength);
    ++out.distribution[ranking];
    if (reference) ++out.kt_histogram[static_cast<std::size_t>(kendall_tau(ranking, *reference))];
    out.replicates.push_back(std::move(ranking));
  }
  return out;
}

}  // namespace spvote
