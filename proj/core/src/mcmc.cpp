#include "spvote/mcmc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spvote/errors.hpp"
#include "spvote/parallel.hpp"

namespace spvote {

namespace {

constexpr double kTargetAcceptance = 0.234;

// Ends of the covariance windows: after a step-size-only opening stretch of
// 15% of warmup, windows double in length up to 90% of warmup.
std::vector<int> adaptation_windows(int warmup) {
  const int start = warmup * 15 / 100;
  const int end = warmup * 90 / 100;
  std::vector<int> ends;
  int length = std::max(1, (end - start) / 15);
  for (int t = start + length; t < end; length *= 2, t += length) {
    if (end - t < 2 * length) t = end;
    ends.push_back(t);
  }
  return ends;
}

int window_start(const std::vector<int>& ends, int warmup) { return ends.empty() ? warmup : warmup * 15 / 100; }

// Sample covariance shrunk toward a small identity, as a Cholesky factor.
Eigen::MatrixXd regularized_cholesky(const std::vector<std::vector<double>>& history, Eigen::Index dim) {
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(history.size()), dim);
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) samples(static_cast<Eigen::Index>(i), j) = history[i][static_cast<std::size_t>(j)];
  }
  const double n = static_cast<double>(samples.rows());
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1.0);
  cov = n / (n + 5.0) * cov + 1e-3 * 5.0 / (n + 5.0) * Eigen::MatrixXd::Identity(dim, dim);
  return Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
}

ChainRun run_chain(const LogTarget& target, const Initializer& init, const McmcConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x = init(rng);
  const auto dim = static_cast<Eigen::Index>(x.size());
  double log_p = target(x);
  if (!std::isfinite(log_p)) throw Error("MCMC initial point has non-finite log density");

  ChainRun run;
  run.draws.reserve(static_cast<std::size_t>(cfg.iterations - cfg.warmup));

  Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(dim, dim);
  double log_scale = std::log(cfg.proposal_scale);
  const auto window_ends = adaptation_windows(cfg.warmup);
  std::size_t next_window = 0;
  int since_reset = 0;
  std::vector<std::vector<double>> history;

  Eigen::VectorXd z(dim);
  std::vector<double> proposal(x.size());
  for (int t = 0; t < cfg.iterations; ++t) {
    const bool warming = t < cfg.warmup;
    if (next_window < window_ends.size() && t == window_ends[next_window]) {
      ++next_window;
      if (history.size() > x.size() + 1) {
        chol = regularized_cholesky(history, dim);
        log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
        since_reset = 0;
      }
      history.clear();
    }

    for (Eigen::Index j = 0; j < dim; ++j) z(j) = rng.normal();
    const Eigen::VectorXd step = std::exp(log_scale) * (chol * z);
    for (std::size_t j = 0; j < x.size(); ++j) proposal[j] = x[j] + step(static_cast<Eigen::Index>(j));

    const double log_q = target(proposal);
    double accept_prob = 0.0;
    if (std::isnan(log_q) || log_q == std::numeric_limits<double>::infinity()) {
      ++run.nonfinite_rejections;
    } else if (log_q == -std::numeric_limits<double>::infinity()) {
      ++run.constraint_rejections;
    } else {
      accept_prob = std::min(1.0, std::exp(log_q - log_p));
    }
    const bool accept = accept_prob > 0.0 && rng.uniform() < accept_prob;
    if (accept) {
      x = proposal;
      log_p = log_q;
    }

    if (warming) {
      log_scale += (accept_prob - kTargetAcceptance) / std::pow(++since_reset, 0.6);
      if (t >= window_start(window_ends, cfg.warmup) && next_window < window_ends.size()) history.push_back(x);
    } else {
      ++run.proposals;
      if (accept) ++run.accepted;
      run.draws.push_back(x);
    }
  }
  run.final_scale = std::exp(log_scale);
  return run;
}

std::vector<std::vector<double>> split_halves(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half == 0) continue;
    // drop the middle draw of odd-length chains
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

struct VarianceParts {
  double within = 0.0;
  double var_plus = 0.0;
};

VarianceParts variance_parts(const std::vector<std::vector<double>>& chains) {
  const double n = static_cast<double>(chains.front().size());
  const double m = static_cast<double>(chains.size());
  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : chains) {
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    within += n > 1 ? ss / (n - 1) : 0.0;
    means.push_back(mean);
  }
  within /= m;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between = m > 1 ? between * n / (m - 1) : 0.0;
  return {within, (n - 1) / n * within + between / n};
}

}  // namespace

void McmcConfig::validate() const {
  if (chains < 1) throw ParameterError("MCMC needs at least one chain");
  if (warmup < 0 || warmup >= iterations) throw ParameterError("MCMC needs 0 <= warmup < iterations");
  if (!(proposal_scale > 0.0) || !std::isfinite(proposal_scale)) {
    throw ParameterError("MCMC proposal_scale must be positive");
  }
}

std::vector<ChainRun> run_metropolis(const LogTarget& target, const Initializer& init, const McmcConfig& cfg) {
  cfg.validate();
  std::vector<ChainRun> runs(static_cast<std::size_t>(cfg.chains));
  const unsigned threads = cfg.threads == 0 ? default_thread_count() : cfg.threads;
  parallel_for(runs.size(), threads, [&](std::size_t c) {
    runs[c] = run_chain(target, init, cfg, derive_seed(cfg.seed, c, 0x6d636d63));
  });
  return runs;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const auto split = split_halves(chains);
  if (split.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto parts = variance_parts(split);
  if (parts.within <= 0.0) return parts.var_plus <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(parts.var_plus / parts.within);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const auto split = split_halves(chains);
  if (split.empty()) return 0.0;
  const auto n = split.front().size();
  const double total = static_cast<double>(n * split.size());
  const auto parts = variance_parts(split);
  if (parts.var_plus <= 0.0) return total;

  const auto rho = [&](std::size_t lag) {
    double v = 0.0;
    for (const auto& c : split) {
      double s = 0.0;
      for (std::size_t i = lag; i < n; ++i) s += (c[i] - c[i - lag]) * (c[i] - c[i - lag]);
      v += s / static_cast<double>(n - lag);
    }
    v /= static_cast<double>(split.size());
    return 1.0 - v / (2.0 * parts.var_plus);
  };

  double sum = 0.0;
  for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
    const double pair = rho(lag) + rho(lag + 1);
    if (pair < 0.0) break;
    sum += pair;
  }
  return std::min(total, total / (1.0 + 2.0 * sum));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace spvote
