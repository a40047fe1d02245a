#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spvote/random.hpp"

namespace spvote {

struct McmcConfig {
  int chains = 4;
  int iterations = 8000;  // per chain, warmup included
  int warmup = 2000;
  double proposal_scale = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = all available cores

  void validate() const;
};

// Log target on the unconstrained scale. Return -infinity to reject a point
// that violates a constraint and NaN (or +infinity) for a non-finite likelihood.
using LogTarget = std::function<double(const std::vector<double>&)>;
using Initializer = std::function<std::vector<double>(Rng&)>;

struct ChainRun {
  std::vector<std::vector<double>> draws;  // post-warmup, unconstrained scale
  std::size_t proposals = 0;               // post-warmup
  std::size_t accepted = 0;                // post-warmup
  std::size_t constraint_rejections = 0;
  std::size_t nonfinite_rejections = 0;
  double final_scale = 0.0;
};

// Adaptive random-walk Metropolis. During warmup the step size follows a
// Robbins-Monro rule toward 23.4% acceptance and the proposal covariance is
// re-estimated over doubling windows; the proposal is frozen after warmup.
std::vector<ChainRun> run_metropolis(const LogTarget& target, const Initializer& init, const McmcConfig& cfg);

// Split-chain potential scale reduction for one scalar parameter.
double split_rhat(const std::vector<std::vector<double>>& chains);
// Multi-chain effective sample size (split chains, Geyer initial positive sequence).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

// Type-7 sample quantile.
double quantile(std::vector<double> values, double q);

}  // namespace spvote
