#include "spvote/rank_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spvote/errors.hpp"

namespace spvote {

namespace {

void check_dispersion(double phi) {
  if (!(phi > 0.0) || phi > 1.0) {
    throw ParameterError("dispersion must lie in (0, 1], got " + std::to_string(phi));
  }
}

void check_strengths(const std::vector<double>& strengths, int m) {
  if (static_cast<int>(strengths.size()) != m) {
    throw DimensionError("strength vector of length " + std::to_string(strengths.size()) +
                         " for m = " + std::to_string(m));
  }
  for (double t : strengths) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw ParameterError("strengths must be positive and finite, got " + std::to_string(t));
    }
  }
}

// Pr(relative | identity) under Plackett-Luce; entry j of `relative` is the
// ground-truth position of the alternative placed j-th.
double pl_relative_prob(const std::vector<Alternative>& relative, const std::vector<double>& strengths) {
  // Suffix sums avoid cancellation when the remaining strengths are small.
  std::vector<double> tail(relative.size() + 1, 0.0);
  for (std::size_t j = relative.size(); j-- > 0;) tail[j] = tail[j + 1] + strengths[static_cast<std::size_t>(relative[j])];
  double prob = 1.0;
  for (std::size_t j = 0; j < relative.size(); ++j) prob *= strengths[static_cast<std::size_t>(relative[j])] / tail[j];
  return prob;
}

// rank_index without building a Ranking; `order` must be a permutation.
std::size_t lehmer_index(const std::vector<Alternative>& order) {
  const auto m = order.size();
  std::size_t index = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t smaller_after = 0;
    for (std::size_t j = i + 1; j < m; ++j) smaller_after += order[j] < order[i];
    index = index * (m - i) + smaller_after;
  }
  return index;
}

int inversions(const std::vector<Alternative>& order) {
  int d = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (order[i] > order[j]) ++d;
    }
  }
  return d;
}

}  // namespace

const char* to_string(ModelKind kind) { return kind == ModelKind::Cmm ? "CMM" : "CMPL"; }

void validate_proportions(const std::vector<double>& proportions) {
  if (proportions.empty()) throw ParameterError("mixture needs at least one group");
  double total = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("negative or non-finite group proportion");
    total += p;
  }
  if (std::abs(total - 1.0) > kParamTolerance) {
    throw ParameterError("group proportions sum to " + std::to_string(total) + ", expected 1");
  }
}

void CmmParams::validate() const {
  validate_proportions(proportions);
  if (dispersions.size() != proportions.size()) {
    throw DimensionError(std::to_string(proportions.size()) + " proportions but " +
                         std::to_string(dispersions.size()) + " dispersions");
  }
  for (double phi : dispersions) check_dispersion(phi);
  if (!std::is_sorted(dispersions.begin(), dispersions.end())) {
    throw ParameterError("dispersions must be non-decreasing (most expert group first)");
  }
}

bool is_non_increasing(const std::vector<double>& row, double tol) {
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[j - 1] + tol) return false;
  }
  return true;
}

bool check_dominance(const std::vector<std::vector<double>>& strengths, double tol) {
  for (std::size_t g = 1; g < strengths.size(); ++g) {
    const auto& hi = strengths[g - 1];
    const auto& lo = strengths[g];
    if (hi.size() != lo.size()) throw DimensionError("strength rows of unequal length");
    double prefix_hi = 0.0;
    double prefix_lo = 0.0;
    for (std::size_t j = 0; j < hi.size(); ++j) {
      prefix_hi += hi[j];
      prefix_lo += lo[j];
      if (prefix_hi + tol < prefix_lo) return false;
    }
  }
  return true;
}

void CmplParams::validate(int m) const {
  validate_proportions(proportions);
  if (strengths.size() != proportions.size()) {
    throw DimensionError(std::to_string(proportions.size()) + " proportions but " +
                         std::to_string(strengths.size()) + " strength rows");
  }
  for (const auto& row : strengths) {
    check_strengths(row, m);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(total - 1.0) > kParamTolerance) {
      throw ParameterError("strength row sums to " + std::to_string(total) + ", expected 1");
    }
    if (!is_non_increasing(row)) throw ParameterError("strength rows must be non-increasing");
  }
  if (!check_dominance(strengths)) {
    throw ParameterError("strength rows violate the stochastic-dominance chain");
  }
}

ModelSpec::ModelSpec(Ranking ground_truth, std::variant<CmmParams, CmplParams> params)
    : ground_truth_(std::move(ground_truth)), params_(std::move(params)) {}

ModelSpec ModelSpec::cmm(Ranking ground_truth, CmmParams params) {
  if (ground_truth.size() < 1) throw DimensionError("model needs m >= 1");
  params.validate();
  return ModelSpec(std::move(ground_truth), std::move(params));
}

ModelSpec ModelSpec::cmpl(Ranking ground_truth, CmplParams params) {
  if (ground_truth.size() < 1) throw DimensionError("model needs m >= 1");
  params.validate(ground_truth.size());
  return ModelSpec(std::move(ground_truth), std::move(params));
}

int ModelSpec::groups() const {
  return std::visit([](const auto& p) { return p.groups(); }, params_);
}

const CmmParams& ModelSpec::cmm_params() const {
  if (const auto* p = std::get_if<CmmParams>(&params_)) return *p;
  throw ParameterError("model is CMPL, not CMM");
}

const CmplParams& ModelSpec::cmpl_params() const {
  if (const auto* p = std::get_if<CmplParams>(&params_)) return *p;
  throw ParameterError("model is CMM, not CMPL");
}

const std::vector<double>& ModelSpec::proportions() const {
  return std::visit([](const auto& p) -> const std::vector<double>& { return p.proportions; }, params_);
}

ModelSpec ModelSpec::with_ground_truth(Ranking ground_truth) const {
  if (ground_truth.size() != m()) throw DimensionError("replacement ground truth has a different m");
  return ModelSpec(std::move(ground_truth), params_);
}

double mallows_normalizer(double phi, int m) {
  check_dispersion(phi);
  if (m < 0) throw DimensionError("negative m");
  if (phi == 1.0) {
    double z = 1.0;
    for (int i = 2; i <= m; ++i) z *= i;
    return z;
  }
  // prod_i (1 - phi^i) / (1 - phi), each factor evaluated as a geometric sum.
  double z = 1.0;
  double factor = 1.0;
  double power = 1.0;
  for (int i = 2; i <= m; ++i) {
    power *= phi;
    factor += power;
    z *= factor;
  }
  return z;
}

double mallows_prob(const Ranking& sigma, const Ranking& center, double phi) {
  check_dispersion(phi);
  const int d = kendall_tau(sigma, center);
  return std::pow(phi, d) / mallows_normalizer(phi, sigma.size());
}

double pl_prob(const Ranking& sigma, const Ranking& center, const std::vector<double>& strengths) {
  check_strengths(strengths, center.size());
  return pl_relative_prob(relative_to(sigma, center).order(), strengths);
}

double cmm_prob(const Ranking& sigma, const ModelSpec& spec) {
  return kernel_prob(sigma, spec.ground_truth(), spec);
}

double cmpl_prob(const Ranking& sigma, const ModelSpec& spec) {
  return kernel_prob(sigma, spec.ground_truth(), spec);
}

double model_prob(const Ranking& sigma, const ModelSpec& spec) {
  return kernel_prob(sigma, spec.ground_truth(), spec);
}

double kernel_prob(const Ranking& sigma, const Ranking& center, const ModelSpec& spec) {
  if (sigma.size() != spec.m() || center.size() != spec.m()) {
    throw DimensionError("ranking size does not match model m = " + std::to_string(spec.m()));
  }
  const auto& p = spec.proportions();
  double total = 0.0;
  if (spec.kind() == ModelKind::Cmm) {
    const auto& phi = spec.cmm_params().dispersions;
    const int d = kendall_tau(sigma, center);
    for (std::size_t g = 0; g < p.size(); ++g) {
      total += p[g] * std::pow(phi[g], d) / mallows_normalizer(phi[g], spec.m());
    }
  } else {
    const auto rel = relative_to(sigma, center);
    const auto& theta = spec.cmpl_params().strengths;
    for (std::size_t g = 0; g < p.size(); ++g) total += p[g] * pl_relative_prob(rel.order(), theta[g]);
  }
  return total;
}

std::vector<double> mallows_distance_pmf(double phi, int m) {
  check_dispersion(phi);
  // The distance is a sum of independent V_i in {0..i-1} with P(V_i = k) ~ phi^k.
  std::vector<double> pmf{1.0};
  for (int i = 2; i <= m; ++i) {
    std::vector<double> step(static_cast<std::size_t>(i));
    double w = 1.0;
    double total = 0.0;
    for (auto& s : step) {
      s = w;
      total += w;
      w *= phi;
    }
    for (auto& s : step) s /= total;
    std::vector<double> next(pmf.size() + step.size() - 1, 0.0);
    for (std::size_t a = 0; a < pmf.size(); ++a) {
      for (std::size_t b = 0; b < step.size(); ++b) next[a + b] += pmf[a] * step[b];
    }
    pmf = std::move(next);
  }
  return pmf;
}

DistanceMoments mallows_distance_moments(double phi, int m) {
  const auto pmf = mallows_distance_pmf(phi, m);
  double mean = 0.0;
  for (std::size_t d = 0; d < pmf.size(); ++d) mean += static_cast<double>(d) * pmf[d];
  double var = 0.0;
  for (std::size_t d = 0; d < pmf.size(); ++d) {
    const double dev = static_cast<double>(d) - mean;
    var += dev * dev * pmf[d];
  }
  return {mean, std::sqrt(var)};
}

Ranking draw_mallows(const Ranking& center, double phi, Rng& rng) {
  check_dispersion(phi);
  // Repeated insertion: the i-th alternative of the center goes to slot j in
  // {0..i} with probability ~ phi^(i - j), adding i - j inversions.
  std::vector<Alternative> order;
  order.reserve(static_cast<std::size_t>(center.size()));
  std::vector<double> weights;
  for (int i = 0; i < center.size(); ++i) {
    weights.assign(static_cast<std::size_t>(i + 1), 0.0);
    double w = 1.0;
    for (int j = i; j >= 0; --j) {
      weights[static_cast<std::size_t>(j)] = w;
      w *= phi;
    }
    const auto slot = rng.categorical(weights);
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(slot), center[i]);
  }
  return Ranking(std::move(order));
}

Ranking draw_pl(const Ranking& center, const std::vector<double>& strengths, Rng& rng) {
  check_strengths(strengths, center.size());
  std::vector<int> remaining(static_cast<std::size_t>(center.size()));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<Alternative> order;
  order.reserve(remaining.size());
  std::vector<double> weights;
  while (!remaining.empty()) {
    weights.resize(remaining.size());
    for (std::size_t i = 0; i < remaining.size(); ++i) weights[i] = strengths[static_cast<std::size_t>(remaining[i])];
    const auto pick = rng.categorical(weights);
    order.push_back(center[remaining[pick]]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return Ranking(std::move(order));
}

SampleSet sample_model(const ModelSpec& spec, std::size_t n, Rng& rng) {
  SampleSet out;
  out.rankings.reserve(n);
  out.groups.reserve(n);
  const auto& p = spec.proportions();
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = rng.categorical(p);
    out.groups.push_back(static_cast<int>(g));
    if (spec.kind() == ModelKind::Cmm) {
      out.rankings.push_back(draw_mallows(spec.ground_truth(), spec.cmm_params().dispersions[g], rng));
    } else {
      out.rankings.push_back(draw_pl(spec.ground_truth(), spec.cmpl_params().strengths[g], rng));
    }
  }
  return out;
}

SampleSet sample_model(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_model(spec, n, rng);
}

SampleSet sample_cmm(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  (void)spec.cmm_params();
  return sample_model(spec, n, seed);
}

SampleSet sample_cmpl(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
  (void)spec.cmpl_params();
  return sample_model(spec, n, seed);
}

double partial_marginal(const PartialRanking& p, const ModelSpec& spec) {
  if (p.ambient_m() != spec.m()) throw DimensionError("partial ranking ambient m differs from model m");
  double total = 0.0;
  for (const auto& sigma : extensions(p)) total += model_prob(sigma, spec);
  return total;
}

KernelMatrix::KernelMatrix(const ModelSpec& spec) : m_(spec.m()) {
  check_enumerable(m_);
  const auto all = enumerate_rankings(m_);
  n_ = all.size();
  relative_.resize(n_);
  const auto& p = spec.proportions();
  if (spec.kind() == ModelKind::Cmm) {
    const auto& phi = spec.cmm_params().dispersions;
    std::vector<double> by_distance(static_cast<std::size_t>(max_kendall_tau(m_) + 1), 0.0);
    for (std::size_t g = 0; g < p.size(); ++g) {
      const double z = mallows_normalizer(phi[g], m_);
      for (std::size_t d = 0; d < by_distance.size(); ++d) {
        by_distance[d] += p[g] * std::pow(phi[g], static_cast<double>(d)) / z;
      }
    }
    for (std::size_t r = 0; r < n_; ++r) relative_[r] = by_distance[static_cast<std::size_t>(inversions(all[r].order()))];
  } else {
    const auto& theta = spec.cmpl_params().strengths;
    for (std::size_t r = 0; r < n_; ++r) {
      double total = 0.0;
      for (std::size_t g = 0; g < p.size(); ++g) total += p[g] * pl_relative_prob(all[r].order(), theta[g]);
      relative_[r] = total;
    }
  }
  values_.resize(n_ * n_);
  for (std::size_t b = 0; b < n_; ++b) {
    const auto pos = all[b].positions();
    std::vector<Alternative> rel(static_cast<std::size_t>(m_));
    for (std::size_t a = 0; a < n_; ++a) {
      for (int j = 0; j < m_; ++j) rel[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(all[a][j])];
      values_[a * n_ + b] = relative_[lehmer_index(rel)];
    }
  }
}

}  // namespace spvote
