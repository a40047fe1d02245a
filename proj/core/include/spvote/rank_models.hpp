#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "spvote/random.hpp"
#include "spvote/rankings.hpp"

namespace spvote {

// Absolute tolerance for simplex and dominance checks on real-valued parameters.
inline constexpr double kParamTolerance = 1e-9;

enum class ModelKind { Cmm, Cmpl };

const char* to_string(ModelKind kind);

// Concentric mixture of Mallows: group g has weight proportions[g] and
// dispersion dispersions[g]; smaller dispersion means a more expert group.
struct CmmParams {
  std::vector<double> proportions;
  std::vector<double> dispersions;

  int groups() const { return static_cast<int>(proportions.size()); }
  void validate() const;
};

// Concentric mixture of Plackett-Luce: strengths[g][j] is the strength of the
// alternative at position j of the ground truth, for group g.
struct CmplParams {
  std::vector<double> proportions;
  std::vector<std::vector<double>> strengths;

  int groups() const { return static_cast<int>(proportions.size()); }
  void validate(int m) const;
};

class ModelSpec {
 public:
  static ModelSpec cmm(Ranking ground_truth, CmmParams params);
  static ModelSpec cmpl(Ranking ground_truth, CmplParams params);

  ModelKind kind() const { return std::holds_alternative<CmmParams>(params_) ? ModelKind::Cmm : ModelKind::Cmpl; }
  int m() const { return ground_truth_.size(); }
  int groups() const;
  const Ranking& ground_truth() const { return ground_truth_; }
  const CmmParams& cmm_params() const;
  const CmplParams& cmpl_params() const;
  const std::vector<double>& proportions() const;

  ModelSpec with_ground_truth(Ranking ground_truth) const;

 private:
  ModelSpec(Ranking ground_truth, std::variant<CmmParams, CmplParams> params);

  Ranking ground_truth_;
  std::variant<CmmParams, CmplParams> params_;
};

void validate_proportions(const std::vector<double>& proportions);
bool is_non_increasing(const std::vector<double>& row, double tol = kParamTolerance);
// Prefix-sum chain: row g's prefix sums dominate row g+1's at every cut.
bool check_dominance(const std::vector<std::vector<double>>& strengths, double tol = kParamTolerance);

// Z(phi, m) = sum over rankings of phi^d; equals prod_{i=1..m} (1-phi^i)/(1-phi).
double mallows_normalizer(double phi, int m);
double mallows_prob(const Ranking& sigma, const Ranking& center, double phi);
double pl_prob(const Ranking& sigma, const Ranking& center, const std::vector<double>& strengths);

double cmm_prob(const Ranking& sigma, const ModelSpec& spec);
double cmpl_prob(const Ranking& sigma, const ModelSpec& spec);
// Pr_s(sigma | spec.ground_truth()) for either kind.
double model_prob(const Ranking& sigma, const ModelSpec& spec);
// Pr_s(sigma | center) with the spec's parameters and an arbitrary center.
double kernel_prob(const Ranking& sigma, const Ranking& center, const ModelSpec& spec);

// Distribution of the Kendall-Tau distance to the center under Mallows(phi).
std::vector<double> mallows_distance_pmf(double phi, int m);
struct DistanceMoments {
  double mean = 0.0;
  double sd = 0.0;
};
DistanceMoments mallows_distance_moments(double phi, int m);

Ranking draw_mallows(const Ranking& center, double phi, Rng& rng);
Ranking draw_pl(const Ranking& center, const std::vector<double>& strengths, Rng& rng);

struct SampleSet {
  std::vector<Ranking> rankings;
  std::vector<int> groups;  // mixture component of each draw
};

SampleSet sample_cmm(const ModelSpec& spec, std::size_t n, std::uint64_t seed);
SampleSet sample_cmpl(const ModelSpec& spec, std::size_t n, std::uint64_t seed);
SampleSet sample_model(const ModelSpec& spec, std::size_t n, std::uint64_t seed);
SampleSet sample_model(const ModelSpec& spec, std::size_t n, Rng& rng);

// Pr_s(p | sigma*) summed over the full rankings extending p.
double partial_marginal(const PartialRanking& p, const ModelSpec& spec);

// Dense m! x m! matrix K(a, b) = Pr_s(ranking a | center ranking b), indexed
// by RankIndex. The kernel depends only on a relative to b, so it is built
// from the m! relative probabilities.
class KernelMatrix {
 public:
  explicit KernelMatrix(const ModelSpec& spec);

  int m() const { return m_; }
  std::size_t size() const { return n_; }
  double operator()(std::size_t sigma, std::size_t center) const { return values_[sigma * n_ + center]; }
  // Pr_s(relative ranking | identity) indexed by RankIndex of the relative ranking.
  const std::vector<double>& relative() const { return relative_; }

 private:
  int m_;
  std::size_t n_;
  std::vector<double> relative_;
  std::vector<double> values_;
};

}  // namespace spvote
