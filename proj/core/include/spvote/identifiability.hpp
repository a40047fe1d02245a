#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spvote/rank_models.hpp"

namespace spvote {

enum class LemmaTag { Cmm2, CmmG, Cmpl2, CmplG };

// "CMM-2", "CMM-G", "CMPL-2", "CMPL-G".
const char* to_string(LemmaTag tag);
// Accepts the report spelling as well as the CLI spelling (cmm2, cmmg, cmpl2, cmplg).
LemmaTag parse_lemma_tag(const std::string& text);

struct IdentifiabilityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;  // lhs >= rhs
  LemmaTag lemma = LemmaTag::Cmm2;
  std::optional<int> partition_s;
  std::optional<double> alpha;
};

// Two-group Mallows mixture, experts in the minority.
IdentifiabilityReport cmm_g2_condition(double p1, double phi1, double phi2, int m);
// Groups 1..s against s+1..G (s is 1-based).
IdentifiabilityReport cmm_general_condition(const CmmParams& params, int s, int m);

// prod_j theta[j] / sum_{i>=j} theta[i]: PL probability of the center itself.
double pl_center_product(const std::vector<double>& theta);
// The same product with the row read backwards: PL probability of the reversed center.
double pl_reversed_product(const std::vector<double>& theta);

IdentifiabilityReport cmpl_g2_condition(double p1, const std::vector<double>& theta1, const std::vector<double>& theta2);
IdentifiabilityReport cmpl_general_condition(const CmplParams& params, int s);

// ceil(m! * sqrt(m * ln(m / delta))).
std::uint64_t sample_complexity_bound(int m, double delta);

// V-bar(sigma*) divided by the largest V-bar over other rankings.
double separation_ratio(const ModelSpec& spec);
bool verify_separation(const ModelSpec& spec, double margin = 2.0);

}  // namespace spvote
