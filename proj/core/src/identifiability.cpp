#include "spvote/identifiability.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "spvote/errors.hpp"
#include "spvote/sp_engine.hpp"

namespace spvote {

namespace {

IdentifiabilityReport make_report(LemmaTag tag, double lhs, double rhs) {
  IdentifiabilityReport report;
  report.lemma = tag;
  report.lhs = lhs;
  report.rhs = rhs;
  report.satisfied = lhs >= rhs;
  return report;
}

void check_partition(int s, int groups) {
  if (s < 1 || s >= groups) {
    throw PreconditionError("partition index s=" + std::to_string(s) + " must satisfy 1 <= s < G=" +
                            std::to_string(groups));
  }
}

double alpha_of(const std::vector<double>& proportions, int s) {
  double alpha = 0.0;
  for (int g = 0; g < s; ++g) alpha += proportions[static_cast<std::size_t>(g)];
  return alpha;
}

void check_row(const std::vector<double>& row, const char* name) {
  if (row.empty()) throw PreconditionError(std::string(name) + " is empty");
  double total = 0.0;
  for (double x : row) {
    if (!(x > 0.0)) throw PreconditionError(std::string(name) + " needs positive strengths");
    total += x;
  }
  if (std::abs(total - 1.0) > kParamTolerance) throw PreconditionError(std::string(name) + " must sum to 1");
  if (!is_non_increasing(row)) throw PreconditionError(std::string(name) + " must be non-increasing");
}

}  // namespace

const char* to_string(LemmaTag tag) {
  switch (tag) {
    case LemmaTag::Cmm2: return "CMM-2";
    case LemmaTag::CmmG: return "CMM-G";
    case LemmaTag::Cmpl2: return "CMPL-2";
    case LemmaTag::CmplG: return "CMPL-G";
  }
  return "?";
}

LemmaTag parse_lemma_tag(const std::string& text) {
  std::string key;
  for (char c : text) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "cmm2") return LemmaTag::Cmm2;
  if (key == "cmmg") return LemmaTag::CmmG;
  if (key == "cmpl2") return LemmaTag::Cmpl2;
  if (key == "cmplg") return LemmaTag::CmplG;
  throw ParameterError("unknown lemma tag '" + text + "'");
}

IdentifiabilityReport cmm_g2_condition(double p1, double phi1, double phi2, int m) {
  if (m < 1) throw PreconditionError("m must be positive");
  if (!(p1 > 0.0 && p1 <= 0.5)) throw PreconditionError("two-group Mallows condition needs 0 < p1 <= 1/2");
  if (!(phi1 > 0.0 && phi1 <= phi2 && phi2 <= 1.0)) {
    throw PreconditionError("two-group Mallows condition needs 0 < phi1 <= phi2 <= 1");
  }
  const double odds = p1 / (1.0 - p1);
  const double z1 = mallows_normalizer(phi1, m);
  const double z2 = mallows_normalizer(phi2, m);
  const double rhs = 2.0 * z2 * z2 * z2 / (z1 * z1) * std::pow(phi1, m * (m - 1) / 2.0);
  return make_report(LemmaTag::Cmm2, odds * odds, rhs);
}

IdentifiabilityReport cmm_general_condition(const CmmParams& params, int s, int m) {
  try {
    params.validate();
  } catch (const ValidationError& e) {
    throw PreconditionError(e.what());
  }
  if (m < 1) throw PreconditionError("m must be positive");
  const int groups = params.groups();
  check_partition(s, groups);
  const double alpha = alpha_of(params.proportions, s);
  const auto phi = [&](int g) { return params.dispersions[static_cast<std::size_t>(g - 1)]; };
  const auto z = [&](int g) { return mallows_normalizer(phi(g), m); };
  const double lhs = alpha / z(s) + (1.0 - alpha) / z(groups);
  const double rhs = 2.0 * (phi(s) * alpha / z(1) + phi(groups) * (1.0 - alpha) / z(s + 1));
  auto report = make_report(LemmaTag::CmmG, lhs, rhs);
  report.partition_s = s;
  report.alpha = alpha;
  return report;
}

double pl_center_product(const std::vector<double>& theta) {
  double tail = 0.0;
  for (double x : theta) tail += x;
  double product = 1.0;
  for (double x : theta) {
    product *= x / tail;
    tail -= x;
  }
  return product;
}

double pl_reversed_product(const std::vector<double>& theta) {
  return pl_center_product(std::vector<double>(theta.rbegin(), theta.rend()));
}

IdentifiabilityReport cmpl_g2_condition(double p1, const std::vector<double>& theta1,
                                        const std::vector<double>& theta2) {
  if (!(p1 > 0.0 && p1 <= 0.5)) throw PreconditionError("two-group Plackett-Luce condition needs 0 < p1 <= 1/2");
  check_row(theta1, "theta1");
  check_row(theta2, "theta2");
  if (theta1.size() != theta2.size()) throw PreconditionError("theta rows differ in length");
  if (!check_dominance({theta1, theta2})) throw PreconditionError("theta1 must dominate theta2");
  const double odds = p1 / (1.0 - p1);
  const double a = pl_center_product(theta2);
  const double b = pl_center_product(theta1);
  const double c = pl_reversed_product(theta1);
  return make_report(LemmaTag::Cmpl2, odds * odds, 2.0 * a / b * c);
}

IdentifiabilityReport cmpl_general_condition(const CmplParams& params, int s) {
  if (params.strengths.empty()) throw PreconditionError("no strength rows");
  const int m = static_cast<int>(params.strengths.front().size());
  try {
    params.validate(m);
  } catch (const ValidationError& e) {
    throw PreconditionError(e.what());
  }
  const int groups = params.groups();
  check_partition(s, groups);
  const double alpha = alpha_of(params.proportions, s);
  const auto row = [&](int g) -> const std::vector<double>& { return params.strengths[static_cast<std::size_t>(g - 1)]; };
  const auto center = [&](int g) { return pl_center_product(row(g)); };
  const auto reversed = [&](int g) { return pl_reversed_product(row(g)); };
  const double lhs = alpha * center(s) + (1.0 - alpha) * center(groups);
  const double numerator = 2.0 * alpha * center(1) + 2.0 * (1.0 - alpha) * center(s + 1);
  const double denominator = alpha * reversed(1) + (1.0 - alpha) * reversed(s + 1);
  auto report = make_report(LemmaTag::CmplG, lhs, numerator / denominator);
  report.partition_s = s;
  report.alpha = alpha;
  return report;
}

std::uint64_t sample_complexity_bound(int m, double delta) {
  if (m < 1) throw ParameterError("m must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  double fact = 1.0;
  for (int i = 2; i <= m; ++i) fact *= i;
  const double value = fact * std::sqrt(m * std::log(m / delta));
  // Guard against ceil(6.0000000001) style noise from the floating-point product.
  const double rounded = std::round(value);
  if (std::abs(value - rounded) < 1e-9 * std::max(1.0, value)) return static_cast<std::uint64_t>(rounded);
  return static_cast<std::uint64_t>(std::ceil(value));
}

double separation_ratio(const ModelSpec& spec) {
  check_enumerable(spec.m());
  const auto vbar = exact_vbar(spec);
  const auto star = rank_index(spec.ground_truth()).value;
  double rival = 0.0;
  for (std::size_t i = 0; i < vbar.size(); ++i) {
    if (i != star) rival = std::max(rival, vbar[i]);
  }
  if (rival == 0.0) return std::numeric_limits<double>::infinity();
  return vbar[star] / rival;
}

bool verify_separation(const ModelSpec& spec, double margin) { return separation_ratio(spec) >= margin; }

}  // namespace spvote
