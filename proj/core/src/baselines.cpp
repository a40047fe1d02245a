#include "spvote/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "spvote/errors.hpp"

namespace spvote {

namespace {

int common_size(std::span<const Ranking> votes) {
  if (votes.empty()) throw ValidationError("aggregation needs at least one vote");
  const int m = votes.front().size();
  for (const auto& v : votes) {
    if (v.size() != m) throw DimensionError("votes over different numbers of alternatives");
  }
  return m;
}

}  // namespace

void PairwiseTally::add(const Ranking& vote) {
  if (vote.size() != m_) throw DimensionError("vote size does not match tally");
  for (int i = 0; i < m_; ++i) {
    for (int j = i + 1; j < m_; ++j) add(vote[i], vote[j]);
  }
}

PairwiseTally pairwise_tally(std::span<const Ranking> votes) {
  PairwiseTally tally(common_size(votes));
  for (const auto& v : votes) tally.add(v);
  return tally;
}

std::vector<double> copeland_scores(const PairwiseTally& tally) {
  const int m = tally.m();
  std::vector<double> scores(static_cast<std::size_t>(m), 0.0);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      if (tally(a, b) > tally(b, a)) {
        scores[static_cast<std::size_t>(a)] += 1.0;
      } else if (tally(a, b) == tally(b, a)) {
        scores[static_cast<std::size_t>(a)] += 0.5;
      }
    }
  }
  return scores;
}

std::vector<double> borda_scores(std::span<const Ranking> votes) {
  const int m = common_size(votes);
  std::vector<double> scores(static_cast<std::size_t>(m), 0.0);
  for (const auto& v : votes) {
    for (int pos = 0; pos < m; ++pos) scores[static_cast<std::size_t>(v[pos])] += m - 1 - pos;
  }
  return scores;
}

Ranking order_by_scores(const std::vector<double>& scores) {
  std::vector<Alternative> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Alternative a, Alternative b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return Ranking(std::move(order));
}

Ranking copeland(const PairwiseTally& tally) { return order_by_scores(copeland_scores(tally)); }

Ranking copeland(std::span<const Ranking> votes) { return copeland(pairwise_tally(votes)); }

Ranking borda(std::span<const Ranking> votes) { return order_by_scores(borda_scores(votes)); }

}  // namespace spvote
