#pragma once

#include <span>
#include <vector>

#include "spvote/rankings.hpp"

namespace spvote {

// wins(a, b) = number of votes ranking a above b.
class PairwiseTally {
 public:
  explicit PairwiseTally(int m) : m_(m), wins_(static_cast<std::size_t>(m * m), 0) {}

  int m() const { return m_; }
  int operator()(Alternative a, Alternative b) const { return wins_[index(a, b)]; }
  void add(Alternative winner, Alternative loser, int count = 1) { wins_[index(winner, loser)] += count; }
  void add(const Ranking& vote);

 private:
  std::size_t index(Alternative a, Alternative b) const { return static_cast<std::size_t>(a * m_ + b); }

  int m_;
  std::vector<int> wins_;
};

PairwiseTally pairwise_tally(std::span<const Ranking> votes);

// Majority wins plus half a point per tied pair.
std::vector<double> copeland_scores(const PairwiseTally& tally);
std::vector<double> borda_scores(std::span<const Ranking> votes);

// Alternatives by descending score, ties to the lower id.
Ranking order_by_scores(const std::vector<double>& scores);

Ranking copeland(const PairwiseTally& tally);
Ranking copeland(std::span<const Ranking> votes);
Ranking borda(std::span<const Ranking> votes);

}  // namespace spvote
