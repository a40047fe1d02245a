#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spvote {

using Alternative = int;

// Largest m for which the m! rankings may be enumerated exhaustively.
inline constexpr int kMaxEnumerationM = 10;
// Largest m whose Lehmer index fits in 64 bits.
inline constexpr int kMaxIndexM = 20;

// A total order of the alternatives {0..m-1}, stored position -> alternative.
class Ranking {
 public:
  Ranking() = default;
  explicit Ranking(std::vector<Alternative> order);
  Ranking(std::initializer_list<Alternative> order) : Ranking(std::vector<Alternative>(order)) {}

  static Ranking identity(int m);

  int size() const { return static_cast<int>(order_.size()); }
  Alternative operator[](int position) const { return order_[static_cast<std::size_t>(position)]; }
  const std::vector<Alternative>& order() const { return order_; }
  auto begin() const { return order_.begin(); }
  auto end() const { return order_.end(); }

  // alternative -> position
  std::vector<int> positions() const;
  Ranking inverse() const;

  friend auto operator<=>(const Ranking&, const Ranking&) = default;

 private:
  std::vector<Alternative> order_;
};

// A total order over a subset of {0..ambient_m-1}.
class PartialRanking {
 public:
  PartialRanking() = default;
  PartialRanking(std::vector<Alternative> items, int ambient_m);

  int size() const { return static_cast<int>(items_.size()); }
  int ambient_m() const { return ambient_m_; }
  const std::vector<Alternative>& items() const { return items_; }
  Alternative operator[](int position) const { return items_[static_cast<std::size_t>(position)]; }

  // The subset in ascending order.
  std::vector<Alternative> subset() const;

  friend auto operator<=>(const PartialRanking&, const PartialRanking&) = default;

 private:
  std::vector<Alternative> items_;
  int ambient_m_ = 0;
};

// Dense Lehmer-code index in [0, m!); lexicographic order of rankings.
struct RankIndex {
  std::uint64_t value = 0;
  friend auto operator<=>(const RankIndex&, const RankIndex&) = default;
};

std::uint64_t factorial(int m);
int max_kendall_tau(int m);

// Number of discordant pairs.
int kendall_tau(const Ranking& a, const Ranking& b);

std::vector<Ranking> enumerate_rankings(int m);

RankIndex rank_index(const Ranking& r);
Ranking unrank(RankIndex index, int m);

// Relative order of `subset` members in r.
PartialRanking restrict(const Ranking& r, std::span<const Alternative> subset);
bool is_extension(const Ranking& r, const PartialRanking& p);
// All full rankings consistent with p, in RankIndex order.
std::vector<Ranking> extensions(const PartialRanking& p);

// Expresses `sigma` relative to `center`: entry j is the position in `center`
// of sigma's j-th alternative. relative_to(center, center) is the identity.
Ranking relative_to(const Ranking& sigma, const Ranking& center);
// Applies an alternative relabeling: result[j] = labels[r[j]].
Ranking relabel(const Ranking& r, const Ranking& labels);

// Index of a partial ranking among the k! orderings of its subset: the
// subset's members are relabeled 0..k-1 in ascending order.
RankIndex partial_index(const PartialRanking& p);
PartialRanking partial_unrank(RankIndex index, std::span<const Alternative> subset, int ambient_m);

// "2>0>1>3" text form.
std::string to_text(const Ranking& r);
std::string to_text(const PartialRanking& p);
std::vector<Alternative> parse_order_text(std::string_view text);
Ranking parse_ranking(std::string_view text);

void check_enumerable(int m);

}  // namespace spvote
