#include "spvote/rankings.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "spvote/errors.hpp"

namespace spvote {

namespace {

void require_permutation(const std::vector<Alternative>& order) {
  const auto m = order.size();
  std::vector<bool> seen(m, false);
  for (auto a : order) {
    if (a < 0 || static_cast<std::size_t>(a) >= m) {
      throw ParameterError("ranking entry " + std::to_string(a) + " outside 0.." +
                           std::to_string(static_cast<long>(m) - 1));
    }
    if (seen[static_cast<std::size_t>(a)]) {
      throw ParameterError("ranking repeats alternative " + std::to_string(a));
    }
    seen[static_cast<std::size_t>(a)] = true;
  }
}

void require_same_size(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) {
    throw DimensionError("rankings over " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " alternatives");
  }
}

void require_indexable(int m) {
  if (m < 0 || m > kMaxIndexM) {
    throw CapacityError("rank index supports m <= " + std::to_string(kMaxIndexM) + ", got " +
                        std::to_string(m));
  }
}

}  // namespace

Ranking::Ranking(std::vector<Alternative> order) : order_(std::move(order)) {
  require_permutation(order_);
}

Ranking Ranking::identity(int m) {
  std::vector<Alternative> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  return Ranking(std::move(order));
}

std::vector<int> Ranking::positions() const {
  std::vector<int> pos(order_.size());
  for (std::size_t j = 0; j < order_.size(); ++j) pos[static_cast<std::size_t>(order_[j])] = static_cast<int>(j);
  return pos;
}

Ranking Ranking::inverse() const { return Ranking(positions()); }

PartialRanking::PartialRanking(std::vector<Alternative> items, int ambient_m)
    : items_(std::move(items)), ambient_m_(ambient_m) {
  if (ambient_m_ < 0 || static_cast<int>(items_.size()) > ambient_m_) {
    throw DimensionError("partial ranking of " + std::to_string(items_.size()) +
                         " items over " + std::to_string(ambient_m_) + " alternatives");
  }
  std::vector<bool> seen(static_cast<std::size_t>(ambient_m_), false);
  for (auto a : items_) {
    if (a < 0 || a >= ambient_m_) {
      throw ParameterError("unknown alternative " + std::to_string(a));
    }
    if (seen[static_cast<std::size_t>(a)]) {
      throw ParameterError("partial ranking repeats alternative " + std::to_string(a));
    }
    seen[static_cast<std::size_t>(a)] = true;
  }
}

std::vector<Alternative> PartialRanking::subset() const {
  auto s = items_;
  std::sort(s.begin(), s.end());
  return s;
}

std::uint64_t factorial(int m) {
  require_indexable(m);
  std::uint64_t f = 1;
  for (int i = 2; i <= m; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

int max_kendall_tau(int m) { return m * (m - 1) / 2; }

int kendall_tau(const Ranking& a, const Ranking& b) {
  require_same_size(a, b);
  const auto pos_b = b.positions();
  const int m = a.size();
  int d = 0;
  for (int i = 0; i < m; ++i) {
    const int pi = pos_b[static_cast<std::size_t>(a[i])];
    for (int j = i + 1; j < m; ++j) {
      if (pi > pos_b[static_cast<std::size_t>(a[j])]) ++d;
    }
  }
  return d;
}

void check_enumerable(int m) {
  if (m < 1 || m > kMaxEnumerationM) {
    throw CapacityError("exhaustive enumeration requires 1 <= m <= " +
                        std::to_string(kMaxEnumerationM) + ", got m = " + std::to_string(m));
  }
}

std::vector<Ranking> enumerate_rankings(int m) {
  check_enumerable(m);
  std::vector<Ranking> out;
  out.reserve(static_cast<std::size_t>(factorial(m)));
  std::vector<Alternative> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  do {
    out.emplace_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

RankIndex rank_index(const Ranking& r) {
  const int m = r.size();
  require_indexable(m);
  std::uint64_t index = 0;
  for (int i = 0; i < m; ++i) {
    std::uint64_t smaller_after = 0;
    for (int j = i + 1; j < m; ++j) {
      if (r[j] < r[i]) ++smaller_after;
    }
    index = index * static_cast<std::uint64_t>(m - i) + smaller_after;
  }
  return RankIndex{index};
}

Ranking unrank(RankIndex index, int m) {
  require_indexable(m);
  if (m == 0 || index.value >= factorial(m)) {
    throw ParameterError("rank index " + std::to_string(index.value) + " out of range for m = " +
                         std::to_string(m));
  }
  std::vector<int> code(static_cast<std::size_t>(m));
  auto rest = index.value;
  for (int i = m - 1; i >= 0; --i) {
    const auto base = static_cast<std::uint64_t>(m - i);
    code[static_cast<std::size_t>(i)] = static_cast<int>(rest % base);
    rest /= base;
  }
  std::vector<Alternative> pool(static_cast<std::size_t>(m));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<Alternative> order;
  order.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const auto it = pool.begin() + code[static_cast<std::size_t>(i)];
    order.push_back(*it);
    pool.erase(it);
  }
  return Ranking(std::move(order));
}

PartialRanking restrict(const Ranking& r, std::span<const Alternative> subset) {
  const int m = r.size();
  std::vector<bool> member(static_cast<std::size_t>(m), false);
  for (auto a : subset) {
    if (a < 0 || a >= m) throw ParameterError("unknown alternative " + std::to_string(a) + " in subset");
    if (member[static_cast<std::size_t>(a)]) throw ParameterError("subset repeats alternative " + std::to_string(a));
    member[static_cast<std::size_t>(a)] = true;
  }
  std::vector<Alternative> items;
  items.reserve(subset.size());
  for (auto a : r) {
    if (member[static_cast<std::size_t>(a)]) items.push_back(a);
  }
  return PartialRanking(std::move(items), m);
}

bool is_extension(const Ranking& r, const PartialRanking& p) {
  if (r.size() != p.ambient_m()) return false;
  const auto pos = r.positions();
  for (int i = 0; i + 1 < p.size(); ++i) {
    if (pos[static_cast<std::size_t>(p[i])] > pos[static_cast<std::size_t>(p[i + 1])]) return false;
  }
  return true;
}

std::vector<Ranking> extensions(const PartialRanking& p) {
  const int m = p.ambient_m();
  check_enumerable(m);
  const int k = p.size();
  std::vector<bool> member(static_cast<std::size_t>(m), false);
  for (auto a : p.items()) member[static_cast<std::size_t>(a)] = true;
  std::vector<Alternative> others;
  for (int a = 0; a < m; ++a) {
    if (!member[static_cast<std::size_t>(a)]) others.push_back(a);
  }

  // Choose which positions hold the subset (in p's order), then fill the rest
  // with every permutation of the remaining alternatives.
  std::vector<bool> slot(static_cast<std::size_t>(m), false);
  std::fill(slot.begin(), slot.begin() + k, true);
  std::vector<Ranking> out;
  do {
    auto rest = others;
    do {
      std::vector<Alternative> order(static_cast<std::size_t>(m));
      std::size_t ip = 0;
      std::size_t io = 0;
      for (std::size_t j = 0; j < order.size(); ++j) {
        order[j] = slot[j] ? p.items()[ip++] : rest[io++];
      }
      out.emplace_back(std::move(order));
    } while (std::next_permutation(rest.begin(), rest.end()));
  } while (std::prev_permutation(slot.begin(), slot.end()));
  std::sort(out.begin(), out.end());
  return out;
}

Ranking relative_to(const Ranking& sigma, const Ranking& center) {
  require_same_size(sigma, center);
  const auto pos = center.positions();
  std::vector<Alternative> rel(static_cast<std::size_t>(sigma.size()));
  for (int j = 0; j < sigma.size(); ++j) rel[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(sigma[j])];
  return Ranking(std::move(rel));
}

Ranking relabel(const Ranking& r, const Ranking& labels) {
  require_same_size(r, labels);
  std::vector<Alternative> out(static_cast<std::size_t>(r.size()));
  for (int j = 0; j < r.size(); ++j) out[static_cast<std::size_t>(j)] = labels[r[j]];
  return Ranking(std::move(out));
}

RankIndex partial_index(const PartialRanking& p) {
  const auto subset = p.subset();
  std::vector<Alternative> local(static_cast<std::size_t>(p.size()));
  for (int j = 0; j < p.size(); ++j) {
    local[static_cast<std::size_t>(j)] =
        static_cast<Alternative>(std::lower_bound(subset.begin(), subset.end(), p[j]) - subset.begin());
  }
  return rank_index(Ranking(std::move(local)));
}

PartialRanking partial_unrank(RankIndex index, std::span<const Alternative> subset, int ambient_m) {
  std::vector<Alternative> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  const auto local = unrank(index, static_cast<int>(sorted.size()));
  std::vector<Alternative> items;
  items.reserve(sorted.size());
  for (auto a : local) items.push_back(sorted[static_cast<std::size_t>(a)]);
  return PartialRanking(std::move(items), ambient_m);
}

namespace {

std::string join_text(const std::vector<Alternative>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '>';
    out += std::to_string(items[i]);
  }
  return out;
}

}  // namespace

std::string to_text(const Ranking& r) { return join_text(r.order()); }
std::string to_text(const PartialRanking& p) { return join_text(p.items()); }

std::vector<Alternative> parse_order_text(std::string_view text) {
  std::vector<Alternative> out;
  if (text.empty()) throw ParseError("empty ranking text");
  std::size_t start = 0;
  while (true) {
    const auto end = text.find('>', start);
    const auto token = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    Alternative value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || value < 0) {
      throw ParseError("invalid alternative '" + std::string(token) + "' in ranking '" + std::string(text) + "'");
    }
    out.push_back(value);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

Ranking parse_ranking(std::string_view text) {
  auto order = parse_order_text(text);
  try {
    return Ranking(std::move(order));
  } catch (const ParameterError& e) {
    throw ParseError(std::string(e.what()) + " in '" + std::string(text) + "'");
  }
}

}  // namespace spvote
