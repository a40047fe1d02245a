#pragma once

// Independent reference computations used as test oracles. They work on plain
// vectors and std::next_permutation and share no code with the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Perm = std::vector<int>;

inline std::vector<Perm> all_perms(int m) {
  Perm p(static_cast<std::size_t>(m));
  std::iota(p.begin(), p.end(), 0);
  std::vector<Perm> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Discordant pairs by comparing every pair of alternatives.
inline int kt(const Perm& a, const Perm& b) {
  const auto m = a.size();
  std::vector<std::size_t> pa(m), pb(m);
  for (std::size_t i = 0; i < m; ++i) {
    pa[static_cast<std::size_t>(a[i])] = i;
    pb[static_cast<std::size_t>(b[i])] = i;
  }
  int d = 0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = x + 1; y < m; ++y) {
      if ((pa[x] < pa[y]) != (pb[x] < pb[y])) ++d;
    }
  }
  return d;
}

inline double brute_z(double phi, int m) {
  const auto perms = all_perms(m);
  double z = 0.0;
  for (const auto& p : perms) z += std::pow(phi, kt(p, perms.front()));
  return z;
}

inline double mallows(const Perm& s, const Perm& center, double phi) {
  return std::pow(phi, kt(s, center)) / brute_z(phi, static_cast<int>(s.size()));
}

// Sequential choice probability; theta indexed by position in center.
inline double plackett_luce(const Perm& s, const Perm& center, const std::vector<double>& theta) {
  const auto m = s.size();
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) w[static_cast<std::size_t>(center[j])] = theta[j];
  double prob = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    double rest = 0.0;
    for (std::size_t l = j; l < m; ++l) rest += w[static_cast<std::size_t>(s[l])];
    prob *= w[static_cast<std::size_t>(s[j])] / rest;
  }
  return prob;
}

struct Mixture {
  bool mallows = true;
  std::vector<double> p;
  std::vector<double> phi;
  std::vector<std::vector<double>> theta;

  double prob(const Perm& s, const Perm& center) const {
    double total = 0.0;
    for (std::size_t g = 0; g < p.size(); ++g) {
      total += p[g] * (mallows ? oracle::mallows(s, center, phi[g]) : plackett_luce(s, center, theta[g]));
    }
    return total;
  }
};

// K[a][b] = Pr(perm a | center perm b) in next_permutation (lexicographic) order.
inline std::vector<std::vector<double>> kernel(const Mixture& mix, int m) {
  const auto perms = all_perms(m);
  std::vector<std::vector<double>> k(perms.size(), std::vector<double>(perms.size()));
  for (std::size_t a = 0; a < perms.size(); ++a) {
    for (std::size_t b = 0; b < perms.size(); ++b) k[a][b] = mix.prob(perms[a], perms[b]);
  }
  return k;
}

// Bayes posterior over the center and the predictive distribution of another
// voter, both by explicit summation.
inline std::vector<double> posterior(const std::vector<std::vector<double>>& k, std::size_t vote,
                                     const std::vector<double>& prior) {
  std::vector<double> post(k.size());
  double total = 0.0;
  for (std::size_t s = 0; s < k.size(); ++s) total += post[s] = k[vote][s] * prior[s];
  for (auto& x : post) x /= total;
  return post;
}

inline std::vector<double> predictive(const std::vector<std::vector<double>>& k, std::size_t vote,
                                      const std::vector<double>& prior) {
  const auto post = posterior(k, vote, prior);
  std::vector<double> out(k.size(), 0.0);
  for (std::size_t o = 0; o < k.size(); ++o) {
    for (std::size_t s = 0; s < k.size(); ++s) out[o] += k[o][s] * post[s];
  }
  return out;
}

// Population prediction-normalized vote, straight from its definition.
inline std::vector<double> vbar(const std::vector<std::vector<double>>& k, std::size_t star) {
  const std::size_t n = k.size();
  const std::vector<double> prior(n, 1.0 / static_cast<double>(n));
  std::vector<std::vector<double>> pred(n);
  for (std::size_t v = 0; v < n; ++v) pred[v] = predictive(k, v, prior);
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    for (std::size_t o = 0; o < n; ++o) sum += pred[s][o] / pred[o][s];
    out[s] = k[s][star] * sum;
  }
  return out;
}

// Copeland scores from a brute pairwise count.
inline std::vector<double> copeland_scores(const std::vector<Perm>& votes, int m) {
  std::vector<double> score(static_cast<std::size_t>(m), 0.0);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      int ab = 0;
      int ba = 0;
      for (const auto& v : votes) {
        const auto pa = std::find(v.begin(), v.end(), a) - v.begin();
        const auto pb = std::find(v.begin(), v.end(), b) - v.begin();
        (pa < pb ? ab : ba) += 1;
      }
      if (ab > ba) score[static_cast<std::size_t>(a)] += 1.0;
      if (ab == ba) score[static_cast<std::size_t>(a)] += 0.5;
    }
  }
  return score;
}

inline std::vector<double> borda_scores(const std::vector<Perm>& votes, int m) {
  std::vector<double> score(static_cast<std::size_t>(m), 0.0);
  for (const auto& v : votes) {
    for (std::size_t j = 0; j < v.size(); ++j) score[static_cast<std::size_t>(v[j])] += static_cast<double>(v.size() - 1 - j);
  }
  return score;
}

// Highest score first, ties to the lower id, by selection.
inline Perm order_by(std::vector<double> score) {
  Perm out;
  for (std::size_t k = 0; k < score.size(); ++k) {
    std::size_t best = score.size();
    for (std::size_t a = 0; a < score.size(); ++a) {
      if (score[a] == -1e300) continue;
      if (best == score.size() || score[a] > score[best]) best = a;
    }
    out.push_back(static_cast<int>(best));
    score[best] = -1e300;
  }
  return out;
}

// Random parameters for property tests.
struct Generator {
  std::mt19937_64 engine;
  explicit Generator(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }

  std::vector<double> simplex(int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& x : v) total += x = -std::log(uniform(1e-12, 1.0));
    for (auto& x : v) x /= total;
    return v;
  }

  std::vector<double> sorted_dispersions(int g, double lo = 0.01, double hi = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(g));
    for (auto& x : v) x = uniform(lo, hi);
    std::sort(v.begin(), v.end());
    return v;
  }

  // Rows (1 - t) * uniform + t * base with t decreasing: a dominance chain of
  // non-increasing rows.
  std::vector<std::vector<double>> dominant_rows(int g, int m) {
    auto base = simplex(m);
    std::sort(base.rbegin(), base.rend());
    std::vector<double> t(static_cast<std::size_t>(g));
    for (auto& x : t) x = uniform(0.0, 1.0);
    std::sort(t.rbegin(), t.rend());
    std::vector<std::vector<double>> rows;
    for (double w : t) {
      std::vector<double> row(static_cast<std::size_t>(m));
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = (1.0 - w) / m + w * base[j];
      rows.push_back(row);
    }
    return rows;
  }

  Perm permutation(int m) {
    Perm p(static_cast<std::size_t>(m));
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), engine);
    return p;
  }
};

}  // namespace oracle
