#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace spvote {

// Counter-based seed derivation: the stream for (seed, a, b) never depends on
// how many other streams were consumed, so parallel trials stay reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  double normal() { return std::normal_distribution<double>{}(engine_); }
  double gamma(double shape) { return std::gamma_distribution<double>{shape, 1.0}(engine_); }

  // Index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>{0, n - 1}(engine_);
  }

  // Draw from an unnormalized non-negative weight vector.
  std::size_t categorical(std::span<const double> weights);

  std::vector<double> dirichlet(std::span<const double> alpha);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spvote
