#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mfpo/types.hpp"

namespace mfpo {

// Splittable seeding: streams are derived from (master_seed, id...) by
// chaining splitmix64, so any (agent, step, trajectory) stream can be
// constructed independently of execution order. All distributions are
// hand-rolled on top of mt19937_64 to keep traces identical across
// standard-library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    std::uint64_t z = h + 0x9e3779b97f4a7c15ULL + v;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive(std::uint64_t master,
                              std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = mix(0x243f6a8885a308d3ULL, master);
    for (auto id : ids) h = mix(h, id);
    return h;
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call; cache unused half).
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  int uniform_int(int n) {  // in [0, n)
    return static_cast<int>(uniform() * n) % n;
  }

  // Sample an index from unnormalized nonnegative weights.
  int categorical(const Vec& weights) {
    const double total = weights.sum();
    double x = uniform() * total;
    for (int i = 0; i < weights.size() - 1; ++i) {
      x -= weights[i];
      if (x < 0.0) return i;
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stream id tags for the hierarchical seeding scheme. Agent streams use
// ids {kAgent, agent_index, step, trajectory}; other consumers get their
// own top-level tag so they can never collide with agent streams.
enum StreamTag : std::uint64_t {
  kAgentTag = 1,
  kInitTag = 2,   // parameter initialization
  kEvalTag = 3,   // evaluation episodes
  kEnvTag = 4,    // environment construction (e.g. chain MDP tables)
};

}  // namespace mfpo
