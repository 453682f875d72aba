#pragma once

#include <cstdint>

namespace zomgt {

// Counter-based random stream. Output depends only on (key, counter), so a
// stream keyed by (master seed, agent id, iteration) produces the same draws
// regardless of which thread runs the agent or in what order streams are
// consumed.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t agent_id,
             std::uint64_t iteration)
      : key_(derive_key(master_seed, agent_id, iteration)), counter_(0) {}

  explicit CounterRng(std::uint64_t key) : key_(key), counter_(0) {}

  std::uint64_t next_u64() { return mix(key_ ^ mix(counter_++)); }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // +1 or -1 with equal probability.
  int next_sign() { return (next_u64() & 1u) ? 1 : -1; }

  // Standard normal via Box-Muller; the spare value is cached.
  double next_gaussian();

  std::uint64_t state() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t agent,
                                  std::uint64_t iteration) {
    std::uint64_t k = mix(seed);
    k = mix(k ^ mix(agent + 0x632be59bd9b4e019ULL));
    k = mix(k ^ mix(iteration + 0x9e6c63d0876a9a47ULL));
    return k;
  }

  std::uint64_t key_;
  std::uint64_t counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace zomgt
