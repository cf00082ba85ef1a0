#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace spikenet {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// xoshiro256** (Blackman & Vigna), period 2^256 - 1. Seeded by running
// SplitMix64 from a 64-bit seed, the reference seeding procedure.
class Xoshiro256 {
public:
  using result_type = std::uint64_t;

  constexpr Xoshiro256() noexcept : Xoshiro256(0) {}
  constexpr explicit Xoshiro256(std::uint64_t seed) noexcept { this->seed(seed); }

  constexpr void seed(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      w = splitmix64(x);
      x += 0x9E3779B97F4A7C15ull;
    }
  }

  // Raw state, used for known-answer tests.
  static constexpr Xoshiro256 from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2,
                                         std::uint64_t s3) noexcept {
    Xoshiro256 g;
    g.s_[0] = s0;
    g.s_[1] = s1;
    g.s_[2] = s2;
    g.s_[3] = s3;
    return g;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  friend constexpr bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4]{};
};

using Engine = Xoshiro256;

// Seed of replication `replication` at sweep point `sweep_index`. Each
// coordinate goes through its own mixing round, so adding sweep points or
// replications never changes the seeds of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t sweep_index,
                                    std::uint64_t replication) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ splitmix64(sweep_index + 0x5155ull));
  h = splitmix64(h ^ splitmix64(replication + 0xA2E7ull));
  return h;
}

// Stream seeds inside one run: stream 0 drives spike clocks, stream i+1
// drives the leak clock of neuron i.
constexpr std::uint64_t stream_seed(std::uint64_t run_seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(run_seed) ^ splitmix64(stream + 0x3C6EF372ull));
}

// Uniform on the open interval (0,1): 52 random bits centred in their cell,
// so the largest value is 1 - 2^-53 and exactly representable.
template <class G>
inline double uniform_open(G& rng) noexcept {
  return (static_cast<double>(rng() >> 12) + 0.5) * 0x1.0p-52;
}

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// now + Exp(rate) by inversion; infinity when rate is zero. A zero rate
// consumes no draw.
template <class G>
inline double sample_event_time(double rate, double now, G& rng) {
  if (!(rate >= 0.0)) throw std::domain_error("event rate must be nonnegative");
  if (!std::isfinite(now)) throw std::domain_error("current time must be finite");
  if (rate == 0.0) return infinity;
  return now - std::log(uniform_open(rng)) / rate;
}

}  // namespace spikenet
