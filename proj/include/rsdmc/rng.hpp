#pragma once

#include <cmath>
#include <cstdint>

#include "rsdmc/common.hpp"

namespace rsdmc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// Counter-keyed random stream (xoshiro256++ core, Box-Muller normals).
///
/// A stream is a pure function of its 64-bit key. Substreams are derived from
/// (key, index) only, never from how much the parent stream has been consumed,
/// so a parallel map over particles draws identical numbers regardless of
/// scheduling order or worker count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) { reseed(); }

  /// Derive an independent child stream. Pure in (parent key, index).
  RngStream substream(std::uint64_t index) const {
    std::uint64_t s = key_ ^ (0xD1B54A32D192ED03ULL * (index + 1));
    std::uint64_t mixed = detail::splitmix64(s);
    return RngStream(mixed);
  }

  /// Test hook: a stream whose normal draws are all exactly zero.
  static RngStream zeros() {
    RngStream s(0);
    s.zero_noise_ = true;
    return s;
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform in (0, 1).
  double uniform() {
    // 53-bit mantissa; offset by half an ulp so 0 is never returned.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (zero_noise_) return 0.0;
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Vec normal_vec(int dim) {
    Vec out(dim);
    for (int i = 0; i < dim; ++i) out[i] = normal();
    return out;
  }

  void fill_normal(Vec& out) {
    for (int i = 0; i < out.size(); ++i) out[i] = normal();
  }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  void reseed() {
    std::uint64_t s = key_;
    for (auto& word : s_) word = detail::splitmix64(s);
  }

  std::uint64_t key_;
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
  bool zero_noise_ = false;
};

/// Monotone count of gradient-oracle invocations. One shard per worker;
/// shards are summed when a parallel region joins.
struct GradientCounter {
  std::uint64_t total = 0;

  void increment() { ++total; }
  void merge(const GradientCounter& other) { total += other.total; }
};

}  // namespace rsdmc
