#pragma once

#include <cstdint>

#include "simtomo/types.hpp"

namespace simtomo {

// Counter-based random stream keyed by (master seed, stream id). Streams with
// distinct ids are statistically independent and may be consumed concurrently;
// a single stream must not be shared between threads.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : key_(derive_key(master_seed, stream_id)),
        master_(master_seed),
        stream_(stream_id) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(next_double() * static_cast<double>(bound)) % bound;
  }

  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  static std::uint64_t derive_key(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    std::uint64_t s = stream * 0xD6E8FEB86659FD93ULL + 0xCA5A826395121157ULL;
    s = (s ^ (s >> 32)) * 0xD6E8FEB86659FD93ULL;
    return z ^ (s ^ (s >> 32));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t master_;
  std::uint64_t stream_;
};

// Draws one outcome index from a probability vector by inverse CDF.
inline int sample_outcome(const VectorXd& probs, RngStream& rng) {
  double r = rng.next_double();
  double acc = 0.0;
  const long d = probs.size();
  for (long k = 0; k < d; ++k) {
    acc += probs[k] > 0.0 ? probs[k] : 0.0;
    if (r < acc) return static_cast<int>(k);
  }
  return static_cast<int>(d - 1);
}

}  // namespace simtomo
