#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace qrng {

/// SplitMix64 finalizer; bijective mixing of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a, used to derive stable per-spec seeds from textual keys.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Keyed random stream: xoshiro256** whose state is derived from (seed, stream).
///
/// Every shot of a simulation owns the stream `stream = shot index`, so the draws
/// consumed by shot i never depend on how shots are partitioned across workers.
/// Within a shot, draws are consumed in circuit order (gate noise, measurement,
/// readout flip), which fixes the (seed, shot, event) keying.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t sm = mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL);
    for (auto& word : s_) {
      sm += 0x9e3779b97f4a7c15ULL;
      word = mix64(sm);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace qrng
