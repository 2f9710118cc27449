#include "streams.hpp"

#include <array>
#include <cstring>
#include <stdexcept>
#include <vector>

#include <sodium.h>

namespace qrng::fixtures {

namespace {

std::vector<unsigned char> keystream(std::uint64_t seed, std::size_t bytes) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  std::array<unsigned char, randombytes_SEEDBYTES> key{};
  std::memcpy(key.data(), &seed, sizeof seed);
  std::vector<unsigned char> out(bytes);
  randombytes_buf_deterministic(out.data(), out.size(), key.data());
  return out;
}

}  // namespace

BitStream chacha_stream(std::uint64_t seed, std::size_t n) {
  const auto raw = keystream(seed, (n + 7) / 8);
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (raw[i / 8] >> (i % 8)) & 1u;
  return BitStream(std::move(bits));
}

BitStream biased_stream(std::uint64_t seed, std::size_t n, double p) {
  const auto raw = keystream(seed, 4 * n);
  const double cut = p * 4294967296.0;
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t w;
    std::memcpy(&w, raw.data() + 4 * i, 4);
    bits[i] = static_cast<double>(w) < cut ? 1 : 0;
  }
  return BitStream(std::move(bits));
}

BitStream constant_stream(std::size_t n, std::uint8_t bit) { return BitStream(std::vector<std::uint8_t>(n, bit)); }

BitStream from_string(const char* text) {
  std::vector<std::uint8_t> bits;
  for (const char* c = text; *c; ++c)
    if (*c == '0' || *c == '1') bits.push_back(static_cast<std::uint8_t>(*c - '0'));
  return BitStream(std::move(bits));
}

}  // namespace qrng::fixtures
