#pragma once

// Bitstream extraction from shot tables and bit-exact serialization.
//
// Packed format: byte b holds stream bits 8b..8b+7, stream bit 8b+i in bit i
// (least significant first); unused trailing bits of the last byte are zero.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qrng/simnoise.hpp"

namespace qrng {

class BitStream {
 public:
  BitStream() = default;
  /// Every element must be 0 or 1.
  explicit BitStream(std::vector<std::uint8_t> bits);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  auto begin() const noexcept { return bits_.begin(); }
  auto end() const noexcept { return bits_.end(); }

  BitStream complement() const;
  BitStream slice(std::size_t offset, std::size_t length) const;

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class ExtractionPolicy { single_qubit, flatten, c3_majority, c3_source, c5_time_order };

std::string_view policy_name(ExtractionPolicy p);
ExtractionPolicy parse_policy(std::string_view text);

/// SingleQubit for C1/C4 and for per-qubit multi-qubit streams, Flatten for C2,
/// C3Majority for C3, C5TimeOrder for C5.
ExtractionPolicy default_policy(const CircuitSpec& spec);

/// Majority ties (even-sized C3 sets) resolve to the GHZ source bit.
BitStream extract(const ShotTable& table, ExtractionPolicy policy);

double ones_fraction(const BitStream& stream);

void write_packed(const BitStream& stream, std::ostream& sink);
BitStream read_packed(std::istream& source, std::size_t length);
/// '0'/'1' characters; whitespace ignored; anything else is an error.
BitStream read_ascii(std::istream& source);

struct StreamMetadata {
  std::size_t length = 0;
  CircuitSpec spec;
  std::uint64_t seed = 0;
  ExtractionPolicy policy = ExtractionPolicy::single_qubit;
};

/// Writes `path` (packed) and the sidecar `path + ".json"`.
void save_stream(const std::filesystem::path& path, const BitStream& stream, const StreamMetadata& meta);
StreamMetadata load_metadata(const std::filesystem::path& bin_path);
/// Loads a packed file of `length` bits; the file size must match exactly.
BitStream load_packed(const std::filesystem::path& path, std::size_t length);
/// Loads `.bin` using its sidecar length, or `.txt` as ASCII.
BitStream load_stream(const std::filesystem::path& path);

}  // namespace qrng
