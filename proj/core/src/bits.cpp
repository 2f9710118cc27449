#include "qrng/bits.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "qrng/error.hpp"
#include "qrng/json_io.hpp"

namespace qrng {

BitStream::BitStream(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_)
    if (b > 1) throw Error(Errc::invalid_argument, "bitstream elements must be 0 or 1");
}

BitStream BitStream::complement() const {
  std::vector<std::uint8_t> out(bits_.size());
  std::transform(bits_.begin(), bits_.end(), out.begin(), [](std::uint8_t b) { return std::uint8_t(b ^ 1u); });
  return BitStream(std::move(out));
}

BitStream BitStream::slice(std::size_t offset, std::size_t length) const {
  if (offset > bits_.size() || length > bits_.size() - offset) throw Error(Errc::out_of_range, "slice out of range");
  return BitStream(std::vector<std::uint8_t>(bits_.begin() + offset, bits_.begin() + offset + length));
}

std::string_view policy_name(ExtractionPolicy p) {
  switch (p) {
    case ExtractionPolicy::single_qubit: return "SingleQubit";
    case ExtractionPolicy::flatten: return "Flatten";
    case ExtractionPolicy::c3_majority: return "C3Majority";
    case ExtractionPolicy::c3_source: return "C3Source";
    case ExtractionPolicy::c5_time_order: return "C5TimeOrder";
  }
  return "?";
}

ExtractionPolicy parse_policy(std::string_view text) {
  for (auto p : {ExtractionPolicy::single_qubit, ExtractionPolicy::flatten, ExtractionPolicy::c3_majority,
                 ExtractionPolicy::c3_source, ExtractionPolicy::c5_time_order})
    if (policy_name(p) == text) return p;
  throw Error(Errc::invalid_argument, "unknown extraction policy '" + std::string(text) + "'");
}

ExtractionPolicy default_policy(const CircuitSpec& spec) {
  if (spec.stream_qubit) return ExtractionPolicy::single_qubit;
  switch (spec.family) {
    case Family::c1:
    case Family::c4: return ExtractionPolicy::single_qubit;
    case Family::c2: return ExtractionPolicy::flatten;
    case Family::c3: return ExtractionPolicy::c3_majority;
    case Family::c5: return ExtractionPolicy::c5_time_order;
  }
  return ExtractionPolicy::single_qubit;
}

namespace {

std::size_t column_of(const ShotTable& table, QubitId q) {
  const auto& order = table.qubit_order();
  auto it = std::find(order.begin(), order.end(), q);
  if (it == order.end()) throw Error(Errc::policy_mismatch, "qubit " + std::to_string(q) + " not in shot table");
  return static_cast<std::size_t>(it - order.begin());
}

void require_family(const ShotTable& table, Family family, ExtractionPolicy policy) {
  if (!table.spec || table.spec->family != family) {
    throw Error(Errc::policy_mismatch, std::string(policy_name(policy)) + " requires a " +
                                           std::string(family_name(family)) + " shot table");
  }
}

}  // namespace

BitStream extract(const ShotTable& table, ExtractionPolicy policy) {
  const std::size_t shots = table.shots();
  const std::size_t width = table.record_width();
  std::vector<std::uint8_t> out;
  switch (policy) {
    case ExtractionPolicy::single_qubit: {
      std::size_t col = 0;
      if (table.spec && table.spec->stream_qubit) {
        if (table.events().size() != 1) throw Error(Errc::policy_mismatch, "SingleQubit needs one measurement event");
        col = column_of(table, *table.spec->stream_qubit);
      } else if (width != 1) {
        throw Error(Errc::policy_mismatch, "SingleQubit needs a one-bit record or a stream qubit");
      }
      out.resize(shots);
      for (std::size_t s = 0; s < shots; ++s) out[s] = table.shot(s)[col];
      break;
    }
    case ExtractionPolicy::flatten: {
      if (table.events().size() != 1) throw Error(Errc::policy_mismatch, "Flatten needs one measurement event");
      std::vector<std::size_t> cols(width);
      std::iota(cols.begin(), cols.end(), 0);
      std::sort(cols.begin(), cols.end(),
                [&](std::size_t a, std::size_t b) { return table.qubit_order()[a] < table.qubit_order()[b]; });
      out.reserve(shots * width);
      for (std::size_t s = 0; s < shots; ++s) {
        const auto rec = table.shot(s);
        for (std::size_t c : cols) out.push_back(rec[c]);
      }
      break;
    }
    case ExtractionPolicy::c3_majority:
    case ExtractionPolicy::c3_source: {
      require_family(table, Family::c3, policy);
      if (!table.source_qubit) throw Error(Errc::policy_mismatch, "C3 shot table lacks its GHZ source qubit");
      const std::size_t src = column_of(table, *table.source_qubit);
      out.resize(shots);
      for (std::size_t s = 0; s < shots; ++s) {
        const auto rec = table.shot(s);
        if (policy == ExtractionPolicy::c3_source) {
          out[s] = rec[src];
          continue;
        }
        const std::size_t ones = static_cast<std::size_t>(std::count(rec.begin(), rec.end(), std::uint8_t{1}));
        const std::size_t zeros = width - ones;
        out[s] = ones > zeros ? 1 : zeros > ones ? 0 : rec[src];
      }
      break;
    }
    case ExtractionPolicy::c5_time_order: {
      require_family(table, Family::c5, policy);
      const auto raw = table.raw_bits();
      out.assign(raw.begin(), raw.end());
      break;
    }
  }
  return BitStream(std::move(out));
}

double ones_fraction(const BitStream& stream) {
  if (stream.empty()) throw Error(Errc::invalid_argument, "ones fraction of an empty stream");
  const auto ones = std::count(stream.begin(), stream.end(), std::uint8_t{1});
  return static_cast<double>(ones) / static_cast<double>(stream.size());
}

void write_packed(const BitStream& stream, std::ostream& sink) {
  std::vector<char> bytes((stream.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < stream.size(); ++i)
    if (stream[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (1u << (i % 8)));
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw Error(Errc::io, "failed to write packed bits");
}

BitStream read_packed(std::istream& source, std::size_t length) {
  std::vector<char> bytes((length + 7) / 8);
  source.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(source.gcount()) != bytes.size()) {
    throw Error(Errc::truncated, "packed source shorter than declared length of " + std::to_string(length) + " bits");
  }
  std::vector<std::uint8_t> bits(length);
  for (std::size_t i = 0; i < length; ++i)
    bits[i] = static_cast<std::uint8_t>((static_cast<unsigned char>(bytes[i / 8]) >> (i % 8)) & 1u);
  return BitStream(std::move(bits));
}

BitStream read_ascii(std::istream& source) {
  std::vector<std::uint8_t> bits;
  char c;
  while (source.get(c)) {
    if (c == '0' || c == '1') {
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw Error(Errc::bad_format, std::string("non-binary character '") + c + "' in ASCII bitstream");
    }
  }
  return BitStream(std::move(bits));
}

void save_stream(const std::filesystem::path& path, const BitStream& stream, const StreamMetadata& meta) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + path.string());
    write_packed(stream, out);
  }
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  if (!side) throw Error(Errc::io, "cannot write sidecar for " + path.string());
  side << nlohmann::json(meta).dump(2) << '\n';
  if (!side) throw Error(Errc::io, "cannot write sidecar for " + path.string());
}

StreamMetadata load_metadata(const std::filesystem::path& bin_path) {
  std::ifstream in(bin_path.string() + ".json");
  if (!in) throw Error(Errc::io, "missing sidecar metadata for " + bin_path.string());
  try {
    return nlohmann::json::parse(in).get<StreamMetadata>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_format, "sidecar for " + bin_path.string() + ": " + e.what());
  }
}

BitStream load_packed(const std::filesystem::path& path, std::size_t length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  const auto size = std::filesystem::file_size(path);
  if (size != (length + 7) / 8) {
    throw Error(Errc::truncated, path.string() + " holds " + std::to_string(size) + " bytes, expected " +
                                     std::to_string((length + 7) / 8) + " for " + std::to_string(length) + " bits");
  }
  return read_packed(in, length);
}

BitStream load_stream(const std::filesystem::path& path) {
  if (path.extension() == ".txt") {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    return read_ascii(in);
  }
  return load_packed(path, load_metadata(path).length);
}

}  // namespace qrng
