#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

enum class Errc {
  invalid_argument,
  out_of_range,
  not_connectable,
  no_route,
  no_hub,
  policy_mismatch,
  truncated,
  bad_format,
  transport,
  malformed_response,
  io,
};

/// Single exception type for the library; the code distinguishes failure classes
/// callers are expected to branch on (e.g. NotConnectable vs NoRoute).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qrng
