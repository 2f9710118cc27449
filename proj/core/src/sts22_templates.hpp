#pragma once

#include <array>
#include <cstdint>

namespace qrng::sts22::detail {

extern const std::array<std::uint32_t, 148> kTemplates9;

}  // namespace qrng::sts22::detail
