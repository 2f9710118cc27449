#pragma once

#include <nlohmann/json.hpp>

#include "qrng/bits.hpp"
#include "qrng/families.hpp"

namespace qrng {

void to_json(nlohmann::json& j, const CircuitSpec& spec);
/// Accepts {"family": "C3", "gate": "Ry", "qubits": [..], "repetitions"?: n,
/// "stream_qubit"?: q}; repetitions default per family.
void from_json(const nlohmann::json& j, CircuitSpec& spec);

void to_json(nlohmann::json& j, const StreamMetadata& meta);
void from_json(const nlohmann::json& j, StreamMetadata& meta);

}  // namespace qrng
