#include "qrng/json_io.hpp"

#include "qrng/error.hpp"

namespace qrng {

void to_json(nlohmann::json& j, const CircuitSpec& spec) {
  j = {{"family", family_name(spec.family)},
       {"gate", gate_choice_name(spec.gate)},
       {"qubits", spec.qubits},
       {"repetitions", spec.repetitions}};
  if (spec.stream_qubit) j["stream_qubit"] = *spec.stream_qubit;
}

void from_json(const nlohmann::json& j, CircuitSpec& spec) {
  try {
    spec = CircuitSpec::make(parse_family(j.at("family").get<std::string>()),
                             parse_gate_choice(j.at("gate").get<std::string>()),
                             j.at("qubits").get<std::vector<QubitId>>());
    if (j.contains("repetitions")) spec.repetitions = j["repetitions"].get<std::size_t>();
    if (j.contains("stream_qubit")) spec.stream_qubit = j["stream_qubit"].get<QubitId>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_format, std::string("circuit spec: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const StreamMetadata& meta) {
  j = {{"length", meta.length}, {"spec", meta.spec}, {"seed", meta.seed}, {"policy", policy_name(meta.policy)}};
}

void from_json(const nlohmann::json& j, StreamMetadata& meta) {
  try {
    meta.length = j.at("length").get<std::size_t>();
    meta.spec = j.at("spec").get<CircuitSpec>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.policy = parse_policy(j.at("policy").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::bad_format, std::string("stream metadata: ") + e.what());
  }
}

}  // namespace qrng
