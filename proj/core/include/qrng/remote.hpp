#pragma once

// JSON-over-HTTP client for a remote shot executor.
//
// Request:  {"ops": [{"gate": "RX", "angle": 1.57, "qubits": [0]}, {"gate": "CZ", "qubits": [2, 0]},
//                    {"gate": "measure", "qubits": [0, 2]}],
//            "shots": 1000, "qubit_order": [0, 2]}
// Response: {"shots": [[[b, b], [b]], ...]}  one array per shot, one bit array per
//           measurement event, bits in event qubit order.

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "qrng/simnoise.hpp"

namespace qrng::remote {

struct Endpoint {
  std::string url;  // "http://host:port/path"
  std::chrono::seconds timeout{60};
};

/// Throws InvalidArgument for a circuit containing non-native gates.
nlohmann::json encode_request(const Circuit& circuit, std::size_t shots);

/// Validates shape and counts against the circuit; throws MalformedResponse.
ShotTable decode_response(const nlohmann::json& response, const Circuit& circuit, std::size_t shots);

/// Posts the request and decodes the reply. Throws Transport on connection
/// failure, timeout or a non-200 status.
ShotTable submit_remote(const Circuit& circuit, std::size_t shots, const Endpoint& endpoint);

/// Reply a conforming server would send for `table`; used by loopback servers.
nlohmann::json encode_response(const ShotTable& table);

}  // namespace qrng::remote
