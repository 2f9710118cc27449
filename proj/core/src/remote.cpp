#include "qrng/remote.hpp"

#include <httplib.h>

#include "qrng/error.hpp"

namespace qrng::remote {

namespace {

struct Url {
  std::string base;  // scheme://host:port
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
    throw Error(Errc::invalid_argument, "endpoint must be an http:// URL: '" + url + "'");
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

nlohmann::json encode_request(const Circuit& circuit, std::size_t shots) {
  for (const Op& op : circuit.ops())
    if (const auto* g = std::get_if<Gate>(&op); g && !is_native(g->kind)) {
      throw Error(Errc::invalid_argument, "remote backend accepts native gates only, got " + std::string(gate_name(g->kind)));
    }
  if (shots == 0) throw Error(Errc::invalid_argument, "shots must be >= 1");
  nlohmann::json ops = nlohmann::json::array();
  std::vector<QubitId> order;
  for (const Op& op : circuit.ops()) {
    if (const auto* g = std::get_if<Gate>(&op)) {
      nlohmann::json j = {{"gate", gate_name(g->kind)}};
      if (g->kind == GateKind::rx || g->kind == GateKind::ry) j["angle"] = g->theta;
      j["qubits"] = is_two_qubit(g->kind) ? std::vector<QubitId>{g->q0, g->q1} : std::vector<QubitId>{g->q0};
      ops.push_back(std::move(j));
    } else {
      const auto& m = std::get<Measure>(op);
      ops.push_back({{"gate", "measure"}, {"qubits", m.qubits}});
      order.insert(order.end(), m.qubits.begin(), m.qubits.end());
    }
  }
  return {{"ops", ops}, {"shots", shots}, {"qubit_order", order}};
}

ShotTable decode_response(const nlohmann::json& response, const Circuit& circuit, std::size_t shots) {
  const auto events = circuit.measurements();
  auto bad = [](const std::string& what) { return Error(Errc::malformed_response, what); };
  if (!response.is_object() || !response.contains("shots") || !response["shots"].is_array()) {
    throw bad("response lacks a 'shots' array");
  }
  const auto& rows = response["shots"];
  if (rows.size() != shots) {
    throw bad("response holds " + std::to_string(rows.size()) + " shots, requested " + std::to_string(shots));
  }
  std::size_t width = 0;
  for (const auto& e : events) width += e.qubits.size();
  std::vector<std::uint8_t> bits;
  bits.reserve(shots * width);
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != events.size()) throw bad("shot record does not match measurement events");
    for (std::size_t e = 0; e < events.size(); ++e) {
      const auto& ev = row[e];
      if (!ev.is_array() || ev.size() != events[e].qubits.size()) throw bad("event record has the wrong width");
      for (const auto& b : ev) {
        if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) throw bad("bits must be 0 or 1");
        bits.push_back(static_cast<std::uint8_t>(b.get<int>()));
      }
    }
  }
  return ShotTable(events, shots, std::move(bits), 0);
}

nlohmann::json encode_response(const ShotTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t s = 0; s < table.shots(); ++s) {
    const auto rec = table.shot(s);
    nlohmann::json row = nlohmann::json::array();
    std::size_t pos = 0;
    for (const auto& e : table.events()) {
      std::vector<int> ev;
      for (std::size_t j = 0; j < e.qubits.size(); ++j) ev.push_back(rec[pos++]);
      row.push_back(ev);
    }
    rows.push_back(std::move(row));
  }
  return {{"shots", std::move(rows)}};
}

ShotTable submit_remote(const Circuit& circuit, std::size_t shots, const Endpoint& endpoint) {
  const nlohmann::json request = encode_request(circuit, shots);
  const Url url = split_url(endpoint.url);
  httplib::Client client(url.base);
  client.set_connection_timeout(endpoint.timeout);
  client.set_read_timeout(endpoint.timeout);
  client.set_write_timeout(endpoint.timeout);
  auto res = client.Post(url.path, request.dump(), "application/json");
  if (!res) {
    throw Error(Errc::transport, "request to " + endpoint.url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(Errc::transport, "remote backend answered HTTP " + std::to_string(res->status));
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_response, std::string("response is not JSON: ") + e.what());
  }
  return decode_response(body, circuit, shots);
}

}  // namespace qrng::remote
