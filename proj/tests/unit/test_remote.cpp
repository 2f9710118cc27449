#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "qrng/error.hpp"
#include "qrng/harness.hpp"
#include "qrng/remote.hpp"

using namespace qrng;

namespace {

// Rebuilds the circuit from a request document, the way a device front end would.
Circuit circuit_from_request(const nlohmann::json& req) {
  std::vector<Op> ops;
  for (const auto& op : req.at("ops")) {
    const std::string g = op.at("gate");
    const auto q = op.at("qubits").get<std::vector<QubitId>>();
    if (g == "measure") ops.push_back(Measure{q});
    else if (g == "RX") ops.push_back(Gate::rx(op.at("angle"), q.at(0)));
    else if (g == "RY") ops.push_back(Gate::ry(op.at("angle"), q.at(0)));
    else if (g == "CZ") ops.push_back(Gate::cz(q.at(0), q.at(1)));
    else throw std::runtime_error("unexpected gate " + g);
  }
  return Circuit(5, std::move(ops), true);
}

class LoopbackServer {
 public:
  enum class Mode { honest, short_reply, bad_bit, not_json, http_error };

  LoopbackServer() {
    server_.Post("/run", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      switch (mode) {
        case Mode::not_json: res.set_content("<html>", "text/html"); return;
        case Mode::http_error: res.status = 503; return;
        default: break;
      }
      const auto doc = nlohmann::json::parse(req.body);
      last_request = doc;
      const Circuit c = circuit_from_request(doc);
      auto reply = remote::encode_response(run(c, doc.at("shots"), NoiseProfile::ideal(), 1));
      if (mode == Mode::short_reply) reply["shots"].erase(reply["shots"].size() - 1);
      if (mode == Mode::bad_bit) reply["shots"][0][0][0] = 2;
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LoopbackServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/run"; }

  std::atomic<Mode> mode{Mode::honest};
  std::atomic<int> requests{0};
  nlohmann::json last_request;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

Circuit ghz_native() {
  return transpile(build(CircuitSpec::make(Family::c3, GateChoice::h, {0, 2}), Topology::spark()), Topology::spark());
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("no qrng::Error thrown");
}

}  // namespace

TEST(Remote, RequestEncoding) {
  const auto req = remote::encode_request(ghz_native(), 7);
  EXPECT_EQ(req["shots"], 7);
  EXPECT_EQ(req["qubit_order"], nlohmann::json({0, 2}));
  EXPECT_EQ(req["ops"][0]["gate"], "RY");
  EXPECT_EQ(req["ops"].back()["gate"], "measure");
  bool has_cz = false;
  for (const auto& op : req["ops"]) has_cz |= op["gate"] == "CZ";
  EXPECT_TRUE(has_cz);
  const Circuit abstract(5, {Gate::h(0), Measure{{0}}}, false);
  EXPECT_EQ(code_of([&] { remote::encode_request(abstract, 7); }), Errc::invalid_argument);
}

TEST(Remote, LoopbackRoundTrip) {
  LoopbackServer server;
  const remote::Endpoint ep{server.url(), std::chrono::seconds(5)};
  const Circuit c = ghz_native();
  const ShotTable t = remote::submit_remote(c, 200, ep);
  EXPECT_EQ(t, [&] {
    ShotTable local = run(c, 200, NoiseProfile::ideal(), 1);
    return ShotTable(local.events(), local.shots(), {local.raw_bits().begin(), local.raw_bits().end()}, 0);
  }());
  for (std::size_t s = 0; s < t.shots(); ++s) EXPECT_EQ(t.shot(s)[0], t.shot(s)[1]);
}

TEST(Remote, MalformedReplies) {
  LoopbackServer server;
  const remote::Endpoint ep{server.url(), std::chrono::seconds(5)};
  const Circuit c = ghz_native();
  server.mode = LoopbackServer::Mode::short_reply;
  EXPECT_EQ(code_of([&] { remote::submit_remote(c, 10, ep); }), Errc::malformed_response);
  server.mode = LoopbackServer::Mode::bad_bit;
  EXPECT_EQ(code_of([&] { remote::submit_remote(c, 10, ep); }), Errc::malformed_response);
  server.mode = LoopbackServer::Mode::not_json;
  EXPECT_EQ(code_of([&] { remote::submit_remote(c, 10, ep); }), Errc::malformed_response);
  server.mode = LoopbackServer::Mode::http_error;
  EXPECT_EQ(code_of([&] { remote::submit_remote(c, 10, ep); }), Errc::transport);
  EXPECT_EQ(code_of([&] { remote::decode_response(nlohmann::json::array(), c, 1); }), Errc::malformed_response);
}

TEST(Remote, UnreachableEndpoint) {
  int port;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }  // closed again: nothing listens there now
  const remote::Endpoint ep{"http://127.0.0.1:" + std::to_string(port) + "/run", std::chrono::seconds(2)};
  EXPECT_EQ(code_of([&] { remote::submit_remote(ghz_native(), 5, ep); }), Errc::transport);
  EXPECT_EQ(code_of([&] { remote::submit_remote(ghz_native(), 5, {"ftp://x/y"}); }), Errc::invalid_argument);
}

TEST(Remote, ExperimentThroughRemoteBackend) {
  LoopbackServer server;
  ExperimentConfig config;
  config.grid = {CircuitSpec::make(Family::c1, GateChoice::rx, {4}), CircuitSpec::make(Family::c3, GateChoice::ry, {2, 3})};
  config.shots = 300;
  config.backend.kind = BackendConfig::Kind::remote;
  config.backend.endpoint = {server.url(), std::chrono::seconds(5)};
  config.out = std::filesystem::temp_directory_path() / "qrng-remote-run";
  std::filesystem::remove_all(config.out);
  const auto m = run_experiment(config);
  EXPECT_TRUE(m.ok());
  EXPECT_EQ(server.requests.load(), 2);
  EXPECT_EQ(m.entries[1].histogram.size(), 4u);
  std::filesystem::remove_all(config.out);
}
