#include <doctest.h>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include <map>
#include <thread>

#include "gazekit/session_io.hpp"
#include "gazekit/task.hpp"
#include "live_session.hpp"
#include "server.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::ordered_json;
using namespace gazekit;
using testsupport::TempDir;

namespace {

class Client {
 public:
  explicit Client(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const json& msg) { send_text(msg.dump()); }
  void send_text(const std::string& text) { ws_.write(net::buffer(text)); }

  json recv() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  /// Reads messages until one of `type` arrives; earlier ones are returned too.
  std::vector<json> until(const std::string& type) {
    std::vector<json> got;
    do {
      got.push_back(recv());
    } while (got.back()["type"] != type);
    return got;
  }

  /// True when the server closed the connection with `code`.
  bool closed_with(websocket::close_code code) {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws_.read(buf, ec);
    return ec == websocket::error::closed && ws_.reason().code == code;
  }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

struct RunningServer {
  explicit RunningServer(const fs::path& out) : server([&] {
      service::ServerOptions o;
      o.port = 0;
      o.out_root = out;
      return o;
    }()),
    thread([this] { server.run(); }) {}
  ~RunningServer() {
    server.stop();
    thread.join();
  }
  service::Server server;
  std::thread thread;
};

struct Point {
  double x, y;
};

/// Plays one nine-trial round through `c`. The gaze jumps to each highlighted
/// target; every third pinch comes just before the jump. Returns the done
/// message.
json play(Client& c, const json& config, json highlight) {
  std::map<int, Point> centers;
  for (const auto& t : config["layouts"][0]["targets"]) {
    centers[t["id"].get<int>()] = {t["x_m"].get<double>(), t["y_m"].get<double>()};
  }
  const double dt = 1000.0 / 60.0;
  int frame = 0;
  double t = 0.0;
  Point gaze{0.0, 0.0};
  auto step = [&] {
    t = ++frame * dt;
    c.send({{"type", "frame"}, {"t_ms", t}, {"x_m", gaze.x}, {"y_m", gaze.y}, {"valid", frame % 17 != 0}});
    const json hover = c.recv();
    REQUIRE(hover["type"] == "hover");
  };
  auto pinch = [&] {
    c.send({{"type", "pinch"}, {"t_ms", t + 1.0}});
    return c.recv();
  };
  for (int trial = 0; trial < 9; ++trial) {
    REQUIRE(highlight["trial"] == trial);
    for (int i = 0; i < 10; ++i) step();
    const Point goal = centers.at(highlight["target"].get<int>());
    json outcome;
    if (trial % 3 == 0) {
      outcome = pinch();
      gaze = goal;
    } else {
      gaze = goal;
      for (int i = 0; i < 6; ++i) step();
      outcome = pinch();
      CHECK(outcome["correct"] == true);
    }
    REQUIRE(outcome["type"] == "outcome");
    CHECK(outcome["highlighted"] == highlight["target"]);
    if (trial < 8) highlight = c.recv();
  }
  const double last_pinch = t + 1.0;
  while ((frame + 1) * dt < last_pinch + 350.0) step();
  t = last_pinch + 400.0;
  c.send({{"type", "frame"}, {"t_ms", t}, {"x_m", gaze.x}, {"y_m", gaze.y}, {"valid", true}});
  CHECK(c.recv()["type"] == "hover");
  return c.recv();
}

}  // namespace

TEST_CASE("a live round persists a valid, replayable session") {
  TempDir tmp("svc-round");
  RunningServer srv(tmp.path());
  Client c(srv.server.port());
  c.send({{"type", "hello"}, {"subject_id", "p01"}, {"condition", "sticky_magnetic"}, {"rounds", 1}});
  const json config = c.recv();
  REQUIRE(config["type"] == "config");
  CHECK(config["condition"] == "sticky_magnetic");
  CHECK(config["layouts"].size() == 1);
  CHECK(config["layouts"][0]["targets"].size() == 9);
  const json highlight = c.recv();
  REQUIRE(highlight["type"] == "highlight");
  CHECK(highlight["target"] == 0);

  SUBCASE("completed") {
    const json done = play(c, config, highlight);
    REQUIRE(done["type"] == "done");
    CHECK(done["aborted"] == false);
    const fs::path dir = done["session_path"].get<std::string>();
    CHECK(validate_session(dir).exit_code() == 0);
    const SessionLog log = read_session(dir);
    CHECK(log.selections.size() == 9);
    CHECK_FALSE(log.manifest.aborted);
    CHECK_FALSE(log.manifest.sim.has_value());
    CHECK(replay_mismatches(log).empty());
    int early = 0;
    for (const auto& s : log.selections) early += s.outcome_raw == OutcomeClass::EarlyTrigger;
    CHECK(early == 3);
  }

  SUBCASE("end aborts and keeps what was captured") {
    for (int i = 1; i <= 5; ++i) {
      c.send({{"type", "frame"}, {"t_ms", i * 10.0}, {"x_m", 0.0}, {"y_m", 0.0}, {"valid", true}});
      CHECK(c.recv()["type"] == "hover");
    }
    c.send({{"type", "pinch"}, {"t_ms", 55.0}});
    CHECK(c.recv()["type"] == "outcome");
    CHECK(c.recv()["type"] == "highlight");
    c.send({{"type", "end"}});
    const json done = c.recv();
    REQUIRE(done["type"] == "done");
    CHECK(done["aborted"] == true);
    const fs::path dir = done["session_path"].get<std::string>();
    CHECK(validate_session(dir).exit_code() == 0);
    const SessionLog log = read_session(dir);
    CHECK(log.manifest.aborted);
    CHECK(log.frames.size() == 5);
    CHECK(log.selections.size() == 1);
  }
}

TEST_CASE("a second connection is rejected as busy") {
  TempDir tmp("svc-busy");
  RunningServer srv(tmp.path());
  Client first(srv.server.port());
  first.send({{"type", "hello"}, {"subject_id", "p01"}, {"condition", "none"}, {"rounds", 1}});
  CHECK(first.recv()["type"] == "config");
  CHECK(first.recv()["type"] == "highlight");

  Client second(srv.server.port());
  const json reply = second.recv();
  CHECK(reply["type"] == "error");
  CHECK(reply["msg"] == "busy");

  first.send({{"type", "frame"}, {"t_ms", 1.0}, {"x_m", 0.0}, {"y_m", 0.0}, {"valid", true}});
  CHECK(first.recv()["type"] == "hover");
}

TEST_CASE("malformed messages get an error and a protocol-error close") {
  TempDir tmp("svc-bad");
  RunningServer srv(tmp.path());
  for (const std::string bad : {"not json", R"({"type":"frame","t_ms":1,"x_m":0,"y_m":0})",
                                R"({"type":"hello","subject_id":"../x","condition":"none"})"}) {
    CAPTURE(bad);
    Client c(srv.server.port());
    c.send_text(bad);
    const json reply = c.recv();
    CHECK(reply["type"] == "error");
    CHECK_FALSE(reply["msg"].get<std::string>().empty());
    CHECK(c.closed_with(websocket::close_code::protocol_error));
  }
  CHECK(fs::is_empty(tmp.path()));
}

TEST_CASE("live session rejects out-of-order input") {
  TempDir tmp("svc-order");
  service::LiveSession s(tmp.path());
  CHECK_THROWS_AS(s.handle_text(R"({"type":"pinch","t_ms":1})"), service::ProtocolError);
  s.handle_text(R"({"type":"hello","subject_id":"p","condition":"magnetic"})");
  s.handle_text(R"({"type":"frame","t_ms":10,"x_m":0,"y_m":0,"valid":true})");
  CHECK_THROWS_AS(s.handle_text(R"({"type":"frame","t_ms":10,"x_m":0,"y_m":0,"valid":true})"),
                  service::ProtocolError);
  CHECK_THROWS_AS(s.handle_text(R"({"type":"hello","subject_id":"p","condition":"none"})"), service::ProtocolError);
  CHECK_THROWS_AS(s.handle_text(R"({"type":"warp"})"), service::ProtocolError);
  CHECK_THROWS_AS(s.handle_text(R"({"type":"frame","t_ms":"late","x_m":0,"y_m":0})"), service::ProtocolError);
}
