#pragma once

// WebSocket front end for LiveSession. One session at a time; a second
// connection receives {"type":"error","msg":"busy"} and is closed.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace gazekit::service {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8765;  // 0 picks a free port
  std::filesystem::path out_root;
  /// Stop accepting after this many finished sessions (0: run forever).
  int max_sessions = 0;
  std::function<void(const std::string&)> log;
};

class Server {
 public:
  /// Binds immediately; throws std::system_error when the port is taken.
  explicit Server(ServerOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  [[nodiscard]] std::uint16_t port() const noexcept;
  /// Accept loop; returns after stop() or max_sessions.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gazekit::service
