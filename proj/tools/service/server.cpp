#include "server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <vector>

#include "live_session.hpp"

namespace gazekit::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct Server::Impl {
  ServerOptions opts;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::atomic<bool> stopping{false};
  std::atomic<bool> active{false};
  std::atomic<int> finished{0};
  std::mutex threads_mu;
  std::vector<std::thread> threads;

  void log(const std::string& s) const {
    if (opts.log) opts.log(s);
  }

  static void send(websocket::stream<tcp::socket>& ws, const json& j) {
    ws.text(true);
    ws.write(asio::buffer(j.dump()));
  }

  static void close(websocket::stream<tcp::socket>& ws) {
    beast::error_code ec;
    ws.close(websocket::close_code::normal, ec);
  }

  void reject_busy(tcp::socket socket) {
    try {
      websocket::stream<tcp::socket> ws(std::move(socket));
      ws.accept();
      send(ws, {{"type", "error"}, {"msg", "busy"}});
      close(ws);
    } catch (const std::exception&) {
    }
  }

  /// Frees the single session slot once the log is on disk, so a client can
  /// reconnect as soon as it sees done or an error.
  void serve(tcp::socket socket) {
    LiveSession session(opts.out_root);
    bool released = false;
    auto release = [&] {
      if (!released) active = false;
      released = true;
    };
    try {
      websocket::stream<tcp::socket> ws(std::move(socket));
      ws.accept();
      beast::flat_buffer buffer;
      while (!session.finished()) {
        buffer.clear();
        beast::error_code ec;
        ws.read(buffer, ec);
        if (ec) {
          log("connection lost: " + ec.message());
          session.abort();
          release();
          break;
        }
        std::vector<json> replies;
        try {
          replies = session.handle_text(beast::buffers_to_string(buffer.data()));
        } catch (const ProtocolError& e) {
          log(std::string("protocol error: ") + e.what());
          send(ws, {{"type", "error"}, {"msg", e.what()}});
          session.abort();
          release();
          ws.close(websocket::close_reason(websocket::close_code::protocol_error, "protocol error"), ec);
          break;
        }
        if (session.finished()) release();
        for (const json& r : replies) send(ws, r);
      }
      if (session.finished()) {
        log("session written to " + session.session_path().string());
        close(ws);
      }
    } catch (const std::exception& e) {
      log(std::string("session error: ") + e.what());
      try {
        session.abort();
      } catch (const std::exception& e2) {
        log(std::string("could not persist session: ") + e2.what());
      }
    }
    release();
  }
};

Server::Server(ServerOptions opts) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(opts);
  const tcp::endpoint ep(asio::ip::make_address(impl_->opts.address), impl_->opts.port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
}

Server::~Server() {
  stop();
  std::lock_guard lock(impl_->threads_mu);
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
}

std::uint16_t Server::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  Impl& s = *impl_;
  while (!s.stopping) {
    beast::error_code ec;
    tcp::socket socket(s.io);
    s.acceptor.accept(socket, ec);
    if (ec) {
      if (s.stopping) break;
      s.log("accept failed: " + ec.message());
      continue;
    }
    if (s.stopping) break;
    bool expected = false;
    std::lock_guard lock(s.threads_mu);
    if (!s.active.compare_exchange_strong(expected, true)) {
      s.threads.emplace_back([&s, sock = std::move(socket)]() mutable { s.reject_busy(std::move(sock)); });
      continue;
    }
    s.threads.emplace_back([this, &s, sock = std::move(socket)]() mutable {
      s.serve(std::move(sock));
      const int done = ++s.finished;
      if (s.opts.max_sessions > 0 && done >= s.opts.max_sessions) stop();
    });
  }
}

void Server::stop() {
  Impl& s = *impl_;
  if (s.stopping.exchange(true)) return;
  beast::error_code ec;
  // unblock accept() with a throwaway connection, then close
  try {
    asio::io_context io;
    tcp::socket poke(io);
    poke.connect(s.acceptor.local_endpoint(), ec);
  } catch (...) {
  }
  s.acceptor.close(ec);
}

}  // namespace gazekit::service
