#pragma once

// Transport-free side of the live service: one harness session driven by
// JSON messages. Frames go through the same TaskSession as offline replay;
// rows are handed to a background writer so ingestion never waits on disk.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gazekit/records.hpp"
#include "gazekit/session_io.hpp"
#include "gazekit/task.hpp"

namespace gazekit::service {

using json = nlohmann::ordered_json;

/// Malformed or out-of-order client message; the connection is closed after
/// the error frame is sent.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single consumer thread that appends frame rows and flushes on request.
class LogWriter {
 public:
  explicit LogWriter(const std::filesystem::path& dir);
  ~LogWriter();
  LogWriter(const LogWriter&) = delete;
  LogWriter& operator=(const LogWriter&) = delete;

  void append(const FrameRow& row);
  void flush();
  /// Drains the queue, writes selections and manifest, and stops the thread.
  void finalize(const SessionManifest& manifest, const std::vector<SelectionRecord>& selections);

 private:
  struct Flush {};
  using Item = std::variant<FrameRow, Flush>;

  void run();

  FrameAppender appender_;
  std::filesystem::path dir_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<Item> queue_;
  bool busy_ = false;
  bool stop_ = false;
  std::string error_;
  std::thread thread_;
};

class LiveSession {
 public:
  explicit LiveSession(std::filesystem::path out_root);
  ~LiveSession();

  /// Replies to one client message, in send order. Throws ProtocolError.
  std::vector<json> handle(const json& msg);
  std::vector<json> handle_text(const std::string& text);

  /// Connection lost or protocol error: persist what exists as aborted.
  void abort();

  [[nodiscard]] bool finished() const noexcept { return finished_; }
  [[nodiscard]] const std::filesystem::path& session_path() const noexcept { return dir_; }

 private:
  std::vector<json> on_hello(const json& msg);
  std::vector<json> on_frame(const json& msg);
  std::vector<json> on_pinch(const json& msg);
  json finish(bool aborted);
  json highlight_message() const;
  TaskSession& task(double t);

  std::filesystem::path out_root_;
  std::filesystem::path dir_;
  SessionManifest manifest_;
  std::unique_ptr<TaskSession> task_;
  std::unique_ptr<LogWriter> writer_;
  SessionLog log_;
  std::optional<double> complete_at_;
  bool started_ = false;
  bool finished_ = false;
};

}  // namespace gazekit::service
