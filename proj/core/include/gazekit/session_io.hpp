#pragma once

// On-disk session logs: a directory holding manifest.json, frames.jsonl and
// selections.jsonl. Field names and layout are documented in docs/log-format.md.

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazekit/records.hpp"

namespace gazekit {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kFramesFile = "frames.jsonl";
inline constexpr const char* kSelectionsFile = "selections.jsonl";

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string file, int line, std::string field, const std::string& message);

  [[nodiscard]] const std::string& file() const noexcept { return file_; }
  [[nodiscard]] int line() const noexcept { return line_; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  int line_;
  std::string field_;
};

class MissingFileError : public std::runtime_error {
 public:
  explicit MissingFileError(const std::filesystem::path& path);
};

/// Rows that break an invariant; write_session refuses them.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string manifest_to_json(const SessionManifest& m);
std::string frame_to_json(const FrameRow& f);
std::string selection_to_json(const SelectionRecord& s);

SessionManifest manifest_from_json(const std::string& text, const std::string& file = kManifestFile);
FrameRow frame_from_json(const std::string& line, int line_no = 0);
SelectionRecord selection_from_json(const std::string& line, int line_no = 0);

/// Invariant findings for in-memory rows (same checks as validate_session).
std::vector<std::string> check_invariants(const SessionLog& log);

void write_session(const SessionLog& log, const std::filesystem::path& dir);
SessionLog read_session(const std::filesystem::path& dir);

struct Finding {
  std::string file;
  int line = 0;  // 0: whole file
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool unreadable = false;

  /// 0 clean, 1 violations, 2 unreadable.
  [[nodiscard]] int exit_code() const noexcept { return unreadable ? 2 : (findings.empty() ? 0 : 1); }
};

/// Lists every violation in a session directory; does not stop at the first.
ValidationReport validate_session(const std::filesystem::path& dir);

/// Line-atomic frame appender for live capture. Rows are buffered and hit
/// the disk on flush().
class FrameAppender {
 public:
  explicit FrameAppender(const std::filesystem::path& dir);
  void append(const FrameRow& row);
  void flush();

 private:
  std::ofstream out_;
};

/// Writes manifest.json and selections.jsonl next to an appended frames.jsonl.
void finalize_session(const SessionManifest& manifest, const std::vector<SelectionRecord>& selections,
                      const std::filesystem::path& dir);

}  // namespace gazekit
