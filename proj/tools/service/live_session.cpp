#include "live_session.hpp"

#include <cctype>
#include <cmath>
#include <utility>

#include "gazekit/classifier.hpp"

namespace gazekit::service {

namespace fs = std::filesystem;

LogWriter::LogWriter(const fs::path& dir) : appender_(dir), dir_(dir), thread_([this] { run(); }) {}

LogWriter::~LogWriter() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

void LogWriter::append(const FrameRow& row) {
  {
    std::lock_guard lock(mu_);
    queue_.emplace_back(row);
  }
  cv_.notify_one();
}

void LogWriter::flush() {
  {
    std::lock_guard lock(mu_);
    queue_.emplace_back(Flush{});
  }
  cv_.notify_one();
}

void LogWriter::run() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
    if (queue_.empty()) {
      if (stop_) return;
      continue;
    }
    Item item = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    try {
      if (const auto* row = std::get_if<FrameRow>(&item)) {
        appender_.append(*row);
      } else {
        appender_.flush();
      }
    } catch (const std::exception& e) {
      std::lock_guard g(mu_);
      if (error_.empty()) error_ = e.what();
    }
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

void LogWriter::finalize(const SessionManifest& manifest, const std::vector<SelectionRecord>& selections) {
  flush();
  {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && !busy_; });
    stop_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  if (!error_.empty()) throw std::runtime_error("frame log: " + error_);
  finalize_session(manifest, selections, dir_);
}

namespace {

const json& field(const json& msg, const char* key) {
  auto it = msg.find(key);
  if (it == msg.end()) throw ProtocolError(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& msg, const char* key) {
  const json& v = field(msg, key);
  if (!v.is_number()) throw ProtocolError(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ProtocolError(std::string("field '") + key + "' must be finite");
  return d;
}

int id_or_none(const std::optional<int>& id) { return id.value_or(kNoTarget); }

fs::path fresh_dir(const fs::path& root, const std::string& stem) {
  for (int i = 0;; ++i) {
    fs::path p = root / (stem + "-" + std::to_string(i));
    if (!fs::exists(p)) return p;
  }
}

bool safe_token(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

}  // namespace

LiveSession::LiveSession(fs::path out_root) : out_root_(std::move(out_root)) {}

LiveSession::~LiveSession() {
  if (started_ && !finished_) {
    try {
      abort();
    } catch (...) {
    }
  }
}

std::vector<json> LiveSession::handle_text(const std::string& text) {
  json msg = json::parse(text, nullptr, false);
  if (msg.is_discarded() || !msg.is_object()) throw ProtocolError("message is not a JSON object");
  return handle(msg);
}

std::vector<json> LiveSession::handle(const json& msg) {
  if (finished_) throw ProtocolError("session already finished");
  const json& type = field(msg, "type");
  if (!type.is_string()) throw ProtocolError("field 'type' must be a string");
  const std::string t = type.get<std::string>();
  if (t == "hello") return on_hello(msg);
  if (!started_) throw ProtocolError("expected hello first");
  if (t == "frame") return on_frame(msg);
  if (t == "pinch") return on_pinch(msg);
  if (t == "end") return {finish(true)};
  throw ProtocolError("unknown message type '" + t + "'");
}

std::vector<json> LiveSession::on_hello(const json& msg) {
  if (started_) throw ProtocolError("duplicate hello");
  const json& subject = field(msg, "subject_id");
  const json& condition = field(msg, "condition");
  if (!subject.is_string() || !safe_token(subject.get<std::string>())) {
    throw ProtocolError("subject_id must be 1-64 characters of [A-Za-z0-9_-]");
  }
  if (!condition.is_string()) throw ProtocolError("condition must be a string");
  const auto cond = parse_condition(condition.get<std::string>());
  if (!cond) throw ProtocolError("unknown condition '" + condition.get<std::string>() + "'");

  manifest_.subject_id = subject.get<std::string>();
  manifest_.condition = *cond;
  manifest_.heuristics = HeuristicConfig::for_condition(*cond);
  manifest_.block.condition = *cond;
  if (auto it = msg.find("rounds"); it != msg.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1) throw ProtocolError("rounds must be a positive integer");
    manifest_.block.rounds = it->get<int>();
  }
  if (auto it = msg.find("block_index"); it != msg.end()) {
    if (!it->is_number_integer() || it->get<int>() < 0) throw ProtocolError("block_index must be >= 0");
    manifest_.block_index = it->get<int>();
  }

  fs::create_directories(out_root_);
  dir_ = fresh_dir(out_root_, "live-" + manifest_.subject_id + "-" + std::string(to_string(*cond)));
  manifest_.session_id = dir_.filename().string();
  writer_ = std::make_unique<LogWriter>(dir_);
  log_.manifest = manifest_;
  started_ = true;

  json config = json::parse(manifest_to_json(manifest_));
  json cfg{{"type", "config"}};
  for (auto& [k, v] : config.items()) cfg[k] = v;
  json layouts = json::array();
  for (int r = 0; r < manifest_.block.rounds; ++r) {
    const TargetLayout l = manifest_.block.layout_for_round(r);
    json targets = json::array();
    for (const Target& tg : l.targets) {
      targets.push_back({{"id", tg.id}, {"x_m", tg.center.x}, {"y_m", tg.center.y}, {"radius_m", tg.radius}});
    }
    layouts.push_back({{"round", r}, {"size_deg", l.size_deg}, {"targets", targets}});
  }
  cfg["layouts"] = layouts;
  cfg["magnetic_margin_m"] = dmm_to_meters(manifest_.heuristics.magnetic_margin_dmm, manifest_.block.plane_distance);
  return {cfg, highlight_message()};
}

TaskSession& LiveSession::task(double t) {
  if (!task_) task_ = std::make_unique<TaskSession>(manifest_.block, manifest_.heuristics, t);
  return *task_;
}

json LiveSession::highlight_message() const {
  const int n = manifest_.block.n_targets;
  const int index = task_ ? task_->trial_index() : 0;
  return {{"type", "highlight"},
          {"target", highlighted_target(index % n, n)},
          {"round", index / n},
          {"trial", index % n}};
}

std::vector<json> LiveSession::on_frame(const json& msg) {
  const double t = number(msg, "t_ms");
  GazeSample s{t, {number(msg, "x_m"), number(msg, "y_m")}, true};
  if (auto it = msg.find("valid"); it != msg.end()) {
    if (!it->is_boolean()) throw ProtocolError("field 'valid' must be a boolean");
    s.valid = it->get<bool>();
  }
  FrameRow row;
  try {
    row = task(t).on_frame(s);
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(e.what());
  }
  log_.frames.push_back(row);
  writer_->append(row);

  std::vector<json> out{{{"type", "hover"},
                         {"t_ms", row.t_ms},
                         {"raw", row.raw_target},
                         {"effective", row.effective_target},
                         {"snapped", row.snapped},
                         {"stuck", row.stuck}}};
  if (complete_at_ && t >= *complete_at_) out.push_back(finish(false));
  return out;
}

std::vector<json> LiveSession::on_pinch(const json& msg) {
  const double t = number(msg, "t_ms");
  TaskSession& ts = task(t);
  if (ts.complete()) return {{{"type", "error"}, {"msg", "block complete; pinch ignored"}}};
  std::optional<LiveSelection> sel;
  try {
    sel = ts.on_pinch({t});
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(e.what());
  }
  SelectionRecord rec;
  rec.round = sel->info.round;
  rec.trial = sel->info.trial;
  rec.condition = manifest_.condition;
  rec.highlighted = sel->info.highlighted;
  rec.selected_effective = sel->resolution.selected;
  rec.selected_raw = sel->resolution.raw_selected;
  rec.highlight_onset_t = sel->info.onset_t;
  rec.pinch_t = sel->pinch_t;
  log_.selections.push_back(rec);
  writer_->flush();

  std::vector<json> out{{{"type", "outcome"},
                         {"round", rec.round},
                         {"trial", rec.trial},
                         {"highlighted", rec.highlighted},
                         {"selected", id_or_none(rec.selected_effective)},
                         {"raw_selected", id_or_none(rec.selected_raw)},
                         {"correct", rec.selected_effective == rec.highlighted},
                         {"raw_correct", rec.selected_raw == rec.highlighted}}};
  if (ts.complete()) {
    complete_at_ = t + manifest_.classifier_window_ms;
  } else {
    out.push_back(highlight_message());
  }
  return out;
}

json LiveSession::finish(bool aborted) {
  finished_ = true;
  manifest_.aborted = aborted;
  log_.manifest = manifest_;
  ClassifierConfig cfg;
  cfg.window_ms = manifest_.classifier_window_ms;
  cfg.allow_partial_lookahead = aborted;
  if (!log_.selections.empty()) {
    log_.selections = classify_session(log_, cfg);
  }
  writer_->finalize(manifest_, log_.selections);
  return {{"type", "done"}, {"session_path", dir_.string()}, {"aborted", aborted}};
}

void LiveSession::abort() {
  if (!started_ || finished_) return;
  (void)finish(true);
}

}  // namespace gazekit::service
