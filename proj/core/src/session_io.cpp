#include "gazekit/session_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gazekit {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(OutcomeClass c) noexcept {
  switch (c) {
    case OutcomeClass::Correct:
      return "correct";
    case OutcomeClass::LateTrigger:
      return "late_trigger";
    case OutcomeClass::EarlyTrigger:
      return "early_trigger";
    case OutcomeClass::OtherError:
      break;
  }
  return "other_error";
}

std::optional<OutcomeClass> parse_outcome(std::string_view s) noexcept {
  for (OutcomeClass c : {OutcomeClass::Correct, OutcomeClass::LateTrigger, OutcomeClass::EarlyTrigger,
                         OutcomeClass::OtherError}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

SchemaError::SchemaError(std::string file, int line, std::string field, const std::string& message)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : " [" + field + "]") + ": " + message),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

MissingFileError::MissingFileError(const fs::path& path) : std::runtime_error("missing-file: " + path.string()) {}

namespace {

// Collects findings for one file; parsing keeps going after a bad field.
class Collector {
 public:
  Collector(std::string file, std::vector<Finding>& sink) : file_(std::move(file)), sink_(sink) {}

  void add(int line, std::string field, std::string message) {
    sink_.push_back({file_, line, std::move(field), std::move(message)});
  }
  [[nodiscard]] const std::string& file() const noexcept { return file_; }

  std::optional<double> number(const json& j, const char* field, int line) {
    auto it = j.find(field);
    if (it == j.end()) return missing(line, field);
    if (!it->is_number()) return wrong(line, field, "number");
    return it->get<double>();
  }

  std::optional<double> optional_number(const json& j, const char* field, int line, bool& ok) {
    auto it = j.find(field);
    ok = true;
    if (it == j.end()) {
      ok = false;
      missing(line, field);
      return std::nullopt;
    }
    if (it->is_null()) return std::nullopt;
    if (!it->is_number()) {
      ok = false;
      wrong(line, field, "number or null");
      return std::nullopt;
    }
    return it->get<double>();
  }

  std::optional<std::int64_t> integer(const json& j, const char* field, int line) {
    auto it = j.find(field);
    if (it == j.end()) return missing(line, field);
    if (!it->is_number_integer()) return wrong(line, field, "integer");
    return it->get<std::int64_t>();
  }

  std::optional<bool> boolean(const json& j, const char* field, int line) {
    auto it = j.find(field);
    if (it == j.end()) return missing(line, field);
    if (!it->is_boolean()) return wrong(line, field, "boolean");
    return it->get<bool>();
  }

  std::optional<std::string> string(const json& j, const char* field, int line) {
    auto it = j.find(field);
    if (it == j.end()) return missing(line, field);
    if (!it->is_string()) return wrong(line, field, "string");
    return it->get<std::string>();
  }

 private:
  std::nullopt_t missing(int line, const char* field) {
    add(line, field, "missing field");
    return std::nullopt;
  }
  std::nullopt_t wrong(int line, const char* field, const char* type) {
    add(line, field, std::string("expected ") + type);
    return std::nullopt;
  }

  std::string file_;
  std::vector<Finding>& sink_;
};

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
int to_id(const std::optional<int>& v) { return v.value_or(kNoTarget); }
std::optional<int> from_id(std::int64_t v) { return v < 0 ? std::nullopt : std::optional<int>(static_cast<int>(v)); }

json sim_to_json(const SimConfig& s) {
  json j;
  j["seed"] = s.seed;
  j["frame_rate_hz"] = s.frame_rate_hz;
  j["fixation_jitter_sd_dmm"] = s.fixation_jitter_sd;
  j["landing_error_sd_dmm"] = s.landing_error_sd;
  j["saccade_dur_slope_ms_per_deg"] = s.saccade_dur_slope_ms_per_deg;
  j["saccade_dur_intercept_ms"] = s.saccade_dur_intercept_ms;
  j["saccade_latency_ms"] = s.saccade_latency_ms;
  j["dwell_ms"] = s.dwell_ms;
  j["min_selection_ms"] = s.min_selection_ms;
  j["tail_ms"] = s.tail_ms;
  j["pinch_anchor"] = to_string(s.pinch_anchor);
  j["offset_model"] = to_string(s.offset_model);
  j["pinch_offset_mean_ms"] = s.pinch_offset_mean_ms;
  j["pinch_offset_sd_ms"] = s.pinch_offset_sd_ms;
  j["pinch_offset_lo_ms"] = s.pinch_offset_lo_ms;
  j["pinch_offset_hi_ms"] = s.pinch_offset_hi_ms;
  j["pinch_offset_values_ms"] = s.pinch_offset_values_ms;
  j["dropout_rate"] = s.dropout_rate;
  j["landing_bias_dmm"] = opt_json(s.landing_bias_dmm);
  return j;
}

std::optional<SimConfig> sim_from_json(const json& j, Collector& c) {
  if (!j.is_object()) {
    c.add(0, "sim", "expected object");
    return std::nullopt;
  }
  SimConfig s;
  bool ok = true;
  auto num = [&](const char* f, double& dst) {
    if (auto v = c.number(j, f, 0)) dst = *v;
    else ok = false;
  };
  if (auto it = j.find("seed"); it != j.end() && it->is_number_unsigned()) {
    s.seed = it->get<std::uint64_t>();
  } else {
    c.add(0, "sim.seed", "expected unsigned integer");
    ok = false;
  }
  num("frame_rate_hz", s.frame_rate_hz);
  num("fixation_jitter_sd_dmm", s.fixation_jitter_sd);
  num("landing_error_sd_dmm", s.landing_error_sd);
  num("saccade_dur_slope_ms_per_deg", s.saccade_dur_slope_ms_per_deg);
  num("saccade_dur_intercept_ms", s.saccade_dur_intercept_ms);
  num("saccade_latency_ms", s.saccade_latency_ms);
  num("dwell_ms", s.dwell_ms);
  num("min_selection_ms", s.min_selection_ms);
  num("tail_ms", s.tail_ms);
  num("pinch_offset_mean_ms", s.pinch_offset_mean_ms);
  num("pinch_offset_sd_ms", s.pinch_offset_sd_ms);
  num("pinch_offset_lo_ms", s.pinch_offset_lo_ms);
  num("pinch_offset_hi_ms", s.pinch_offset_hi_ms);
  num("dropout_rate", s.dropout_rate);
  if (auto a = c.string(j, "pinch_anchor", 0)) {
    if (auto p = parse_pinch_anchor(*a)) s.pinch_anchor = *p;
    else c.add(0, "sim.pinch_anchor", "unknown anchor '" + *a + "'"), ok = false;
  } else {
    ok = false;
  }
  if (auto m = c.string(j, "offset_model", 0)) {
    if (auto p = parse_offset_model(*m)) s.offset_model = *p;
    else c.add(0, "sim.offset_model", "unknown model '" + *m + "'"), ok = false;
  } else {
    ok = false;
  }
  if (auto it = j.find("pinch_offset_values_ms"); it != j.end() && it->is_array()) {
    for (const auto& v : *it) {
      if (!v.is_number()) {
        c.add(0, "sim.pinch_offset_values_ms", "expected numbers");
        ok = false;
        break;
      }
      s.pinch_offset_values_ms.push_back(v.get<double>());
    }
  } else {
    c.add(0, "sim.pinch_offset_values_ms", "expected array");
    ok = false;
  }
  bool present = true;
  s.landing_bias_dmm = c.optional_number(j, "landing_bias_dmm", 0, present);
  if (!present) ok = false;
  if (!ok) return std::nullopt;
  return s;
}

json manifest_json(const SessionManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["session_id"] = m.session_id;
  j["subject_id"] = m.subject_id;
  j["condition"] = to_string(m.condition);
  j["block_index"] = m.block_index;
  j["layout"] = {
      {"n_targets", m.block.n_targets},
      {"rounds", m.block.rounds},
      {"inter_target_m", m.block.inter_target_m},
      {"plane_distance_m", m.block.plane_distance},
      {"size_schedule_deg", m.block.size_schedule_deg},
  };
  j["heuristics"] = {
      {"sticky_enabled", m.heuristics.sticky_enabled},
      {"sticky_hold_ms", m.heuristics.sticky_hold_ms},
      {"magnetic_enabled", m.heuristics.magnetic_enabled},
      {"magnetic_margin_dmm", m.heuristics.magnetic_margin_dmm},
  };
  j["classifier_window_ms"] = m.classifier_window_ms;
  j["sim"] = m.sim ? sim_to_json(*m.sim) : json(nullptr);
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  j["aborted"] = m.aborted;
  return j;
}

std::optional<SessionManifest> parse_manifest(const json& j, Collector& c) {
  if (!j.is_object()) {
    c.add(0, "", "manifest must be a JSON object");
    return std::nullopt;
  }
  SessionManifest m;
  bool ok = true;
  if (auto v = c.integer(j, "schema_version", 0)) {
    if (*v != kSchemaVersion) {
      c.add(0, "schema_version", "unsupported schema_version " + std::to_string(*v));
      ok = false;
    }
  } else {
    ok = false;
  }
  if (auto v = c.string(j, "session_id", 0)) m.session_id = *v; else ok = false;
  if (auto v = c.string(j, "subject_id", 0)) m.subject_id = *v; else ok = false;
  if (auto v = c.string(j, "condition", 0)) {
    if (auto cond = parse_condition(*v)) m.condition = *cond;
    else c.add(0, "condition", "unknown condition '" + *v + "'"), ok = false;
  } else {
    ok = false;
  }
  if (auto v = c.integer(j, "block_index", 0)) m.block_index = static_cast<int>(*v); else ok = false;

  if (auto it = j.find("layout"); it != j.end() && it->is_object()) {
    const json& l = *it;
    if (auto v = c.integer(l, "n_targets", 0)) m.block.n_targets = static_cast<int>(*v); else ok = false;
    if (auto v = c.integer(l, "rounds", 0)) m.block.rounds = static_cast<int>(*v); else ok = false;
    if (auto v = c.number(l, "inter_target_m", 0)) m.block.inter_target_m = *v; else ok = false;
    if (auto v = c.number(l, "plane_distance_m", 0)) m.block.plane_distance = *v; else ok = false;
    if (auto s = l.find("size_schedule_deg"); s != l.end() && s->is_array()) {
      m.block.size_schedule_deg.clear();
      for (const auto& v : *s) {
        if (!v.is_number()) {
          c.add(0, "layout.size_schedule_deg", "expected numbers");
          ok = false;
          break;
        }
        m.block.size_schedule_deg.push_back(v.get<double>());
      }
    } else {
      c.add(0, "layout.size_schedule_deg", "expected array");
      ok = false;
    }
    if (ok) {
      try {
        m.block.validate();
      } catch (const std::invalid_argument& e) {
        c.add(0, "layout", e.what());
        ok = false;
      }
    }
  } else {
    c.add(0, "layout", "expected object");
    ok = false;
  }
  m.block.condition = m.condition;

  if (auto it = j.find("heuristics"); it != j.end() && it->is_object()) {
    const json& h = *it;
    if (auto v = c.boolean(h, "sticky_enabled", 0)) m.heuristics.sticky_enabled = *v; else ok = false;
    if (auto v = c.number(h, "sticky_hold_ms", 0)) m.heuristics.sticky_hold_ms = *v; else ok = false;
    if (auto v = c.boolean(h, "magnetic_enabled", 0)) m.heuristics.magnetic_enabled = *v; else ok = false;
    if (auto v = c.number(h, "magnetic_margin_dmm", 0)) m.heuristics.magnetic_margin_dmm = *v; else ok = false;
  } else {
    c.add(0, "heuristics", "expected object");
    ok = false;
  }
  if (ok && condition_of(m.heuristics) != m.condition) {
    c.add(0, "condition", "condition does not match heuristic flags");
    ok = false;
  }
  if (auto v = c.number(j, "classifier_window_ms", 0)) m.classifier_window_ms = *v; else ok = false;

  if (auto it = j.find("sim"); it == j.end()) {
    c.add(0, "sim", "missing field");
    ok = false;
  } else if (!it->is_null()) {
    m.sim = sim_from_json(*it, c);
    if (!m.sim) ok = false;
  }
  if (auto it = j.find("seed"); it == j.end()) {
    c.add(0, "seed", "missing field");
    ok = false;
  } else if (it->is_number_unsigned()) {
    m.seed = it->get<std::uint64_t>();
  } else if (!it->is_null()) {
    c.add(0, "seed", "expected unsigned integer or null");
    ok = false;
  }
  if (auto v = c.boolean(j, "aborted", 0)) m.aborted = *v; else ok = false;

  if (!ok) return std::nullopt;
  return m;
}

std::optional<FrameRow> parse_frame(const std::string& line, int line_no, Collector& c) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    c.add(line_no, "", "not a JSON object");
    return std::nullopt;
  }
  FrameRow f;
  bool ok = true;
  auto get_num = [&](const char* k, double& dst) {
    if (auto v = c.number(j, k, line_no)) dst = *v; else ok = false;
  };
  auto get_bool = [&](const char* k, bool& dst) {
    if (auto v = c.boolean(j, k, line_no)) dst = *v; else ok = false;
  };
  auto get_id = [&](const char* k, int& dst) {
    if (auto v = c.integer(j, k, line_no)) {
      if (*v < kNoTarget) {
        c.add(line_no, k, "target id must be -1 or a layout id");
        ok = false;
      } else {
        dst = static_cast<int>(*v);
      }
    } else {
      ok = false;
    }
  };
  get_num("t_ms", f.t_ms);
  get_num("gaze_x_m", f.gaze_x_m);
  get_num("gaze_y_m", f.gaze_y_m);
  get_bool("valid", f.valid);
  get_id("raw_target", f.raw_target);
  get_id("effective_target", f.effective_target);
  get_bool("snapped", f.snapped);
  get_bool("stuck", f.stuck);
  get_bool("pinch_down", f.pinch_down);
  if (!ok) return std::nullopt;
  return f;
}

std::optional<SelectionRecord> parse_selection(const std::string& line, int line_no, Collector& c) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    c.add(line_no, "", "not a JSON object");
    return std::nullopt;
  }
  SelectionRecord s;
  bool ok = true;
  auto get_int = [&](const char* k, int& dst) {
    if (auto v = c.integer(j, k, line_no)) dst = static_cast<int>(*v); else ok = false;
  };
  auto get_id = [&](const char* k, std::optional<int>& dst) {
    if (auto v = c.integer(j, k, line_no)) {
      if (*v < kNoTarget) {
        c.add(line_no, k, "target id must be -1 or a layout id");
        ok = false;
      }
      dst = from_id(*v);
    } else {
      ok = false;
    }
  };
  auto get_num = [&](const char* k, double& dst) {
    if (auto v = c.number(j, k, line_no)) dst = *v; else ok = false;
  };
  auto get_opt = [&](const char* k, std::optional<double>& dst) {
    bool present = true;
    dst = c.optional_number(j, k, line_no, present);
    if (!present) ok = false;
  };
  auto get_outcome = [&](const char* k, OutcomeClass& dst) {
    if (auto v = c.string(j, k, line_no)) {
      if (auto o = parse_outcome(*v)) dst = *o;
      else c.add(line_no, k, "unknown outcome '" + *v + "'"), ok = false;
    } else {
      ok = false;
    }
  };
  get_int("round", s.round);
  get_int("trial", s.trial);
  if (auto v = c.string(j, "condition", line_no)) {
    if (auto cond = parse_condition(*v)) s.condition = *cond;
    else c.add(line_no, "condition", "unknown condition '" + *v + "'"), ok = false;
  } else {
    ok = false;
  }
  get_int("highlighted", s.highlighted);
  get_id("selected_effective", s.selected_effective);
  get_id("selected_raw", s.selected_raw);
  get_num("highlight_onset_t", s.highlight_onset_t);
  get_opt("first_entry_t", s.first_entry_t);
  get_opt("last_exit_before_pinch_t", s.last_exit_before_pinch_t);
  get_opt("first_entry_after_pinch_t", s.first_entry_after_pinch_t);
  get_num("pinch_t", s.pinch_t);
  get_outcome("outcome_effective", s.outcome_effective);
  get_outcome("outcome_raw", s.outcome_raw);
  if (auto v = c.boolean(j, "corrected_by_heuristic", line_no)) s.corrected_by_heuristic = *v; else ok = false;
  if (!ok) return std::nullopt;
  return s;
}

// Cross-row checks. Rows are indexed from 0; reported lines are 1-based.
void check_frames(const std::vector<std::optional<FrameRow>>& frames, const std::optional<SessionManifest>& m,
                  Collector& c) {
  std::optional<double> prev_t;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i]) continue;
    const FrameRow& f = *frames[i];
    const int line = static_cast<int>(i) + 1;
    if (prev_t && !(f.t_ms > *prev_t)) c.add(line, "t_ms", "t_ms must strictly increase");
    prev_t = f.t_ms;
    if (m) {
      const int n = m->block.n_targets;
      if (f.raw_target >= n) c.add(line, "raw_target", "target id outside layout");
      if (f.effective_target >= n) c.add(line, "effective_target", "target id outside layout");
    }
  }
}

void check_selections(const std::vector<std::optional<SelectionRecord>>& sels,
                      const std::optional<SessionManifest>& m, Collector& c) {
  std::optional<double> prev_pinch;
  for (std::size_t i = 0; i < sels.size(); ++i) {
    if (!sels[i]) continue;
    const SelectionRecord& s = *sels[i];
    const int line = static_cast<int>(i) + 1;
    if (m) {
      const int n = m->block.n_targets;
      const int expect_round = static_cast<int>(i) / n;
      const int expect_trial = static_cast<int>(i) % n;
      if (s.round != expect_round) c.add(line, "round", "expected round " + std::to_string(expect_round));
      if (s.trial != expect_trial) c.add(line, "trial", "trial indices must be dense per round");
      if (s.round >= m->block.rounds) c.add(line, "round", "round beyond block");
      if (s.highlighted != highlighted_target(expect_trial, n)) {
        c.add(line, "highlighted", "does not follow the ring sequence");
      }
      if (s.condition != m->condition) c.add(line, "condition", "differs from manifest");
      if (s.selected_effective && *s.selected_effective >= n) c.add(line, "selected_effective", "outside layout");
      if (s.selected_raw && *s.selected_raw >= n) c.add(line, "selected_raw", "outside layout");
    }
    const double onset = s.highlight_onset_t;
    auto before_onset = [&](const std::optional<double>& t) { return t && *t < onset; };
    if (s.pinch_t < onset) c.add(line, "pinch_t", "precedes highlight onset");
    if (before_onset(s.first_entry_t)) c.add(line, "first_entry_t", "precedes highlight onset");
    if (before_onset(s.last_exit_before_pinch_t)) c.add(line, "last_exit_before_pinch_t", "precedes highlight onset");
    if (before_onset(s.first_entry_after_pinch_t)) {
      c.add(line, "first_entry_after_pinch_t", "precedes highlight onset");
    }
    if (prev_pinch && s.pinch_t < *prev_pinch) c.add(line, "pinch_t", "pinch times must not decrease");
    prev_pinch = s.pinch_t;
    const bool expect_corrected =
        s.outcome_effective == OutcomeClass::Correct && s.outcome_raw != OutcomeClass::Correct;
    if (s.corrected_by_heuristic != expect_corrected) {
      c.add(line, "corrected_by_heuristic", "inconsistent with outcome_effective/outcome_raw");
    }
    if ((s.selected_effective == s.highlighted) != (s.outcome_effective == OutcomeClass::Correct)) {
      c.add(line, "outcome_effective", "correct iff selected_effective == highlighted");
    }
    if ((s.selected_raw == s.highlighted) != (s.outcome_raw == OutcomeClass::Correct)) {
      c.add(line, "outcome_raw", "correct iff selected_raw == highlighted");
    }
  }
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void throw_first(const std::vector<Finding>& f) {
  throw SchemaError(f.front().file, f.front().line, f.front().field, f.front().message);
}

}  // namespace

std::string manifest_to_json(const SessionManifest& m) { return manifest_json(m).dump(2) + "\n"; }

std::string frame_to_json(const FrameRow& f) {
  json j;
  j["t_ms"] = f.t_ms;
  j["gaze_x_m"] = f.gaze_x_m;
  j["gaze_y_m"] = f.gaze_y_m;
  j["valid"] = f.valid;
  j["raw_target"] = f.raw_target;
  j["effective_target"] = f.effective_target;
  j["snapped"] = f.snapped;
  j["stuck"] = f.stuck;
  j["pinch_down"] = f.pinch_down;
  return j.dump();
}

std::string selection_to_json(const SelectionRecord& s) {
  json j;
  j["round"] = s.round;
  j["trial"] = s.trial;
  j["condition"] = to_string(s.condition);
  j["highlighted"] = s.highlighted;
  j["selected_effective"] = to_id(s.selected_effective);
  j["selected_raw"] = to_id(s.selected_raw);
  j["highlight_onset_t"] = s.highlight_onset_t;
  j["first_entry_t"] = opt_json(s.first_entry_t);
  j["last_exit_before_pinch_t"] = opt_json(s.last_exit_before_pinch_t);
  j["first_entry_after_pinch_t"] = opt_json(s.first_entry_after_pinch_t);
  j["pinch_t"] = s.pinch_t;
  j["outcome_effective"] = to_string(s.outcome_effective);
  j["outcome_raw"] = to_string(s.outcome_raw);
  j["corrected_by_heuristic"] = s.corrected_by_heuristic;
  return j.dump();
}

SessionManifest manifest_from_json(const std::string& text, const std::string& file) {
  std::vector<Finding> findings;
  Collector c(file, findings);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError(file, 0, "", "not valid JSON");
  auto m = parse_manifest(j, c);
  if (!m) throw_first(findings);
  return *m;
}

FrameRow frame_from_json(const std::string& line, int line_no) {
  std::vector<Finding> findings;
  Collector c(kFramesFile, findings);
  auto f = parse_frame(line, line_no, c);
  if (!f) throw_first(findings);
  return *f;
}

SelectionRecord selection_from_json(const std::string& line, int line_no) {
  std::vector<Finding> findings;
  Collector c(kSelectionsFile, findings);
  auto s = parse_selection(line, line_no, c);
  if (!s) throw_first(findings);
  return *s;
}

std::vector<std::string> check_invariants(const SessionLog& log) {
  std::vector<Finding> findings;
  Collector mc(kManifestFile, findings);
  if (log.manifest.schema_version != kSchemaVersion) mc.add(0, "schema_version", "unsupported schema_version");
  if (condition_of(log.manifest.heuristics) != log.manifest.condition) {
    mc.add(0, "condition", "condition does not match heuristic flags");
  }
  if (log.manifest.block.condition != log.manifest.condition) mc.add(0, "condition", "block condition differs");
  const std::optional<SessionManifest> m = log.manifest;
  {
    Collector fc(kFramesFile, findings);
    std::vector<std::optional<FrameRow>> rows(log.frames.begin(), log.frames.end());
    check_frames(rows, m, fc);
  }
  {
    Collector sc(kSelectionsFile, findings);
    std::vector<std::optional<SelectionRecord>> rows(log.selections.begin(), log.selections.end());
    check_selections(rows, m, sc);
  }
  std::vector<std::string> out;
  for (const Finding& f : findings) {
    out.push_back(SchemaError(f.file, f.line, f.field, f.message).what());
  }
  return out;
}

void write_session(const SessionLog& log, const fs::path& dir) {
  if (auto problems = check_invariants(log); !problems.empty()) {
    throw InvariantViolation("refusing to write session: " + problems.front());
  }
  fs::create_directories(dir);
  {
    std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
    out << manifest_to_json(log.manifest);
    if (!out) throw std::runtime_error("failed writing " + (dir / kManifestFile).string());
  }
  {
    std::ofstream out(dir / kFramesFile, std::ios::binary | std::ios::trunc);
    for (const FrameRow& f : log.frames) out << frame_to_json(f) << '\n';
    if (!out) throw std::runtime_error("failed writing " + (dir / kFramesFile).string());
  }
  {
    std::ofstream out(dir / kSelectionsFile, std::ios::binary | std::ios::trunc);
    for (const SelectionRecord& s : log.selections) out << selection_to_json(s) << '\n';
    if (!out) throw std::runtime_error("failed writing " + (dir / kSelectionsFile).string());
  }
}

SessionLog read_session(const fs::path& dir) {
  for (const char* name : {kManifestFile, kFramesFile, kSelectionsFile}) {
    if (!fs::is_regular_file(dir / name)) throw MissingFileError(dir / name);
  }
  SessionLog log;
  log.manifest = manifest_from_json(read_text(dir / kManifestFile));

  std::vector<Finding> findings;
  Collector fc(kFramesFile, findings);
  std::vector<std::optional<FrameRow>> frames;
  int line_no = 0;
  for (const std::string& line : read_lines(dir / kFramesFile)) {
    ++line_no;
    frames.push_back(parse_frame(line, line_no, fc));
    if (!findings.empty()) throw_first(findings);
  }
  check_frames(frames, log.manifest, fc);
  if (!findings.empty()) throw_first(findings);

  Collector sc(kSelectionsFile, findings);
  std::vector<std::optional<SelectionRecord>> sels;
  line_no = 0;
  for (const std::string& line : read_lines(dir / kSelectionsFile)) {
    ++line_no;
    sels.push_back(parse_selection(line, line_no, sc));
    if (!findings.empty()) throw_first(findings);
  }
  check_selections(sels, log.manifest, sc);
  if (!findings.empty()) throw_first(findings);

  log.frames.reserve(frames.size());
  for (auto& f : frames) log.frames.push_back(*f);
  log.selections.reserve(sels.size());
  for (auto& s : sels) log.selections.push_back(*s);
  return log;
}

ValidationReport validate_session(const fs::path& dir) {
  ValidationReport report;
  std::string manifest_text;
  std::vector<std::string> frame_lines;
  std::vector<std::string> selection_lines;
  try {
    if (!fs::is_directory(dir)) throw MissingFileError(dir);
    manifest_text = read_text(dir / kManifestFile);
    frame_lines = read_lines(dir / kFramesFile);
    selection_lines = read_lines(dir / kSelectionsFile);
  } catch (const MissingFileError& e) {
    report.unreadable = true;
    report.findings.push_back({dir.string(), 0, "", e.what()});
    return report;
  }

  Collector mc(kManifestFile, report.findings);
  const json mj = json::parse(manifest_text, nullptr, false);
  if (mj.is_discarded()) {
    report.unreadable = true;
    mc.add(0, "", "not valid JSON");
    return report;
  }
  const std::optional<SessionManifest> manifest = parse_manifest(mj, mc);

  Collector fc(kFramesFile, report.findings);
  std::vector<std::optional<FrameRow>> frames;
  for (std::size_t i = 0; i < frame_lines.size(); ++i) {
    frames.push_back(parse_frame(frame_lines[i], static_cast<int>(i) + 1, fc));
  }
  check_frames(frames, manifest, fc);

  Collector sc(kSelectionsFile, report.findings);
  std::vector<std::optional<SelectionRecord>> sels;
  for (std::size_t i = 0; i < selection_lines.size(); ++i) {
    sels.push_back(parse_selection(selection_lines[i], static_cast<int>(i) + 1, sc));
  }
  check_selections(sels, manifest, sc);
  return report;
}

FrameAppender::FrameAppender(const fs::path& dir) {
  fs::create_directories(dir);
  out_.open(dir / kFramesFile, std::ios::binary | std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + (dir / kFramesFile).string());
}

void FrameAppender::append(const FrameRow& row) { out_ << frame_to_json(row) << '\n'; }

void FrameAppender::flush() {
  out_.flush();
  if (!out_) throw std::runtime_error("frame log write failed");
}

void finalize_session(const SessionManifest& manifest, const std::vector<SelectionRecord>& selections,
                      const fs::path& dir) {
  {
    std::ofstream out(dir / kSelectionsFile, std::ios::binary | std::ios::trunc);
    for (const SelectionRecord& s : selections) out << selection_to_json(s) << '\n';
    if (!out) throw std::runtime_error("failed writing selections");
  }
  std::ofstream out(dir / kManifestFile, std::ios::binary | std::ios::trunc);
  out << manifest_to_json(manifest);
  if (!out) throw std::runtime_error("failed writing manifest");
}

}  // namespace gazekit
