// gazekit: simulate, classify, analyze, report, validate and serve
// gaze-and-pinch selection sessions.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>

#include "common.hpp"
#include "gazekit/classifier.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/report.hpp"
#include "gazekit/rng.hpp"
#include "gazekit/session_io.hpp"
#include "gazekit/sim.hpp"
#include "gazekit/task.hpp"
#include "server.hpp"

namespace fs = std::filesystem;
using namespace gazekit;
using namespace gazekit::cli;

namespace {

struct SimulateArgs {
  std::uint64_t seed = 1;
  std::string condition = "all";
  int subjects = 1;
  int blocks = 1;
  std::string out;
  int rounds = 10;
  int targets = 9;
  double spacing = 0.13;
  double distance = 1.3;
  double subject_offset_sd = 30.0;
  double subject_latency_sd = 40.0;
  SimConfig sim;
  std::string anchor = "entry";
  std::string model = "normal";
  std::optional<double> landing_bias;
};

struct SessionPlan {
  std::string id;
  std::string subject;
  Condition condition = Condition::None;
  int block_index = 0;
  SimConfig sim;
};

std::vector<Condition> conditions_for(const std::string& flag) {
  if (flag == "all") return {kAllConditions.begin(), kAllConditions.end()};
  const auto c = parse_condition(flag);
  if (!c) throw UsageError("unknown condition '" + flag + "' (none|sticky|magnetic|sticky_magnetic|all)");
  return {*c};
}

int run_simulate(SimulateArgs& a) {
  const fs::path out = resolve_out(a.out);
  const auto anchor = parse_pinch_anchor(a.anchor);
  if (!anchor) throw UsageError("unknown pinch anchor '" + a.anchor + "' (entry|exit)");
  const auto model = parse_offset_model(a.model);
  if (!model) throw UsageError("unknown offset model '" + a.model + "' (normal|uniform|discrete)");
  if (a.subjects < 1 || a.blocks < 1) throw UsageError("--subjects and --blocks must be >= 1");
  if (a.subject_offset_sd < 0 || a.subject_latency_sd < 0) throw UsageError("subject spreads must be >= 0");
  a.sim.pinch_anchor = *anchor;
  a.sim.offset_model = *model;
  a.sim.landing_bias_dmm = a.landing_bias;
  a.sim.seed = a.seed;
  try {
    a.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::vector<Condition> conds = conditions_for(a.condition);
  BlockConfig base;
  base.rounds = a.rounds;
  base.n_targets = a.targets;
  base.inter_target_m = a.spacing;
  base.plane_distance = a.distance;
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::vector<SessionPlan> plans;
  const int width = a.subjects >= 100 ? 3 : 2;
  for (int s = 0; s < a.subjects; ++s) {
    // per-subject offsets and latency, shared by all of that subject's sessions
    Rng subject_rng(Rng::derive(a.seed, kTagSubject, static_cast<std::uint64_t>(s)));
    SimConfig subject_sim = a.sim;
    subject_sim.pinch_offset_mean_ms += a.subject_offset_sd * subject_rng.normal();
    subject_sim.saccade_latency_ms = std::max(0.0, subject_sim.saccade_latency_ms + a.subject_latency_sd * subject_rng.normal());
    const std::string subject = fmt::format("s{:0{}d}", s + 1, width);
    const int nc = static_cast<int>(conds.size());
    for (int b = 0; b < a.blocks; ++b) {
      for (int ci = 0; ci < nc; ++ci) {
        const Condition c = conds[static_cast<std::size_t>(ci)];
        SessionPlan p;
        p.subject = subject;
        p.condition = c;
        // Latin-square order within each repetition
        p.block_index = b * nc + (ci + s) % nc;
        p.id = fmt::format("{}-{}-b{}", subject, to_string(c), b);
        p.sim = subject_sim;
        const std::uint64_t index = (static_cast<std::uint64_t>(s) << 24) |
                                    (static_cast<std::uint64_t>(c) << 16) | static_cast<std::uint64_t>(b);
        p.sim.seed = Rng::derive(a.seed, kTagSession, index);
        plans.push_back(std::move(p));
      }
    }
  }

  std::vector<std::string> lines(plans.size());
  parallel_for(plans.size(), [&](std::size_t i) {
    const SessionPlan& p = plans[i];
    BlockConfig block = base;
    block.condition = p.condition;
    const SimulatedSession s = simulate_session(block, p.sim, {p.id, p.subject, p.block_index});
    write_session(s.log, out / p.id);
    const SessionMetrics m = error_composition(s.log.selections);
    lines[i] = fmt::format("{}  subject={} condition={} block_index={} seed={} selections={} errors={} would_be={}",
                           (out / p.id).string(), p.subject, to_string(p.condition), p.block_index, p.sim.seed,
                           m.selections, m.errors_observed, m.errors_would_be);
  });
  for (const auto& l : lines) std::cout << l << '\n';
  std::cout << plans.size() << " session(s) written to " << out.string() << '\n';
  return kExitOk;
}

struct ClassifyArgs {
  std::string in;
  std::string out;
  std::optional<double> window;
};

int run_classify(const ClassifyArgs& a) {
  const SessionLog log = read_session(a.in);
  ClassifierConfig cfg;
  cfg.window_ms = a.window.value_or(log.manifest.classifier_window_ms);
  const std::vector<SelectionRecord> recs = classify_session(log, cfg);
  std::ostringstream text;
  for (const SelectionRecord& r : recs) text << selection_to_json(r) << '\n';
  if (a.out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    f << text.str();
    if (!f) throw std::runtime_error("cannot write " + a.out);
  }
  int differing = 0;
  if (cfg.window_ms == log.manifest.classifier_window_ms) {
    for (std::size_t i = 0; i < recs.size(); ++i) differing += !(recs[i] == log.selections[i]);
  }
  std::cerr << recs.size() << " record(s)";
  if (differing > 0) std::cerr << ", " << differing << " differ from the logged selections";
  std::cerr << '\n';
  return differing > 0 ? kExitFailure : kExitOk;
}

struct LoadedSession {
  fs::path path;
  SessionLog log;
  std::vector<SelectionRecord> records;
  std::vector<std::string> problems;
};

std::vector<LoadedSession> load_all(const std::vector<std::string>& inputs) {
  const std::vector<fs::path> dirs = find_sessions(inputs);
  if (dirs.empty()) throw std::runtime_error("no session directories found");
  std::vector<LoadedSession> out(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) {
    LoadedSession& s = out[i];
    s.path = dirs[i];
    s.log = read_session(dirs[i]);
    s.records = classify_session(s.log);
    s.problems = replay_mismatches(s.log);
    if (s.records != s.log.selections) s.problems.push_back("logged selections differ from reclassification");
  });
  return out;
}

const char* kSessionsHeader =
    "session_id,subject_id,condition,block_index,selections,errors_observed,errors_would_be,error_reduction,"
    "error_rate_pct,late_rate_pct,early_rate_pct,other_rate_pct,late_sel_pct,early_sel_pct,other_sel_pct,"
    "throughput_bps,mean_selection_time_ms,replay\n";

struct AnalyzeArgs {
  std::vector<std::string> in;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  const std::vector<LoadedSession> sessions = load_all(a.in);
  std::ostringstream csv;
  csv << kSessionsHeader;
  bool problems = false;
  for (const LoadedSession& s : sessions) {
    const SessionManifest& m = s.log.manifest;
    std::string tp = "";
    SessionMetrics sm;
    if (!s.records.empty()) {
      sm = error_composition(s.records);
      try {
        tp = fmt::format("{}", throughput(s.records, m.block).bits_per_s);
      } catch (const EmptyMetricError&) {
      }
    }
    csv << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", m.session_id, m.subject_id,
                       to_string(m.condition), m.block_index, sm.selections, sm.errors_observed, sm.errors_would_be,
                       sm.error_reduction, sm.error_rate_pct, sm.late_rate_pct, sm.early_rate_pct, sm.other_rate_pct,
                       sm.late_sel_pct, sm.early_sel_pct, sm.other_sel_pct, tp, sm.mean_selection_time_ms,
                       s.problems.empty() ? "ok" : "mismatch");
    for (const auto& p : s.problems) {
      std::cerr << s.path.string() << ": " << p << '\n';
      problems = true;
    }
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    f << csv.str();
    if (!f) throw std::runtime_error("cannot write " + a.out);
  }
  return problems ? kExitFailure : kExitOk;
}

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
};

int run_report(const ReportArgs& a) {
  const fs::path out = resolve_out(a.out, "report");
  const std::vector<LoadedSession> sessions = load_all(a.in);
  std::vector<SessionSummary> summaries;
  for (const LoadedSession& s : sessions) {
    for (const auto& p : s.problems) std::cerr << "warning: " << s.path.string() << ": " << p << '\n';
    const SessionManifest& m = s.log.manifest;
    if (m.aborted) {
      std::cerr << "skipping aborted session " << s.path.string() << '\n';
      continue;
    }
    summaries.push_back({m.session_id, m.subject_id, m.condition, m.block_index, session_metrics(s.records, m.block)});
  }
  Report r;
  try {
    r = aggregate_report(summaries);
  } catch (const UnbalancedDesignError& e) {
    std::cerr << "unbalanced design; missing subject/condition cells:\n";
    for (const auto& cell : e.missing()) std::cerr << "  " << cell << '\n';
    return kExitFailure;
  }
  write_report(r, out);
  std::cout << format_summary(r);
  std::cout << "report written to " << out.string() << '\n';
  return kExitOk;
}

struct ValidateArgs {
  std::vector<std::string> in;
  bool replay = false;
};

int run_validate(const ValidateArgs& a) {
  int code = kExitOk;
  for (const std::string& p : a.in) {
    ValidationReport rep = validate_session(p);
    if (a.replay && rep.exit_code() == 0) {
      for (const std::string& m : replay_mismatches(read_session(p))) rep.findings.push_back({"replay", 0, "", m});
    }
    for (const Finding& f : rep.findings) {
      std::cout << p << ": " << f.file << (f.line > 0 ? ":" + std::to_string(f.line) : std::string())
                << (f.field.empty() ? std::string() : " [" + f.field + "]") << ": " << f.message << '\n';
    }
    if (rep.exit_code() == 0) std::cout << p << ": ok\n";
    code = std::max(code, rep.exit_code());
  }
  return code;
}

struct ServeArgs {
  std::string address = "127.0.0.1";
  int port = 8765;
  std::string out;
  int max_sessions = 0;
};

service::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const ServeArgs& a) {
  if (a.port < 0 || a.port > 65535) throw UsageError("--port must be in [0, 65535]");
  service::ServerOptions opts;
  opts.address = a.address;
  opts.port = static_cast<std::uint16_t>(a.port);
  opts.out_root = resolve_out(a.out);
  opts.max_sessions = a.max_sessions;
  std::mutex log_mu;
  opts.log = [&](const std::string& s) {
    std::lock_guard lock(log_mu);
    std::cerr << s << std::endl;
  };
  std::unique_ptr<service::Server> server;
  try {
    server = std::make_unique<service::Server>(opts);
  } catch (const std::exception& e) {
    std::cerr << "cannot listen on " << a.address << ":" << a.port << ": " << e.what() << '\n';
    return kExitFailure;
  }
  std::cout << "listening on ws://" << a.address << ":" << server->port() << "  sessions -> "
            << opts.out_root.string() << std::endl;
  g_server = server.get();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server->run();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gazekit: gaze-and-pinch selection heuristics, simulation and analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gazekit 0.1.0");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Generate seeded synthetic sessions");
  sim->add_option("--seed", sim_args.seed, "Master seed")->capture_default_str();
  sim->add_option("--condition", sim_args.condition, "none|sticky|magnetic|sticky_magnetic|all")->capture_default_str();
  sim->add_option("--subjects", sim_args.subjects, "Number of synthetic subjects")->capture_default_str();
  sim->add_option("--blocks", sim_args.blocks, "Blocks per subject and condition")->capture_default_str();
  sim->add_option("--out", sim_args.out, "Output root (default $GAZEKIT_OUT)");
  sim->add_option("--rounds", sim_args.rounds, "Rounds per block")->capture_default_str();
  sim->add_option("--targets", sim_args.targets, "Targets on the ring")->capture_default_str();
  sim->add_option("--spacing", sim_args.spacing, "Adjacent target distance, m")->capture_default_str();
  sim->add_option("--distance", sim_args.distance, "Target plane distance, m")->capture_default_str();
  sim->add_option("--sim.frame-rate", sim_args.sim.frame_rate_hz, "Frame rate, Hz")->capture_default_str();
  sim->add_option("--sim.jitter-sd", sim_args.sim.fixation_jitter_sd, "Fixation jitter SD, dmm")->capture_default_str();
  sim->add_option("--sim.landing-sd", sim_args.sim.landing_error_sd, "Landing error SD, dmm")->capture_default_str();
  sim->add_option("--sim.saccade-slope", sim_args.sim.saccade_dur_slope_ms_per_deg, "Saccade duration per degree, ms")->capture_default_str();
  sim->add_option("--sim.saccade-intercept", sim_args.sim.saccade_dur_intercept_ms, "Saccade duration intercept, ms")->capture_default_str();
  sim->add_option("--sim.latency", sim_args.sim.saccade_latency_ms, "Saccade latency, ms")->capture_default_str();
  sim->add_option("--sim.dwell", sim_args.sim.dwell_ms, "Dwell on the landing point, ms")->capture_default_str();
  sim->add_option("--sim.min-selection", sim_args.sim.min_selection_ms, "Earliest pinch after onset, ms")
      ->capture_default_str();
  sim->add_option("--sim.tail", sim_args.sim.tail_ms, "Frames after the last trial, ms")->capture_default_str();
  sim->add_option("--sim.pinch-anchor", sim_args.anchor, "Pinch offset reference: entry|exit")->capture_default_str();
  sim->add_option("--sim.offset-model", sim_args.model, "Pinch offset distribution: normal|uniform|discrete")->capture_default_str();
  sim->add_option("--sim.pinch-offset-mean", sim_args.sim.pinch_offset_mean_ms, "Normal model mean, ms (negative: pinch leads gaze)")->capture_default_str();
  sim->add_option("--sim.pinch-offset-sd", sim_args.sim.pinch_offset_sd_ms, "Normal model SD, ms")->capture_default_str();
  sim->add_option("--sim.pinch-offset-lo", sim_args.sim.pinch_offset_lo_ms, "Uniform model lower bound, ms");
  sim->add_option("--sim.pinch-offset-hi", sim_args.sim.pinch_offset_hi_ms, "Uniform model upper bound, ms");
  sim->add_option("--sim.pinch-offset-values", sim_args.sim.pinch_offset_values_ms, "Discrete model offsets, ms")
      ->delimiter(',');
  sim->add_option("--sim.dropout", sim_args.sim.dropout_rate, "Per-frame dropout probability")->capture_default_str();
  sim->add_option("--sim.landing-bias", sim_args.landing_bias, "Aim this many dmm outside the target edge");
  sim->add_option("--sim.subject-offset-sd", sim_args.subject_offset_sd, "Between-subject SD of the offset mean, ms")
      ->capture_default_str();
  sim->add_option("--sim.subject-latency-sd", sim_args.subject_latency_sd, "Between-subject SD of latency, ms")
      ->capture_default_str();

  ClassifyArgs cls_args;
  auto* cls = app.add_subcommand("classify", "Recompute selection records from a session's frames");
  cls->add_option("--in,in", cls_args.in, "Session directory")->required();
  cls->add_option("--out", cls_args.out, "Write JSONL here instead of stdout");
  cls->add_option("--window", cls_args.window, "Classifier window, ms (default: manifest)");

  AnalyzeArgs an_args;
  auto* an = app.add_subcommand("analyze", "Per-session metrics and replay checks as CSV");
  an->add_option("--in,in", an_args.in, "Session directories or roots")->required();
  an->add_option("--out", an_args.out, "Write CSV here instead of stdout");

  ReportArgs rep_args;
  auto* rep = app.add_subcommand("report", "Study report: condition table, ANOVA, t-tests, composition");
  rep->add_option("--in,in", rep_args.in, "Session directories or roots")->required();
  rep->add_option("--out", rep_args.out, "Report directory (default $GAZEKIT_OUT/report)");

  ValidateArgs val_args;
  auto* val = app.add_subcommand("validate", "List every schema and invariant violation");
  val->add_option("--in,in", val_args.in, "Session directories")->required();
  val->add_flag("--replay", val_args.replay, "Also check offline replay equivalence");

  ServeArgs srv_args;
  auto* srv = app.add_subcommand("serve", "Run the live session service (WebSocket)");
  srv->add_option("--address", srv_args.address, "Bind address")->capture_default_str();
  srv->add_option("--port", srv_args.port, "TCP port (0: any free port)")->capture_default_str();
  srv->add_option("--out", srv_args.out, "Session root (default $GAZEKIT_OUT)");
  srv->add_option("--max-sessions", srv_args.max_sessions, "Exit after this many sessions (0: never)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim) return run_simulate(sim_args);
    if (*cls) return run_classify(cls_args);
    if (*an) return run_analyze(an_args);
    if (*rep) return run_report(rep_args);
    if (*val) return run_validate(val_args);
    if (*srv) return run_serve(srv_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
