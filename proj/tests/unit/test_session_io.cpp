#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gazekit/classifier.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/session_io.hpp"
#include "gazekit/sim.hpp"
#include "support.hpp"

using namespace gazekit;
using testsupport::slurp;
using testsupport::spit;
using testsupport::TempDir;

namespace {

SessionLog small_session(Condition c = Condition::Sticky, std::uint64_t seed = 11) {
  BlockConfig block;
  block.rounds = 2;
  block.condition = c;
  SimConfig sim;
  sim.seed = seed;
  sim.pinch_offset_mean_ms = -60;
  sim.pinch_offset_sd_ms = 120;
  sim.dropout_rate = 0.02;
  sim.tail_ms = 400;
  return simulate_session(block, sim, {"small", "s01", 2}).log;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  spit(p, text);
}

}  // namespace

TEST_CASE("write then read is identity") {
  TempDir dir("io-roundtrip");
  for (Condition c : kAllConditions) {
    const SessionLog log = small_session(c);
    write_session(log, dir.path());
    CHECK(read_session(dir.path()) == log);
  }
}

TEST_CASE("human manifests have no sim block") {
  TempDir dir("io-human");
  SessionLog log = small_session();
  log.manifest.sim.reset();
  log.manifest.seed.reset();
  write_session(log, dir.path());
  const SessionLog back = read_session(dir.path());
  CHECK_FALSE(back.manifest.sim);
  CHECK_FALSE(back.manifest.seed);
  CHECK(back == log);
}

TEST_CASE("numbers keep full precision") {
  FrameRow f;
  f.t_ms = 0.1 + 0.2;
  f.gaze_x_m = -1.0 / 3.0;
  f.gaze_y_m = 1e-300;
  const FrameRow back = frame_from_json(frame_to_json(f));
  CHECK(back == f);
  CHECK(frame_to_json(f).find("0.30000000000000004") != std::string::npos);
}

TEST_CASE("frame rows use fixed field names and the -1 sentinel") {
  FrameRow f;
  f.t_ms = 12.5;
  const auto j = nlohmann::json::parse(frame_to_json(f));
  CHECK(j.size() == 9);
  for (const char* k : {"t_ms", "gaze_x_m", "gaze_y_m", "valid", "raw_target", "effective_target", "snapped", "stuck",
                        "pinch_down"}) {
    CHECK(j.contains(k));
  }
  CHECK(j["raw_target"] == -1);
}

TEST_CASE("a full simulated block has 90 selection lines") {
  TempDir dir("io-90");
  const SimulatedSession s = simulate_session(BlockConfig{}, SimConfig{});
  write_session(s.log, dir.path());
  CHECK(lines_of(dir.path() / kSelectionsFile).size() == 90);
}

TEST_CASE("aborted session with frames and no selections is valid") {
  TempDir dir("io-aborted");
  SessionLog log = small_session();
  log.selections.clear();
  log.manifest.aborted = true;
  write_session(log, dir.path());
  CHECK(read_session(dir.path()) == log);
  CHECK(validate_session(dir.path()).exit_code() == 0);
  CHECK(lines_of(dir.path() / kSelectionsFile).empty());
}

TEST_CASE("read errors name the file, line and field") {
  TempDir dir("io-tamper");
  write_session(small_session(), dir.path());
  auto lines = lines_of(dir.path() / kFramesFile);
  auto j = nlohmann::ordered_json::parse(lines[6]);
  j["t_ms"] = 0.0;  // regression on line 7
  lines[6] = j.dump();
  write_lines(dir.path() / kFramesFile, lines);
  try {
    (void)read_session(dir.path());
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.file() == kFramesFile);
    CHECK(e.line() == 7);
    CHECK(e.field() == "t_ms");
    CHECK(std::string(e.what()).find(":7") != std::string::npos);
  }
}

TEST_CASE("missing selections file is a distinct error") {
  TempDir dir("io-missing");
  write_session(small_session(), dir.path());
  std::filesystem::remove(dir.path() / kSelectionsFile);
  CHECK_THROWS_AS((void)read_session(dir.path()), MissingFileError);
  try {
    (void)read_session(dir.path());
  } catch (const MissingFileError& e) {
    CHECK(std::string(e.what()).rfind("missing-file:", 0) == 0);
  }
  CHECK(validate_session(dir.path()).exit_code() == 2);
}

TEST_CASE("unknown schema version is rejected") {
  TempDir dir("io-schema");
  write_session(small_session(), dir.path());
  auto j = nlohmann::ordered_json::parse(slurp(dir.path() / kManifestFile));
  j["schema_version"] = 2;
  spit(dir.path() / kManifestFile, j.dump(2));
  CHECK_THROWS_AS((void)read_session(dir.path()), SchemaError);
  const ValidationReport r = validate_session(dir.path());
  CHECK(r.exit_code() == 1);
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].field == "schema_version");
}

TEST_CASE("validate lists every seeded violation") {
  TempDir dir("io-validate");
  write_session(small_session(), dir.path());
  CHECK(validate_session(dir.path()).exit_code() == 0);
  CHECK(validate_session(dir.path()).findings.empty());

  // three independent mutations
  auto frames = lines_of(dir.path() / kFramesFile);
  auto f3 = nlohmann::ordered_json::parse(frames[3]);
  f3["raw_target"] = 42;
  frames[3] = f3.dump();
  auto f20 = nlohmann::ordered_json::parse(frames[20]);
  f20["t_ms"] = nlohmann::ordered_json::parse(frames[18])["t_ms"];
  frames[20] = f20.dump();
  write_lines(dir.path() / kFramesFile, frames);

  auto sels = lines_of(dir.path() / kSelectionsFile);
  auto s4 = nlohmann::ordered_json::parse(sels[4]);
  s4["trial"] = 7;
  sels[4] = s4.dump();
  write_lines(dir.path() / kSelectionsFile, sels);

  const ValidationReport r = validate_session(dir.path());
  CHECK(r.exit_code() == 1);
  REQUIRE(r.findings.size() == 3);
  CHECK(r.findings[0].line == 4);
  CHECK(r.findings[0].field == "raw_target");
  CHECK(r.findings[1].line == 21);
  CHECK(r.findings[1].field == "t_ms");
  CHECK(r.findings[2].file == kSelectionsFile);
  CHECK(r.findings[2].line == 5);
  CHECK(r.findings[2].field == "trial");
}

TEST_CASE("unreadable paths exit 2") {
  CHECK(validate_session("/nonexistent/gazekit/session").exit_code() == 2);
  TempDir dir("io-garbage");
  write_session(small_session(), dir.path());
  spit(dir.path() / kManifestFile, "{not json");
  CHECK(validate_session(dir.path()).exit_code() == 2);
}

TEST_CASE("write refuses rows that break invariants") {
  TempDir dir("io-refuse");
  SessionLog log = small_session();
  log.selections[3].corrected_by_heuristic = !log.selections[3].corrected_by_heuristic;
  CHECK_FALSE(check_invariants(log).empty());
  CHECK_THROWS_AS(write_session(log, dir.path()), InvariantViolation);
  CHECK_FALSE(std::filesystem::exists(dir.path() / kManifestFile));

  log = small_session();
  std::swap(log.frames[5], log.frames[6]);
  CHECK_THROWS_AS(write_session(log, dir.path()), InvariantViolation);
}

TEST_CASE("logs are self-sufficient: disk and memory pipelines agree") {
  TempDir dir("io-pipeline");
  const SessionLog log = small_session(Condition::StickyMagnetic, 3);
  write_session(log, dir.path());
  const SessionLog disk = read_session(dir.path());
  const auto a = classify_session(log);
  const auto b = classify_session(disk);
  CHECK(a == b);
  CHECK(a == log.selections);
  const SessionMetrics ma = session_metrics(a, log.manifest.block);
  const SessionMetrics mb = session_metrics(b, disk.manifest.block);
  CHECK(ma.throughput_bps == mb.throughput_bps);
  CHECK(ma.error_rate_pct == mb.error_rate_pct);
  CHECK(ma.error_reduction == mb.error_reduction);
}

TEST_CASE("frame appender plus finalize equals write_session") {
  TempDir a("io-append");
  TempDir b("io-write");
  const SessionLog log = small_session();
  {
    FrameAppender app(a.path());
    for (std::size_t i = 0; i < log.frames.size(); ++i) {
      app.append(log.frames[i]);
      if (i % 50 == 0) app.flush();
    }
    app.flush();
  }
  finalize_session(log.manifest, log.selections, a.path());
  write_session(log, b.path());
  for (const char* f : {kManifestFile, kFramesFile, kSelectionsFile}) CHECK(slurp(a.path() / f) == slurp(b.path() / f));
}

TEST_CASE("golden session rewrites byte-identically and is reproduced by the simulator") {
  const auto golden = testsupport::data_dir() / "golden" / "session";
  REQUIRE(std::filesystem::exists(golden / kManifestFile));
  const SessionLog log = read_session(golden);
  TempDir dir("io-golden");
  write_session(log, dir.path());
  for (const char* f : {kManifestFile, kFramesFile, kSelectionsFile}) {
    CHECK(slurp(dir.path() / f) == slurp(golden / f));
  }
  REQUIRE(log.manifest.sim);
  const SimulatedSession again =
      simulate_session(log.manifest.block, *log.manifest.sim,
                       {log.manifest.session_id, log.manifest.subject_id, log.manifest.block_index});
  CHECK(again.log == log);
}
