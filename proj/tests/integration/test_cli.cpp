#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "gazekit/session_io.hpp"
#include "server.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace gazekit;
using testsupport::slurp;
using testsupport::spit;
using testsupport::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

/// Runs the CLI through the shell; `env` is prepended verbatim.
Run gazekit_cli(const std::string& args, const fs::path& scratch, const std::string& env = "env -u GAZEKIT_OUT") {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = env + " '" + std::string(GAZEKIT_EXE) + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

/// Relative path -> contents for every regular file below `root`.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

std::size_t count_dirs(const fs::path& root) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(root)) n += e.is_directory();
  return n;
}

std::vector<std::string> csv_field(const std::string& text, std::size_t column) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i <= column; ++i) std::getline(ls, cell, ',');
    out.push_back(cell);
  }
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  TempDir tmp("cli-usage");
  CHECK(gazekit_cli("", tmp.path()).code == 2);
  CHECK(gazekit_cli("frobnicate", tmp.path()).code == 2);
  CHECK(gazekit_cli("simulate --subjects two --out x", tmp.path()).code == 2);
  CHECK(gazekit_cli("simulate --condition bogus --out " + q(tmp.path() / "s"), tmp.path()).code == 2);
  CHECK(gazekit_cli("simulate --sim.frame-rate -5 --out " + q(tmp.path() / "s"), tmp.path()).code == 2);
  CHECK(gazekit_cli("validate", tmp.path()).code == 2);
  CHECK_FALSE(fs::exists(tmp.path() / "s"));
  const Run help = gazekit_cli("simulate --help", tmp.path());
  CHECK(help.code == 0);
  CHECK(help.out.find("--sim.pinch-offset-mean") != std::string::npos);
}

TEST_CASE("output root falls back to GAZEKIT_OUT and is required") {
  TempDir tmp("cli-env");
  const Run none = gazekit_cli("simulate --rounds 1", tmp.path());
  CHECK(none.code == 2);
  CHECK(none.err.find("GAZEKIT_OUT") != std::string::npos);
  const Run env = gazekit_cli("simulate --rounds 1 --condition sticky", tmp.path(),
                              "env GAZEKIT_OUT=" + q(tmp.path() / "root"));
  CHECK(env.code == 0);
  CHECK(fs::exists(tmp.path() / "root" / "s01-sticky-b0" / "manifest.json"));
}

TEST_CASE("nine subjects by all conditions give 36 deterministic sessions") {
  TempDir tmp("cli-sim");
  const std::string args = "simulate --seed 99 --subjects 9 --condition all --out ";
  REQUIRE(gazekit_cli(args + q(tmp.path() / "a"), tmp.path()).code == 0);
  REQUIRE(gazekit_cli(args + q(tmp.path() / "b"), tmp.path()).code == 0);
  CHECK(count_dirs(tmp.path() / "a") == 36);
  const auto a = tree(tmp.path() / "a");
  CHECK(a.size() == 36 * 3);
  CHECK(a == tree(tmp.path() / "b"));

  const SessionLog log = read_session(tmp.path() / "a" / "s04-magnetic-b0");
  CHECK(log.selections.size() == 90);
  CHECK(log.manifest.subject_id == "s04");
  CHECK(log.manifest.condition == Condition::Magnetic);

  REQUIRE(gazekit_cli("simulate --seed 100 --subjects 1 --condition none --out " + q(tmp.path() / "c"), tmp.path())
              .code == 0);
  CHECK(slurp(tmp.path() / "c" / "s01-none-b0" / "frames.jsonl") !=
        slurp(tmp.path() / "a" / "s01-none-b0" / "frames.jsonl"));

  SUBCASE("analyze reproduces every session") {
    const Run r = gazekit_cli("analyze --in " + q(tmp.path() / "a"), tmp.path());
    CHECK(r.code == 0);
    const auto replay = csv_field(r.out, 17);
    CHECK(replay.size() == 36);
    for (const auto& v : replay) CHECK(v == "ok");
  }

  SUBCASE("report has the study's degrees of freedom") {
    const Run r = gazekit_cli("report --in " + q(tmp.path() / "a") + " --out " + q(tmp.path() / "rep"), tmp.path());
    REQUIRE(r.code == 0);
    const std::string anova = slurp(tmp.path() / "rep" / "anova.csv");
    const auto metric = csv_field(anova, 0);
    const auto df1 = csv_field(anova, 3);
    const auto df2 = csv_field(anova, 4);
    REQUIRE(metric.size() == 6);
    for (std::size_t i = 0; i < metric.size(); ++i) {
      CAPTURE(metric[i]);
      if (metric[i] == "error_reduction") {
        CHECK(df1[i] == "2");
        CHECK(df2[i] == "16");
      } else {
        CHECK(df1[i] == "3");
        CHECK(df2[i] == "24");
      }
    }
  }

  SUBCASE("a missing cell makes the report fail with a listing") {
    fs::remove_all(tmp.path() / "a" / "s03-magnetic-b0");
    const Run r = gazekit_cli("report --in " + q(tmp.path() / "a") + " --out " + q(tmp.path() / "rep"), tmp.path());
    CHECK(r.code == 1);
    CHECK(r.err.find("s03/magnetic") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path() / "rep" / "anova.csv"));
  }
}

TEST_CASE("magnetic sessions with early pinches contain raw early triggers") {
  TempDir tmp("cli-early");
  REQUIRE(gazekit_cli("simulate --seed 5 --subjects 3 --condition magnetic --sim.pinch-offset-mean -120 --out " +
                          q(tmp.path() / "m"),
                      tmp.path())
              .code == 0);
  for (const auto& e : fs::directory_iterator(tmp.path() / "m")) {
    const SessionLog log = read_session(e.path());
    int early = 0;
    for (const auto& s : log.selections) early += s.outcome_raw == OutcomeClass::EarlyTrigger;
    CAPTURE(e.path().string());
    CHECK(early > 0);
  }
}

TEST_CASE("classify and validate on the golden session") {
  TempDir tmp("cli-classify");
  const fs::path golden = testsupport::data_dir() / "golden" / "session";
  const Run c = gazekit_cli("classify --in " + q(golden), tmp.path());
  CHECK(c.code == 0);
  CHECK(c.out == slurp(golden / "selections.jsonl"));
  const Run to_file = gazekit_cli("classify " + q(golden) + " --out " + q(tmp.path() / "sel.jsonl"), tmp.path());
  CHECK(to_file.code == 0);
  CHECK(slurp(tmp.path() / "sel.jsonl") == c.out);

  CHECK(gazekit_cli("validate --replay " + q(golden), tmp.path()).code == 0);

  fs::copy(golden, tmp.path() / "bad");
  std::string frames = slurp(tmp.path() / "bad" / "frames.jsonl");
  const std::string from = "\"raw_target\":-1";
  const auto pos = frames.find(from);
  REQUIRE(pos != std::string::npos);
  frames.replace(pos, from.size(), "\"raw_target\":42");
  spit(tmp.path() / "bad" / "frames.jsonl", frames);
  const Run bad = gazekit_cli("validate " + q(tmp.path() / "bad"), tmp.path());
  CHECK(bad.code == 1);
  CHECK(bad.out.find("raw_target") != std::string::npos);

  CHECK(gazekit_cli("validate " + q(tmp.path() / "nowhere"), tmp.path()).code == 2);
  CHECK(gazekit_cli("classify " + q(tmp.path() / "nowhere"), tmp.path()).code == 1);
}

TEST_CASE("golden study set yields a byte-identical report") {
  TempDir tmp("cli-golden-report");
  const fs::path study = testsupport::data_dir() / "golden" / "study";
  const Run r = gazekit_cli("report --in " + q(study / "sessions") + " --out " + q(tmp.path() / "rep"), tmp.path());
  REQUIRE(r.code == 0);
  const auto expected = tree(study / "report");
  REQUIRE(expected.size() == 6);
  CHECK(tree(tmp.path() / "rep") == expected);
}

TEST_CASE("serve exits 1 when the port is taken") {
  TempDir tmp("cli-serve");
  service::ServerOptions opts;
  opts.port = 0;
  opts.out_root = tmp.path() / "live";
  service::Server holder(opts);
  const Run r = gazekit_cli("serve --port " + std::to_string(holder.port()) + " --out " + q(tmp.path()), tmp.path());
  CHECK(r.code == 1);
}
