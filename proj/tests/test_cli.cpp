#include "artts/bus_server.hpp"

#include "support.hpp"

#include <doctest.h>

#include <chrono>
#include <csignal>
#include <regex>
#include <thread>

using namespace artts;
namespace fs = std::filesystem;

namespace {

std::string cli() { return ARTTS_CLI; }

// Runs the CLI with the source tree as workspace; stderr is discarded
// unless `with_stderr`.
test::CommandResult cli_run(const std::string& args, bool with_stderr = false) {
  return test::run_command(cli() + " --workspace " + test::source_dir().string() + " " + args +
                           (with_stderr ? " 2>&1" : " 2>/dev/null"));
}

const std::string kCoverage =
    "coverage --level detail --requirements suite/requirements.txt --links suite/links.txt "
    "--suite suite/suite.json";

fs::path station_copy(const std::string& tag) {
  auto dir = test::temp_dir(tag);
  fs::copy(test::station_dir(), dir, fs::copy_options::recursive);
  return dir;
}

void replace_in(const fs::path& file, const std::string& from, const std::string& to) {
  auto text = read_text(file);
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  write_text(file, text);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2") {
  CHECK(cli_run("bogus").exit_code == 2);
  CHECK(cli_run("").exit_code == 2);
  CHECK(cli_run("run --frob").exit_code == 2);
  CHECK(cli_run("lint").exit_code == 2);
  CHECK(cli_run("coverage --level detail").exit_code == 2);
  CHECK(cli_run("coverage --level sideways --requirements suite/requirements.txt --links "
                "suite/links.txt --suite suite/suite.json")
            .exit_code == 2);
  CHECK(cli_run("run --suite suite/suite.json --select TR-99 --out " +
                test::temp_dir("sel").string())
            .exit_code == 2);
  const auto r = cli_run("bogus", true);
  CHECK(r.output.find("unknown verb 'bogus'") != std::string::npos);
}

TEST_CASE("lint") {
  SUBCASE("reference station is clean") {
    const auto r = cli_run("lint --station stations/station-a");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("lint: ok") != std::string::npos);
  }
  SUBCASE("a program error exits 1 with diagnostics") {
    const auto dir = station_copy("lint");
    replace_in(dir / "chain_b.rung", "rung SECURED_LED_B := SECURED", "rung SECURED_LED_B := SECURD");
    const auto r = cli_run("lint --station " + dir.string());
    CHECK(r.exit_code == 1);
    CHECK(std::regex_search(r.output, std::regex(R"(chain_b\.rung: line \d+: error: .*SECURD)")));
    CHECK(r.output.find("lint: FAILED") != std::string::npos);
    fs::remove_all(dir);
  }
  SUBCASE("a sabotaged interlock is found by exploration") {
    const auto dir = station_copy("explore");
    replace_in(dir / "chain_b.rung", "SHUTTER_PERMIT_B := SECURED AND BEAM_REQ AND DOOR_CLOSED_1 AND ",
               "SHUTTER_PERMIT_B := SECURED AND BEAM_REQ AND ");
    CHECK(cli_run("lint --station " + dir.string()).exit_code == 0);
    const auto r = cli_run("lint --explore --station " + dir.string());
    CHECK(r.exit_code == 1);
    std::smatch m;
    REQUIRE(std::regex_search(r.output, m, std::regex(R"(explore states=\d+ transitions=\d+ complete=yes violations=(\d+))")));
    CHECK(std::stoi(m[1]) >= 1);
    fs::remove_all(dir);
  }
  SUBCASE("missing station directory exits 3") {
    CHECK(cli_run("lint --station /nonexistent/station").exit_code == 3);
  }
}

TEST_CASE("run and report") {
  const auto out = test::temp_dir("cli-run");
  const auto r = cli_run("run --suite suite/suite.json --station stations/station-a --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("totals pass=72 fail=0 error=0 cases=72") != std::string::npos);
  const auto rep = cli_run("report --out " + out.string());
  CHECK(rep.exit_code == 0);
  CHECK(rep.output.find("totals pass=72") != std::string::npos);
  CHECK(cli_run("report --out " + out.string() + " --format records").exit_code == 0);
  CHECK(cli_run("report --out " + (out / "empty").string()).exit_code == 3);
  CHECK(cli_run("report --out " + out.string() + " --batch NOPE").exit_code == 3);
  fs::remove_all(out);
}

TEST_CASE("a failing case exits 1 and opens a defect") {
  const auto suite = test::temp_dir("cli-suite");
  fs::copy(test::suite_dir(), suite, fs::copy_options::recursive);
  replace_in(suite / "cases" / "TC-001.tc", "SHUTTER_PERMIT == 0", "SHUTTER_PERMIT == 1");
  const auto out = test::temp_dir("cli-fail");
  const auto cmd = "run --suite " + (suite / "suite.json").string() + " --out " + out.string();
  const auto r = cli_run(cmd, true);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("totals pass=71 fail=1 error=0") != std::string::npos);
  CHECK(r.output.find("defect D-0001 open TC-001") != std::string::npos);
  // Fixing the case closes the defect on the next batch.
  replace_in(suite / "cases" / "TC-001.tc", "SHUTTER_PERMIT == 1", "SHUTTER_PERMIT == 0");
  const auto again = cli_run(cmd + " --batch-id later", true);
  CHECK(again.exit_code == 0);
  CHECK(again.output.find("defect D-0001 closed TC-001") != std::string::npos);
  fs::remove_all(suite);
  fs::remove_all(out);
}

TEST_CASE("run environment errors exit 3") {
  CHECK(cli_run("run --suite /nonexistent/suite.json --out " + test::temp_dir("x").string()).exit_code == 3);
  CHECK(cli_run("run --suite suite/suite.json --station /nonexistent --out " + test::temp_dir("y").string())
            .exit_code == 3);
}

TEST_CASE("coverage") {
  const auto full = cli_run(kCoverage);
  CHECK(full.exit_code == 0);
  CHECK(full.output.find("covered    160 (100.0%)") != std::string::npos);

  const auto dir = test::temp_dir("cli-cov");
  auto links = read_text(test::suite_dir() / "links.txt");
  const std::string victim = "DR-2.1.3 -> ";
  const auto pos = links.find(victim);
  REQUIRE(pos != std::string::npos);
  links.erase(pos, links.find('\n', pos) - pos + 1);
  write_text(dir / "links.txt", links);
  const auto r = cli_run("coverage --level detail --requirements suite/requirements.txt --links " +
                         (dir / "links.txt").string() + " --suite suite/suite.json");
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("DR-2.1.3") != std::string::npos);

  CHECK(cli_run("coverage --level high --requirements suite/requirements.txt --links suite/links.txt "
                "--suite suite/suite.json --matrix --rollup")
            .exit_code == 0);
  CHECK(cli_run("coverage --level detail --requirements /nonexistent --links suite/links.txt "
                "--suite suite/suite.json")
            .exit_code == 3);
  fs::remove_all(dir);
}

TEST_CASE("serve answers over TCP and stops on SIGINT") {
  const auto dir = test::temp_dir("cli-serve");
  const auto err = dir / "stderr.txt";
  const auto log = dir / "commands.log";
  const auto pid_file = dir / "pid";
  const auto launch = cli() + " --workspace " + test::source_dir().string() +
                      " serve --station stations/station-a --listen 127.0.0.1:0 --bridge none --log " +
                      log.string() + " 2>" + err.string() + " & echo $! > " + pid_file.string();
  REQUIRE(std::system(launch.c_str()) == 0);

  std::smatch m;
  std::string text;
  for (int i = 0; i < 100; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (fs::exists(err)) text = read_text(err);
    if (std::regex_search(text, m, std::regex(R"(tcp port (\d+))"))) break;
  }
  REQUIRE(m.size() == 2);
  const int pid = std::stoi(read_text(pid_file));
  {
    BusClient c("127.0.0.1", static_cast<std::uint16_t>(std::stoi(m[1])));
    CHECK(c.command("READ SHUTTER_PERMIT") == std::vector<std::string>{"OK 0"});
    CHECK(c.command("STEP 3") == std::vector<std::string>{"OK 30"});
  }
  ::kill(pid, SIGINT);
  for (int i = 0; i < 100 && ::kill(pid, 0) == 0; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(::kill(pid, 0) != 0);
  REQUIRE(fs::exists(log));
  CHECK(read_text(log).find("READ SHUTTER_PERMIT") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
