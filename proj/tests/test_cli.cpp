#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

#ifndef COCARRY_CLI_PATH
#define COCARRY_CLI_PATH "cocarry"
#endif
#ifndef COCARRY_CONFIG_DIR
#define COCARRY_CONFIG_DIR "configs"
#endif

namespace {

struct CliResult {
  int exit_code{-1};
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const fs::path out_file = fs::temp_directory_path() / "cocarry_cli_capture.txt";
  const std::string cmd =
      std::string(COCARRY_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string scenarios() { return std::string(COCARRY_CONFIG_DIR) + "/scenarios"; }

std::string write_tmp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

std::string read_scenario(const std::string& name) {
  std::ifstream in(scenarios() + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate: bundled scenarios are valid, exit 0") {
  const CliResult r = run_cli("validate --config " + scenarios() + "/closet.scenario --config " +
                              scenarios() + "/straps.scenario");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("valid") != std::string::npos);
}

TEST_CASE("validate: dt = 0 is a semantic error naming the field, exit 1") {
  std::string bad = read_scenario("closet.scenario");
  const std::string needle = "\"dt\": 0.001";
  REQUIRE(bad.find(needle) != std::string::npos);
  bad.replace(bad.find(needle), needle.size(), "\"dt\": 0.0");
  // Model paths are relative to the scenario file; keep the file next to them.
  const std::string path = scenarios() + "/_bad_dt.scenario";
  {
    std::ofstream out(path);
    out << bad;
  }
  const CliResult r = run_cli("validate --config " + path);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("dt") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("validate: negative strap stiffness names the link, exit 1") {
  std::string bad = read_scenario("straps.scenario");
  const std::string needle = "\"stiffness\": 2000.0";
  REQUIRE(bad.find(needle) != std::string::npos);
  bad.replace(bad.find(needle), needle.size(), "\"stiffness\": -2000.0");
  const std::string path = scenarios() + "/_bad_link.scenario";
  {
    std::ofstream out(path);
    out << bad;
  }
  const CliResult r = run_cli("validate --config " + path);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("links[0]") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("validate: unreadable file is an IO error, not a crash") {
  const CliResult r = run_cli("validate --config /nonexistent/no.scenario");
  CHECK(r.exit_code == 1);
}

TEST_CASE("run: short scenario writes the log pair; rerun is identical") {
  // A fast 2 s variant of the bundled scenario, stored beside the models.
  std::string cfg = read_scenario("closet.scenario");
  const std::string dur = "\"duration\": 60.0";
  REQUIRE(cfg.find(dur) != std::string::npos);
  cfg.replace(cfg.find(dur), dur.size(), "\"duration\": 2.0");
  const std::string tare = "\"force_tare_time\": 3.0";
  REQUIRE(cfg.find(tare) != std::string::npos);
  cfg.replace(cfg.find(tare), tare.size(), "\"force_tare_time\": 0.5");
  const std::string path = scenarios() + "/_short.scenario";
  {
    std::ofstream out(path);
    out << cfg;
  }

  const fs::path out_a = fs::temp_directory_path() / "cocarry_cli_a";
  const fs::path out_b = fs::temp_directory_path() / "cocarry_cli_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  CHECK(run_cli("run --config " + path + " --out " + out_a.string() + " --quiet").exit_code == 0);
  CHECK(run_cli("run --config " + path + " --out " + out_b.string() + " --quiet").exit_code == 0);
  REQUIRE(fs::exists(out_a / "closet_log.csv"));
  REQUIRE(fs::exists(out_a / "closet_run.json"));

  std::ifstream fa(out_a / "closet_log.csv", std::ios::binary);
  std::ifstream fb(out_b / "closet_log.csv", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(fa)), {});
  std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);

  // report consumes the pair and emits deterministic tables
  const fs::path rep = fs::temp_directory_path() / "cocarry_cli_rep";
  fs::remove_all(rep);
  const CliResult r =
      run_cli("report --log " + (out_a / "closet_log.csv").string() + " --out " + rep.string() +
              " --quiet");
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(rep / "closet_alpha_timeline.csv"));
  CHECK(fs::exists(rep / "summary.txt"));

  fs::remove(path);
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  fs::remove_all(rep);
}

TEST_CASE("run: aborted scenarios exit with the runtime code 2") {
  std::string cfg = read_scenario("straps.scenario");
  const std::string dur = "\"duration\": 60.0";
  cfg.replace(cfg.find(dur), dur.size(), "\"duration\": 2.0");
  const std::string tare = "\"force_tare_time\": 3.0";
  cfg.replace(cfg.find(tare), tare.size(),
              "\"force_tare_time\": 0.5, \"force_noise_sigma\": 1e200");
  const std::string path = scenarios() + "/_diverging.scenario";
  {
    std::ofstream out(path);
    out << cfg;
  }
  const fs::path out_dir = fs::temp_directory_path() / "cocarry_cli_abort";
  fs::remove_all(out_dir);
  const CliResult r = run_cli("run --config " + path + " --out " + out_dir.string());
  CHECK(r.exit_code == 2);
  CHECK(fs::exists(out_dir / "straps_log.csv"));  // partial log still flushed
  fs::remove(path);
  fs::remove_all(out_dir);
}

TEST_CASE("unknown subcommands and missing flags fail fast") {
  CHECK(run_cli("frobnicate").exit_code != 0);
  CHECK(run_cli("run").exit_code != 0);
  CHECK(run_cli("reproduce nonsense").exit_code != 0);
}
