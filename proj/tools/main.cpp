#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cocarry/errors.hpp"
#include "cocarry/metrics.hpp"
#include "cocarry/sim.hpp"

namespace fs = std::filesystem;
using namespace cocarry;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitAcceptance = 3;

#ifndef COCARRY_BUNDLED_CONFIG_DIR
#define COCARRY_BUNDLED_CONFIG_DIR ""
#endif

std::string bundled_config_dir() {
  if (const char* env = std::getenv("COCARRY_CONFIG_DIR")) return env;
  return COCARRY_BUNDLED_CONFIG_DIR;
}

std::string output_root(const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  if (const char* env = std::getenv("COCARRY_OUT_ROOT")) return env;
  return "out";
}

struct CommonOpts {
  std::vector<std::string> configs;
  std::string out;
  int jobs{1};
  long long seed{-1};
  bool quiet{false};
};

void apply_seed(ScenarioConfig& cfg, long long seed) {
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
}

int write_outputs(const RunLog& log, const std::string& out_dir, bool quiet) {
  fs::create_directories(out_dir);
  const std::string base = (fs::path(out_dir) / log.scenario_name).string();
  log.write_csv(base + "_log.csv");
  log.write_sidecar(base + "_run.json");
  if (!quiet) {
    std::cout << log.scenario_name << ": " << log.ticks.size() << " ticks, "
              << (log.aborted ? "ABORTED (" + log.abort_reason + ")" : "ok") << ", rtf "
              << log.real_time_factor << "\n  -> " << base << "_log.csv\n";
  }
  return log.aborted ? kExitRuntime : kExitOk;
}

int cmd_validate(const CommonOpts& opts) {
  int worst = kExitOk;
  for (const std::string& path : opts.configs) {
    try {
      ScenarioConfig cfg = load_scenario(path);
      if (!opts.quiet) std::cout << path << ": valid (" << cfg.robots.size() << " robots, "
                                 << cfg.links.size() << " links, " << cfg.duration << " s)\n";
    } catch (const ConfigError& e) {
      std::cerr << path << ": INVALID\n  " << e.what() << "\n";
      worst = kExitValidation;
    } catch (const std::exception& e) {
      std::cerr << path << ": ERROR " << e.what() << "\n";
      worst = kExitValidation;
    }
  }
  return worst;
}

int cmd_run(const CommonOpts& opts) {
  ScenarioConfig cfg = load_scenario(opts.configs.at(0));
  apply_seed(cfg, opts.seed);
  const RunLog log = run(cfg);
  const std::string out =
      !opts.out.empty() ? opts.out
                        : (!cfg.output_hint.empty() ? cfg.output_hint : output_root(""));
  return write_outputs(log, out, opts.quiet);
}

int cmd_batch(const CommonOpts& opts) {
  std::vector<ScenarioConfig> configs;
  for (const std::string& path : opts.configs) {
    configs.push_back(load_scenario(path));
    apply_seed(configs.back(), opts.seed);
  }
  const auto results = batch(configs, opts.jobs);
  int worst = kExitOk;
  for (size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok) {
      std::cerr << configs[i].name << ": FAILED (" << results[i].error << ")\n";
      worst = kExitRuntime;
      continue;
    }
    const int rc = write_outputs(results[i].log, output_root(opts.out), opts.quiet);
    worst = std::max(worst, rc);
  }
  return worst;
}

int cmd_report(const CommonOpts& opts) {
  std::vector<RunLog> logs;
  for (const std::string& path : opts.configs) logs.push_back(load_run_log(path));
  std::vector<const RunLog*> ptrs;
  for (const RunLog& l : logs) ptrs.push_back(&l);
  const auto segments = segments_of(logs.front());
  const ReportFiles files = write_report(ptrs, segments, output_root(opts.out));
  if (!opts.quiet) {
    std::cout << files.summary_text;
    for (const std::string& f : files.written) std::cout << "wrote " << f << "\n";
  }
  return kExitOk;
}

struct CriterionCheck {
  std::string name;
  bool pass{false};
  std::string detail;
};

int cmd_reproduce(const std::string& experiment, const CommonOpts& opts) {
  const std::string dir = bundled_config_dir();
  const std::string path = (fs::path(dir) / "scenarios" / (experiment + ".scenario")).string();
  if (!fs::exists(path)) {
    std::cerr << "bundled scenario not found: " << path
              << " (set COCARRY_CONFIG_DIR to the configs directory)\n";
    return kExitValidation;
  }

  ScenarioConfig aci_cfg = load_scenario(path);
  apply_seed(aci_cfg, opts.seed);
  aci_cfg.name = experiment + "_aci";
  ScenarioConfig base_cfg = baseline_mode(aci_cfg);
  base_cfg.name = experiment + "_baseline";

  const auto results = batch({aci_cfg, base_cfg}, std::min(opts.jobs, 2));
  for (const auto& r : results) {
    if (!r.ok) {
      std::cerr << "run failed: " << r.error << "\n";
      return kExitRuntime;
    }
  }
  const RunLog& aci = results[0].log;
  const RunLog& base = results[1].log;

  const std::string out_dir = output_root(opts.out);
  write_outputs(aci, out_dir, opts.quiet);
  write_outputs(base, out_dir, opts.quiet);
  const auto segments = segments_of(aci);
  write_report({&aci, &base}, segments, out_dir);

  std::vector<CriterionCheck> checks;
  char buf[256];
  if (experiment == "straps") {
    for (int r = 0; r < 2; ++r) {
      const double mean_alpha = alpha_stats(aci, r, segments).mean;
      std::snprintf(buf, sizeof(buf), "mean alpha %.3f > 0.65 (motion segments)", mean_alpha);
      checks.push_back({aci.robot_names[r] + " adaptive index", mean_alpha > 0.65, buf});
      for (const SegmentSpec& seg : segments) {
        const double da = alignment_metric(aci, r, seg).per_axis[seg.axis];
        const double db = alignment_metric(base, r, seg).per_axis[seg.axis];
        std::snprintf(buf, sizeof(buf), "D_AM %.4f (ACI) < %.4f (baseline)", da, db);
        checks.push_back({aci.robot_names[r] + " alignment, " + seg.label, da < db, buf});
      }
      const SegmentSpec& downup = segments.back();
      const double hz = human_displacement_range(aci, downup.t_start, downup.t_end, 2);
      const double aci_z = displacement_range(aci, r, downup.t_start, downup.t_end, 2);
      const double base_z = displacement_range(base, r, downup.t_start, downup.t_end, 2);
      std::snprintf(buf, sizeof(buf), "ACI %.0f%% / baseline %.0f%% of the human's %.2f m",
                    100 * aci_z / hz, 100 * base_z / hz, hz);
      checks.push_back({aci.robot_names[r] + " down-up displacement",
                        aci_z > 0.8 * hz && base_z < 0.25 * hz, buf});
      const double f_aci = force_stats(aci, r, segments).mean;
      const double f_base = force_stats(base, r, segments).mean;
      std::snprintf(buf, sizeof(buf), "mean |F| %.2f N (baseline) > %.2f N (ACI)", f_base, f_aci);
      checks.push_back({aci.robot_names[r] + " force relief", f_base > f_aci, buf});
    }
  } else {  // closet
    double means[2];
    for (int r = 0; r < 2; ++r) {
      means[r] = alpha_stats(aci, r, segments).mean;
      std::snprintf(buf, sizeof(buf), "mean alpha %.3f < 0.15 (motion segments)", means[r]);
      checks.push_back({aci.robot_names[r] + " adaptive index", means[r] < 0.15, buf});
    }
    const double f0 = force_stats(aci, 0, segments).mean;
    const double f1 = force_stats(aci, 1, segments).mean;
    const double rel = std::abs(f0 - f1) / std::max(f0, f1);
    std::snprintf(buf, sizeof(buf), "mean |F| %.2f vs %.2f N (%.0f%% apart)", f0, f1, 100 * rel);
    checks.push_back({"force similarity", rel < 0.30, buf});
  }

  bool all_pass = true;
  for (const CriterionCheck& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << experiment << ": " << c.name << " — "
              << c.detail << "\n";
    all_pass = all_pass && c.pass;
  }
  return all_pass ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic human–multi-robot co-transportation simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string experiment;

  auto add_common = [&](CLI::App* sub, bool many_configs) {
    if (many_configs) {
      sub->add_option("--config", opts.configs, "Scenario file(s)")->required();
    } else {
      sub->add_option("--config", opts.configs, "Scenario file")->required()->expected(1);
    }
    sub->add_option("--out", opts.out, "Output directory (default $COCARRY_OUT_ROOT or ./out)");
    sub->add_option("--jobs", opts.jobs, "Parallel runs")->default_val(1);
    sub->add_option("--seed", opts.seed, "Seed override");
    sub->add_flag("--quiet", opts.quiet, "Suppress progress output");
  };

  CLI::App* validate = app.add_subcommand("validate", "Check scenario files");
  validate->add_option("--config", opts.configs, "Scenario file(s)")->required();
  validate->add_flag("--quiet", opts.quiet);

  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario");
  add_common(run_cmd, false);

  CLI::App* batch_cmd = app.add_subcommand("batch", "Run several scenarios");
  add_common(batch_cmd, true);

  CLI::App* report_cmd = app.add_subcommand("report", "Analyze run logs");
  report_cmd->add_option("--log", opts.configs, "Run log CSV file(s)")->required();
  report_cmd->add_option("--out", opts.out, "Output directory");
  report_cmd->add_flag("--quiet", opts.quiet);

  CLI::App* repro = app.add_subcommand("reproduce", "Run a bundled experiment comparison");
  repro->add_option("experiment", experiment, "straps or closet")
      ->required()
      ->check(CLI::IsMember({"straps", "closet"}));
  repro->add_option("--out", opts.out, "Output directory");
  repro->add_option("--jobs", opts.jobs)->default_val(2);
  repro->add_option("--seed", opts.seed, "Seed override");
  repro->add_flag("--quiet", opts.quiet);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(opts);
    if (run_cmd->parsed()) return cmd_run(opts);
    if (batch_cmd->parsed()) return cmd_batch(opts);
    if (report_cmd->parsed()) return cmd_report(opts);
    if (repro->parsed()) return cmd_reproduce(experiment, opts);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
