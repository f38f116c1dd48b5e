// Command-line front end: seeded simulation runs, closed-form verification
// suites, and infinitesimal-moment estimation reports.
//
// Exit codes: 0 success / all checks passed, 1 verification failure,
// 2 configuration error, 3 runtime error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cojump/config.hpp"
#include "cojump/errors.hpp"
#include "cojump/moments.hpp"
#include "cojump/simulator.hpp"
#include "cojump/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cojump;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_end;
  std::optional<std::uint64_t> replicates;
  std::optional<std::string> out_dir;
};

RunConfig load_with_overrides(const CommonFlags& flags) {
  RunConfig cfg = load_run_config(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.t_end) cfg.t_end = *flags.t_end;
  if (flags.replicates) cfg.replicates = *flags.replicates;
  if (flags.out_dir) cfg.output_dir = *flags.out_dir;
  if (!cfg.seed) {
    throw ConfigError("a seed is required (config [run] seed or --seed); "
                      "runs never default to wall-clock entropy");
  }
  return cfg;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

int run_simulate(const CommonFlags& flags) {
  const RunConfig cfg = load_with_overrides(flags);
  if (!cfg.t_end) {
    throw ConfigError("simulate requires t_end (config [run] t_end or --t-end)");
  }
  const SystemSpec spec = build_system(cfg);
  const StateVector init = initial_state(cfg, spec);
  const fs::path out = prepare_output_dir(cfg);

  json summary;
  summary["schema_version"] = 1;
  summary["model"] = cfg.model_name();
  summary["seed"] = *cfg.seed;
  summary["t_end"] = *cfg.t_end;
  summary["replicates"] = cfg.replicates;
  json runs = json::array();

  for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
    const Trajectory traj = simulate(spec, init, *cfg.t_end, RngStream{*cfg.seed, r});
    validate_trajectory(spec, traj);

    const fs::path csv_path = out / ("trajectory_" + std::to_string(r) + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot write " + csv_path.string());
    write_trajectory_csv(csv, spec, traj);

    json run;
    run["replicate"] = r;
    run["events"] = traj.events.size();
    run["final_time"] = traj.times.back();
    json final_state;
    for (std::size_t c = 0; c < spec.compartment_count(); ++c) {
      final_state[spec.compartments()[c]] = traj.states.back()[c];
    }
    run["final_state"] = final_state;
    json event_counts;
    for (std::size_t t = 0; t < spec.transition_count(); ++t) {
      event_counts[spec.transitions()[t].label()] = traj.counts.back()[t];
    }
    run["event_counts"] = event_counts;
    runs.push_back(run);
  }
  summary["runs"] = runs;

  const fs::path summary_path = out / "summary.json";
  std::ofstream js(summary_path);
  if (!js) throw Error("cannot write " + summary_path.string());
  js << summary.dump(2) << '\n';
  std::printf("wrote %llu trajectories and %s\n",
              static_cast<unsigned long long>(cfg.replicates),
              summary_path.string().c_str());
  return kExitOk;
}

void print_suite(const SuiteResult& result) {
  for (const CheckRow& row : result.rows) {
    std::printf("[%s] %s: %s (observed %.6g, threshold %.6g)\n",
                row.pass ? "ok" : "FAIL", row.check.c_str(), row.detail.c_str(),
                row.observed, row.threshold);
  }
}

int write_suite_report(const SuiteResult& result, const RunConfig& cfg) {
  const fs::path out = prepare_output_dir(cfg);
  const fs::path path = out / (result.suite + "_report.csv");
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  write_suite_csv(os, result);
  print_suite(result);
  std::printf("%s: %s (report: %s)\n", result.suite.c_str(),
              result.pass ? "all checks passed" : "FAILED", path.string().c_str());
  return result.pass ? kExitOk : kExitVerifyFailed;
}

int run_verify(const CommonFlags& flags, const std::string& suite) {
  const RunConfig cfg = load_with_overrides(flags);
  if (suite == "identities") {
    return write_suite_report(verify_identities(), cfg);
  }
  if (suite == "oracle") {
    if (cfg.model != ModelKind::bivariate_death) {
      throw ConfigError("the oracle suite runs on a bivariate_death config");
    }
    if (cfg.bivariate.y1_0 > 30 || cfg.bivariate.y2_0 > 30) {
      throw ConfigError("the oracle suite needs pools of at most 30");
    }
    OracleOptions options;
    options.y1 = static_cast<int>(cfg.bivariate.y1_0);
    options.y2 = static_cast<int>(cfg.bivariate.y2_0);
    options.delta = cfg.bivariate.delta;
    options.tau = cfg.bivariate.tau;
    options.replicates = cfg.replicates > 1 ? cfg.replicates : 100'000;
    if (options.replicates < 50'000) {
      throw ConfigError("the oracle suite needs at least 50000 replicates to keep "
                        "its distributional thresholds meaningful");
    }
    options.seed = *cfg.seed;
    options.threads = cfg.threads;
    return write_suite_report(verify_oracle(options), cfg);
  }
  if (suite == "moments") {
    MomentsOptions options;
    options.replicates = cfg.replicates > 1 ? cfg.replicates : 100'000;
    if (options.replicates < 10'000) {
      throw ConfigError("the moments suite needs at least 10000 replicates");
    }
    options.seed = *cfg.seed;
    options.threads = cfg.threads;
    std::vector<EstimateReportRow> rows;
    const SuiteResult result = verify_moments(cfg, options, &rows);
    const fs::path out = prepare_output_dir(cfg);
    const fs::path report = out / "moments_estimates.csv";
    std::ofstream os(report);
    if (!os) throw Error("cannot write " + report.string());
    write_estimate_report_csv(os, rows);
    return write_suite_report(result, cfg);
  }
  if (suite == "bounds") {
    BoundsOptions options;
    options.seed = *cfg.seed;
    if (cfg.t_end) options.t_end = *cfg.t_end;
    return write_suite_report(verify_bounds(cfg, options), cfg);
  }
  throw ConfigError("unknown suite '" + suite +
                    "' (expected identities, oracle, moments, or bounds)");
}

int run_estimate(const CommonFlags& flags, const std::string& pair, double h) {
  const RunConfig cfg = load_with_overrides(flags);
  const SystemSpec spec = build_system(cfg);
  const StateVector init = initial_state(cfg, spec);

  const auto comma = pair.find(',');
  if (comma == std::string::npos) {
    throw ConfigError("--pair expects two transitions as 'A->B,C->D'");
  }
  const int ta = spec.require_transition(pair.substr(0, comma));
  const int tb = spec.require_transition(pair.substr(comma + 1));

  const double lambda = rate_function(spec, init);
  const double step = h > 0.0 ? h : (lambda > 0.0 ? 0.04 / lambda : 1.0);
  const std::uint64_t replicates = cfg.replicates > 1 ? cfg.replicates : 100'000;

  EstimateOptions options;
  options.threads = cfg.threads;
  const MomentEstimate est = estimate_infinitesimal_covariance(
      spec, init, ta, tb, step, replicates, RngStream{*cfg.seed, 0}, options);

  // Closed-form reference: the family covariance if (ta, tb) is a noisy
  // pair, zero otherwise (distinct families never jump together).
  double closed = 0.0;
  for (const CoJumpFamily& f : spec.cojump_families()) {
    if ((f.first == ta && f.second == tb) || (f.first == tb && f.second == ta)) {
      closed = cojump_covariance_closed_form(
          static_cast<int>(init[static_cast<std::size_t>(f.source_first)]),
          static_cast<int>(init[static_cast<std::size_t>(f.source_second)]),
          f.per_capita_rate(init), f.noise);
    }
  }
  const double z = z_score(est.value, est.std_error, closed);

  const fs::path out = prepare_output_dir(cfg);
  const fs::path report = out / "estimate.csv";
  std::ofstream os(report);
  if (!os) throw Error("cannot write " + report.string());
  write_estimate_report_csv(
      os, {{cfg.model_name(), state_hash(init), pair, est.h, est.replicates, est.value,
            est.std_error, closed, z}});

  std::printf("pair %s at h=%g over %llu replicates:\n", pair.c_str(), est.h,
              static_cast<unsigned long long>(est.replicates));
  std::printf("  estimate    %.10g\n  std_error   %.10g\n  closed_form %.10g\n"
              "  z_score     %.4g\n",
              est.value, est.std_error, closed, z);
  std::printf("wrote %s\n", report.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulation and verification of Markov counting systems "
               "with correlated-noise co-jumps"};
  // --h is a real option (estimation window), so help lives on --help only.
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  CommonFlags flags;
  std::string suite;
  std::string pair;
  double h = 0.0;

  const auto add_common = [&flags](CLI::App* cmd, bool needs_config = true) {
    cmd->set_help_flag("--help", "print help");
    auto* config_option =
        cmd->add_option("--config", flags.config_path, "run configuration file");
    if (needs_config) config_option->required();
    cmd->add_option("--seed", flags.seed, "override the RNG seed");
    cmd->add_option("--t-end", flags.t_end, "override the simulation horizon");
    cmd->add_option("--replicates", flags.replicates, "override the replicate count");
    cmd->add_option("--out", flags.out_dir, "override the output directory");
  };

  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "simulate seeded trajectories and write CSV/JSON");
  add_common(simulate_cmd);

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run a verification suite and write a report");
  add_common(verify_cmd);
  verify_cmd->add_option("--suite", suite, "identities | oracle | moments | bounds")
      ->required();

  CLI::App* estimate_cmd = app.add_subcommand(
      "estimate", "Monte Carlo infinitesimal covariance of a transition pair");
  add_common(estimate_cmd);
  estimate_cmd->add_option("--pair", pair, "transition pair 'A->B,C->D'")->required();
  estimate_cmd->add_option("--h", h, "window length (default: 0.04 / rate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (simulate_cmd->parsed()) return run_simulate(flags);
    if (verify_cmd->parsed()) return run_verify(flags, suite);
    if (estimate_cmd->parsed()) return run_estimate(flags, pair, h);
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}
