// Command-line front end: run experiments, validate the energy model and
// solve the tiny instance exactly.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoicache/config.hpp"
#include "aoicache/errors.hpp"
#include "aoicache/experiment.hpp"
#include "aoicache/version.hpp"

namespace {

using namespace aoicache;

struct CommonOptions {
  std::string config_path;
  std::string profile;
};

ExperimentConfig resolve_config(const CommonOptions& opts) {
  std::optional<Profile> profile;
  if (!opts.profile.empty()) profile = parse_profile(opts.profile);
  if (opts.config_path.empty()) return default_config(profile.value_or(Profile::kPaper));
  return load_config(opts.config_path, profile);
}

int run_command(const CommonOptions& common, const std::vector<std::string>& policies,
                const std::vector<double>& etas, std::optional<std::int64_t> epochs,
                std::optional<int> reps, std::optional<std::uint64_t> seed,
                std::optional<std::size_t> window, std::optional<unsigned> threads,
                const std::string& out_dir) {
  ExperimentConfig config = resolve_config(common);
  if (!policies.empty()) {
    config.run.policies.clear();
    for (const auto& p : policies) config.run.policies.push_back(parse_policy_kind(p));
  }
  if (!etas.empty()) config.run.eta_sweep = etas;
  if (epochs) config.run.epochs = *epochs;
  if (reps) config.run.replications = *reps;
  if (seed) {
    config.seed = *seed;
    config.env.seed = *seed;
  }
  if (window) config.run.window = *window;
  if (threads) config.run.threads = *threads;
  if (!out_dir.empty()) config.run.output_dir = out_dir;
  config.validate();

  std::filesystem::create_directories(config.run.output_dir);
  {
    std::ofstream out(std::filesystem::path(config.run.output_dir) / "config.json");
    out << to_json(config).dump(2) << '\n';
  }
  const auto start = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::printf("%-5s %8s %14s %12s %12s %12s\n", "policy", "eta", "reward", "+/-", "aoi",
              "energy_j");
  for (const auto& c : result.cells) {
    const PolicyEvaluation& e = c.evaluation;
    std::printf("%-5s %8s %14.6f %12.6f %12.6f %12.6f\n", std::string(to_string(c.policy)).c_str(),
                eta_label(c.eta).c_str(), e.reward.mean, e.reward.half_width, e.aoi.mean,
                e.energy_j.mean);
  }
  if (!result.cells.empty() && result.cells.front().evaluation.window_truncated) {
    std::printf("note: window exceeds the run length; full-run means reported\n");
  }
  std::printf("wrote %s (%.1f s)\n", config.run.output_dir.c_str(), seconds);
  return 0;
}

int validate_energy_command(const CommonOptions& common, std::size_t samples,
                            double tolerance, const std::string& report_path) {
  const ExperimentConfig config = resolve_config(common);
  const EnergyValidationReport report = validate_energy_model(config, samples, tolerance);
  std::printf("%6s %10s %12s %12s %14s %14s %14s %10s\n", "sensor", "dist_m", "mean_snr",
              "outage", "corrected_j", "literal_j", "mc_j", "rel_dev");
  for (const auto& r : report.rows) {
    std::printf("%6d %10.3f %12.5g %12.5g %14.8g %14.8g %14.8g %10.3e%s\n", r.sensor,
                r.distance_m, r.mean_snr, r.outage_probability, r.energy_corrected_j,
                r.energy_literal_j, r.energy_mc_j, r.relative_deviation,
                r.mc_infinite ? "  (all samples in outage)" : "");
  }
  if (!report_path.empty()) write_energy_report(report_path, report);
  std::printf("max relative deviation %.3e (tolerance %.3g): %s\n",
              report.max_relative_deviation, report.tolerance,
              report.passed ? "PASS" : "FAIL");
  return report.passed ? 0 : 1;
}

int solve_tiny_command(const CommonOptions& common, bool train_dqn,
                       const std::string& out_dir) {
  const ExperimentConfig config = resolve_config(common);
  const TinyReport report = solve_tiny(config, train_dqn);
  std::printf("value iteration: %d sweeps, %zu states, V(S0) = %.10f\n",
              report.solution.iterations, report.solution.values.size(),
              report.solution.initial_value);
  std::printf("%-5s %14s %12s %14s %10s\n", "policy", "rollout", "std_err", "exact", "gap");
  for (const auto& r : report.returns) {
    const double gap = (r.rollout.mean - report.solution.initial_value) /
                       std::abs(report.solution.initial_value);
    std::printf("%-5s %14.6f %12.6f %14.6f %9.2f%%\n", r.policy.c_str(), r.rollout.mean,
                r.rollout.std_error, r.exact_value, 100.0 * gap);
  }
  if (!out_dir.empty()) {
    write_tiny_outputs(out_dir, report);
    std::printf("wrote %s\n", out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AoI-aware cache update simulator and DQN toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--profile", common.profile, "preset: desk or paper");
  };

  auto* run = app.add_subcommand("run", "run policies over an eta sweep and write CSVs");
  add_common(run);
  std::vector<std::string> policies;
  std::vector<double> etas;
  std::optional<std::int64_t> epochs;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> window;
  std::optional<unsigned> threads;
  std::string out_dir;
  run->add_option("--policy", policies, "dqn, mpu, ou, ru (comma separated)")->delimiter(',');
  run->add_option("--eta", etas, "eta values (comma separated)")->delimiter(',');
  run->add_option("--epochs", epochs, "epochs per replication");
  run->add_option("--reps", reps, "replications");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--window", window, "moving-average window");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");
  run->add_option("--out", out_dir, "output directory");

  auto* energy = app.add_subcommand("validate-energy",
                                    "compare closed-form energies with Monte Carlo");
  add_common(energy);
  std::size_t samples = 1'000'000;
  double tolerance = 0.01;
  std::string report_path;
  energy->add_option("--samples", samples, "Monte Carlo samples per sensor");
  energy->add_option("--tolerance", tolerance, "maximum relative deviation");
  energy->add_option("--report", report_path, "write the per-sensor report CSV here");

  auto* tiny = app.add_subcommand("solve-tiny", "value iteration on the tiny instance");
  add_common(tiny);
  bool train_dqn = false;
  std::string tiny_out;
  tiny->add_flag("--train-dqn", train_dqn, "also train and score a DQN agent");
  tiny->add_option("--out", tiny_out, "write tiny_values.csv and tiny_policies.csv here");

  auto* version = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return run_command(common, policies, etas, epochs, reps, seed, window, threads, out_dir);
    }
    if (*energy) return validate_energy_command(common, samples, tolerance, report_path);
    if (*tiny) return solve_tiny_command(common, train_dqn, tiny_out);
    if (*version) {
      std::printf("aoicache %s\n", kVersion);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
