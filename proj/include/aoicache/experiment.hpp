#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aoicache/config.hpp"
#include "aoicache/policies.hpp"
#include "aoicache/scenario.hpp"
#include "aoicache/tiny_mdp.hpp"

namespace aoicache {

inline constexpr std::string_view kSummaryCsvHeader =
    "policy,eta,replications,epochs,window,window_truncated,reward_mean,reward_hw,"
    "cost_mean,cost_hw,aoi_mean,aoi_hw,energy_j_mean,energy_j_hw";

// Raw per-replication file name, e.g. "dqn_eta1_rep0.csv".
std::string raw_csv_name(PolicyKind policy, double eta, int rep);
std::string eta_label(double eta);

// Fresh policy for one replication. DQN agents are seeded per replication.
std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, PolicyKind kind,
                                    const CacheEnv& env, int rep);

// Runs one replication of one (policy, eta) cell. When `checkpoint_dir` is
// non-empty and checkpoint_every > 0, DQN agents are checkpointed there.
std::vector<RunRecord> run_replication(const ExperimentConfig& config,
                                       const Scenario& scenario, PolicyKind kind,
                                       double eta, int rep,
                                       const std::filesystem::path& checkpoint_dir = {});

struct CellResult {
  PolicyKind policy = PolicyKind::kDqn;
  double eta = 0.0;
  PolicyEvaluation evaluation;
};

struct ExperimentResult {
  Scenario scenario;
  std::vector<CellResult> cells;  // policy-major, then eta, in config order
  std::filesystem::path output_dir;

  const CellResult& cell(PolicyKind policy, double eta) const;
};

// Runs every (policy, eta, replication) job. With write_outputs, writes into
// config.run.output_dir:
//   scenario.json, summary.csv, raw/<policy>_eta<eta>_rep<r>.csv,
//   ma/<policy>_eta<eta>.csv, checkpoints/ (DQN, when enabled).
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs = true,
                                bool keep_records = false);

void write_summary_csv(const std::filesystem::path& path, const ExperimentConfig& config,
                       const std::vector<CellResult>& cells);

struct EnergyValidationRow {
  int sensor = 0;
  double distance_m = 0.0;
  double content_bits = 0.0;
  double mean_snr = 0.0;
  double outage_probability = 0.0;
  double energy_corrected_j = 0.0;
  double energy_literal_j = 0.0;
  double literal_over_corrected = 0.0;
  double energy_mc_j = 0.0;
  double mc_std_error_j = 0.0;
  double relative_deviation = 0.0;  // |corrected - mc| / mc
  bool mc_infinite = false;
};

struct EnergyValidationReport {
  std::vector<EnergyValidationRow> rows;
  double max_relative_deviation = 0.0;
  double tolerance = 0.01;
  bool passed = false;
};

EnergyValidationReport validate_energy_model(const ExperimentConfig& config,
                                             std::size_t samples = 1'000'000,
                                             double tolerance = 0.01);
void write_energy_report(const std::filesystem::path& path,
                         const EnergyValidationReport& report);

struct TinyPolicyReturn {
  std::string policy;
  RolloutEstimate rollout;
  double exact_value = 0.0;  // exact policy evaluation (NaN for stochastic policies)
};

struct TinyReport {
  TinyMdpSpec spec;
  ValueIterationResult solution;
  std::vector<TinyPolicyReturn> returns;
};

// Environment for the tiny instance; `rep` selects the request stream.
CacheEnv make_tiny_env(const ExperimentConfig& config, int rep);
TinyMdpSpec tiny_spec(const ExperimentConfig& config);

// Trains a DQN agent on the tiny instance for tiny.dqn_epochs epochs.
std::shared_ptr<DqnAgent> train_tiny_dqn(const ExperimentConfig& config);

// Solves the tiny instance exactly and scores VI-greedy, MPU, OU, RU (and
// DQN when train_dqn) by discounted rollouts.
TinyReport solve_tiny(const ExperimentConfig& config, bool train_dqn);
void write_tiny_outputs(const std::filesystem::path& dir, const TinyReport& report);

}  // namespace aoicache
