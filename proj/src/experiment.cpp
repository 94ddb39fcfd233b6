#include "aoicache/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "aoicache/csv.hpp"
#include "aoicache/errors.hpp"

namespace aoicache {
namespace fs = std::filesystem;

namespace {

// Agent and environment indices reserved for the tiny instance so they never
// collide with replication ids of the main experiment.
constexpr std::uint64_t kTinyTrainingIndex = 1'000'000;
constexpr std::uint64_t kTinyRolloutPolicyOffset = 2'000'000;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_ma_csv(const fs::path& path, const PolicyEvaluation& eval) {
  auto out = open_output(path);
  out << "rep,epoch,reward_ma\n";
  for (const auto& rep : eval.replications) {
    // Entry k averages epochs k .. k + window - 1; label it by its last epoch.
    for (std::size_t k = 0; k < rep.moving_average.size(); ++k) {
      out << rep.rep << ',' << (k + eval.window - 1) << ','
          << format_double(rep.moving_average[k]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string eta_label(double eta) {
  std::ostringstream s;
  s << eta;
  return s.str();
}

std::string raw_csv_name(PolicyKind policy, double eta, int rep) {
  return std::string(to_string(policy)) + "_eta" + eta_label(eta) + "_rep" +
         std::to_string(rep) + ".csv";
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& config, PolicyKind kind,
                                    const CacheEnv& env, int rep) {
  switch (kind) {
    case PolicyKind::kDqn: {
      const StateEncoder encoder{env.config().t_max, env.config().num_users};
      auto agent = std::make_shared<DqnAgent>(config.agent, env.num_sensors(), encoder,
                                              agent_seed_for(config, rep));
      return std::make_unique<DqnPolicy>(std::move(agent));
    }
    case PolicyKind::kMpu: return std::make_unique<MpuPolicy>();
    case PolicyKind::kOu: return std::make_unique<OuPolicy>();
    case PolicyKind::kRu: return std::make_unique<RuPolicy>(policy_seed_for(config, rep));
    case PolicyKind::kOracleVi: break;
  }
  throw ConfigError("run.policies", "vi is only available on the tiny instance (solve-tiny)");
}

std::vector<RunRecord> run_replication(const ExperimentConfig& config,
                                       const Scenario& scenario, PolicyKind kind,
                                       double eta, int rep,
                                       const fs::path& checkpoint_dir) {
  CacheEnv env = make_env(config, scenario, eta, rep);
  auto policy = make_policy(config, kind, env, rep);
  std::function<void(const RunRecord&)> on_epoch;
  auto* dqn = dynamic_cast<DqnPolicy*>(policy.get());
  const std::int64_t every = config.run.checkpoint_every;
  if (dqn != nullptr && every > 0 && !checkpoint_dir.empty()) {
    fs::create_directories(checkpoint_dir);
    on_epoch = [&, dqn](const RunRecord& rec) {
      const std::int64_t done = rec.epoch + 1;
      if (done % every != 0 && done != config.run.epochs) return;
      const fs::path path = checkpoint_dir / ("dqn_eta" + eta_label(eta) + "_rep" +
                                              std::to_string(rep) + "_epoch" +
                                              std::to_string(done) + ".ckpt");
      auto out = open_output(path);
      dqn->agent().save_checkpoint(out);
    };
  }
  return run_policy(env, *policy, config.run.epochs, rep, on_epoch);
}

const CellResult& ExperimentResult::cell(PolicyKind policy, double eta) const {
  for (const auto& c : cells) {
    if (c.policy == policy && c.eta == eta) return c;
  }
  throw ContractViolation("ExperimentResult: no cell for policy " +
                          std::string(to_string(policy)) + " at eta " + eta_label(eta));
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_outputs,
                                bool keep_records) {
  config.validate();
  const std::vector<double> etas = config.etas();
  for (PolicyKind kind : config.run.policies) {
    if (kind == PolicyKind::kOracleVi) {
      throw ConfigError("run.policies", "vi is only available on the tiny instance (solve-tiny)");
    }
  }

  ExperimentResult result;
  result.scenario = build_scenario(config);
  result.output_dir = config.run.output_dir;
  const fs::path root = result.output_dir;
  fs::path checkpoints;
  if (write_outputs) {
    fs::create_directories(root / "raw");
    fs::create_directories(root / "ma");
    if (config.run.checkpoint_every > 0) checkpoints = root / "checkpoints";
    write_text(root / "scenario.json", result.scenario.metadata.dump(2) + "\n");
  }

  struct Job {
    std::size_t cell;
    int rep;
  };
  std::vector<Job> jobs;
  for (PolicyKind kind : config.run.policies) {
    for (double eta : etas) {
      const std::size_t index = result.cells.size();
      result.cells.push_back({kind, eta, {}});
      for (int rep = 0; rep < config.run.replications; ++rep) jobs.push_back({index, rep});
    }
  }

  const bool truncated = config.run.window > static_cast<std::size_t>(config.run.epochs);
  const std::size_t window =
      truncated ? static_cast<std::size_t>(config.run.epochs) : config.run.window;
  std::vector<ReplicationSummary> summaries(jobs.size());
  parallel_for(jobs.size(), config.run.threads, [&](std::size_t j) {
    const CellResult& cell = result.cells[jobs[j].cell];
    const int rep = jobs[j].rep;
    const bool learns = cell.policy == PolicyKind::kDqn;
    auto records = run_replication(config, result.scenario, cell.policy, cell.eta, rep,
                                   learns ? checkpoints : fs::path{});
    if (write_outputs) {
      write_run_csv(root / "raw" / raw_csv_name(cell.policy, cell.eta, rep), records);
    }
    summaries[j] = summarize_replication(std::move(records), rep, window, keep_records);
  });

  std::size_t j = 0;
  for (auto& cell : result.cells) {
    std::vector<ReplicationSummary> reps;
    for (int r = 0; r < config.run.replications; ++r) reps.push_back(std::move(summaries[j++]));
    cell.evaluation = aggregate_replications(std::move(reps), window, truncated);
    if (write_outputs) {
      write_ma_csv(root / "ma" /
                       (std::string(to_string(cell.policy)) + "_eta" + eta_label(cell.eta) + ".csv"),
                   cell.evaluation);
    }
  }
  if (write_outputs) write_summary_csv(root / "summary.csv", config, result.cells);
  return result;
}

void write_summary_csv(const fs::path& path, const ExperimentConfig& config,
                       const std::vector<CellResult>& cells) {
  auto out = open_output(path);
  out << kSummaryCsvHeader << '\n';
  for (const auto& c : cells) {
    const PolicyEvaluation& e = c.evaluation;
    out << to_string(c.policy) << ',' << format_double(c.eta) << ','
        << e.replications.size() << ',' << config.run.epochs << ',' << e.window << ','
        << (e.window_truncated ? 1 : 0);
    for (const MeanInterval* m : {&e.reward, &e.cost, &e.aoi, &e.energy_j}) {
      out << ',' << format_double(m->mean) << ',' << format_double(m->half_width);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

EnergyValidationReport validate_energy_model(const ExperimentConfig& config,
                                             std::size_t samples, double tolerance) {
  config.validate();
  const Scenario scenario = build_scenario(config);
  EnergyValidationReport report;
  report.tolerance = tolerance;
  bool all_finite = true;
  for (std::size_t f = 0; f < scenario.sensors.size(); ++f) {
    const SensorProfile& s = scenario.sensors[f];
    EnergyValidationRow row;
    row.sensor = static_cast<int>(f) + 1;
    row.distance_m = s.distance_m;
    row.content_bits = s.content_bits;
    row.mean_snr = mean_snr(s, scenario.radio);
    row.outage_probability = outage_probability(row.mean_snr, scenario.radio.snr_threshold);
    row.energy_corrected_j = avg_energy_corrected(s, scenario.radio);
    row.energy_literal_j = avg_energy_paper_literal(s, scenario.radio);
    row.literal_over_corrected = row.energy_literal_j / row.energy_corrected_j;
    Rng rng = make_rng(config.seed, SeedStream::kOracle, f);
    const MonteCarloEnergy mc = mc_energy_oracle(s, scenario.radio, samples, rng);
    row.energy_mc_j = mc.energy_j;
    row.mc_std_error_j = mc.std_error_j;
    row.mc_infinite = mc.all_outage();
    if (row.mc_infinite) {
      row.relative_deviation = std::numeric_limits<double>::infinity();
      all_finite = false;
    } else {
      row.relative_deviation = std::abs(row.energy_corrected_j - mc.energy_j) / mc.energy_j;
    }
    report.max_relative_deviation = std::max(report.max_relative_deviation, row.relative_deviation);
    report.rows.push_back(row);
  }
  report.passed = all_finite && report.max_relative_deviation <= tolerance;
  return report;
}

void write_energy_report(const fs::path& path, const EnergyValidationReport& report) {
  auto out = open_output(path);
  out << "sensor,distance_m,content_bits,mean_snr,outage_probability,energy_corrected_j,"
         "energy_literal_j,literal_over_corrected,energy_mc_j,mc_std_error_j,"
         "relative_deviation,mc_infinite\n";
  for (const auto& r : report.rows) {
    out << r.sensor << ',' << format_double(r.distance_m) << ','
        << format_double(r.content_bits) << ',' << format_double(r.mean_snr) << ','
        << format_double(r.outage_probability) << ',' << format_double(r.energy_corrected_j)
        << ',' << format_double(r.energy_literal_j) << ','
        << format_double(r.literal_over_corrected) << ',' << format_double(r.energy_mc_j)
        << ',' << format_double(r.mc_std_error_j) << ','
        << format_double(r.relative_deviation) << ',' << (r.mc_infinite ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CacheEnv make_tiny_env(const ExperimentConfig& config, int rep) {
  const TinyConfig& t = config.tiny;
  if (t.energies_j.size() != static_cast<std::size_t>(t.num_sensors)) {
    throw ConfigError("tiny.energies_j", "needs one energy per sensor");
  }
  EnvConfig env;
  env.num_sensors = t.num_sensors;
  env.t_max = t.t_max;
  env.eta = t.eta;
  env.num_users = t.num_users;
  env.random_users = false;
  env.skew_set = {t.skew};
  env.p_shuffle = 0.0;
  env.p_skew = 0.0;
  env.initial_ranks.resize(static_cast<std::size_t>(t.num_sensors));
  std::iota(env.initial_ranks.begin(), env.initial_ranks.end(), 1);
  env.seed = derive_seed(config.seed, static_cast<std::uint64_t>(SeedStream::kOracle),
                         static_cast<std::uint64_t>(rep));
  std::vector<double> energies{0.0};
  energies.insert(energies.end(), t.energies_j.begin(), t.energies_j.end());
  return CacheEnv(env, std::move(energies));
}

TinyMdpSpec tiny_spec(const ExperimentConfig& config) {
  return TinyMdpSpec::from_env(make_tiny_env(config, 0), config.tiny.gamma);
}

std::shared_ptr<DqnAgent> train_tiny_dqn(const ExperimentConfig& config) {
  CacheEnv env = make_tiny_env(config, static_cast<int>(kTinyTrainingIndex));
  AgentConfig agent_config = config.agent;
  agent_config.gamma = config.tiny.gamma;
  const StateEncoder encoder{config.tiny.t_max, config.tiny.num_users};
  auto agent = std::make_shared<DqnAgent>(agent_config, config.tiny.num_sensors, encoder,
                                          agent_seed_for(config, static_cast<int>(kTinyTrainingIndex)));
  run_training(env, *agent, config.tiny.dqn_epochs);
  return agent;
}

TinyReport solve_tiny(const ExperimentConfig& config, bool train_dqn) {
  TinyReport report;
  report.spec = tiny_spec(config);
  report.solution = value_iteration(report.spec, config.tiny.tolerance);

  const TinyMdpSpec& spec = report.spec;
  const auto space = std::make_shared<TinyStateSpace>(spec);
  const std::vector<int> vi_policy = report.solution.policy;
  auto vi_rule = [space, vi_policy](const MdpState& s) { return vi_policy[space->index(s)]; };

  const EnvFactory env_factory = [&config](int rep) { return make_tiny_env(config, rep); };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto score = [&](std::string name, const PolicyFactory& factory, double exact) {
    report.returns.push_back({std::move(name),
                              discounted_rollout_return(env_factory, factory, spec.gamma,
                                                        config.tiny.rollout_horizon,
                                                        config.tiny.rollouts),
                              exact});
  };
  auto exact_of = [&](const std::function<int(const MdpState&)>& rule) {
    return initial_state_value(spec, evaluate_policy_exact(spec, rule, config.tiny.tolerance));
  };

  score("vi", [vi_rule](const CacheEnv&, int) { return std::make_unique<TablePolicy>(vi_rule); },
        report.solution.initial_value);
  score("mpu", [](const CacheEnv&, int) { return std::make_unique<MpuPolicy>(); },
        exact_of(mpu_action));
  score("ou", [](const CacheEnv&, int) { return std::make_unique<OuPolicy>(); }, nan);
  score("ru",
        [&config](const CacheEnv&, int rep) {
          return std::make_unique<RuPolicy>(policy_seed_for(
              config, static_cast<int>(kTinyRolloutPolicyOffset) + rep));
        },
        nan);
  if (train_dqn) {
    std::shared_ptr<DqnAgent> agent = train_tiny_dqn(config);
    score("dqn",
          [agent](const CacheEnv&, int) { return std::make_unique<DqnPolicy>(agent, false); },
          exact_of([agent](const MdpState& s) { return agent->greedy_action(s); }));
  }
  return report;
}

void write_tiny_outputs(const fs::path& dir, const TinyReport& report) {
  fs::create_directories(dir);
  const TinyMdpSpec& spec = report.spec;
  const TinyStateSpace space(spec);
  const int F = spec.num_sensors;
  {
    auto out = open_output(dir / "tiny_values.csv");
    for (int f = 1; f <= F; ++f) out << "aoi_" << f << ',';
    for (int f = 1; f <= F; ++f) out << "req_" << f << ',';
    out << "value,greedy_action";
    for (int a = 0; a <= F; ++a) out << ",q_" << a;
    out << '\n';
    for (std::size_t i = 0; i < space.size(); ++i) {
      const MdpState s = space.state(i);
      for (int v : s.aoi) out << v << ',';
      for (int v : s.requests) out << v << ',';
      out << format_double(report.solution.values[i]) << ',' << report.solution.policy[i];
      for (int a = 0; a <= F; ++a) {
        out << ',' << format_double(report.solution.q_values(static_cast<Eigen::Index>(i), a));
      }
      out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing tiny_values.csv");
  }
  {
    auto out = open_output(dir / "tiny_policies.csv");
    out << "policy,rollout_mean,rollout_std_error,rollouts,exact_value,optimal_value,"
           "relative_gap\n";
    const double optimum = report.solution.initial_value;
    for (const auto& r : report.returns) {
      out << r.policy << ',' << format_double(r.rollout.mean) << ','
          << format_double(r.rollout.std_error) << ',' << r.rollout.rollouts << ','
          << format_double(r.exact_value) << ',' << format_double(optimum) << ','
          << format_double(std::abs(r.rollout.mean - optimum) / std::abs(optimum)) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing tiny_policies.csv");
  }
}

}  // namespace aoicache
