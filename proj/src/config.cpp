#include "aoicache/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "aoicache/errors.hpp"

namespace aoicache {
namespace {

using nlohmann::json;

// Reads the keys of one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* find(std::string_view key) {
    const auto it = object_.find(std::string(key));
    if (it == object_.end()) return nullptr;
    seen_.insert(std::string(key));
    return &*it;
  }

  void number(std::string_view key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(std::string_view key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        if (v->get<std::int64_t>() < 0) throw ConfigError(field(key), "must be >= 0");
      }
      out = static_cast<Int>(v->get<std::int64_t>());
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(std::string_view key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void number_list(std::string_view key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  void size_list(std::string_view key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected an array of integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
          throw ConfigError(field(key), "expected an array of non-negative integers");
        }
        out.push_back(static_cast<std::size_t>(e.get<std::int64_t>()));
      }
    }
  }

  // A quantity given either linearly under `linear_key` or in decibels under
  // `db_key`; at most one may be present.
  void either(std::string_view linear_key, std::string_view db_key, double& out,
              double (*from_db)(double)) {
    const bool has_linear = object_.contains(std::string(linear_key));
    const bool has_db = object_.contains(std::string(db_key));
    if (has_linear && has_db) {
      throw ConfigError(field(linear_key), "give either " + std::string(linear_key) +
                                               " or " + std::string(db_key) + ", not both");
    }
    if (has_linear) number(linear_key, out);
    if (has_db) {
      double db = 0.0;
      number(db_key, db);
      out = from_db(db);
    }
  }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

double snr_from_db(double db) { return db_to_linear(db); }
double psd_from_dbm(double dbm) { return dbm_to_watts(dbm); }
double power_from_dbm(double dbm) { return dbm_to_watts(dbm); }

void read_env(ObjectReader& r, EnvConfig& env) {
  r.integer("num_sensors", env.num_sensors);
  r.integer("t_max", env.t_max);
  r.number("eta", env.eta);
  r.integer("num_users", env.num_users);
  r.boolean("random_users", env.random_users);
  r.number_list("skew_set", env.skew_set);
  r.number("p_shuffle", env.p_shuffle);
  r.number("p_skew", env.p_skew);
  if (const json* v = r.find("initial_ranks")) {
    if (!v->is_array()) throw ConfigError(r.field("initial_ranks"), "expected an array of ranks");
    env.initial_ranks.clear();
    for (const auto& e : *v) {
      if (!e.is_number_integer()) throw ConfigError(r.field("initial_ranks"), "expected integers");
      env.initial_ranks.push_back(e.get<int>());
    }
  }
  r.finish();
}

void read_radio(ObjectReader& r, RadioConfig& radio) {
  r.number("bandwidth_hz", radio.bandwidth_hz);
  r.either("noise_psd_w_per_hz", "noise_psd_dbm_per_hz", radio.noise_psd_w_per_hz, psd_from_dbm);
  r.either("snr_threshold", "snr_threshold_db", radio.snr_threshold, snr_from_db);
  r.finish();
}

void read_scenario(ObjectReader& r, ScenarioConfig& s) {
  r.number("radius_m", s.radius_m);
  r.number("min_distance_m", s.min_distance_m);
  r.number("content_mb_min", s.content_mb_min);
  r.number("content_mb_max", s.content_mb_max);
  r.either("tx_power_w", "tx_power_dbm", s.tx_power_w, power_from_dbm);
  if (const json* pl = r.find("path_loss")) {
    ObjectReader p(*pl, r.field("path_loss"));
    p.number("intercept_db", s.path_loss.intercept_db);
    p.number("slope_db", s.path_loss.slope_db);
    p.number("antenna_gain_db", s.path_loss.antenna_gain_db);
    p.finish();
  }
  if (const json* sensors = r.find("sensors")) {
    if (!sensors->is_array()) throw ConfigError(r.field("sensors"), "expected an array");
    s.sensors.clear();
    for (std::size_t i = 0; i < sensors->size(); ++i) {
      ObjectReader o((*sensors)[i], r.field("sensors[" + std::to_string(i) + "]"));
      SensorOverride ov;
      auto opt = [&](std::string_view key, std::optional<double>& out) {
        double v = 0.0;
        if (o.find(key)) {
          o.number(key, v);
          out = v;
        }
      };
      opt("distance_m", ov.distance_m);
      opt("content_mb", ov.content_mb);
      double power = std::numeric_limits<double>::quiet_NaN();
      o.either("tx_power_w", "tx_power_dbm", power, power_from_dbm);
      if (!std::isnan(power)) ov.tx_power_w = power;
      o.finish();
      s.sensors.push_back(ov);
    }
  }
  r.finish();
}

void read_agent(ObjectReader& r, AgentConfig& a) {
  r.number("gamma", a.gamma);
  r.number("learning_rate", a.learning_rate);
  r.number("epsilon_start", a.epsilon_start);
  r.number("epsilon_decay", a.epsilon_decay);
  r.number("epsilon_min", a.epsilon_min);
  r.integer("batch_size", a.batch_size);
  r.integer("target_sync", a.target_sync);
  r.integer("buffer_capacity", a.buffer_capacity);
  r.size_list("hidden", a.hidden);
  std::string optimizer = a.optimizer == OptimizerKind::kAdam ? "adam" : "sgd";
  r.string("optimizer", optimizer);
  if (optimizer == "sgd") {
    a.optimizer = OptimizerKind::kSgd;
  } else if (optimizer == "adam") {
    a.optimizer = OptimizerKind::kAdam;
  } else {
    throw ConfigError(r.field("optimizer"), "expected \"sgd\" or \"adam\"");
  }
  r.number("grad_clip_norm", a.grad_clip_norm);
  r.finish();
}

void read_run(ObjectReader& r, RunConfig& run) {
  if (const json* v = r.find("policies")) {
    if (!v->is_array()) throw ConfigError(r.field("policies"), "expected an array of policy names");
    run.policies.clear();
    for (const auto& p : *v) {
      if (!p.is_string()) throw ConfigError(r.field("policies"), "expected policy names");
      try {
        run.policies.push_back(parse_policy_kind(p.get<std::string>()));
      } catch (const ConfigError& e) {
        throw ConfigError(r.field("policies"), e.what());
      }
    }
  }
  r.integer("epochs", run.epochs);
  r.integer("replications", run.replications);
  r.number_list("eta_sweep", run.eta_sweep);
  r.integer("window", run.window);
  r.integer("checkpoint_every", run.checkpoint_every);
  r.string("output_dir", run.output_dir);
  r.integer("threads", run.threads);
  r.finish();
}

void read_tiny(ObjectReader& r, TinyConfig& t) {
  r.integer("num_sensors", t.num_sensors);
  r.integer("t_max", t.t_max);
  r.integer("num_users", t.num_users);
  r.number("skew", t.skew);
  r.number("eta", t.eta);
  r.number("gamma", t.gamma);
  r.number_list("energies_j", t.energies_j);
  r.number("tolerance", t.tolerance);
  r.integer("dqn_epochs", t.dqn_epochs);
  r.integer("rollout_horizon", t.rollout_horizon);
  r.integer("rollouts", t.rollouts);
  r.finish();
}

template <typename Fn>
void prefixed(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + "." + e.field(),
                      std::string(e.what()).substr(e.field().size() + 2));
  }
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

}  // namespace

std::string_view to_string(Profile profile) {
  return profile == Profile::kDesk ? "desk" : "paper";
}

Profile parse_profile(std::string_view name) {
  if (name == "paper") return Profile::kPaper;
  if (name == "desk") return Profile::kDesk;
  throw ConfigError("profile", "expected \"paper\" or \"desk\", got \"" + std::string(name) + "\"");
}

std::vector<double> ExperimentConfig::etas() const {
  return run.eta_sweep.empty() ? std::vector<double>{env.eta} : run.eta_sweep;
}

void ExperimentConfig::validate() const {
  prefixed("env", [&] { env.validate(); });
  require(radio.bandwidth_hz > 0.0 && std::isfinite(radio.bandwidth_hz), "radio.bandwidth_hz",
          "bandwidth must be positive");
  require(radio.noise_psd_w_per_hz > 0.0 && std::isfinite(radio.noise_psd_w_per_hz),
          "radio.noise_psd_w_per_hz", "noise PSD must be positive");
  require(radio.snr_threshold > 0.0 && std::isfinite(radio.snr_threshold), "radio.snr_threshold",
          "SNR threshold must be positive");
  require(scenario.radius_m > 0.0, "scenario.radius_m", "must be positive");
  require(scenario.min_distance_m > 0.0 && scenario.min_distance_m <= scenario.radius_m,
          "scenario.min_distance_m", "must lie in (0, radius_m]");
  require(scenario.content_mb_min > 0.0 && scenario.content_mb_min <= scenario.content_mb_max,
          "scenario.content_mb_min", "need 0 < content_mb_min <= content_mb_max");
  require(scenario.tx_power_w > 0.0, "scenario.tx_power_w", "must be positive");
  require(scenario.sensors.size() <= static_cast<std::size_t>(env.num_sensors), "scenario.sensors",
          "more overrides than sensors");
  for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
    const auto& s = scenario.sensors[i];
    const std::string f = "scenario.sensors[" + std::to_string(i) + "]";
    require(!s.distance_m || *s.distance_m > 0.0, f + ".distance_m", "must be positive");
    require(!s.content_mb || *s.content_mb > 0.0, f + ".content_mb", "must be positive");
    require(!s.tx_power_w || *s.tx_power_w > 0.0, f + ".tx_power_w", "must be positive");
  }
  prefixed("agent", [&] { agent.validate(); });
  require(!run.policies.empty(), "run.policies", "must name at least one policy");
  for (auto p : run.policies) {
    require(p != PolicyKind::kOracleVi, "run.policies", "vi is only available through solve-tiny");
  }
  require(run.epochs >= 1, "run.epochs", "must be >= 1");
  require(run.replications >= 1, "run.replications", "must be >= 1");
  require(run.window >= 1, "run.window", "must be >= 1");
  require(run.checkpoint_every >= 0, "run.checkpoint_every", "must be >= 0");
  for (double e : run.eta_sweep) {
    require(e >= 0.0 && std::isfinite(e), "run.eta_sweep", "values must be finite and >= 0");
  }
  require(tiny.energies_j.size() == static_cast<std::size_t>(tiny.num_sensors), "tiny.energies_j",
          "need one energy per tiny sensor");
  for (double e : tiny.energies_j) require(e >= 0.0, "tiny.energies_j", "must be >= 0");
  require(tiny.tolerance > 0.0, "tiny.tolerance", "must be positive");
  require(tiny.gamma >= 0.0 && tiny.gamma < 1.0, "tiny.gamma", "must lie in [0, 1)");
  require(tiny.rollouts >= 1 && tiny.rollout_horizon >= 1, "tiny.rollouts", "must be >= 1");
  require(tiny.dqn_epochs >= 0, "tiny.dqn_epochs", "must be >= 0");
}

ExperimentConfig default_config(Profile profile) {
  ExperimentConfig c;
  c.profile = profile;
  c.radio.bandwidth_hz = 10e6;
  c.radio.noise_psd_w_per_hz = dbm_to_watts(-172.0);
  c.radio.snr_threshold = db_to_linear(3.0);
  c.scenario.tx_power_w = dbm_to_watts(20.0);
  if (profile == Profile::kDesk) {
    c.env.num_sensors = 10;
    c.agent.hidden = {128, 64};
    // Plain SGD diverges on this profile once eta reaches 10.
    c.agent.optimizer = OptimizerKind::kAdam;
    c.run.epochs = 50000;
    c.run.replications = 5;
  }
  return c;
}

ExperimentConfig parse_config(std::string_view text, std::optional<Profile> profile_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << "parse error at line " << line << ", column " << column << ": " << e.what();
    throw ConfigError("", msg.str());
  }

  ObjectReader root(doc, "");
  std::string profile_name;
  root.string("profile", profile_name);
  Profile profile = Profile::kPaper;
  if (!profile_name.empty()) profile = parse_profile(profile_name);
  if (profile_override) profile = *profile_override;

  ExperimentConfig c = default_config(profile);
  root.integer("seed", c.seed);
  if (const json* v = root.find("env")) {
    ObjectReader r(*v, "env");
    read_env(r, c.env);
  }
  if (const json* v = root.find("radio")) {
    ObjectReader r(*v, "radio");
    read_radio(r, c.radio);
  }
  if (const json* v = root.find("scenario")) {
    ObjectReader r(*v, "scenario");
    read_scenario(r, c.scenario);
  }
  if (const json* v = root.find("agent")) {
    ObjectReader r(*v, "agent");
    read_agent(r, c.agent);
  }
  if (const json* v = root.find("run")) {
    ObjectReader r(*v, "run");
    read_run(r, c.run);
  }
  if (const json* v = root.find("tiny")) {
    ObjectReader r(*v, "tiny");
    read_tiny(r, c.tiny);
  }
  root.finish();
  c.env.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<Profile> profile_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), profile_override);
}

json agent_config_to_json(const AgentConfig& a) {
  return json{
      {"gamma", a.gamma},
      {"learning_rate", a.learning_rate},
      {"epsilon_start", a.epsilon_start},
      {"epsilon_decay", a.epsilon_decay},
      {"epsilon_min", a.epsilon_min},
      {"batch_size", a.batch_size},
      {"target_sync", a.target_sync},
      {"buffer_capacity", a.buffer_capacity},
      {"hidden", a.hidden},
      {"optimizer", a.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
      {"grad_clip_norm", a.grad_clip_norm},
  };
}

AgentConfig agent_config_from_json(const json& j) {
  AgentConfig a;
  ObjectReader r(j, "agent");
  read_agent(r, a);
  a.validate();
  return a;
}

json to_json(const ExperimentConfig& c) {
  json sensors = json::array();
  for (const auto& s : c.scenario.sensors) {
    json o = json::object();
    if (s.distance_m) o["distance_m"] = *s.distance_m;
    if (s.content_mb) o["content_mb"] = *s.content_mb;
    if (s.tx_power_w) o["tx_power_w"] = *s.tx_power_w;
    sensors.push_back(o);
  }
  json policies = json::array();
  for (auto p : c.run.policies) policies.push_back(std::string(to_string(p)));
  return json{
      {"profile", std::string(to_string(c.profile))},
      {"seed", c.seed},
      {"env",
       {{"num_sensors", c.env.num_sensors},
        {"t_max", c.env.t_max},
        {"eta", c.env.eta},
        {"num_users", c.env.num_users},
        {"random_users", c.env.random_users},
        {"skew_set", c.env.skew_set},
        {"p_shuffle", c.env.p_shuffle},
        {"p_skew", c.env.p_skew},
        {"initial_ranks", c.env.initial_ranks}}},
      {"radio",
       {{"bandwidth_hz", c.radio.bandwidth_hz},
        {"noise_psd_w_per_hz", c.radio.noise_psd_w_per_hz},
        {"snr_threshold", c.radio.snr_threshold}}},
      {"scenario",
       {{"radius_m", c.scenario.radius_m},
        {"min_distance_m", c.scenario.min_distance_m},
        {"content_mb_min", c.scenario.content_mb_min},
        {"content_mb_max", c.scenario.content_mb_max},
        {"tx_power_w", c.scenario.tx_power_w},
        {"path_loss",
         {{"intercept_db", c.scenario.path_loss.intercept_db},
          {"slope_db", c.scenario.path_loss.slope_db},
          {"antenna_gain_db", c.scenario.path_loss.antenna_gain_db}}},
        {"sensors", sensors}}},
      {"agent", agent_config_to_json(c.agent)},
      {"run",
       {{"policies", policies},
        {"epochs", c.run.epochs},
        {"replications", c.run.replications},
        {"eta_sweep", c.run.eta_sweep},
        {"window", c.run.window},
        {"checkpoint_every", c.run.checkpoint_every},
        {"output_dir", c.run.output_dir},
        {"threads", c.run.threads}}},
      {"tiny",
       {{"num_sensors", c.tiny.num_sensors},
        {"t_max", c.tiny.t_max},
        {"num_users", c.tiny.num_users},
        {"skew", c.tiny.skew},
        {"eta", c.tiny.eta},
        {"gamma", c.tiny.gamma},
        {"energies_j", c.tiny.energies_j},
        {"tolerance", c.tiny.tolerance},
        {"dqn_epochs", c.tiny.dqn_epochs},
        {"rollout_horizon", c.tiny.rollout_horizon},
        {"rollouts", c.tiny.rollouts}}},
  };
}

}  // namespace aoicache
