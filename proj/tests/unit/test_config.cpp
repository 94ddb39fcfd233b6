#include <cmath>
#include <fstream>
#include <string>

#include <doctest.h>

#include "aoicache/config.hpp"
#include "aoicache/errors.hpp"

using namespace aoicache;

namespace {

std::string error_field(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a minimal config takes every default") {
  const auto c = parse_config(R"({"seed": 1})");
  CHECK(c.profile == Profile::kPaper);
  CHECK(c.seed == 1);
  CHECK(c.env.num_sensors == 20);
  CHECK(c.env.t_max == 100);
  CHECK(c.env.num_users == 100);
  CHECK(c.env.eta == 1.0);
  CHECK(c.env.p_shuffle == 0.1);
  CHECK(c.env.p_skew == 0.05);
  CHECK(c.env.skew_set == std::vector<double>{0.5, 1.0, 1.5, 2.0});
  CHECK(c.radio.bandwidth_hz == 10e6);
  CHECK(c.radio.noise_psd_w_per_hz == doctest::Approx(std::pow(10.0, -20.2)).epsilon(1e-12));
  CHECK(c.radio.snr_threshold == doctest::Approx(std::pow(10.0, 0.3)).epsilon(1e-12));
  CHECK(c.scenario.tx_power_w == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(c.scenario.radius_m == 100.0);
  CHECK(c.agent.gamma == 0.99);
  CHECK(c.agent.learning_rate == 1e-3);
  CHECK(c.agent.batch_size == 100);
  CHECK(c.agent.buffer_capacity == 5000);
  CHECK(c.agent.target_sync == 100);
  CHECK(c.agent.epsilon_start == 0.9);
  CHECK(c.agent.epsilon_decay == 0.995);
  CHECK(c.agent.epsilon_min == 0.05);
  CHECK(c.agent.hidden == std::vector<std::size_t>{512, 256, 128});
  CHECK(c.agent.optimizer == OptimizerKind::kSgd);
  CHECK(c.run.epochs == 200000);
  CHECK(c.etas() == std::vector<double>{1.0});
}

TEST_CASE("desk profile") {
  const auto c = parse_config(R"({"profile": "desk"})");
  CHECK(c.profile == Profile::kDesk);
  CHECK(c.env.num_sensors == 10);
  CHECK(c.agent.hidden == std::vector<std::size_t>{128, 64});
  CHECK(c.agent.optimizer == OptimizerKind::kAdam);
  CHECK(c.agent.learning_rate == 1e-3);
  CHECK(c.run.epochs == 50000);
  CHECK(c.run.replications == 5);
  // An explicit override wins over the document.
  CHECK(parse_config(R"({"profile": "desk"})", Profile::kPaper).env.num_sensors == 20);
  CHECK_THROWS_AS(parse_profile("laptop"), ConfigError);
}

TEST_CASE("validation errors name the offending field") {
  CHECK(error_field(R"({"radio": {"bandwidth_hz": -1}})") == "radio.bandwidth_hz");
  CHECK(error_field(R"({"env": {"t_max": 0}})") == "env.t_max");
  CHECK(error_field(R"({"env": {"num_sensors": 0}})") == "env.num_sensors");
  CHECK(error_field(R"({"agent": {"gamma": 1.5}})") == "agent.gamma");
  CHECK(error_field(R"({"run": {"epochs": 0}})") == "run.epochs");
  CHECK(error_field(R"({"run": {"policies": ["vi"]}})") == "run.policies");
  CHECK(error_field(R"({"run": {"policies": ["nope"]}})") == "run.policies");
  CHECK(error_field(R"({"env": {"initial_ranks": [1, 1, 2]}})") == "env.initial_ranks");
  CHECK(error_field(R"({"scenario": {"content_mb_min": 200}})") == "scenario.content_mb_min");
  CHECK(error_field(R"({"agent": {"optimizer": "rmsprop"}})") == "agent.optimizer");
}

TEST_CASE("unknown keys and wrong types are rejected") {
  CHECK(error_field(R"({"seed": 1, "bogus": 2})") == "bogus");
  CHECK(error_field(R"({"env": {"num_sensor": 3}})") == "env.num_sensor");
  CHECK(error_field(R"({"env": {"num_sensors": "ten"}})") == "env.num_sensors");
  CHECK(error_field(R"({"scenario": {"sensors": [{"height": 2}]}})") == "scenario.sensors[0].height");
}

TEST_CASE("parse errors report the position") {
  const std::string msg = error_message("{\n  \"seed\": 1,\n  \"env\": {,}\n}");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(error_field("{\n  \"seed\": 1,\n  \"env\": {,}\n}").empty());
}

TEST_CASE("decibel inputs convert to linear units") {
  const auto c = parse_config(
      R"({"radio": {"noise_psd_dbm_per_hz": -170, "snr_threshold_db": 10},
          "scenario": {"tx_power_dbm": 30}})");
  CHECK(c.radio.noise_psd_w_per_hz == doctest::Approx(1e-20).epsilon(1e-12));
  CHECK(c.radio.snr_threshold == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(c.scenario.tx_power_w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(error_field(R"({"radio": {"snr_threshold": 2, "snr_threshold_db": 3}})") ==
        "radio.snr_threshold");
}

TEST_CASE("canonical JSON round-trips") {
  auto c = parse_config(R"({
    "profile": "desk", "seed": 99,
    "env": {"eta": 5, "initial_ranks": [3, 1, 2, 4, 5, 6, 7, 8, 9, 10]},
    "agent": {"optimizer": "adam", "grad_clip_norm": 2.5, "hidden": [32, 16]},
    "scenario": {"sensors": [{"distance_m": 12.5, "tx_power_dbm": 10}]},
    "run": {"policies": ["dqn", "ou"], "eta_sweep": [0, 1.5], "threads": 2},
    "tiny": {"energies_j": [1, 2], "rollouts": 50}
  })");
  const auto j = to_json(c);
  const auto back = parse_config(j.dump());
  CHECK(to_json(back) == j);
  CHECK(back.seed == 99);
  CHECK(back.env.seed == 99);
  CHECK(back.env.eta == 5.0);
  CHECK(back.env.initial_ranks.front() == 3);
  CHECK(back.agent.optimizer == OptimizerKind::kAdam);
  CHECK(back.agent.grad_clip_norm == 2.5);
  CHECK(back.scenario.sensors.size() == 1);
  CHECK(*back.scenario.sensors[0].distance_m == 12.5);
  CHECK(*back.scenario.sensors[0].tx_power_w == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_FALSE(back.scenario.sensors[0].content_mb.has_value());
  CHECK(back.run.policies == std::vector<PolicyKind>{PolicyKind::kDqn, PolicyKind::kOu});
  CHECK(back.etas() == std::vector<double>{0.0, 1.5});
  CHECK(back.tiny.rollouts == 50);

  // Defaults round-trip too, for both presets.
  for (auto p : {Profile::kPaper, Profile::kDesk}) {
    const auto d = default_config(p);
    CHECK(to_json(parse_config(to_json(d).dump())) == to_json(d));
  }
}

TEST_CASE("agent config JSON") {
  AgentConfig a;
  a.hidden = {7, 5};
  a.learning_rate = 0.25;
  const AgentConfig b = agent_config_from_json(agent_config_to_json(a));
  CHECK(b.hidden == a.hidden);
  CHECK(b.learning_rate == 0.25);
}

TEST_CASE("load_config reads files") {
  const auto path = std::filesystem::temp_directory_path() / "aoicache_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"seed": 4, "env": {"num_sensors": 3}})";
  }
  const auto c = load_config(path);
  CHECK(c.seed == 4);
  CHECK(c.env.num_sensors == 3);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}
