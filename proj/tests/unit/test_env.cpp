#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "aoicache/env.hpp"
#include "aoicache/errors.hpp"

using namespace aoicache;

namespace {

std::vector<double> flat_energies(int F, double e) {
  std::vector<double> out(static_cast<std::size_t>(F) + 1, e);
  out[0] = 0.0;
  return out;
}

EnvConfig small_config(int F = 3) {
  EnvConfig c;
  c.num_sensors = F;
  c.t_max = 10;
  c.num_users = 20;
  c.seed = 99;
  return c;
}

PopularityState make_popularity(std::vector<int> ranks, double skew, std::uint64_t seed) {
  PopularityState p;
  p.ranks = std::move(ranks);
  p.skew = skew;
  p.rng = Rng(seed);
  return p;
}

bool is_permutation_of_ranks(const std::vector<int>& ranks) {
  std::vector<int> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i) + 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("compute_aoi") {
  CHECK(compute_aoi(10, 7, 100) == 3);
  CHECK(compute_aoi(5, 5, 100) == 1);
  CHECK(compute_aoi(500, 1, 100) == 100);
  // Clamp oracle: unclamped difference, then the two bounds.
  for (std::int64_t t = 0; t < 300; t += 7) {
    for (std::int64_t v = -5; v <= t; v += 3) {
      const std::int64_t raw = t - v;
      const std::int64_t want = std::min<std::int64_t>(std::max<std::int64_t>(raw, 1), 50);
      CHECK(compute_aoi(t, v, 50) == want);
    }
  }
}

TEST_CASE("average_aoi") {
  const std::vector<int> aoi{1, 3};
  CHECK(average_aoi(aoi, std::vector<int>{2, 2}) == 2.0);
  CHECK(average_aoi(std::vector<int>{7, 7, 7}, std::vector<int>{1, 0, 5}) == 7.0);
  CHECK(average_aoi(std::vector<int>{4, 9}, std::vector<int>{0, 0}) == 0.0);
  CHECK(average_aoi(std::vector<int>{2, 10}, std::vector<int>{3, 1}) == doctest::Approx(16.0 / 4.0));
}

TEST_CASE("advance_aoi") {
  const std::vector<int> aoi{3, 5};
  CHECK(advance_aoi(aoi, 1, 100) == std::vector<int>{1, 6});
  CHECK(advance_aoi(aoi, 2, 100) == std::vector<int>{4, 1});
  CHECK(advance_aoi(aoi, 0, 100) == std::vector<int>{4, 6});
  CHECK(advance_aoi(std::vector<int>{100, 100}, 0, 100) == std::vector<int>{100, 100});
  CHECK_THROWS_AS(advance_aoi(aoi, 3, 100), ContractViolation);
  CHECK_THROWS_AS(advance_aoi(aoi, -1, 100), ContractViolation);
}

TEST_CASE("zipf_probabilities") {
  const auto p = zipf_probabilities(std::vector<int>{1, 2, 3}, 1.0);
  CHECK(p[0] == doctest::Approx(6.0 / 11.0).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(3.0 / 11.0).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(2.0 / 11.0).epsilon(1e-15));
  const auto swapped = zipf_probabilities(std::vector<int>{2, 1}, 1.0);
  CHECK(swapped[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(swapped[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  for (double q : zipf_probabilities(std::vector<int>{3, 1, 4, 2}, 0.0)) CHECK(q == 0.25);
}

TEST_CASE("zipf probabilities sum to one for every skew and many permutations") {
  Rng rng(1);
  for (int F : {1, 2, 5, 20, 100}) {
    std::vector<int> ranks(static_cast<std::size_t>(F));
    std::iota(ranks.begin(), ranks.end(), 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::shuffle(ranks.begin(), ranks.end(), rng);
      for (double skew : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const auto p = zipf_probabilities(ranks, skew);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-12);
        // Lower rank numbers are at least as popular.
        for (std::size_t a = 0; a < p.size(); ++a) {
          for (std::size_t b = 0; b < p.size(); ++b) {
            if (ranks[a] < ranks[b]) CHECK(p[a] >= p[b]);
          }
        }
      }
    }
  }
}

TEST_CASE("evolve_popularity with a frozen kernel changes nothing") {
  EnvConfig c = small_config(4);
  c.p_shuffle = 0.0;
  c.p_skew = 0.0;
  PopularityState p = make_popularity({2, 4, 1, 3}, 1.5, 5);
  for (int i = 0; i < 1000; ++i) p = evolve_popularity(std::move(p), c);
  CHECK(p.ranks == std::vector<int>{2, 4, 1, 3});
  CHECK(p.skew == 1.5);
}

TEST_CASE("evolve_popularity with certain shuffle and two items swaps") {
  EnvConfig c = small_config(2);
  c.p_shuffle = 1.0;
  c.p_skew = 0.0;
  PopularityState p = make_popularity({1, 2}, 1.0, 5);
  p = evolve_popularity(std::move(p), c);
  CHECK(p.ranks == std::vector<int>{2, 1});
  p = evolve_popularity(std::move(p), c);
  CHECK(p.ranks == std::vector<int>{1, 2});
}

TEST_CASE("evolve_popularity swap and skew frequencies") {
  EnvConfig c = small_config(6);
  c.p_shuffle = 0.1;
  c.p_skew = 0.05;
  c.skew_set = {0.5, 1.0, 1.5, 2.0};
  PopularityState p = make_popularity({1, 2, 3, 4, 5, 6}, 0.5, 17);
  const int n = 100'000;
  int swaps = 0;
  int skew_changes = 0;
  std::vector<int> skew_hits(4, 0);
  std::vector<int> moved(6, 0);
  for (int i = 0; i < n; ++i) {
    const std::vector<int> before = p.ranks;
    const double skew_before = p.skew;
    p = evolve_popularity(std::move(p), c);
    REQUIRE(is_permutation_of_ranks(p.ranks));
    int differing = 0;
    for (std::size_t f = 0; f < 6; ++f) {
      if (p.ranks[f] != before[f]) {
        ++differing;
        ++moved[f];
      }
    }
    CHECK((differing == 0 || differing == 2));
    if (differing == 2) ++swaps;
    if (p.skew != skew_before) ++skew_changes;
    for (std::size_t k = 0; k < 4; ++k) {
      if (p.skew == c.skew_set[k]) ++skew_hits[k];
    }
  }
  CHECK(std::abs(static_cast<double>(swaps) / n - 0.1) <= 0.005);
  // A redraw lands on the current value a quarter of the time.
  CHECK(std::abs(static_cast<double>(skew_changes) / n - 0.05 * 0.75) <= 0.003);
  for (int hits : skew_hits) CHECK(std::abs(hits / static_cast<double>(n) - 0.25) < 0.03);
  // Each item takes part in 2/F of the swaps.
  for (int m : moved) CHECK(std::abs(m / static_cast<double>(swaps) - 2.0 / 6.0) < 0.02);
}

TEST_CASE("sample_requests") {
  Rng rng(3);
  const PopularityState one = make_popularity({1}, 1.0, 0);
  auto b = sample_requests(one, 100, rng);
  CHECK(b.counts == std::vector<int>{100});
  CHECK(b.total == 100);

  const PopularityState three = make_popularity({1, 2, 3}, 1.0, 0);
  b = sample_requests(three, 0, rng);
  CHECK(b.counts == std::vector<int>{0, 0, 0});
  CHECK(b.total == 0);

  b = sample_requests(three, 1'000'000, rng);
  CHECK(b.total == 1'000'000);
  CHECK(std::accumulate(b.counts.begin(), b.counts.end(), 0) == b.total);
  const double want[3] = {6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0};
  for (int f = 0; f < 3; ++f) CHECK(std::abs(b.counts[static_cast<std::size_t>(f)] / 1e6 - want[f]) < 0.002);
}

TEST_CASE("config validation names the field") {
  auto expect_field = [](EnvConfig c, const std::string& field) {
    try {
      c.validate();
      FAIL("expected ConfigError for " << field);
    } catch (const ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  EnvConfig c = small_config();
  c.num_sensors = 0;
  expect_field(c, "num_sensors");
  c = small_config();
  c.t_max = 0;
  expect_field(c, "t_max");
  c = small_config();
  c.eta = -1.0;
  expect_field(c, "eta");
  c = small_config();
  c.num_users = -1;
  expect_field(c, "num_users");
  c = small_config();
  c.skew_set = {};
  expect_field(c, "skew_set");
  c = small_config();
  c.skew_set = {1.0, -0.5};
  expect_field(c, "skew_set");
  c = small_config();
  c.p_shuffle = 1.5;
  expect_field(c, "p_shuffle");
  c = small_config();
  c.p_skew = -0.1;
  expect_field(c, "p_skew");
  c = small_config();
  c.initial_ranks = {1, 1, 2};
  expect_field(c, "initial_ranks");
  c = small_config();
  c.initial_ranks = {3, 1, 2};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("environment start state") {
  const EnvConfig c = small_config(4);
  CacheEnv env(c, flat_energies(4, 0.5));
  CHECK(env.epoch() == 0);
  CHECK(env.num_actions() == 5);
  CHECK(env.state().aoi == std::vector<int>(4, 1));
  CHECK(env.state().requests.size() == 4);
  CHECK(std::accumulate(env.state().requests.begin(), env.state().requests.end(), 0) == c.num_users);
  CHECK(is_permutation_of_ranks(env.popularity().ranks));
  CHECK(std::find(c.skew_set.begin(), c.skew_set.end(), env.popularity().skew) != c.skew_set.end());

  EnvConfig fixed = c;
  fixed.initial_ranks = {4, 3, 2, 1};
  fixed.p_shuffle = 0.0;
  CacheEnv ordered(fixed, flat_energies(4, 0.5));
  CHECK(ordered.popularity().ranks == std::vector<int>{4, 3, 2, 1});
}

TEST_CASE("environment rejects malformed energy tables and actions") {
  const EnvConfig c = small_config(3);
  CHECK_THROWS_AS(CacheEnv(c, std::vector<double>{0.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(CacheEnv(c, std::vector<double>{0.1, 1.0, 1.0, 1.0}), ContractViolation);
  CHECK_THROWS_AS(CacheEnv(c, std::vector<double>{0.0, -1.0, 1.0, 1.0}), ContractViolation);
  CacheEnv env(c, flat_energies(3, 1.0));
  CHECK_THROWS_AS(env.step(4), ContractViolation);
  CHECK_THROWS_AS(env.step(-1), ContractViolation);
}

TEST_CASE("step cost examples") {
  // Idling from the all-fresh start leaves every AoI at 2, so the average is 2.
  EnvConfig c = small_config(2);
  c.eta = 1.0;
  c.num_users = 4;
  const std::vector<double> energies{0.0, 0.5, 0.5};
  CacheEnv env(c, energies);

  const std::vector<int> after_idle = advance_aoi(env.state().aoi, 0, c.t_max);
  CHECK(after_idle == std::vector<int>{2, 2});
  const StepOutcome idle = env.step(0);
  CHECK(idle.aoi_term == 2.0);
  CHECK(idle.energy_term == 0.0);
  CHECK(idle.cost == 2.0);
  CHECK(idle.reward == -2.0);

  // State is now (3, 3) after the next idle; updating item 1 gives (1, 4).
  CacheEnv env2(c, energies);
  env2.step(0);
  const RequestBatch upcoming = env2.peek_next_requests();
  const StepOutcome upd = env2.step(1);
  const double aoi_term = (1.0 * upcoming.counts[0] + 3.0 * upcoming.counts[1]) / upcoming.total;
  CHECK(upd.aoi_term == doctest::Approx(aoi_term));
  CHECK(upd.cost == doctest::Approx(aoi_term + 0.5));
  CHECK(upd.energy_term == 0.5);
}

TEST_CASE("cost with eta = 0 is the AoI term for every action") {
  EnvConfig c = small_config(3);
  c.eta = 0.0;
  CacheEnv env(c, std::vector<double>{0.0, 1.0, 2.0, 3.0});
  Rng rng(8);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int i = 0; i < 200; ++i) {
    const StepOutcome out = env.step(pick(rng));
    CHECK(out.cost == out.aoi_term);
  }
}

TEST_CASE("step implements the documented transition") {
  EnvConfig c = small_config(5);
  c.t_max = 6;
  c.num_users = 7;
  c.random_users = true;
  const std::vector<double> energies{0.0, 0.3, 0.1, 0.7, 0.2, 0.9};
  CacheEnv env(c, energies);
  Rng rng(21);
  std::uniform_int_distribution<int> pick(0, 5);
  for (int i = 0; i < 3000; ++i) {
    const MdpState before = env.state();
    const RequestBatch peeked = env.peek_next_requests();
    CHECK(env.peek_next_requests().counts == peeked.counts);  // idempotent
    const int a = pick(rng);
    const StepOutcome out = env.step(a);

    CHECK(out.next_state.requests == peeked.counts);
    CHECK(out.next_state == env.state());
    CHECK(peeked.total <= c.num_users);
    CHECK(std::accumulate(peeked.counts.begin(), peeked.counts.end(), 0) == peeked.total);
    for (int f = 0; f < 5; ++f) {
      const int o = out.next_state.aoi[static_cast<std::size_t>(f)];
      CHECK(o >= 1);
      CHECK(o <= c.t_max);
      if (f + 1 == a) {
        CHECK(o == 1);
      } else {
        CHECK(o == std::min(before.aoi[static_cast<std::size_t>(f)] + 1, c.t_max));
      }
    }
    CHECK(out.reward + out.cost == 0.0);
    CHECK(out.cost == out.aoi_term + c.eta * out.energy_term);
    CHECK(out.energy_term == energies[static_cast<std::size_t>(a)]);
    CHECK(out.aoi_term == average_aoi(out.next_state.aoi, peeked.counts));

    // Generation epochs stay consistent with the AoI counters.
    const CacheState& cache = env.cache();
    CHECK(cache.epoch == i + 1);
    for (int f = 0; f < 5; ++f) {
      CHECK(cache.aoi[static_cast<std::size_t>(f)] ==
            compute_aoi(cache.epoch, cache.generation_epoch[static_cast<std::size_t>(f)], c.t_max));
    }
  }
}

TEST_CASE("one-step improvement from updating the only requested item") {
  // eta = 0 and requests concentrated on one item: updating it strictly
  // beats idling whenever its AoI exceeds 1.
  EnvConfig c = small_config(3);
  c.eta = 0.0;
  c.num_users = 5;
  c.skew_set = {40.0};  // rank-1 item takes essentially all requests
  c.p_shuffle = 0.0;
  c.p_skew = 0.0;
  c.initial_ranks = {2, 1, 3};
  CacheEnv env(c, flat_energies(3, 1.0));
  env.step(0);
  env.step(0);
  const RequestBatch& next = env.peek_next_requests();
  REQUIRE(next.counts == std::vector<int>{0, 5, 0});
  const auto& aoi = env.state().aoi;
  REQUIRE(aoi[1] > 1);
  CHECK(env.cost_of(advance_aoi(aoi, 2, c.t_max), next, 2) <
        env.cost_of(advance_aoi(aoi, 0, c.t_max), next, 0));
}

TEST_CASE("successive peeks see fresh batches") {
  EnvConfig c = small_config(4);
  c.num_users = 10;
  CacheEnv env(c, flat_energies(4, 0.2));
  int repeats = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const auto before = env.peek_next_requests().counts;
    env.step(0);
    if (env.peek_next_requests().counts == before) ++repeats;
  }
  // Identical consecutive 10-user batches over 4 items are rare.
  CHECK(repeats < n / 10);
}

TEST_CASE("environments are deterministic and independent of the actions") {
  const EnvConfig c = small_config(4);
  CacheEnv a(c, flat_energies(4, 0.5));
  CacheEnv b(c, flat_energies(4, 0.5));
  CacheEnv other_actions(c, flat_energies(4, 0.5));
  Rng rng(4);
  std::uniform_int_distribution<int> pick(0, 4);
  for (int i = 0; i < 500; ++i) {
    const int action = pick(rng);
    const StepOutcome x = a.step(action);
    const StepOutcome y = b.step(action);
    const StepOutcome z = other_actions.step((action + 1) % 5);
    CHECK(x.next_state == y.next_state);
    CHECK(x.cost == y.cost);
    CHECK(x.next_state.requests == z.next_state.requests);
    CHECK(a.popularity().ranks == other_actions.popularity().ranks);
  }
  EnvConfig reseeded = c;
  reseeded.seed = c.seed + 1;
  CacheEnv d(reseeded, flat_energies(4, 0.5));
  CacheEnv e(c, flat_energies(4, 0.5));
  bool differs = false;
  for (int i = 0; i < 50 && !differs; ++i) differs = d.step(0).next_state != e.step(0).next_state;
  CHECK(differs);
}
