#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "fdhybf/experiment.hpp"

using namespace fdhybf;

namespace {

std::string without_runtime(const SweepResult& r) {
  SweepResult c = r;
  for (auto& row : c.rows) row.runtime_s = 0.0;
  std::ostringstream os;
  emit_csv(c, os);
  return os.str();
}

ExperimentConfig tiny_sweep() {
  ExperimentConfig cfg = base_profile("desk");
  apply_config_json(cfg, R"({"sweep": {"values": [-60, -20], "realizations": 2,
                             "schemes": ["hybf-um", "digital-fd", "digital-hd-ideal"]},
                             "solver": {"max_outer_iters": 5}})");
  return cfg;
}

}  // namespace

TEST_CASE("config defaults") {
  ExperimentConfig cfg = base_profile("paper");
  apply_config_json(cfg, "{}");
  const SystemConfig& s = cfg.system;
  CHECK(s.M0 == 100);
  CHECK(s.N0 == 50);
  CHECK(s.Mt == 32);
  CHECK(s.Nr == 32);
  CHECK(s.K == 2);
  CHECK(s.J == 2);
  CHECK(s.Mk == std::vector<int>{5, 5});
  CHECK(s.uk == std::vector<int>{2, 2});
  CHECK(s.snr_db == -10.0);
  CHECK(s.k0 == doctest::Approx(1e-6));
  CHECK(s.beta0 == doctest::Approx(1e-6));
  CHECK(s.alpha0 == doctest::Approx(dbm_to_watts(23.0)));
  CHECK(s.n_ps == 4096);
  CHECK(s.clusters.clusters == 3);
  CHECK(s.si.kappa_db == 50.0);
  CHECK(s.lambda0.size() == 100u);
  CHECK(s.lambda0[0] == doctest::Approx(s.alpha0 / 100.0));
}

TEST_CASE("config overrides and errors") {
  ExperimentConfig cfg = base_profile("paper");
  apply_config_json(cfg, R"({"rf_chains": 32})");
  CHECK(cfg.system.Mt == 32);
  CHECK(cfg.system.Nr == 32);

  ExperimentConfig d = base_profile("desk");
  apply_config_json(d, R"({"ldr_db": -40, "sweep.realizations": 3})");
  CHECK(d.system.k0 == doctest::Approx(1e-4));
  CHECK(d.sweep.realizations == 3);

  ExperimentConfig e = base_profile("desk");
  CHECK_THROWS_AS(apply_config_json(e, R"({"rf_chains": 1, "Mk": [2, 2], "uk": [2, 2]})"),
                  ValidationError);
  ExperimentConfig f = base_profile("desk");
  CHECK_THROWS_WITH_AS(apply_config_json(f, R"({"bogus": 1})"), doctest::Contains("bogus"),
                       ConfigError);
  CHECK_THROWS_AS(apply_config_json(f, "{not json"), ConfigError);
  CHECK_THROWS_AS(apply_config_json(f, R"({"snr_db": "loud"})"), ConfigError);
  CHECK_THROWS_AS(base_profile("huge"), ConfigError);
  CHECK_THROWS_AS(parse_axis("power"), ConfigError);
}

TEST_CASE("schemes share channel seeds") {
  ExperimentConfig cfg = base_profile("desk");
  apply_config_json(cfg, R"({"sweep": {"values": [-60], "realizations": 1,
                             "schemes": ["digital-fd", "digital-hd-ideal"]}})");
  const SweepResult r = run_sweep(cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].seed == r.rows[1].seed);
  CHECK(r.rows[0].scheme != r.rows[1].scheme);
  for (const auto& row : r.rows) {
    CHECK(row.error.empty());
    CHECK(row.wsr_bits == row.wsr_nats / std::numbers::ln2);
  }
}

TEST_CASE("csv round trip") {
  SweepResult r;
  SweepRow a;
  a.scheme = "hybf-am";
  a.axis = "ldr_db";
  a.axis_value = -60.0;
  a.realization = 3;
  a.seed = 18446744073709551557ull;
  a.wsr_nats = 1.0 / 3.0;
  a.wsr_bits = a.wsr_nats / std::numbers::ln2;
  a.iters = 17;
  a.runtime_s = 0.1234567890123;
  a.max_violation = 2.5e-17;
  r.rows.push_back(a);
  std::ostringstream os;
  emit_csv(r, os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);

  std::istringstream is(text);
  const SweepResult back = parse_csv(is);
  REQUIRE(back.rows.size() == 1);
  const SweepRow& b = back.rows[0];
  CHECK(b.scheme == a.scheme);
  CHECK(b.axis == a.axis);
  CHECK(b.seed == a.seed);
  CHECK(b.realization == a.realization);
  CHECK(b.iters == a.iters);
  CHECK(b.wsr_nats == a.wsr_nats);
  CHECK(b.wsr_bits == a.wsr_bits);
  CHECK(b.runtime_s == a.runtime_s);
  CHECK(b.max_violation == a.max_violation);
  CHECK(b.axis_value == a.axis_value);

  std::istringstream bad("scheme\n");
  CHECK_THROWS_AS(parse_csv(bad), InputError);
}

TEST_CASE("sweeps are deterministic across worker counts") {
  ExperimentConfig one = tiny_sweep();
  one.sweep.workers = 1;
  ExperimentConfig three = tiny_sweep();
  three.sweep.workers = 3;
  const SweepResult a = run_sweep(one);
  const SweepResult b = run_sweep(three);
  CHECK(a.rows.size() == 12u);
  CHECK(without_runtime(a) == without_runtime(b));
  // channel seeds depend only on the realization
  for (const auto& row : a.rows) CHECK(row.seed == channel_seed(one.sweep.master_seed, row.realization));
  const auto gains = gain_table(gain_records(a));
  CHECK(gains.size() == 6u);
}
