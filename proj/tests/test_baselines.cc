#include <cmath>

#include "doctest.h"
#include "fdhybf/baselines.hpp"
#include "helpers.hpp"

using namespace fdhybf;

TEST_CASE("scheme names") {
  for (SchemeId id : all_schemes()) CHECK(parse_scheme(scheme_name(id)) == id);
  CHECK(scheme_name(SchemeId::DigitalHdIdeal) == "digital-hd-ideal");
  CHECK_THROWS_AS(parse_scheme("digital-xd"), ConfigError);
}

TEST_CASE("digital full duplex: hardware limits") {
  SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 40);
  SolverOptions o;
  o.seed = 41;
  const SolverResult ideal = run_digital_fd(ch, cfg, true, o);
  SystemConfig tiny = cfg;
  tiny.set_bs_ldr_db(-200.0);
  tiny.set_user_ldr_db(-200.0);
  const SolverResult near = run_digital_fd(ch, tiny, false, o);
  const double a = wsr(ch, ideal.state, [&] { SystemConfig c = cfg; c.make_ideal(); return c; }());
  CHECK(a == doctest::Approx(ideal.trace.wsr.back()));
  CHECK(near.trace.wsr.back() == doctest::Approx(ideal.trace.wsr.back()).epsilon(1e-6));

  const SolverResult ldr = run_digital_fd(ch, cfg, false, o);
  CHECK(ideal.trace.wsr.back() >= ldr.trace.wsr.back() * (1.0 - 1e-6));
}

TEST_CASE("half duplex") {
  SystemConfig dl = desk_profile();
  dl.set_users(0, 2, 2, 1);
  dl.lambdak.clear();
  dl.finalize();
  const ChannelSet ch = generate_channels(dl, 50);
  SolverOptions o;
  o.seed = 51;
  const HdResult hd = run_digital_hd(ch, dl, o);
  CHECK(hd.wsr_ul == 0.0);
  CHECK(hd.rate == doctest::Approx(0.5 * hd.wsr_dl));
  CHECK(hd.wsr_dl == doctest::Approx(run_digital_fd(ch, dl, true, o).trace.wsr.back()).epsilon(1e-9));

  // clean hardware by construction
  SystemConfig a = desk_profile(), b = desk_profile();
  a.set_bs_ldr_db(-120.0);
  b.set_bs_ldr_db(0.0);
  const ChannelSet c2 = generate_channels(a, 52);
  CHECK(run_digital_hd(c2, a, o).rate == run_digital_hd(c2, b, o).rate);
}

TEST_CASE("gain table") {
  std::vector<GainRecord> recs;
  for (int r = 0; r < 3; ++r) {
    recs.push_back({"digital-hd-ideal", -60.0, r, 10u + r, 2.0 + r});
    recs.push_back({"digital-fd", -60.0, r, 10u + r, 2.0 * (2.0 + r)});
  }
  const auto rows = gain_table(recs);
  REQUIRE(rows.size() == 2);
  for (const auto& g : rows) {
    if (g.scheme == "digital-hd-ideal") CHECK(g.gain_percent == 0.0);
    if (g.scheme == "digital-fd") CHECK(g.gain_percent == doctest::Approx(100.0));
  }
  auto bad = recs;
  bad.back().seed = 99;
  CHECK_THROWS_AS(gain_table(bad), AlignmentError);
  auto dup = recs;
  dup.push_back(recs.front());
  CHECK_THROWS_AS(gain_table(dup), AlignmentError);
  std::vector<GainRecord> no_hd{{"digital-fd", 0.0, 0, 1, 1.0}};
  CHECK_THROWS_AS(gain_table(no_hd), AlignmentError);
}

TEST_CASE("run_scheme reports feasibility") {
  const SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 60);
  SolverOptions o;
  o.seed = 61;
  for (SchemeId id : all_schemes()) {
    const SchemeRun r = run_scheme(id, ch, cfg, o);
    CHECK(std::isfinite(r.wsr));
    CHECK(r.wsr > 0.0);
    CHECK(r.max_violation <= 1e-9);
    CHECK(r.iterations >= 1);
  }
}
