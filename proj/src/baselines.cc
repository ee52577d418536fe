#include "fdhybf/baselines.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace fdhybf {

namespace {

SystemConfig digital_config(const SystemConfig& cfg, bool ideal) {
  SystemConfig d = cfg;
  d.Mt = d.M0;
  d.Nr = d.N0;
  if (ideal) d.make_ideal();
  d.validate();
  return d;
}

SolverOptions digital_options(SolverOptions opts) {
  opts.update_analog = false;
  return opts;
}

}  // namespace

std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::HybfUm: return "hybf-um";
    case SchemeId::HybfAm: return "hybf-am";
    case SchemeId::DigitalFd: return "digital-fd";
    case SchemeId::DigitalFdIdeal: return "digital-fd-ideal";
    case SchemeId::DigitalHdIdeal: return "digital-hd-ideal";
  }
  return "unknown";
}

SchemeId parse_scheme(const std::string& name) {
  for (SchemeId id : all_schemes())
    if (scheme_name(id) == name) return id;
  throw ConfigError("unknown scheme '" + name + "'");
}

std::vector<SchemeId> all_schemes() {
  return {SchemeId::HybfUm, SchemeId::HybfAm, SchemeId::DigitalFd, SchemeId::DigitalFdIdeal,
          SchemeId::DigitalHdIdeal};
}

SolverResult run_digital_fd(const ChannelSet& ch, const SystemConfig& cfg, bool ideal,
                            const SolverOptions& opts) {
  return run_algorithm1(ch, digital_config(cfg, ideal), digital_options(opts));
}

HdResult run_digital_hd(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts) {
  HdResult out;
  const SystemConfig base = digital_config(cfg, true);
  const SolverOptions dopts = digital_options(opts);
  if (cfg.K > 0) {
    SystemConfig ul = base;
    ul.J = 0;
    ul.Nj.clear();
    ul.vj.clear();
    ul.betaj.clear();
    ul.wj.clear();
    ul.validate();
    ChannelSet c = ch;
    c.h_dl.clear();
    c.h_cross.clear();
    SolverResult r = run_algorithm1(c, ul, dopts);
    out.wsr_ul = wsr(c, r.state, ul);
    out.ul_trace = std::move(r.trace);
  }
  if (cfg.J > 0) {
    SystemConfig dl = base;
    dl.K = 0;
    dl.Mk.clear();
    dl.uk.clear();
    dl.kk.clear();
    dl.wk.clear();
    dl.lambdak.clear();
    dl.validate();
    ChannelSet c = ch;
    c.h_ul.clear();
    for (auto& row : c.h_cross) row.clear();
    SolverResult r = run_algorithm1(c, dl, dopts);
    out.wsr_dl = wsr(c, r.state, dl);
    out.dl_trace = std::move(r.trace);
  }
  const double f = cfg.hd_uplink_fraction;
  out.rate = f * out.wsr_ul + (1.0 - f) * out.wsr_dl;
  return out;
}

SchemeRun run_scheme(SchemeId id, const ChannelSet& ch, const SystemConfig& cfg,
                     const SolverOptions& opts) {
  SchemeRun out;
  auto finish = [&](const SolverResult& r, const SystemConfig& c) {
    out.wsr = wsr(ch, r.state, c);
    out.iterations = r.trace.iterations;
    out.max_violation = constraint_report(r.state, c).max_violation();
  };
  switch (id) {
    case SchemeId::HybfUm:
    case SchemeId::HybfAm: {
      SolverOptions o = opts;
      o.mode = AnalogMode::UnitModulus;
      o.update_analog = true;
      SolverResult r = run_algorithm1(ch, cfg, o);
      if (id == SchemeId::HybfAm) {
        // A unit-modulus point is amplitude-feasible; refine it with amplitude control.
        const int um_iters = r.trace.iterations;
        o.mode = AnalogMode::AmplitudeModulated;
        r = run_algorithm1(ch, cfg, o, std::move(r.state));
        r.trace.iterations += um_iters;
      }
      finish(r, cfg);
      break;
    }
    case SchemeId::DigitalFd:
    case SchemeId::DigitalFdIdeal: {
      const bool ideal = id == SchemeId::DigitalFdIdeal;
      finish(run_digital_fd(ch, cfg, ideal, opts), digital_config(cfg, ideal));
      break;
    }
    case SchemeId::DigitalHdIdeal: {
      const HdResult hd = run_digital_hd(ch, cfg, opts);
      out.wsr = hd.rate;
      out.iterations = (hd.ul_trace ? hd.ul_trace->iterations : 0) +
                       (hd.dl_trace ? hd.dl_trace->iterations : 0);
      out.max_violation = 0.0;
      for (const auto& t : {hd.ul_trace, hd.dl_trace})
        if (t && !t->max_violation.empty())
          out.max_violation = std::max(out.max_violation, t->max_violation.back());
      break;
    }
  }
  return out;
}

std::vector<GainRow> gain_table(const std::vector<GainRecord>& records,
                                const std::string& hd_scheme) {
  using Key = std::pair<double, std::string>;
  struct Acc {
    double sum = 0.0;
    std::set<std::pair<int, std::uint64_t>> ids;
  };
  std::map<Key, Acc> acc;
  for (const auto& r : records) {
    Acc& a = acc[{r.axis_value, r.scheme}];
    if (!a.ids.insert({r.realization, r.seed}).second)
      throw AlignmentError("gain_table: duplicate realization for " + r.scheme);
    a.sum += r.wsr;
  }
  std::vector<GainRow> rows;
  for (const auto& [key, a] : acc) {
    const auto hd = acc.find({key.first, hd_scheme});
    if (hd == acc.end()) throw AlignmentError("gain_table: no half-duplex rows at axis value");
    if (hd->second.ids != a.ids)
      throw AlignmentError("gain_table: realizations of " + key.second +
                           " do not match the half-duplex seeds");
    const double n = static_cast<double>(a.ids.size());
    const double mean = a.sum / n;
    const double hd_mean = hd->second.sum / n;
    rows.push_back({key.second, key.first, (mean / hd_mean - 1.0) * 100.0});
  }
  return rows;
}

}  // namespace fdhybf
