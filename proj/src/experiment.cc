#include "fdhybf/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <iostream>
#include <map>
#include <set>
#include <numbers>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fdhybf {

namespace {

using json = nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object())
      flatten(it.value(), key, out);
    else
      out[key] = it.value();
  }
}

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

double num(const std::string& f, const json& v) {
  if (!v.is_number()) bad(f, "expected a number");
  return v.get<double>();
}

int integer(const std::string& f, const json& v) {
  if (!v.is_number_integer()) bad(f, "expected an integer");
  return v.get<int>();
}

bool boolean(const std::string& f, const json& v) {
  if (!v.is_boolean()) bad(f, "expected true or false");
  return v.get<bool>();
}

std::string str(const std::string& f, const json& v) {
  if (!v.is_string()) bad(f, "expected a string");
  return v.get<std::string>();
}

template <typename T, typename Conv>
std::vector<T> list(const std::string& f, const json& v, Conv conv) {
  std::vector<T> out;
  if (v.is_array()) {
    if (v.empty()) bad(f, "list must not be empty");
    for (const auto& e : v) out.push_back(conv(f, e));
  } else {
    out.push_back(conv(f, v));
  }
  return out;
}

// Per-user list: a scalar broadcasts to n entries, a list must have n.
template <typename T, typename Conv>
std::vector<T> per_user(const std::string& f, const json& v, int n, Conv conv) {
  std::vector<T> out = list<T>(f, v, conv);
  if (!v.is_array()) return std::vector<T>(static_cast<std::size_t>(n), out.front());
  if (static_cast<int>(out.size()) != n) bad(f, "expected " + std::to_string(n) + " entries");
  return out;
}

std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_num(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("parse_csv: bad number '" + s + "'");
  return v;
}

template <typename I>
I parse_int(const std::string& s) {
  I v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("parse_csv: bad integer '" + s + "'");
  return v;
}

}  // namespace

const char* const kCsvHeader =
    "scheme,axis,axis_value,realization,seed,wsr_nats,wsr_bits,iters,runtime_s,max_violation";

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::LdrDb: return "ldr_db";
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::RfChains: return "rf_chains";
  }
  return "unknown";
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "ldr" || s == "ldr_db") return SweepAxis::LdrDb;
  if (s == "snr" || s == "snr_db") return SweepAxis::SnrDb;
  if (s == "rf" || s == "rf_chains") return SweepAxis::RfChains;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

ExperimentConfig base_profile(const std::string& name) {
  ExperimentConfig c;
  c.profile = name;
  if (name == "paper") {
    c.system = paper_profile();
    c.sweep.realizations = 50;
  } else if (name == "desk") {
    c.system = desk_profile();
    c.sweep.realizations = 20;
  } else {
    throw ConfigError("field 'profile': expected desk or paper, got '" + name + "'");
  }
  return c;
}

void apply_config_json(ExperimentConfig& cfg, const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  std::map<std::string, json> kv;
  flatten(root, "", kv);
  kv.erase("profile");

  std::set<std::string> used;
  auto take = [&](const std::string& key) -> const json* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  const auto as_num = [](const std::string& f, const json& v) { return num(f, v); };
  const auto as_int = [](const std::string& f, const json& v) { return integer(f, v); };
  const auto as_str = [](const std::string& f, const json& v) { return str(f, v); };

  SystemConfig& s = cfg.system;
  if (auto v = take("K")) s.K = integer("K", *v);
  if (auto v = take("J")) s.J = integer("J", *v);
  if (s.K < 0 || s.J < 0) throw ValidationError("K and J must be >= 0");
  const auto resize = [](auto& vec, int n, auto fallback) {
    const auto first = vec.empty() ? fallback : vec.front();
    vec.resize(static_cast<std::size_t>(n), first);
  };
  resize(s.Mk, s.K, 5);
  resize(s.uk, s.K, 2);
  resize(s.kk, s.K, 1e-6);
  resize(s.wk, s.K, 1.0);
  resize(s.Nj, s.J, 5);
  resize(s.vj, s.J, 2);
  resize(s.betaj, s.J, 1e-6);
  resize(s.wj, s.J, 1.0);

  if (auto v = take("M0")) s.M0 = integer("M0", *v);
  if (auto v = take("N0")) s.N0 = integer("N0", *v);
  if (auto v = take("rf_chains")) s.set_rf_chains(integer("rf_chains", *v));
  if (auto v = take("Mt")) s.Mt = integer("Mt", *v);
  if (auto v = take("Nr")) s.Nr = integer("Nr", *v);
  if (auto v = take("Mk")) s.Mk = per_user<int>("Mk", *v, s.K, as_int);
  if (auto v = take("Nj")) s.Nj = per_user<int>("Nj", *v, s.J, as_int);
  if (auto v = take("uk")) s.uk = per_user<int>("uk", *v, s.K, as_int);
  if (auto v = take("vj")) s.vj = per_user<int>("vj", *v, s.J, as_int);
  if (auto v = take("wk")) s.wk = per_user<double>("wk", *v, s.K, as_num);
  if (auto v = take("wj")) s.wj = per_user<double>("wj", *v, s.J, as_num);

  if (auto v = take("ldr_db")) s.set_bs_ldr_db(num("ldr_db", *v));
  if (auto v = take("k0_db")) s.k0 = ldr_from_db(num("k0_db", *v));
  if (auto v = take("beta0_db")) s.beta0 = ldr_from_db(num("beta0_db", *v));
  if (auto v = take("user_ldr_db")) s.set_user_ldr_db(num("user_ldr_db", *v));
  if (auto v = take("kk_db")) {
    s.kk = per_user<double>("kk_db", *v, s.K, as_num);
    for (double& x : s.kk) x = ldr_from_db(x);
  }
  if (auto v = take("betaj_db")) {
    s.betaj = per_user<double>("betaj_db", *v, s.J, as_num);
    for (double& x : s.betaj) x = ldr_from_db(x);
  }

  if (auto v = take("alpha0_dbm")) s.alpha0_dbm = num("alpha0_dbm", *v);
  if (auto v = take("alphak_dbm")) s.alphak_dbm = num("alphak_dbm", *v);
  s.lambda0.clear();
  s.lambdak.clear();
  if (auto v = take("lambda0_w")) s.lambda0 = per_user<double>("lambda0_w", *v, s.M0, as_num);
  if (auto v = take("snr_db")) s.snr_db = num("snr_db", *v);
  if (auto v = take("n_ps")) s.n_ps = integer("n_ps", *v);
  if (auto v = take("quantizer_bits")) {
    const int b = integer("quantizer_bits", *v);
    if (b < 1 || b > 24) bad("quantizer_bits", "expected 1..24");
    s.n_ps = 1 << b;
  }

  if (auto v = take("kappa_db")) s.si.kappa_db = num("kappa_db", *v);
  if (auto v = take("theta_deg")) s.si.theta = num("theta_deg", *v) * kDeg;
  if (auto v = take("distance_m")) s.si.distance = num("distance_m", *v);
  if (auto v = take("carrier_hz")) s.si.wavelength = 299792458.0 / num("carrier_hz", *v);
  if (auto v = take("wavelength_m")) s.si.wavelength = num("wavelength_m", *v);
  if (auto v = take("clusters")) s.clusters.clusters = integer("clusters", *v);
  if (auto v = take("rays")) s.clusters.rays = integer("rays", *v);
  if (auto v = take("angle_spread_deg")) {
    const double a = num("angle_spread_deg", *v) * kDeg;
    s.clusters.aoa_min = s.clusters.aod_min = -a;
    s.clusters.aoa_max = s.clusters.aod_max = a;
  }
  if (auto v = take("link_gain")) s.link_gain = num("link_gain", *v);
  if (auto v = take("hd_uplink_fraction")) s.hd_uplink_fraction = num("hd_uplink_fraction", *v);

  SweepSpec& w = cfg.sweep;
  if (auto v = take("sweep.axis")) w.axis = parse_axis(str("sweep.axis", *v));
  if (auto v = take("sweep.values")) w.values = list<double>("sweep.values", *v, as_num);
  if (auto v = take("sweep.schemes")) {
    w.schemes.clear();
    for (const auto& n : list<std::string>("sweep.schemes", *v, as_str)) w.schemes.push_back(parse_scheme(n));
  }
  if (auto v = take("sweep.realizations")) w.realizations = integer("sweep.realizations", *v);
  if (auto v = take("sweep.seed")) {
    if (!v->is_number_unsigned()) bad("sweep.seed", "expected a non-negative integer");
    w.master_seed = v->get<std::uint64_t>();
  }
  if (auto v = take("sweep.out")) w.out = str("sweep.out", *v);
  if (auto v = take("sweep.workers")) w.workers = integer("sweep.workers", *v);

  SolverOptions& o = cfg.solver;
  if (auto v = take("solver.max_outer_iters")) o.max_outer_iters = integer("solver.max_outer_iters", *v);
  if (auto v = take("solver.rel_tol")) o.rel_tol = num("solver.rel_tol", *v);
  if (auto v = take("solver.quantize")) o.quantize = boolean("solver.quantize", *v);
  if (auto v = take("solver.monotone_guard")) o.monotone_guard = boolean("solver.monotone_guard", *v);
  if (auto v = take("solver.kron_cap")) o.kron_cap = static_cast<std::size_t>(integer("solver.kron_cap", *v));
  if (auto v = take("solver.bisection.mu_max")) o.bisection.mu_max = num("solver.bisection.mu_max", *v);
  if (auto v = take("solver.bisection.tol")) o.bisection.tol = num("solver.bisection.tol", *v);
  if (auto v = take("solver.bisection.max_steps")) o.bisection.max_steps = integer("solver.bisection.max_steps", *v);
  if (auto v = take("solver.bisection.max_cycles")) o.bisection.max_cycles = integer("solver.bisection.max_cycles", *v);

  for (const auto& [key, value] : kv)
    if (!used.count(key)) throw ConfigError("field '" + key + "': unknown field");

  s.finalize();
  validate_sweep(cfg);
}

void validate_sweep(const ExperimentConfig& cfg) {
  const SweepSpec& w = cfg.sweep;
  if (w.values.empty()) throw ValidationError("sweep.values must not be empty");
  if (w.schemes.empty()) throw ValidationError("sweep.schemes must not be empty");
  if (w.realizations < 1) throw ValidationError("sweep.realizations must be >= 1");
  if (w.workers < 1) throw ValidationError("sweep.workers must be >= 1");
  if (!(cfg.solver.rel_tol > 0.0)) throw ValidationError("solver.rel_tol must be > 0");
  if (cfg.solver.max_outer_iters < 1) throw ValidationError("solver.max_outer_iters must be >= 1");
  if (cfg.solver.bisection.mu_max < 0.0) throw ValidationError("solver.bisection.mu_max must be > 0");
  for (double v : w.values) {
    if (!std::isfinite(v)) throw ValidationError("sweep.values must be finite");
    if (w.axis == SweepAxis::RfChains && (v < 1.0 || v != std::floor(v)))
      throw ValidationError("rf_chains sweep values must be positive integers");
  }
  for (double v : w.values) apply_axis(cfg.system, w.axis, v).validate();
}

ExperimentConfig load_config(const std::string& path, const std::string& profile_override) {
  std::string text = "{}";
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::string profile = "paper";
  try {
    const json root = json::parse(text);
    if (root.is_object() && root.contains("profile")) profile = str("profile", root["profile"]);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!profile_override.empty()) profile = profile_override;
  ExperimentConfig cfg = base_profile(profile);
  apply_config_json(cfg, text);
  return cfg;
}

SystemConfig apply_axis(const SystemConfig& cfg, SweepAxis axis, double value) {
  SystemConfig c = cfg;
  switch (axis) {
    case SweepAxis::LdrDb: c.set_bs_ldr_db(value); break;
    case SweepAxis::SnrDb: c.snr_db = value; break;
    case SweepAxis::RfChains: c.set_rf_chains(static_cast<int>(value)); break;
  }
  return c;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  validate_sweep(cfg);
  const SweepSpec& w = cfg.sweep;
  struct Task {
    std::size_t value;
    int realization;
    SchemeId scheme;
  };
  std::vector<Task> tasks;
  for (std::size_t v = 0; v < w.values.size(); ++v)
    for (int r = 0; r < w.realizations; ++r)
      for (SchemeId id : w.schemes) tasks.push_back({v, r, id});

  SweepResult out;
  out.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> capacity{false};

  auto work = [&]() {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task& task = tasks[t];
      SweepRow& row = out.rows[t];
      const double value = w.values[task.value];
      row.scheme = scheme_name(task.scheme);
      row.axis = axis_name(w.axis);
      row.axis_value = value;
      row.realization = task.realization;
      row.seed = channel_seed(w.master_seed, task.realization);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SystemConfig sys = apply_axis(cfg.system, w.axis, value);
        const ChannelSet ch = generate_channels(sys, row.seed);
        SolverOptions opts = cfg.solver;
        opts.seed = mix_seed(row.seed, 0x1a17);
        const SchemeRun run = run_scheme(task.scheme, ch, sys, opts);
        row.wsr_nats = run.wsr;
        row.iters = run.iterations;
        row.max_violation = run.max_violation;
      } catch (const CapacityError& e) {
        capacity = true;
        row.error = e.what();
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      if (!row.error.empty()) {
        row.wsr_nats = std::numeric_limits<double>::quiet_NaN();
        row.max_violation = std::numeric_limits<double>::quiet_NaN();
      }
      row.wsr_bits = row.wsr_nats / std::numbers::ln2;
      row.runtime_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  const int n_workers = std::max(1, std::min<int>(w.workers, static_cast<int>(tasks.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  out.capacity_error = capacity;
  return out;
}

void emit_csv(const SweepResult& result, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : result.rows)
    os << r.scheme << ',' << r.axis << ',' << fmt(r.axis_value) << ',' << r.realization << ','
       << r.seed << ',' << fmt(r.wsr_nats) << ',' << fmt(r.wsr_bits) << ',' << r.iters << ','
       << fmt(r.runtime_s) << ',' << fmt(r.max_violation) << '\n';
}

void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_csv(result, os);
  os.flush();
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

SweepResult parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw InputError("parse_csv: bad header");
  SweepResult out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw InputError("parse_csv: expected 10 fields");
    SweepRow r;
    r.scheme = f[0];
    r.axis = f[1];
    r.axis_value = parse_num(f[2]);
    r.realization = parse_int<int>(f[3]);
    r.seed = parse_int<std::uint64_t>(f[4]);
    r.wsr_nats = parse_num(f[5]);
    r.wsr_bits = parse_num(f[6]);
    r.iters = parse_int<int>(f[7]);
    r.runtime_s = parse_num(f[8]);
    r.max_violation = parse_num(f[9]);
    out.rows.push_back(r);
  }
  return out;
}

std::vector<GainRecord> gain_records(const SweepResult& result) {
  std::vector<GainRecord> out;
  for (const auto& r : result.rows)
    out.push_back({r.scheme, r.axis_value, r.realization, r.seed, r.wsr_nats});
  return out;
}

}  // namespace fdhybf
