// Monte-Carlo sweep runner. Exit codes: 0 ok, 1 config error, 2 capacity error.
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdhybf/experiment.hpp"

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid beamforming WSR sweeps for mmWave full-duplex massive MIMO"};
  std::string config_path, sweep, values, schemes, out, profile;
  int realizations = 0, workers = 0;
  std::uint64_t seed = 0;
  bool have_seed = false;

  app.add_option("--config", config_path, "JSON config file")->envname("FDHYBF_CONFIG");
  app.add_option("--sweep", sweep, "Sweep axis: ldr|snr|rf")->envname("FDHYBF_SWEEP");
  app.add_option("--values", values, "Comma-separated axis values")->envname("FDHYBF_VALUES");
  app.add_option("--schemes", schemes, "Comma-separated scheme ids")->envname("FDHYBF_SCHEMES");
  app.add_option("--realizations", realizations, "Channel realizations per point")
      ->envname("FDHYBF_REALIZATIONS");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed")->envname("FDHYBF_SEED");
  app.add_option("--out", out, "Output CSV path")->envname("FDHYBF_OUT");
  app.add_option("--profile", profile, "Base profile: desk|paper")->envname("FDHYBF_PROFILE");
  app.add_option("--workers", workers, "Concurrent realizations")->envname("FDHYBF_WORKERS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  have_seed = seed_opt->count() > 0;

  fdhybf::ExperimentConfig cfg;
  try {
    cfg = fdhybf::load_config(config_path, profile);
    if (!sweep.empty()) cfg.sweep.axis = fdhybf::parse_axis(sweep);
    if (!values.empty()) {
      cfg.sweep.values.clear();
      for (const auto& v : split(values)) {
        try {
          cfg.sweep.values.push_back(std::stod(v));
        } catch (const std::exception&) {
          throw fdhybf::ConfigError("field 'values': bad number '" + v + "'");
        }
      }
    }
    if (!schemes.empty()) {
      cfg.sweep.schemes.clear();
      for (const auto& s : split(schemes)) cfg.sweep.schemes.push_back(fdhybf::parse_scheme(s));
    }
    if (realizations != 0) cfg.sweep.realizations = realizations;
    if (have_seed) cfg.sweep.master_seed = seed;
    if (!out.empty()) cfg.sweep.out = out;
    if (workers != 0) cfg.sweep.workers = workers;
    fdhybf::validate_sweep(cfg);
  } catch (const fdhybf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  const bool wants_hybrid = [&] {
    for (auto id : cfg.sweep.schemes)
      if (id == fdhybf::SchemeId::HybfUm || id == fdhybf::SchemeId::HybfAm) return true;
    return false;
  }();
  if (wants_hybrid && cfg.system.J > 0) {
    for (double v : cfg.sweep.values) {
      const auto sys = fdhybf::apply_axis(cfg.system, cfg.sweep.axis, v);
      const auto dim = static_cast<std::size_t>(sys.M0) * static_cast<std::size_t>(sys.Mt);
      if (dim > cfg.solver.kron_cap) {
        std::cerr << "capacity error: Mt*M0 = " << dim << " exceeds the cap of "
                  << cfg.solver.kron_cap << " (raise solver.kron_cap to allow it)\n";
        return 2;
      }
    }
  }

  const fdhybf::SweepResult result = fdhybf::run_sweep(cfg);
  for (const auto& r : result.rows)
    if (!r.error.empty())
      std::cerr << r.scheme << " " << r.axis << "=" << r.axis_value << " realization "
                << r.realization << ": " << r.error << '\n';
  try {
    fdhybf::emit_csv(result, cfg.sweep.out);
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "wrote " << result.rows.size() << " rows to " << cfg.sweep.out << '\n';
  return result.capacity_error ? 2 : 0;
}
