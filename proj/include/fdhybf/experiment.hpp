#ifndef FDHYBF_EXPERIMENT_HPP
#define FDHYBF_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fdhybf/baselines.hpp"

namespace fdhybf {

enum class SweepAxis { LdrDb, SnrDb, RfChains };

std::string axis_name(SweepAxis a);
/// Accepts ldr|ldr_db, snr|snr_db, rf|rf_chains.
SweepAxis parse_axis(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::LdrDb;
  std::vector<double> values{-60.0};
  std::vector<SchemeId> schemes = all_schemes();
  int realizations = 50;
  std::uint64_t master_seed = 1;
  std::string out = "results.csv";
  int workers = 1;
};

struct ExperimentConfig {
  std::string profile = "paper";
  SystemConfig system;
  SweepSpec sweep;
  SolverOptions solver;
};

/// "paper" (full-scale table defaults, 50 realizations) or "desk"
/// (M0=16, N0=8, Mt=Nr=4, 2+2 users with 2 antennas and 1 stream, 20 realizations).
ExperimentConfig base_profile(const std::string& name);

/// Overlay a JSON object onto `cfg`. Keys may be nested objects or dotted
/// paths ("sweep.values"); the schema is listed in the README. Throws
/// ConfigError naming the offending field, or ValidationError for
/// inconsistent dimensions.
void apply_config_json(ExperimentConfig& cfg, const std::string& json_text);

/// Throws ValidationError on an unusable sweep (empty values, zero realizations, ...).
void validate_sweep(const ExperimentConfig& cfg);

/// Reads `path` (may be empty for pure defaults). The file's "profile" key,
/// or `profile_override` when non-empty, selects the base profile.
ExperimentConfig load_config(const std::string& path, const std::string& profile_override = "");

SystemConfig apply_axis(const SystemConfig& cfg, SweepAxis axis, double value);

struct SweepRow {
  std::string scheme;
  std::string axis;
  double axis_value = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  double wsr_nats = 0.0;
  double wsr_bits = 0.0;
  int iters = 0;
  double runtime_s = 0.0;
  double max_violation = 0.0;
  std::string error;  // empty on success; not part of the CSV
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool capacity_error = false;
};

/// Every (axis value, realization, scheme) triple. Channels depend only on
/// (master seed, realization), so all schemes and axis values are paired.
/// Row order is fixed regardless of the worker count.
SweepResult run_sweep(const ExperimentConfig& cfg);

extern const char* const kCsvHeader;
void emit_csv(const SweepResult& result, std::ostream& os);
void emit_csv(const SweepResult& result, const std::string& path);
SweepResult parse_csv(std::istream& is);

std::vector<GainRecord> gain_records(const SweepResult& result);

}  // namespace fdhybf

#endif  // FDHYBF_EXPERIMENT_HPP
