#ifndef FDHYBF_BASELINES_HPP
#define FDHYBF_BASELINES_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdhybf/hybrid_optimizer.hpp"

namespace fdhybf {

class AlignmentError : public std::runtime_error {
 public:
  explicit AlignmentError(const std::string& what) : std::runtime_error(what) {}
};

enum class SchemeId { HybfUm, HybfAm, DigitalFd, DigitalFdIdeal, DigitalHdIdeal };

std::string scheme_name(SchemeId id);
/// Throws ConfigError on an unknown name.
SchemeId parse_scheme(const std::string& name);
std::vector<SchemeId> all_schemes();

/// Fully digital full duplex: Mt = M0, Nr = N0, G = F = I held fixed.
SolverResult run_digital_fd(const ChannelSet& ch, const SystemConfig& cfg, bool ideal,
                            const SolverOptions& opts);

struct HdResult {
  double rate = 0.0;  // f * WSR_UL + (1 - f) * WSR_DL
  double wsr_ul = 0.0;
  double wsr_dl = 0.0;
  std::optional<ConvergenceTrace> ul_trace;
  std::optional<ConvergenceTrace> dl_trace;
};

/// Half duplex with ideal hardware: separate uplink-only and downlink-only
/// fully digital problems, time-shared by cfg.hd_uplink_fraction.
HdResult run_digital_hd(const ChannelSet& ch, const SystemConfig& cfg, const SolverOptions& opts);

struct SchemeRun {
  double wsr = 0.0;
  int iterations = 0;
  double max_violation = 0.0;
};

/// Runs one scheme on one channel realization. Hybrid schemes use cfg's
/// RF-chain counts; `opts.seed` fixes the initialization.
SchemeRun run_scheme(SchemeId id, const ChannelSet& ch, const SystemConfig& cfg,
                     const SolverOptions& opts);

struct GainRecord {
  std::string scheme;
  double axis_value = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  double wsr = 0.0;
};

struct GainRow {
  std::string scheme;
  double axis_value = 0.0;
  double gain_percent = 0.0;  // (mean WSR / mean WSR_HD - 1) * 100
};

/// Percentage gains over the half-duplex scheme for every (axis value,
/// scheme). Requires each scheme's (realization, seed) set to equal HD's.
std::vector<GainRow> gain_table(const std::vector<GainRecord>& records,
                                const std::string& hd_scheme = "digital-hd-ideal");

}  // namespace fdhybf

#endif  // FDHYBF_BASELINES_HPP
