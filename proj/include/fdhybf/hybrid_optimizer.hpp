#ifndef FDHYBF_HYBRID_OPTIMIZER_HPP
#define FDHYBF_HYBRID_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdhybf/gradients.hpp"
#include "fdhybf/power_allocation.hpp"
#include "fdhybf/signal_model.hpp"

namespace fdhybf {

class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

enum class AnalogMode { UnitModulus, AmplitudeModulated };

/// A generalized eigen-pair (A, B) handed to the dense solver.
struct EigenPair {
  ComplexMatrix a;
  ComplexMatrix b;
};

/// Observer for every eigen-based update: stage name, the pair and the raw solution.
using UpdateHook =
    std::function<void(const std::string& stage, const EigenPair& pair, const GenEigResult& sol)>;

struct SolverOptions {
  int max_outer_iters = 100;
  double rel_tol = 1e-4;
  AnalogMode mode = AnalogMode::UnitModulus;
  bool quantize = true;
  BisectionOptions bisection;
  std::uint64_t seed = 1;      // initialization seed
  bool update_analog = true;   // false keeps G and F fixed (fully digital)
  std::size_t kron_cap = 4096; // largest allowed Mt * M0
  /// Revert any block update that lowers the true WSR.
  bool monotone_guard = true;
  UpdateHook on_update;
};

struct ConvergenceTrace {
  double initial_wsr = 0.0;
  std::vector<double> wsr;            // after each outer iteration, nats
  std::vector<double> max_violation;  // relative, after each outer iteration
  int iterations = 0;
  std::string termination;            // "converged", "max-iters", "degenerate"
};

struct SolverResult {
  BeamformerState state;
  ConvergenceTrace trace;
};

/// Initial point. Analog phases are drawn from the quantizer grid unless
/// `digital`, in which case G = I and F = I (requires Mt = M0, Nr = N0).
BeamformerState init_state(const ChannelSet& ch, const SystemConfig& cfg, std::uint64_t seed,
                           bool digital = false);

EigenPair digital_ul_pair(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                          const GradientSet& g, std::size_t k);
EigenPair digital_dl_pair(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                          const GradientSet& g, std::size_t j);
ComplexMatrix update_digital_ul(std::size_t k, const ChannelSet& ch, const BeamformerState& s,
                                const GradientSet& g, const SystemConfig& cfg,
                                const UpdateHook& hook = {});
ComplexMatrix update_digital_dl(std::size_t j, const ChannelSet& ch, const BeamformerState& s,
                                const GradientSet& g, const SystemConfig& cfg,
                                const UpdateHook& hook = {});

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector vec(const ComplexMatrix& x);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols);

/// Kronecker-vectorized pair for vec(G).
EigenPair analog_beamformer_pair(const ChannelSet& ch, const SystemConfig& cfg,
                                 const BeamformerState& s, const GradientSet& g);
/// Antenna-level pair (sum w_k R_k, sum w_k Rbar_k).
EigenPair analog_combiner_pair(const ChannelSet& ch, const SystemConfig& cfg,
                               const BeamformerState& s);

struct AnalogUpdate {
  ComplexMatrix unconstrained;  // raw eigen-solution, reshaped
  ComplexMatrix constrained;    // after modulus handling and quantization
  ComplexMatrix phase_only;     // unit-modulus (quantized) projection; equals constrained in UM mode
};

AnalogUpdate update_analog_beamformer(const ChannelSet& ch, const BeamformerState& s,
                                      const GradientSet& g, const SystemConfig& cfg,
                                      const SolverOptions& opts);
AnalogUpdate update_analog_combiner(const ChannelSet& ch, const BeamformerState& s,
                                    const SystemConfig& cfg, const SolverOptions& opts);

/// Lagrangian surrogate in G with everything else frozen:
/// sum_j w_j ln det(I + Rbar_j^-1 H_j G W_j G^H H_j^H) - tr(G W_j G^H N_j),
/// W_j = V_j P_j V_j^H, N_j = C_j + D_j + Psi_0 + l_0 I.
double analog_surrogate(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                        const GradientSet& g, const ComplexMatrix& G);

/// Scale all downlink powers down until the base-station constraints hold.
void restore_bs_feasibility(BeamformerState& s, const SystemConfig& cfg);
/// Same for uplink user k.
void restore_ul_feasibility(BeamformerState& s, const SystemConfig& cfg, std::size_t k);

/// Algorithm 1: alternate analog beamformer, analog combiner, downlink
/// digital beamformers + powers, uplink digital beamformers + powers.
SolverResult run_algorithm1(const ChannelSet& ch, const SystemConfig& cfg,
                            const SolverOptions& opts);
SolverResult run_algorithm1(const ChannelSet& ch, const SystemConfig& cfg,
                            const SolverOptions& opts, BeamformerState init);

}  // namespace fdhybf

#endif  // FDHYBF_HYBRID_OPTIMIZER_HPP
