#ifndef FDHYBF_GRADIENTS_HPP
#define FDHYBF_GRADIENTS_HPP

#include <vector>

#include "fdhybf/signal_model.hpp"

namespace fdhybf {

/// Negative gradients of the non-concave WSR parts.
///   A_k: other uplink rates w.r.t. T_k
///   B_k: downlink rates w.r.t. T_k
///   C_j: other downlink rates w.r.t. Q_j
///   D_j: uplink rates w.r.t. Q_j
struct GradientSet {
  std::vector<ComplexMatrix> A, B;  // Mk x Mk
  std::vector<ComplexMatrix> C, D;  // M0 x M0
};

GradientSet compute_gradients(const ChannelSet& ch, const SystemConfig& cfg,
                              const ComplexMatrix& F, const CovarianceSet& cov);
GradientSet compute_gradients(const ChannelSet& ch, const BeamformerState& s,
                              const SystemConfig& cfg);

/// Concave surrogate of the WSR built at `anchor`: own-signal log terms
/// against the anchor's interference-plus-noise covariances, minus the
/// linearized penalties tr((X - X_anchor) * gradient). `grads` must have
/// been computed at `anchor`.
double minorizer_value(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                       const GradientSet& grads, const BeamformerState& anchor);

}  // namespace fdhybf

#endif  // FDHYBF_GRADIENTS_HPP
