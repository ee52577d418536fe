#ifndef FDHYBF_SIGNAL_MODEL_HPP
#define FDHYBF_SIGNAL_MODEL_HPP

#include <vector>

#include "fdhybf/channel_model.hpp"
#include "fdhybf/config.hpp"
#include "fdhybf/matrix_kernels.hpp"

namespace fdhybf {

/// Lagrange multipliers of one transmitting node: l for the sum-power
/// constraint, psi for the per-antenna constraints.
struct NodeMultipliers {
  double l = 0.0;
  RealVector psi;
};

struct BeamformerState {
  ComplexMatrix G;               // M0 x Mt analog beamformer
  ComplexMatrix F;               // Nr x N0 analog combiner
  std::vector<ComplexMatrix> U;  // Mk x uk uplink digital beamformers
  std::vector<ComplexMatrix> V;  // Mt x vj downlink digital beamformers
  std::vector<RealVector> Pk;    // uplink stream powers
  std::vector<RealVector> Pj;    // downlink stream powers
  NodeMultipliers bs;
  std::vector<NodeMultipliers> ul;
};

struct TxCovariances {
  std::vector<ComplexMatrix> T;  // Mk x Mk
  std::vector<ComplexMatrix> Q;  // M0 x M0
};

struct CovarianceSet {
  std::vector<ComplexMatrix> R_ul, Rbar_ul;          // Nr x Nr
  std::vector<ComplexMatrix> R_dl, Rbar_dl;          // Nj x Nj
  std::vector<ComplexMatrix> R_ul_ant, Rbar_ul_ant;  // N0 x N0
  ComplexMatrix phi0;                                // combined uplink covariance before receive LDR
  std::vector<ComplexMatrix> phi_dl;                 // per downlink user, before receive LDR
};

TxCovariances tx_covariances(const BeamformerState& s);

/// Receive covariances after the analog combiner F. Thermal noise enters
/// as sigma0^2 F F^H so a pure row scaling of F leaves every rate unchanged.
CovarianceSet rx_covariances(const ChannelSet& ch, const SystemConfig& cfg,
                             const ComplexMatrix& F, const TxCovariances& tx);
CovarianceSet rx_covariances(const ChannelSet& ch, const BeamformerState& s,
                             const SystemConfig& cfg);

struct UserRates {
  std::vector<double> ul;  // nats
  std::vector<double> dl;
};

/// ln det R - ln det Rbar. Both are ridge-regularized together if either
/// fails to factor.
double log_ratio(const ComplexMatrix& r, const ComplexMatrix& rbar);
UserRates user_rates(const CovarianceSet& cov);
double wsr(const CovarianceSet& cov, const SystemConfig& cfg);
double wsr(const ChannelSet& ch, const BeamformerState& s, const SystemConfig& cfg);

struct NodeSlack {
  double budget = 0.0;
  double sum_slack = 0.0;      // budget - total power
  RealVector caps;             // per-antenna caps
  RealVector antenna_slack;    // caps - per-antenna load
};

struct ConstraintReport {
  NodeSlack bs;
  std::vector<NodeSlack> ul;
  bool unit_modulus = false;  // |G| = |F| = 1 elementwise
  bool quantized = false;     // additionally, phases on the n_ps grid
  /// Largest violation relative to the corresponding budget or cap, 0 if feasible.
  double max_violation() const;
  /// Largest |multiplier * slack| / budget over all multipliers.
  double max_complementarity(const BeamformerState& s) const;
};

ConstraintReport constraint_report(const BeamformerState& s, const SystemConfig& cfg);

bool is_unit_modulus(const ComplexMatrix& x, double tol = 1e-9);
bool on_phase_grid(const ComplexMatrix& x, int n_ps, double tol = 1e-9);

}  // namespace fdhybf

#endif  // FDHYBF_SIGNAL_MODEL_HPP
