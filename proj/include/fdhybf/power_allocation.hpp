#ifndef FDHYBF_POWER_ALLOCATION_HPP
#define FDHYBF_POWER_ALLOCATION_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdhybf/gradients.hpp"
#include "fdhybf/signal_model.hpp"

namespace fdhybf {

class StaleBeamformerError : public std::runtime_error {
 public:
  explicit StaleBeamformerError(const std::string& what) : std::runtime_error(what) {}
};

class BracketError : public std::runtime_error {
 public:
  explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

using MultiplierSet = NodeMultipliers;

struct SigmaPair {
  RealVector sigma1;  // stream quality
  RealVector sigma2;  // stream penalty
};

struct BisectionOptions {
  double mu_max = 0.0;  // <= 0 selects 1e3 * w / min(cap)
  double tol = 1e-8;    // absolute width of the final multiplier bracket
  int max_steps = 200;
  int max_doublings = 10;
  int max_cycles = 60;
  double cycle_rel_tol = 1e-6;
};

/// One user's share of a transmit node's power problem, in its digital
/// domain (n = Mk uplink, Mt downlink):
///   max w ln det(I + S1 Q) - tr(S2(mu) Q),  rank Q <= streams,
///   S2(mu) = base + X^H (l I + diag(psi)) X.
/// For given multipliers the maximizer is the top-`streams` generalized
/// eigenvectors of (S1, S2(mu)) loaded by water-filling.
struct UserProblem {
  ComplexMatrix quality;       // S1, n x n
  ComplexMatrix base_penalty;  // gradient part of S2, n x n
  ComplexMatrix base_factor;   // any B with B^H B = base_penalty
  ComplexMatrix steer;         // X: antennas x n (I uplink, G downlink)
  double weight = 1.0;
  int streams = 1;
};

/// All users of one transmit node share its sum-power and per-antenna
/// constraints on the loads sum_u diag(X_u Q_u X_u^H), and its multipliers.
struct NodeProblem {
  std::vector<UserProblem> users;
  double budget = 0.0;
  RealVector caps;
};

struct BisectionResult {
  MultiplierSet mult;
  std::vector<ComplexMatrix> power_matrix;  // per-user Lagrangian maximizers at mult
  std::vector<RealVector> power;            // their eigenvalues (descending), projected
  std::vector<ComplexMatrix> rotation;      // Q_u = rotation diag(power) rotation^H / scale
  double scale = 1.0;                       // common projection factor, 1 if feasible already
  int cycles = 0;
};

/// Diagonals of the stream-domain quality/penalty matrices. Throws
/// StaleBeamformerError when either has off-diagonals above
/// rel_tol * largest diagonal magnitude.
SigmaPair sigma_pair(const ComplexMatrix& quality, const ComplexMatrix& penalty,
                     double rel_tol = 1e-3);
SigmaPair sigma_pair_ul(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                        const GradientSet& g, std::size_t k);
SigmaPair sigma_pair_dl(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                        const GradientSet& g, std::size_t j);

/// P_i = max(0, w / sigma2_i - 1 / sigma1_i); 0 where sigma1_i = 0 and
/// +inf where sigma1_i > 0 but sigma2_i <= 0.
RealVector water_fill(const SigmaPair& pair, double w);

/// Maximizer of w ln det(I + S1 P) - tr(S2 P) over P >= 0 with rank P <=
/// max_rank (< 0: unrestricted), for Hermitian S1 >= 0, S2 > 0. Empty when
/// S2 is not positive definite.
std::optional<ComplexMatrix> water_fill_matrix(const ComplexMatrix& s1, const ComplexMatrix& s2,
                                               double w, int max_rank = -1);
/// Same with S2 = R^H R given by its square upper-triangular factor R.
std::optional<ComplexMatrix> water_fill_factored(const ComplexMatrix& s1, const ComplexMatrix& r,
                                                 double w, int max_rank = -1);

UserProblem user_problem_ul(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g, std::size_t k);
UserProblem user_problem_dl(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g, std::size_t j);
/// Uplink user k alone; the base station with all downlink users.
NodeProblem node_problem_ul(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g, std::size_t k);
NodeProblem node_problem_dl(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g);

/// Penalty S2 at the given multipliers.
ComplexMatrix user_penalty(const UserProblem& u, const MultiplierSet& mu);
/// Upper-triangular R with R^H R = S2(mu), from a QR of the stacked square
/// roots; avoids the cancellation of forming S2 when multipliers are large.
ComplexMatrix user_penalty_factor(const UserProblem& u, const MultiplierSet& mu);
/// Lagrangian maximizer of one user; empty when S2(mu) is not positive definite.
std::optional<ComplexMatrix> user_maximizer(const UserProblem& u, const MultiplierSet& mu);
/// Per-antenna loads of the given per-user power matrices.
RealVector node_loads(const NodeProblem& p, const std::vector<ComplexMatrix>& power);

/// Cyclic bisection over (l, psi_1, ..., psi_M), starting from `start`.
BisectionResult bisect_node(const NodeProblem& p, const MultiplierSet& start,
                            const BisectionOptions& opts);

BisectionResult bisect_multipliers_ul(const ChannelSet& ch, const SystemConfig& cfg,
                                      const BeamformerState& s, const GradientSet& g,
                                      std::size_t k, const BisectionOptions& opts);
BisectionResult bisect_multipliers_dl(const ChannelSet& ch, const SystemConfig& cfg,
                                      const BeamformerState& s, const GradientSet& g,
                                      const BisectionOptions& opts);

}  // namespace fdhybf

#endif  // FDHYBF_POWER_ALLOCATION_HPP
