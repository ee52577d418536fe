#include "fdhybf/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fdhybf {

namespace {

// X + a diag(X)
ComplexMatrix with_diag(const ComplexMatrix& x, double a) {
  ComplexMatrix y = x;
  y.diagonal() += a * x.diagonal();
  return y;
}

RealVector real_diag(const ComplexMatrix& x) { return x.diagonal().real(); }

NodeSlack make_slack(double budget, const RealVector& caps, const RealVector& load) {
  NodeSlack s;
  s.budget = budget;
  s.caps = caps;
  s.sum_slack = budget - load.sum();
  s.antenna_slack = caps - load;
  return s;
}

RealVector to_vec(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TxCovariances tx_covariances(const BeamformerState& s) {
  if (s.U.size() != s.Pk.size() || s.V.size() != s.Pj.size())
    throw InputError("tx_covariances: beamformer/power count mismatch");
  TxCovariances tx;
  for (std::size_t k = 0; k < s.U.size(); ++k) {
    if (s.U[k].cols() != s.Pk[k].size()) throw InputError("tx_covariances: uplink stream mismatch");
    tx.T.push_back(hermitian_part(s.U[k] * s.Pk[k].asDiagonal() * s.U[k].adjoint()));
  }
  for (std::size_t j = 0; j < s.V.size(); ++j) {
    if (s.V[j].cols() != s.Pj[j].size() || s.V[j].rows() != s.G.cols())
      throw InputError("tx_covariances: downlink stream mismatch");
    const ComplexMatrix gv = s.G * s.V[j];
    tx.Q.push_back(hermitian_part(gv * s.Pj[j].asDiagonal() * gv.adjoint()));
  }
  return tx;
}

CovarianceSet rx_covariances(const ChannelSet& ch, const SystemConfig& cfg,
                             const ComplexMatrix& F, const TxCovariances& tx) {
  const auto K = tx.T.size();
  const auto J = tx.Q.size();
  if (ch.h_ul.size() != K || ch.h_dl.size() != J)
    throw InputError("rx_covariances: user count mismatch");
  if (F.cols() != ch.h_si.rows()) throw InputError("rx_covariances: combiner width mismatch");

  const Eigen::Index m0 = ch.h_si.cols();
  ComplexMatrix qsum = ComplexMatrix::Zero(m0, m0);
  for (const auto& q : tx.Q) qsum += q;
  const ComplexMatrix qsum_ldr = with_diag(qsum, cfg.k0);

  CovarianceSet cov;

  // Uplink, antenna level.
  ComplexMatrix phi_ant = ch.h_si * qsum_ldr * ch.h_si.adjoint();
  phi_ant.diagonal().array() += ch.sigma0_sq;
  std::vector<ComplexMatrix> signal_ant(K);
  for (std::size_t i = 0; i < K; ++i) {
    const ComplexMatrix& h = ch.h_ul[i];
    phi_ant += h * with_diag(tx.T[i], cfg.kk[i]) * h.adjoint();
    signal_ant[i] = h * tx.T[i] * h.adjoint();
  }
  phi_ant = hermitian_part(phi_ant);
  const ComplexMatrix r_ant = with_diag(phi_ant, cfg.beta0);
  cov.phi0 = hermitian_part(F * phi_ant * F.adjoint());
  const ComplexMatrix r_ul = with_diag(cov.phi0, cfg.beta0);
  for (std::size_t k = 0; k < K; ++k) {
    cov.R_ul.push_back(r_ul);
    cov.Rbar_ul.push_back(hermitian_part(r_ul - F * signal_ant[k] * F.adjoint()));
    cov.R_ul_ant.push_back(r_ant);
    cov.Rbar_ul_ant.push_back(hermitian_part(r_ant - signal_ant[k]));
  }

  // Downlink.
  for (std::size_t j = 0; j < J; ++j) {
    const ComplexMatrix& h = ch.h_dl[j];
    ComplexMatrix phi = h * qsum_ldr * h.adjoint();
    phi.diagonal().array() += ch.sigmaj_sq;
    if (K > 0 && ch.h_cross.size() != J) throw InputError("rx_covariances: cross channel grid");
    for (std::size_t i = 0; i < K; ++i) {
      const ComplexMatrix& hc = ch.h_cross[j][i];
      phi += hc * with_diag(tx.T[i], cfg.kk[i]) * hc.adjoint();
    }
    phi = hermitian_part(phi);
    cov.phi_dl.push_back(phi);
    const ComplexMatrix r = with_diag(phi, cfg.betaj[j]);
    cov.R_dl.push_back(r);
    cov.Rbar_dl.push_back(hermitian_part(r - h * tx.Q[j] * h.adjoint()));
  }
  return cov;
}

CovarianceSet rx_covariances(const ChannelSet& ch, const BeamformerState& s,
                             const SystemConfig& cfg) {
  return rx_covariances(ch, cfg, s.F, tx_covariances(s));
}

double log_ratio(const ComplexMatrix& r, const ComplexMatrix& rbar) {
  try {
    return ln_det(HermitianMatrix(r)) - ln_det(HermitianMatrix(rbar));
  } catch (const SingularityError&) {
    const Eigen::Index n = r.rows();
    const double ridge = 1e-10 * std::max(r.trace().real(), 1e-300) / static_cast<double>(n);
    const ComplexMatrix eye = ComplexMatrix::Identity(n, n) * ridge;
    return ln_det(HermitianMatrix(r + eye)) - ln_det(HermitianMatrix(rbar + eye));
  }
}

UserRates user_rates(const CovarianceSet& cov) {
  UserRates out;
  for (std::size_t k = 0; k < cov.R_ul.size(); ++k)
    out.ul.push_back(log_ratio(cov.R_ul[k], cov.Rbar_ul[k]));
  for (std::size_t j = 0; j < cov.R_dl.size(); ++j)
    out.dl.push_back(log_ratio(cov.R_dl[j], cov.Rbar_dl[j]));
  return out;
}

double wsr(const CovarianceSet& cov, const SystemConfig& cfg) {
  const UserRates r = user_rates(cov);
  double total = 0.0;
  for (std::size_t k = 0; k < r.ul.size(); ++k) total += cfg.wk[k] * r.ul[k];
  for (std::size_t j = 0; j < r.dl.size(); ++j) total += cfg.wj[j] * r.dl[j];
  return total;
}

double wsr(const ChannelSet& ch, const BeamformerState& s, const SystemConfig& cfg) {
  return wsr(rx_covariances(ch, s, cfg), cfg);
}

double ConstraintReport::max_violation() const {
  double worst = 0.0;
  auto node = [&](const NodeSlack& n) {
    worst = std::max(worst, -n.sum_slack / n.budget);
    for (Eigen::Index m = 0; m < n.caps.size(); ++m)
      worst = std::max(worst, -n.antenna_slack(m) / n.caps(m));
  };
  node(bs);
  for (const auto& n : ul) node(n);
  return std::max(0.0, worst);
}

double ConstraintReport::max_complementarity(const BeamformerState& s) const {
  double worst = 0.0;
  auto node = [&](const NodeSlack& n, const NodeMultipliers& mu) {
    worst = std::max(worst, std::abs(mu.l * n.sum_slack) / n.budget);
    for (Eigen::Index m = 0; m < mu.psi.size() && m < n.antenna_slack.size(); ++m)
      worst = std::max(worst, std::abs(mu.psi(m) * n.antenna_slack(m)) / n.budget);
  };
  node(bs, s.bs);
  for (std::size_t k = 0; k < ul.size() && k < s.ul.size(); ++k) node(ul[k], s.ul[k]);
  return worst;
}

bool is_unit_modulus(const ComplexMatrix& x, double tol) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(std::abs(x.data()[i]) - 1.0) > tol) return false;
  return true;
}

bool on_phase_grid(const ComplexMatrix& x, int n_ps, double tol) {
  const double step = 2.0 * std::numbers::pi / n_ps;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = std::arg(x.data()[i]) / step;
    if (std::abs(t - std::round(t)) * step > tol) return false;
  }
  return true;
}

ConstraintReport constraint_report(const BeamformerState& s, const SystemConfig& cfg) {
  const TxCovariances tx = tx_covariances(s);
  ConstraintReport rep;
  RealVector bs_load = RealVector::Zero(cfg.M0);
  for (const auto& q : tx.Q) bs_load += real_diag(q);
  rep.bs = make_slack(cfg.alpha0, to_vec(cfg.lambda0), bs_load);
  for (std::size_t k = 0; k < tx.T.size(); ++k)
    rep.ul.push_back(make_slack(cfg.alphak, to_vec(cfg.lambdak[k]), real_diag(tx.T[k])));
  rep.unit_modulus = is_unit_modulus(s.G) && is_unit_modulus(s.F);
  rep.quantized = rep.unit_modulus && on_phase_grid(s.G, cfg.n_ps) && on_phase_grid(s.F, cfg.n_ps);
  return rep;
}

}  // namespace fdhybf
