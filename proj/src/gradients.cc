#include "fdhybf/gradients.hpp"

namespace fdhybf {

namespace {

// R^-1 + beta diag(R^-1) taken for Rbar minus the same for R.
ComplexMatrix ldr_delta(const ComplexMatrix& r_inv, const ComplexMatrix& rbar_inv, double beta) {
  ComplexMatrix d = rbar_inv - r_inv;
  d.diagonal() += beta * d.diagonal();
  return d;
}

// A^H D A + a diag(A^H D A)
ComplexMatrix pullback(const ComplexMatrix& a, const ComplexMatrix& d, double coef) {
  ComplexMatrix m = a.adjoint() * d * a;
  m.diagonal() += coef * m.diagonal();
  return m;
}

}  // namespace

GradientSet compute_gradients(const ChannelSet& ch, const SystemConfig& cfg,
                              const ComplexMatrix& F, const CovarianceSet& cov) {
  const std::size_t K = cov.R_ul.size();
  const std::size_t J = cov.R_dl.size();
  const Eigen::Index m0 = ch.h_si.cols();

  std::vector<ComplexMatrix> delta_ul(K), delta_dl(J);
  if (K > 0) {
    const ComplexMatrix r_inv = hpd_inverse(cov.R_ul[0]);
    for (std::size_t i = 0; i < K; ++i)
      delta_ul[i] = cfg.wk[i] * ldr_delta(r_inv, hpd_inverse(cov.Rbar_ul[i]), cfg.beta0);
  }
  for (std::size_t l = 0; l < J; ++l)
    delta_dl[l] = cfg.wj[l] *
                  ldr_delta(hpd_inverse(cov.R_dl[l]), hpd_inverse(cov.Rbar_dl[l]), cfg.betaj[l]);

  GradientSet g;
  for (std::size_t k = 0; k < K; ++k) {
    const Eigen::Index mk = ch.h_ul[k].cols();
    const ComplexMatrix fh = F * ch.h_ul[k];
    ComplexMatrix a = ComplexMatrix::Zero(mk, mk);
    for (std::size_t i = 0; i < K; ++i)
      if (i != k) a += pullback(fh, delta_ul[i], cfg.kk[k]);
    ComplexMatrix b = ComplexMatrix::Zero(mk, mk);
    for (std::size_t l = 0; l < J; ++l) b += pullback(ch.h_cross[l][k], delta_dl[l], cfg.kk[k]);
    g.A.push_back(hermitian_part(a));
    g.B.push_back(hermitian_part(b));
  }

  // Every downlink covariance enters the uplink identically.
  ComplexMatrix d = ComplexMatrix::Zero(m0, m0);
  if (K > 0) {
    const ComplexMatrix fh0 = F * ch.h_si;
    for (std::size_t m = 0; m < K; ++m) d += pullback(fh0, delta_ul[m], cfg.k0);
  }
  d = hermitian_part(d);
  std::vector<ComplexMatrix> dl_terms(J);
  for (std::size_t n = 0; n < J; ++n) dl_terms[n] = pullback(ch.h_dl[n], delta_dl[n], cfg.k0);
  for (std::size_t j = 0; j < J; ++j) {
    ComplexMatrix c = ComplexMatrix::Zero(m0, m0);
    for (std::size_t n = 0; n < J; ++n)
      if (n != j) c += dl_terms[n];
    g.C.push_back(hermitian_part(c));
    g.D.push_back(d);
  }
  return g;
}

GradientSet compute_gradients(const ChannelSet& ch, const BeamformerState& s,
                              const SystemConfig& cfg) {
  return compute_gradients(ch, cfg, s.F, rx_covariances(ch, s, cfg));
}

double minorizer_value(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                       const GradientSet& grads, const BeamformerState& anchor) {
  const CovarianceSet acov = rx_covariances(ch, anchor, cfg);
  const TxCovariances atx = tx_covariances(anchor);
  const TxCovariances tx = tx_covariances(s);
  double v = 0.0;
  for (std::size_t k = 0; k < tx.T.size(); ++k) {
    const ComplexMatrix fh = s.F * ch.h_ul[k];
    const ComplexMatrix r = acov.Rbar_ul[k] + fh * tx.T[k] * fh.adjoint();
    v += cfg.wk[k] * log_ratio(r, acov.Rbar_ul[k]);
    v -= ((tx.T[k] - atx.T[k]) * (grads.A[k] + grads.B[k])).trace().real();
  }
  for (std::size_t j = 0; j < tx.Q.size(); ++j) {
    const ComplexMatrix& h = ch.h_dl[j];
    const ComplexMatrix r = acov.Rbar_dl[j] + h * tx.Q[j] * h.adjoint();
    v += cfg.wj[j] * log_ratio(r, acov.Rbar_dl[j]);
    v -= ((tx.Q[j] - atx.Q[j]) * (grads.C[j] + grads.D[j])).trace().real();
  }
  return v;
}

}  // namespace fdhybf
