#ifndef FDHYBF_TEST_GRADIENT_ORACLE_HPP
#define FDHYBF_TEST_GRADIENT_ORACLE_HPP

#include <functional>

#include "fdhybf/gradients.hpp"

namespace fdhybf::test {

// Weighted sum of the selected uplink and downlink rates.
inline double rate_part(const ChannelSet& ch, const SystemConfig& cfg, const ComplexMatrix& F,
                        const TxCovariances& tx, const std::function<bool(bool, std::size_t)>& keep) {
  const UserRates r = user_rates(rx_covariances(ch, cfg, F, tx));
  double v = 0.0;
  for (std::size_t k = 0; k < r.ul.size(); ++k)
    if (keep(true, k)) v += cfg.wk[k] * r.ul[k];
  for (std::size_t j = 0; j < r.dl.size(); ++j)
    if (keep(false, j)) v += cfg.wj[j] * r.dl[j];
  return v;
}

// Central-difference matrix E with df = Re tr(E dX) for Hermitian dX, where
// `slot` selects the perturbed covariance inside `tx`.
inline ComplexMatrix fd_gradient(const std::function<double(const TxCovariances&)>& f,
                                 TxCovariances tx,
                                 const std::function<ComplexMatrix&(TxCovariances&)>& slot,
                                 double step) {
  const Eigen::Index n = slot(tx).rows();
  const double scale = slot(tx).norm() / static_cast<double>(n);
  const double h = step * (scale > 0.0 ? scale : 1.0);
  ComplexMatrix e = ComplexMatrix::Zero(n, n);
  auto eval = [&](Eigen::Index a, Eigen::Index b, cd dir) {
    TxCovariances p = tx, m = tx;
    slot(p)(a, b) += h * dir;
    slot(m)(a, b) -= h * dir;
    if (a != b) {
      slot(p)(b, a) += h * std::conj(dir);
      slot(m)(b, a) -= h * std::conj(dir);
    }
    return (f(p) - f(m)) / (2.0 * h);
  };
  for (Eigen::Index a = 0; a < n; ++a) {
    e(a, a) = eval(a, a, 1.0);
    for (Eigen::Index b = a + 1; b < n; ++b) {
      // Re tr(E d) with d = e_a e_b^T + e_b e_a^T gives 2 Re E_ba; imaginary direction gives -2 Im E_ba
      const double re = eval(a, b, cd(1.0, 0.0)) / 2.0;
      const double im = eval(a, b, cd(0.0, 1.0)) / 2.0;
      e(b, a) = cd(re, -im);
      e(a, b) = std::conj(e(b, a));
    }
  }
  return e;
}

}  // namespace fdhybf::test

#endif
