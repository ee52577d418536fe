#ifndef FDHYBF_TEST_HELPERS_HPP
#define FDHYBF_TEST_HELPERS_HPP

#include "fdhybf/channel_model.hpp"
#include "fdhybf/config.hpp"
#include "fdhybf/matrix_kernels.hpp"

namespace fdhybf::test {

inline ComplexMatrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.complex_normal();
  return m;
}

// X X^H plus a ridge; ridge 0 gives a rank-deficient PSD matrix when c < n.
inline ComplexMatrix random_psd(Rng& rng, Eigen::Index n, Eigen::Index c, double ridge) {
  const ComplexMatrix x = random_matrix(rng, n, c);
  ComplexMatrix p = x * x.adjoint();
  p.diagonal().array() += ridge;
  return hermitian_part(p);
}

// M0=6, N0=4, Mt=Nr=3, one uplink and one downlink user with 2 antennas.
inline SystemConfig small_config(int streams = 1) {
  SystemConfig c;
  c.M0 = 6;
  c.N0 = 4;
  c.set_rf_chains(3);
  c.set_users(1, 1, 2, streams);
  c.lambda0.clear();
  c.lambdak.clear();
  c.finalize();
  return c;
}

}  // namespace fdhybf::test

#endif
