#include "doctest.h"
#include "fdhybf/hybrid_optimizer.hpp"
#include "gradient_oracle.hpp"
#include "helpers.hpp"

using namespace fdhybf;
using fdhybf::test::fd_gradient;
using fdhybf::test::rate_part;
using fdhybf::test::small_config;

namespace {

double rel(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double d = (a - b).norm();
  const double s = std::max(a.norm(), b.norm());
  return s > 0.0 ? d / s : d;
}

}  // namespace

TEST_CASE("gradient sums vanish without partners") {
  SystemConfig cfg = desk_profile();
  cfg.set_users(1, 2, 2, 1);
  cfg.lambdak.clear();
  cfg.finalize();
  const ChannelSet ch = generate_channels(cfg, 1);
  const GradientSet g = compute_gradients(ch, init_state(ch, cfg, 1), cfg);
  CHECK(g.A[0].norm() == 0.0);
  CHECK(g.B[0].norm() > 0.0);

  SystemConfig ul = desk_profile();
  ul.set_users(2, 0, 2, 1);
  ul.lambdak.clear();
  ul.finalize();
  const ChannelSet cu = generate_channels(ul, 1);
  const GradientSet gu = compute_gradients(cu, init_state(cu, ul, 1), ul);
  for (const auto& b : gu.B) CHECK(b.norm() == 0.0);
  CHECK(gu.C.empty());
}

TEST_CASE("gradients match finite differences") {
  const SystemConfig cfg = small_config(2);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ChannelSet ch = generate_channels(cfg, seed);
    const BeamformerState s = init_state(ch, cfg, seed + 100);
    const GradientSet g = compute_gradients(ch, s, cfg);
    const TxCovariances tx = tx_covariances(s);
    auto part = [&](auto keep) {
      return [&, keep](const TxCovariances& t) { return rate_part(ch, cfg, s.F, t, keep); };
    };
    auto t0 = [](TxCovariances& t) -> ComplexMatrix& { return t.T[0]; };
    auto q0 = [](TxCovariances& t) -> ComplexMatrix& { return t.Q[0]; };
    const ComplexMatrix fb =
        fd_gradient(part([](bool ul, std::size_t) { return !ul; }), tx, t0, 1e-6);
    const ComplexMatrix fd =
        fd_gradient(part([](bool ul, std::size_t) { return ul; }), tx, q0, 1e-6);
    CHECK(rel(-fb, g.B[0]) < 1e-4);
    CHECK(rel(-fd, g.D[0]) < 1e-4);
  }
}

TEST_CASE("gradients with two users per side") {
  const SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 21);
  const BeamformerState s = init_state(ch, cfg, 22);
  const GradientSet g = compute_gradients(ch, s, cfg);
  const TxCovariances tx = tx_covariances(s);
  for (std::size_t u = 0; u < 2; ++u) {
    auto tu = [u](TxCovariances& t) -> ComplexMatrix& { return t.T[u]; };
    auto qu = [u](TxCovariances& t) -> ComplexMatrix& { return t.Q[u]; };
    auto others_ul = [&, u](const TxCovariances& t) {
      return rate_part(ch, cfg, s.F, t, [u](bool ul, std::size_t i) { return ul && i != u; });
    };
    auto others_dl = [&, u](const TxCovariances& t) {
      return rate_part(ch, cfg, s.F, t, [u](bool ul, std::size_t i) { return !ul && i != u; });
    };
    CHECK(rel(-fd_gradient(others_ul, tx, tu, 1e-6), g.A[u]) < 1e-4);
    CHECK(rel(-fd_gradient(others_dl, tx, qu, 1e-6), g.C[u]) < 1e-4);
  }
}

TEST_CASE("minorizer touches and bounds the rate") {
  SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 31);
  const BeamformerState a = init_state(ch, cfg, 32);
  const GradientSet g = compute_gradients(ch, a, cfg);
  CHECK(minorizer_value(ch, cfg, a, g, a) == doctest::Approx(wsr(ch, a, cfg)).epsilon(1e-9));

  BeamformerState z = a;
  for (auto& p : z.Pk) p.setZero();
  for (auto& p : z.Pj) p.setZero();
  const GradientSet gz = compute_gradients(ch, z, cfg);
  CHECK(std::abs(minorizer_value(ch, cfg, z, gz, z)) < 1e-12);

  // Lower bound when one user's covariance moves, which is how the
  // alternating updates use it.
  for (int ideal = 0; ideal < 2; ++ideal) {
    SystemConfig c = cfg;
    if (ideal) c.make_ideal();
    const GradientSet gi = compute_gradients(ch, a, c);
    Rng rng(33);
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
      BeamformerState s = a;
      const double amp = t < 50 ? 0.3 : 2.0;
      const std::size_t u = static_cast<std::size_t>(t % 2);
      if (t % 4 < 2) {
        s.U[u] += amp * fdhybf::test::random_matrix(rng, s.U[u].rows(), s.U[u].cols());
        s.Pk[u] *= 0.2 + 2.0 * rng.uniform();
      } else {
        s.V[u] += amp * fdhybf::test::random_matrix(rng, s.V[u].rows(), s.V[u].cols());
        s.Pj[u] *= 0.2 + 2.0 * rng.uniform();
      }
      if (minorizer_value(ch, c, s, gi, a) > wsr(ch, s, c) + 1e-8) ++violations;
    }
    CHECK(violations == 0);
  }
}
