#include <cmath>

#include "doctest.h"
#include "fdhybf/hybrid_optimizer.hpp"
#include "helpers.hpp"

using namespace fdhybf;
using fdhybf::test::random_matrix;
using fdhybf::test::small_config;

namespace {

GradientSet zero_gradients(const BeamformerState& s) {
  GradientSet g;
  for (const auto& u : s.U) {
    g.A.push_back(ComplexMatrix::Zero(u.rows(), u.rows()));
    g.B.push_back(ComplexMatrix::Zero(u.rows(), u.rows()));
  }
  for (std::size_t j = 0; j < s.V.size(); ++j) {
    g.C.push_back(ComplexMatrix::Zero(s.G.rows(), s.G.rows()));
    g.D.push_back(ComplexMatrix::Zero(s.G.rows(), s.G.rows()));
  }
  return g;
}

// Largest sine of the principal angles between two column spaces.
double subspace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix qa = Eigen::HouseholderQR<ComplexMatrix>(a).householderQ() *
                           ComplexMatrix::Identity(a.rows(), a.cols());
  const ComplexMatrix qb = Eigen::HouseholderQR<ComplexMatrix>(b).householderQ() *
                           ComplexMatrix::Identity(b.rows(), b.cols());
  return (qb - qa * (qa.adjoint() * qb)).norm();
}

ComplexMatrix top_eigvecs(const ComplexMatrix& x, Eigen::Index d) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(x);
  return es.eigenvectors().rightCols(d);
}

SystemConfig digital_config() {
  SystemConfig c;
  c.M0 = 4;
  c.N0 = 4;
  c.set_rf_chains(4);
  c.set_users(1, 1, 2, 2);
  c.lambda0.clear();
  c.lambdak.clear();
  c.finalize();
  return c;
}

}  // namespace

TEST_CASE("initial state") {
  const SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 5);
  const BeamformerState a = init_state(ch, cfg, 6);
  const BeamformerState b = init_state(ch, cfg, 6);
  CHECK(a.G == b.G);
  CHECK(a.F == b.F);
  CHECK(a.U[1] == b.U[1]);
  CHECK(a.V[0] == b.V[0]);
  CHECK(a.Pj[0] == b.Pj[0]);
  const ConstraintReport r = constraint_report(a, cfg);
  CHECK(r.max_violation() <= 1e-12);
  CHECK(is_unit_modulus(a.G));
  CHECK(on_phase_grid(a.G, cfg.n_ps));
  CHECK(on_phase_grid(a.F, cfg.n_ps));
}

TEST_CASE("uplink digital update") {
  const SystemConfig cfg = small_config(2);
  const ChannelSet ch = generate_channels(cfg, 9);
  BeamformerState s = init_state(ch, cfg, 9);
  s.ul[0].l = 1.0;
  const GradientSet g0 = zero_gradients(s);
  const ComplexMatrix u = update_digital_ul(0, ch, s, g0, cfg);
  const ComplexMatrix fh = s.F * ch.h_ul[0];
  const ComplexMatrix a = fh.adjoint() * hpd_inverse(rx_covariances(ch, s, cfg).Rbar_ul[0]) * fh;
  CHECK(subspace_distance(u, top_eigvecs(a, 2)) < 1e-6);

  const GradientSet g = compute_gradients(ch, s, cfg);
  double residual = 1.0;
  const ComplexMatrix v = update_digital_ul(0, ch, s, g, cfg,
                                            [&](const std::string&, const EigenPair& p, const GenEigResult& r) {
                                              residual = gen_eig_residual(p.a, p.b, r.vectors, r.values);
                                            });
  CHECK(residual < 1e-8);
  for (Eigen::Index i = 0; i < v.cols(); ++i) CHECK(std::abs(v.col(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("downlink digital update") {
  const SystemConfig cfg = digital_config();
  const ChannelSet ch = generate_channels(cfg, 10);
  BeamformerState s = init_state(ch, cfg, 10, true);
  s.bs.l = 1.0;
  const ComplexMatrix v = update_digital_dl(0, ch, s, zero_gradients(s), cfg);
  const ComplexMatrix& h = ch.h_dl[0];
  const ComplexMatrix a = h.adjoint() * hpd_inverse(rx_covariances(ch, s, cfg).Rbar_dl[0]) * h;
  CHECK(subspace_distance(v, top_eigvecs(a, 2)) < 1e-6);

  const SystemConfig hy = small_config(2);
  const ChannelSet ch2 = generate_channels(hy, 11);
  const BeamformerState s2 = init_state(ch2, hy, 11);
  double residual = 1.0;
  const ComplexMatrix w = update_digital_dl(0, ch2, s2, compute_gradients(ch2, s2, hy), hy,
                                            [&](const std::string&, const EigenPair& p, const GenEigResult& r) {
                                              residual = gen_eig_residual(p.a, p.b, r.vectors, r.values);
                                            });
  CHECK(residual < 1e-8);
  for (Eigen::Index i = 0; i < w.cols(); ++i) CHECK(std::abs(w.col(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("Kronecker vectorization identity") {
  Rng rng(12);
  const ComplexMatrix a = random_matrix(rng, 2, 2);
  const ComplexMatrix x = random_matrix(rng, 2, 3);
  const ComplexMatrix b = random_matrix(rng, 3, 2);
  const ComplexVector lhs = vec(a * x * b);
  const ComplexVector rhs = kron(b.transpose(), a) * vec(x);
  CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
  CHECK(unvec(vec(x), 2, 3) == x);
}

TEST_CASE("analog beamformer pair with one RF chain") {
  SystemConfig cfg = small_config(1);
  cfg.set_rf_chains(1);
  cfg.finalize();
  const ChannelSet ch = generate_channels(cfg, 13);
  const BeamformerState s = init_state(ch, cfg, 13);
  const GradientSet g = compute_gradients(ch, s, cfg);
  const EigenPair p = analog_beamformer_pair(ch, cfg, s, g);
  // scalar W: the pair is the plain antenna-domain pair up to positive factors
  const double w = s.Pj[0](0) * std::norm(s.V[0](0, 0));
  const ComplexMatrix& h = ch.h_dl[0];
  const ComplexMatrix m = h.adjoint() * hpd_inverse(rx_covariances(ch, s, cfg).Rbar_dl[0]) * h;
  const double k = (s.G.adjoint() * m * s.G)(0, 0).real();
  CHECK((p.a - cfg.wj[0] * (w / (1.0 + k * w)) * m).norm() < 1e-10 * p.a.norm());
  ComplexMatrix n = g.C[0] + g.D[0];
  n.diagonal() += s.bs.psi.cast<cd>();
  n.diagonal().array() += s.bs.l;
  CHECK((p.b - w * n).norm() < 1e-10 * (1.0 + p.b.norm()));
}

TEST_CASE("unconstrained analog update raises the surrogate") {
  SolverOptions o;
  o.mode = AnalogMode::AmplitudeModulated;
  o.quantize = false;
  const SystemConfig cfg = small_config(1);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const ChannelSet ch = generate_channels(cfg, 100 + t);
    const BeamformerState s = init_state(ch, cfg, 200 + t);
    const GradientSet g = compute_gradients(ch, s, cfg);
    double residual = 1.0;
    o.on_update = [&](const std::string&, const EigenPair& p, const GenEigResult& r) {
      residual = gen_eig_residual(p.a, p.b, r.vectors, r.values);
    };
    const AnalogUpdate up = update_analog_beamformer(ch, s, g, cfg, o);
    CHECK(residual < 1e-8);
    CHECK(analog_surrogate(ch, cfg, s, g, up.unconstrained) >=
          analog_surrogate(ch, cfg, s, g, s.G) - 1e-12);
  }
}

TEST_CASE("analog combiner") {
  // one uplink user, no downlink, clean hardware
  SystemConfig cfg;
  cfg.M0 = 4;
  cfg.N0 = 6;
  cfg.Mt = 2;
  cfg.Nr = 2;
  cfg.set_users(1, 0, 3, 2);
  cfg.lambda0.clear();
  cfg.lambdak.clear();
  cfg.finalize();
  cfg.make_ideal();
  const ChannelSet ch = generate_channels(cfg, 14);
  const BeamformerState s = init_state(ch, cfg, 14);
  SolverOptions o;
  double residual = 1.0;
  o.on_update = [&](const std::string&, const EigenPair& p, const GenEigResult& r) {
    residual = gen_eig_residual(p.a, p.b, r.vectors, r.values);
  };
  const AnalogUpdate up = update_analog_combiner(ch, s, cfg, o);
  CHECK(residual < 1e-8);
  const ComplexMatrix sig = ch.h_ul[0] * tx_covariances(s).T[0] * ch.h_ul[0].adjoint();
  CHECK(subspace_distance(up.unconstrained.adjoint(), top_eigvecs(sig, 2)) < 1e-6);
  CHECK(is_unit_modulus(up.constrained));
  CHECK(on_phase_grid(up.constrained, cfg.n_ps));
}

TEST_CASE("alternating optimization") {
  const SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 15);

  SolverOptions am;
  am.mode = AnalogMode::AmplitudeModulated;
  am.quantize = false;
  am.seed = 3;
  const SolverResult r = run_algorithm1(ch, cfg, am);
  CHECK(r.trace.termination == "converged");
  double prev = r.trace.initial_wsr;
  for (double v : r.trace.wsr) {
    CHECK(v >= prev - 1e-8);
    prev = v;
  }

  SolverOptions um;
  um.seed = 3;
  const SolverResult q = run_algorithm1(ch, cfg, um);
  const ConstraintReport rep = constraint_report(q.state, cfg);
  CHECK(rep.bs.sum_slack >= -1e-6 * cfg.alpha0);
  CHECK(rep.bs.antenna_slack.minCoeff() >= -1e-6 * cfg.alpha0);
  for (const auto& u : rep.ul) {
    CHECK(u.sum_slack >= -1e-6 * cfg.alphak);
    CHECK(u.antenna_slack.minCoeff() >= -1e-6 * cfg.alphak);
  }
  CHECK(rep.unit_modulus);
  CHECK(rep.quantized);
  CHECK(q.trace.wsr.back() > q.trace.initial_wsr);

  SystemConfig none = cfg;
  none.set_users(0, 0, 2, 1);
  none.lambdak.clear();
  none.finalize();
  const ChannelSet c0 = generate_channels(none, 1);
  const SolverResult z = run_algorithm1(c0, none, um);
  CHECK(z.trace.termination == "degenerate");
  CHECK(z.trace.wsr.empty());
  CHECK(z.trace.initial_wsr == 0.0);
}

TEST_CASE("capacity cap") {
  const SystemConfig cfg = desk_profile();
  const ChannelSet ch = generate_channels(cfg, 16);
  SolverOptions o;
  o.kron_cap = 16;
  CHECK_THROWS_AS(run_algorithm1(ch, cfg, o), CapacityError);
}
