#include "fdhybf/hybrid_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fdhybf {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;

ComplexMatrix random_phases(Eigen::Index rows, Eigen::Index cols, int n_ps, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto q = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n_ps));
      m(r, c) = std::polar(1.0, 2.0 * std::numbers::pi * q / n_ps);
    }
  return m;
}

ComplexMatrix top_right_singular(const ComplexMatrix& h, int d) {
  Eigen::JacobiSVD<ComplexMatrix> svd(h, Eigen::ComputeThinV);
  ComplexMatrix v = svd.matrixV().leftCols(d);
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    const double mag = std::abs(v(arg, c));
    if (mag > 0.0) v.col(c) *= std::conj(v(arg, c)) / mag;
  }
  return v;
}

void normalize_columns(ComplexMatrix& x) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double n = x.col(c).norm();
    if (n > 0.0) x.col(c) /= n;
  }
}

RealVector to_vec(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Scale for equal per-stream power p so that both sum and per-antenna limits hold.
double equal_power(const ComplexMatrix& x, double budget, const RealVector& caps) {
  const RealVector rows = x.cwiseAbs2().rowwise().sum();
  const double total = rows.sum();
  if (!(total > 0.0)) return 0.0;
  double p = budget / total;
  for (Eigen::Index m = 0; m < rows.size(); ++m)
    if (rows(m) > 0.0) p = std::min(p, caps(m) / rows(m));
  return p;
}

// Powers for fresh eigen-beamformers at the converged multipliers. When the
// beamformers do not diagonalize the pair (clustered eigenvalues), fall back
// to the eigenbasis of the bisection's optimal covariance.
void set_stream_powers(ComplexMatrix& beam, RealVector& power, const UserProblem& u,
                       const BisectionResult& r, std::size_t user) {
  auto use_bisection = [&] {
    beam = r.rotation[user].leftCols(beam.cols());
    power = r.power[user].head(beam.cols());
  };
  try {
    const SigmaPair sp = sigma_pair(beam.adjoint() * u.quality * beam,
                                    beam.adjoint() * user_penalty(u, r.mult) * beam);
    power = water_fill(sp, u.weight) * r.scale;
    for (Eigen::Index i = 0; i < power.size(); ++i)
      if (!std::isfinite(power(i))) power(i) = 0.0;
  } catch (const StaleBeamformerError&) {
    use_bisection();
    return;
  }
  // A ridge-regularized eigen-solve can drift from the exact maximizer when the
  // penalty is nearly singular; the bisection's covariance is authoritative.
  const ComplexMatrix q = beam * power.cast<cd>().asDiagonal() * beam.adjoint();
  const ComplexMatrix ref = r.power_matrix[user] * r.scale;
  if ((q - ref).norm() > 1e-6 * std::max(ref.norm(), 1e-300)) use_bisection();
}

ComplexMatrix penalty_with_multipliers(const ComplexMatrix& grad, const NodeMultipliers& mu) {
  ComplexMatrix b = grad;
  b.diagonal().array() += mu.l;
  if (mu.psi.size() == b.rows()) b.diagonal() += mu.psi.cast<cd>();
  return hermitian_part(b);
}

GenEigResult solve(const EigenPair& pair, Eigen::Index d) {
  return gen_dominant_eigvecs(HermitianMatrix(pair.a), HermitianMatrix(pair.b), d);
}

ComplexMatrix phase_projection(const ComplexMatrix& x, const SystemConfig& cfg,
                               const SolverOptions& opts) {
  return opts.quantize ? quantize_phases(x, cfg.n_ps, false) : unit_modulus_project(x);
}

ComplexMatrix apply_mode(const ComplexMatrix& x, const SystemConfig& cfg, const SolverOptions& opts,
                         bool rows_normalized) {
  if (opts.mode == AnalogMode::UnitModulus) return phase_projection(x, cfg, opts);
  ComplexMatrix y = x;
  if (rows_normalized) {
    const double target = std::sqrt(static_cast<double>(y.cols()));
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double n = y.row(r).norm();
      if (n > 0.0) y.row(r) *= target / n;
    }
  } else {
    const double n = y.norm();
    if (n > 0.0) y *= std::sqrt(static_cast<double>(y.size())) / n;
  }
  return opts.quantize ? quantize_phases(y, cfg.n_ps, true) : y;
}

}  // namespace

BeamformerState init_state(const ChannelSet& ch, const SystemConfig& cfg, std::uint64_t seed,
                           bool digital) {
  BeamformerState s;
  Rng rng(mix_seed(seed, kInitStream));
  if (digital) {
    if (cfg.Mt != cfg.M0 || cfg.Nr != cfg.N0)
      throw InputError("init_state: digital mode needs Mt = M0 and Nr = N0");
    s.G = ComplexMatrix::Identity(cfg.M0, cfg.M0);
    s.F = ComplexMatrix::Identity(cfg.N0, cfg.N0);
  } else {
    s.G = random_phases(cfg.M0, cfg.Mt, cfg.n_ps, rng);
    s.F = random_phases(cfg.Nr, cfg.N0, cfg.n_ps, rng);
  }
  for (int k = 0; k < cfg.K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    ComplexMatrix u = top_right_singular(s.F * ch.h_ul[i], cfg.uk[i]);
    const double p = equal_power(u, cfg.alphak, to_vec(cfg.lambdak[i]));
    s.U.push_back(u);
    s.Pk.push_back(RealVector::Constant(cfg.uk[i], p));
    s.ul.push_back({0.0, RealVector::Zero(cfg.Mk[i])});
  }
  ComplexMatrix all_streams(cfg.M0, 0);
  for (int j = 0; j < cfg.J; ++j) {
    const auto i = static_cast<std::size_t>(j);
    ComplexMatrix v = top_right_singular(ch.h_dl[i] * s.G, cfg.vj[i]);
    s.V.push_back(v);
    ComplexMatrix gv = s.G * v;
    ComplexMatrix grown(cfg.M0, all_streams.cols() + gv.cols());
    grown << all_streams, gv;
    all_streams = grown;
  }
  const double p0 = cfg.J > 0 ? equal_power(all_streams, cfg.alpha0, to_vec(cfg.lambda0)) : 0.0;
  for (int j = 0; j < cfg.J; ++j) s.Pj.push_back(RealVector::Constant(cfg.vj[static_cast<std::size_t>(j)], p0));
  s.bs = {0.0, RealVector::Zero(cfg.M0)};
  return s;
}

EigenPair digital_ul_pair(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                          const GradientSet& g, std::size_t k) {
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  const ComplexMatrix fh = s.F * ch.h_ul[k];
  EigenPair p;
  p.a = hermitian_part(fh.adjoint() * hpd_inverse(cov.Rbar_ul[k]) * fh);
  p.b = penalty_with_multipliers(g.A[k] + g.B[k], s.ul[k]);
  if (p.b.norm() == 0.0) p.b = ComplexMatrix::Identity(p.b.rows(), p.b.cols());
  return p;
}

EigenPair digital_dl_pair(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                          const GradientSet& g, std::size_t j) {
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  const ComplexMatrix hg = ch.h_dl[j] * s.G;
  EigenPair p;
  p.a = hermitian_part(hg.adjoint() * hpd_inverse(cov.Rbar_dl[j]) * hg);
  ComplexMatrix n = penalty_with_multipliers(g.C[j] + g.D[j], s.bs);
  if (n.norm() == 0.0) n = ComplexMatrix::Identity(n.rows(), n.cols());
  p.b = hermitian_part(s.G.adjoint() * n * s.G);
  return p;
}

ComplexMatrix update_digital_ul(std::size_t k, const ChannelSet& ch, const BeamformerState& s,
                                const GradientSet& g, const SystemConfig& cfg,
                                const UpdateHook& hook) {
  const EigenPair pair = digital_ul_pair(ch, cfg, s, g, k);
  const GenEigResult sol = solve(pair, cfg.uk[k]);
  if (hook) hook("digital-ul", pair, sol);
  ComplexMatrix u = sol.vectors;
  normalize_columns(u);
  return u;
}

ComplexMatrix update_digital_dl(std::size_t j, const ChannelSet& ch, const BeamformerState& s,
                                const GradientSet& g, const SystemConfig& cfg,
                                const UpdateHook& hook) {
  const EigenPair pair = digital_dl_pair(ch, cfg, s, g, j);
  const GenEigResult sol = solve(pair, cfg.vj[j]);
  if (hook) hook("digital-dl", pair, sol);
  ComplexMatrix v = sol.vectors;
  normalize_columns(v);
  return v;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexVector vec(const ComplexMatrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw InputError("unvec: size mismatch");
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

EigenPair analog_beamformer_pair(const ChannelSet& ch, const SystemConfig& cfg,
                                 const BeamformerState& s, const GradientSet& g) {
  const Eigen::Index m0 = s.G.rows();
  const Eigen::Index mt = s.G.cols();
  const Eigen::Index n = m0 * mt;
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  EigenPair p{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  for (std::size_t j = 0; j < s.V.size(); ++j) {
    const ComplexMatrix& h = ch.h_dl[j];
    const ComplexMatrix w = hermitian_part(s.V[j] * s.Pj[j].asDiagonal() * s.V[j].adjoint());
    const ComplexMatrix m = hermitian_part(h.adjoint() * hpd_inverse(cov.Rbar_dl[j]) * h);
    const ComplexMatrix k = hermitian_part(s.G.adjoint() * m * s.G);
    const ComplexMatrix ikw = ComplexMatrix::Identity(mt, mt) + k * w;
    // X = W (I + K W)^-1, Hermitian by the push-through identity.
    const ComplexMatrix x = hermitian_part(ikw.transpose().partialPivLu().solve(w.transpose()).transpose());
    p.a += cfg.wj[j] * kron(x.transpose(), m);
    p.b += kron(w.transpose(), penalty_with_multipliers(g.C[j] + g.D[j], s.bs));
  }
  p.a = hermitian_part(p.a);
  p.b = hermitian_part(p.b);
  return p;
}

EigenPair analog_combiner_pair(const ChannelSet& ch, const SystemConfig& cfg,
                               const BeamformerState& s) {
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  const Eigen::Index n0 = ch.h_si.rows();
  EigenPair p{ComplexMatrix::Zero(n0, n0), ComplexMatrix::Zero(n0, n0)};
  for (std::size_t k = 0; k < cov.R_ul_ant.size(); ++k) {
    p.a += cfg.wk[k] * cov.R_ul_ant[k];
    p.b += cfg.wk[k] * cov.Rbar_ul_ant[k];
  }
  p.a = hermitian_part(p.a);
  p.b = hermitian_part(p.b);
  return p;
}

AnalogUpdate update_analog_beamformer(const ChannelSet& ch, const BeamformerState& s,
                                      const GradientSet& g, const SystemConfig& cfg,
                                      const SolverOptions& opts) {
  const auto dim = static_cast<std::size_t>(s.G.rows() * s.G.cols());
  if (dim > opts.kron_cap)
    throw CapacityError("analog beamformer: Mt*M0 = " + std::to_string(dim) +
                        " exceeds the configured cap of " + std::to_string(opts.kron_cap));
  const EigenPair pair = analog_beamformer_pair(ch, cfg, s, g);
  const GenEigResult sol = solve(pair, 1);
  if (opts.on_update) opts.on_update("analog-beamformer", pair, sol);
  AnalogUpdate out;
  out.unconstrained = unvec(sol.vectors.col(0), s.G.rows(), s.G.cols());
  out.constrained = apply_mode(out.unconstrained, cfg, opts, false);
  out.phase_only = phase_projection(out.unconstrained, cfg, opts);
  return out;
}

AnalogUpdate update_analog_combiner(const ChannelSet& ch, const BeamformerState& s,
                                    const SystemConfig& cfg, const SolverOptions& opts) {
  const EigenPair pair = analog_combiner_pair(ch, cfg, s);
  const GenEigResult sol = solve(pair, s.F.rows());
  if (opts.on_update) opts.on_update("analog-combiner", pair, sol);
  AnalogUpdate out;
  out.unconstrained = sol.vectors.adjoint();
  out.constrained = apply_mode(out.unconstrained, cfg, opts, true);
  out.phase_only = phase_projection(out.unconstrained, cfg, opts);
  return out;
}

double analog_surrogate(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                        const GradientSet& g, const ComplexMatrix& G) {
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  double v = 0.0;
  for (std::size_t j = 0; j < s.V.size(); ++j) {
    const ComplexMatrix w = s.V[j] * s.Pj[j].asDiagonal() * s.V[j].adjoint();
    const ComplexMatrix hg = ch.h_dl[j] * G;
    const ComplexMatrix sig = hg * w * hg.adjoint();
    v += cfg.wj[j] * log_ratio(cov.Rbar_dl[j] + sig, cov.Rbar_dl[j]);
    const ComplexMatrix n = penalty_with_multipliers(g.C[j] + g.D[j], s.bs);
    v -= (G * w * G.adjoint() * n).trace().real();
  }
  return v;
}

void restore_bs_feasibility(BeamformerState& s, const SystemConfig& cfg) {
  const TxCovariances tx = tx_covariances(s);
  RealVector load = RealVector::Zero(cfg.M0);
  for (const auto& q : tx.Q) load += q.diagonal().real();
  double scale = 1.0;
  const double total = load.sum();
  if (total > cfg.alpha0) scale = cfg.alpha0 / total;
  for (int m = 0; m < cfg.M0; ++m)
    if (load(m) > cfg.lambda0[static_cast<std::size_t>(m)])
      scale = std::min(scale, cfg.lambda0[static_cast<std::size_t>(m)] / load(m));
  if (scale < 1.0)
    for (auto& p : s.Pj) p *= scale;
}

void restore_ul_feasibility(BeamformerState& s, const SystemConfig& cfg, std::size_t k) {
  const ComplexMatrix t = s.U[k] * s.Pk[k].asDiagonal() * s.U[k].adjoint();
  const RealVector load = t.diagonal().real();
  double scale = 1.0;
  if (load.sum() > cfg.alphak) scale = cfg.alphak / load.sum();
  for (Eigen::Index m = 0; m < load.size(); ++m)
    if (load(m) > cfg.lambdak[k][static_cast<std::size_t>(m)])
      scale = std::min(scale, cfg.lambdak[k][static_cast<std::size_t>(m)] / load(m));
  if (scale < 1.0) s.Pk[k] *= scale;
}

SolverResult run_algorithm1(const ChannelSet& ch, const SystemConfig& cfg,
                            const SolverOptions& opts) {
  return run_algorithm1(ch, cfg, opts, init_state(ch, cfg, opts.seed, !opts.update_analog));
}

SolverResult run_algorithm1(const ChannelSet& ch, const SystemConfig& cfg,
                            const SolverOptions& opts, BeamformerState s) {
  if (!(opts.rel_tol > 0.0)) throw InputError("run_algorithm1: rel_tol must be > 0");
  SolverResult res;
  ConvergenceTrace& tr = res.trace;
  if (cfg.K == 0 && cfg.J == 0) {
    res.state = std::move(s);
    tr.termination = "degenerate";
    return res;
  }
  if (opts.update_analog && cfg.J > 0 &&
      static_cast<std::size_t>(cfg.M0) * static_cast<std::size_t>(cfg.Mt) > opts.kron_cap)
    throw CapacityError("analog beamformer: Mt*M0 = " + std::to_string(cfg.M0 * cfg.Mt) +
                        " exceeds the configured cap of " + std::to_string(opts.kron_cap));

  double current = wsr(ch, s, cfg);
  tr.initial_wsr = current;
  BeamformerState best = s;
  double best_wsr = current;

  // Accept a candidate block update, or roll it back when the guard is on
  // and the true WSR dropped.
  auto commit = [&](BeamformerState& candidate) {
    const double v = wsr(ch, candidate, cfg);
    if (opts.monotone_guard && v < current) return;
    s = std::move(candidate);
    current = v;
  };

  tr.termination = "max-iters";
  for (int it = 0; it < opts.max_outer_iters; ++it) {
    const double previous = current;

    if (opts.update_analog) {
      // With amplitude control a phase-only matrix is feasible too; take the better one.
      const bool both = opts.mode == AnalogMode::AmplitudeModulated;
      if (cfg.J > 0) {
        const GradientSet g = compute_gradients(ch, s, cfg);
        const AnalogUpdate up = update_analog_beamformer(ch, s, g, cfg, opts);
        BeamformerState cand = s;
        cand.G = up.constrained;
        restore_bs_feasibility(cand, cfg);
        if (both) {
          BeamformerState alt = s;
          alt.G = up.phase_only;
          restore_bs_feasibility(alt, cfg);
          if (wsr(ch, alt, cfg) > wsr(ch, cand, cfg)) cand = std::move(alt);
        }
        commit(cand);
      }
      if (cfg.K > 0) {
        const AnalogUpdate up = update_analog_combiner(ch, s, cfg, opts);
        BeamformerState cand = s;
        cand.F = up.constrained;
        if (both) {
          BeamformerState alt = s;
          alt.F = up.phase_only;
          if (wsr(ch, alt, cfg) > wsr(ch, cand, cfg)) cand = std::move(alt);
        }
        commit(cand);
      }
    }

    // Downlink users share the base-station multipliers, so they move together.
    // Every pair is taken at the anchor state the multipliers were solved for.
    if (cfg.J > 0) {
      const GradientSet g = compute_gradients(ch, s, cfg);
      const NodeProblem np = node_problem_dl(ch, cfg, s, g);
      const BisectionResult r = bisect_node(np, s.bs, opts.bisection);
      BeamformerState anchor = s;
      anchor.bs = r.mult;
      BeamformerState cand = anchor;
      for (int j = 0; j < cfg.J; ++j) {
        const auto i = static_cast<std::size_t>(j);
        cand.V[i] = update_digital_dl(i, ch, anchor, g, cfg, opts.on_update);
        set_stream_powers(cand.V[i], cand.Pj[i], np.users[i], r, i);
      }
      restore_bs_feasibility(cand, cfg);
      commit(cand);
    }

    for (int k = 0; k < cfg.K; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const GradientSet g = compute_gradients(ch, s, cfg);
      const NodeProblem np = node_problem_ul(ch, cfg, s, g, i);
      const BisectionResult r = bisect_node(np, s.ul[i], opts.bisection);
      BeamformerState anchor = s;
      anchor.ul[i] = r.mult;
      BeamformerState cand = anchor;
      cand.U[i] = update_digital_ul(i, ch, anchor, g, cfg, opts.on_update);
      set_stream_powers(cand.U[i], cand.Pk[i], np.users[0], r, 0);
      restore_ul_feasibility(cand, cfg, i);
      commit(cand);
    }

    tr.wsr.push_back(current);
    tr.max_violation.push_back(constraint_report(s, cfg).max_violation());
    tr.iterations = it + 1;
    if (current > best_wsr) {
      best_wsr = current;
      best = s;
    }
    const double denom = std::max(std::abs(current), 1e-12);
    if (std::abs(current - previous) / denom < opts.rel_tol) {
      tr.termination = "converged";
      break;
    }
  }
  res.state = tr.termination == "converged" ? std::move(s) : std::move(best);
  return res;
}

}  // namespace fdhybf
