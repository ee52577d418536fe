#include "fdhybf/power_allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdhybf {

namespace {

constexpr double kFeasTol = 1e-12;

RealVector to_vec(const std::vector<double>& v) {
  return Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double max_offdiag_ratio(const ComplexMatrix& m) {
  const double dmax = m.diagonal().cwiseAbs().maxCoeff();
  double off = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) off = std::max(off, std::abs(m(i, j)));
  if (off == 0.0) return 0.0;
  return dmax > 0.0 ? off / dmax : std::numeric_limits<double>::infinity();
}

// Constraint index 0 is the sum power, index m + 1 is antenna m.
// Returns load - limit (scaled by the limit); +inf when the Lagrangian is unbounded.
double margin(const NodeProblem& p, const MultiplierSet& mu, int which) {
  RealVector load = RealVector::Zero(p.caps.size());
  for (const auto& u : p.users) {
    const auto q = user_maximizer(u, mu);
    if (!q) return std::numeric_limits<double>::infinity();
    const ComplexMatrix xq = u.steer * *q;
    load += xq.cwiseProduct(u.steer.conjugate()).rowwise().sum().real();
  }
  if (which == 0) return load.sum() / p.budget - 1.0;
  return load(which - 1) / p.caps(which - 1) - 1.0;
}

// Round-off in the other users' load must not make a constraint unfixable.
bool violated(double g) { return g > kFeasTol; }

// B with B^H B = h for Hermitian h >= 0 (negative round-off clipped).
ComplexMatrix psd_root(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return root.asDiagonal() * es.eigenvectors().adjoint();
}

double& slot(MultiplierSet& mu, int which) { return which == 0 ? mu.l : mu.psi(which - 1); }

// Feasible and complementary within rel_tol at the given multipliers.
bool kkt_met(const NodeProblem& p, const MultiplierSet& mu, double rel_tol) {
  std::vector<ComplexMatrix> qs;
  for (const auto& u : p.users) {
    const auto q = user_maximizer(u, mu);
    if (!q) return false;
    qs.push_back(*q);
  }
  const RealVector load = node_loads(p, qs);
  auto ok = [&](double value, double limit, double mult) {
    const double gap = (limit - value) / limit;
    return gap >= -rel_tol && (mult <= 0.0 || gap <= rel_tol);
  };
  if (!ok(load.sum(), p.budget, mu.l)) return false;
  for (Eigen::Index i = 0; i < load.size(); ++i)
    if (!ok(load(i), p.caps(i), mu.psi(i))) return false;
  return true;
}

// Bracketed search on [0, hi] for one multiplier: grow the bracket from the
// previous value (or mu_max), then shrink it with Illinois false position,
// which keeps the bisection invariant (lo violated, hi feasible).
void bisect_one(const NodeProblem& p, MultiplierSet& mu, int which, double mu_max,
                const BisectionOptions& opts) {
  double& x = slot(mu, which);
  const double old = x;
  const double ceiling = std::ldexp(mu_max, opts.max_doublings);
  auto eval = [&](double at) {
    x = at;
    return margin(p, mu, which);
  };
  auto fail = [&] {
    return BracketError("bisect_multipliers: constraint " + std::to_string(which) +
                        " still violated at mu_max * 2^" + std::to_string(opts.max_doublings));
  };
  double glo = eval(0.0);
  if (!violated(glo)) return;
  double lo = 0.0, hi = 0.0, ghi = 0.0;
  if (old > 0.0 && old <= ceiling) {
    double step = std::max(1e-3 * old, opts.tol);
    const double gold = eval(old);
    if (violated(gold)) {
      lo = old;
      glo = gold;
      for (;;) {
        hi = std::min(lo + step, ceiling);
        ghi = eval(hi);
        if (!violated(ghi)) break;
        if (hi >= ceiling) throw fail();
        lo = hi;
        glo = ghi;
        step *= 4.0;
      }
    } else {
      hi = old;
      ghi = gold;
      for (;;) {
        const double cand = hi - step;
        if (cand <= 0.0) break;
        const double gc = eval(cand);
        if (violated(gc)) {
          lo = cand;
          glo = gc;
          break;
        }
        hi = cand;
        ghi = gc;
        step *= 4.0;
      }
    }
  } else {
    hi = mu_max;
    ghi = eval(hi);
    while (violated(ghi)) {
      if (hi >= ceiling) throw fail();
      lo = hi;
      glo = ghi;
      hi *= 2.0;
      ghi = eval(hi);
    }
  }
  int side = 0;  // which end stayed put last step
  for (int step = 0; step < opts.max_steps && hi - lo > opts.tol; ++step) {
    if (ghi >= -1e-10) break;  // feasible end is tight
    double mid = 0.5 * (lo + hi);
    if (std::isfinite(glo) && glo - ghi > 0.0) {
      const double t = lo + (hi - lo) * glo / (glo - ghi);
      if (t > lo && t < hi) mid = t;
    }
    const double gm = eval(mid);
    if (violated(gm)) {
      lo = mid;
      glo = gm;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      ghi = gm;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  x = hi;
}

}  // namespace

SigmaPair sigma_pair(const ComplexMatrix& quality, const ComplexMatrix& penalty, double rel_tol) {
  if (quality.rows() != quality.cols() || penalty.rows() != quality.rows())
    throw InputError("sigma_pair: shape mismatch");
  if (max_offdiag_ratio(quality) > rel_tol || max_offdiag_ratio(penalty) > rel_tol)
    throw StaleBeamformerError("sigma_pair: stream matrices are not diagonal; beamformer is stale");
  SigmaPair out;
  out.sigma1 = quality.diagonal().real().cwiseMax(0.0);
  out.sigma2 = penalty.diagonal().real().cwiseMax(0.0);
  return out;
}

RealVector water_fill(const SigmaPair& pair, double w) {
  const Eigen::Index n = pair.sigma1.size();
  RealVector p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s1 = pair.sigma1(i);
    const double s2 = pair.sigma2(i);
    if (!(s1 > 0.0))
      p(i) = 0.0;
    else if (!(s2 > 0.0))
      p(i) = std::numeric_limits<double>::infinity();
    else
      p(i) = std::max(0.0, w / s2 - 1.0 / s1);
  }
  return p;
}

std::optional<ComplexMatrix> water_fill_matrix(const ComplexMatrix& s1, const ComplexMatrix& s2,
                                               double w, int max_rank) {
  Eigen::LLT<ComplexMatrix> llt(hermitian_part(s2));
  if (llt.info() != Eigen::Success) return std::nullopt;
  return water_fill_factored(s1, llt.matrixU(), w, max_rank);
}

std::optional<ComplexMatrix> water_fill_factored(const ComplexMatrix& s1, const ComplexMatrix& r,
                                                 double w, int max_rank) {
  const Eigen::Index n = s1.rows();
  if (r.rows() != n || r.cols() != n) throw InputError("water_fill: factor shape");
  if (w <= 0.0) return ComplexMatrix::Zero(n, n);
  const double rmax = r.diagonal().cwiseAbs().maxCoeff();
  if (!(rmax > 0.0) || !std::isfinite(rmax)) return std::nullopt;
  bool singular = false;
  for (Eigen::Index i = 0; i < n; ++i) singular |= !(std::abs(r(i, i)) > 1e-10 * rmax);
  // Whiten by S2 = R^H R: with P' = T^-1 P T^-H, T = R^-1, the problem becomes
  // max w ln det(I + M P') - tr P', M = T^H S1 T.
  ComplexMatrix rinv;
  if (!singular) {
    rinv = r.triangularView<Eigen::Upper>().solve(ComplexMatrix::Identity(n, n));
  } else {
    // Penalty-free directions are fine as long as they carry no quality.
    Eigen::JacobiSVD<ComplexMatrix> svd(r, Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < n && sv(rank) > 1e-10 * sv(0)) ++rank;
    const ComplexMatrix null = svd.matrixV().rightCols(n - rank);
    if ((null.adjoint() * s1 * null).norm() > 1e-9 * std::max(s1.norm(), 1e-300))
      return std::nullopt;
    rinv = svd.matrixV().leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal();
  }
  const Eigen::Index dim = rinv.cols();
  const ComplexMatrix m = hermitian_part(rinv.adjoint() * s1 * rinv);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
  RealVector d(dim);
  const Eigen::Index keep = max_rank < 0 ? dim : std::min<Eigen::Index>(dim, max_rank);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double mi = es.eigenvalues()(i);  // ascending
    d(i) = (i >= dim - keep && mi > 0.0) ? std::max(0.0, w - 1.0 / mi) : 0.0;
  }
  const ComplexMatrix pw = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
  return hermitian_part(rinv * pw * rinv.adjoint());
}

SigmaPair sigma_pair_ul(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                        const GradientSet& g, std::size_t k) {
  const UserProblem p = user_problem_ul(ch, cfg, s, g, k);
  const ComplexMatrix& u = s.U[k];
  return sigma_pair(u.adjoint() * p.quality * u, u.adjoint() * user_penalty(p, s.ul[k]) * u);
}

SigmaPair sigma_pair_dl(const ChannelSet& ch, const SystemConfig& cfg, const BeamformerState& s,
                        const GradientSet& g, std::size_t j) {
  const UserProblem p = user_problem_dl(ch, cfg, s, g, j);
  const ComplexMatrix& v = s.V[j];
  return sigma_pair(v.adjoint() * p.quality * v, v.adjoint() * user_penalty(p, s.bs) * v);
}

UserProblem user_problem_ul(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g, std::size_t k) {
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  const ComplexMatrix fh = s.F * ch.h_ul[k];
  const Eigen::Index mk = fh.cols();
  UserProblem p;
  p.quality = hermitian_part(fh.adjoint() * hpd_inverse(cov.Rbar_ul[k]) * fh);
  p.base_penalty = hermitian_part(g.A[k] + g.B[k]);
  p.base_factor = psd_root(p.base_penalty);
  p.steer = ComplexMatrix::Identity(mk, mk);
  p.weight = cfg.wk[k];
  p.streams = cfg.uk[k];
  return p;
}

UserProblem user_problem_dl(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g, std::size_t j) {
  const CovarianceSet cov = rx_covariances(ch, s, cfg);
  const ComplexMatrix hg = ch.h_dl[j] * s.G;
  UserProblem p;
  p.quality = hermitian_part(hg.adjoint() * hpd_inverse(cov.Rbar_dl[j]) * hg);
  p.base_penalty = hermitian_part(s.G.adjoint() * (g.C[j] + g.D[j]) * s.G);
  p.base_factor = psd_root(hermitian_part(g.C[j] + g.D[j])) * s.G;
  p.steer = s.G;
  p.weight = cfg.wj[j];
  p.streams = cfg.vj[j];
  return p;
}

NodeProblem node_problem_ul(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g, std::size_t k) {
  NodeProblem p;
  p.users.push_back(user_problem_ul(ch, cfg, s, g, k));
  p.budget = cfg.alphak;
  p.caps = to_vec(cfg.lambdak[k]);
  return p;
}

NodeProblem node_problem_dl(const ChannelSet& ch, const SystemConfig& cfg,
                            const BeamformerState& s, const GradientSet& g) {
  NodeProblem p;
  for (std::size_t j = 0; j < s.V.size(); ++j) p.users.push_back(user_problem_dl(ch, cfg, s, g, j));
  p.budget = cfg.alpha0;
  p.caps = to_vec(cfg.lambda0);
  return p;
}

ComplexMatrix user_penalty(const UserProblem& u, const MultiplierSet& mu) {
  const ComplexMatrix& x = u.steer;
  ComplexMatrix s2 = u.base_penalty + mu.l * (x.adjoint() * x);
  if (mu.psi.size() == x.rows() && mu.psi.any())
    s2 += x.adjoint() * mu.psi.asDiagonal() * x;
  return hermitian_part(s2);
}

ComplexMatrix user_penalty_factor(const UserProblem& u, const MultiplierSet& mu) {
  const ComplexMatrix& x = u.steer;
  const Eigen::Index n = x.cols();
  RealVector load_price = RealVector::Constant(x.rows(), mu.l);
  if (mu.psi.size() == x.rows()) load_price += mu.psi;
  const Eigen::Index br = u.base_factor.rows();
  ComplexMatrix stacked(br + x.rows(), n);
  stacked.topRows(br) = u.base_factor;
  stacked.bottomRows(x.rows()) = load_price.cwiseMax(0.0).cwiseSqrt().asDiagonal() * x;
  if (stacked.rows() < n) throw InputError("user_penalty_factor: too few rows");
  Eigen::HouseholderQR<ComplexMatrix> qr(stacked);
  return qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
}

std::optional<ComplexMatrix> user_maximizer(const UserProblem& u, const MultiplierSet& mu) {
  return water_fill_factored(u.quality, user_penalty_factor(u, mu), u.weight, u.streams);
}

RealVector node_loads(const NodeProblem& p, const std::vector<ComplexMatrix>& power) {
  if (power.size() != p.users.size()) throw InputError("node_loads: one power matrix per user");
  RealVector load = RealVector::Zero(p.caps.size());
  for (std::size_t i = 0; i < power.size(); ++i) {
    const ComplexMatrix& x = p.users[i].steer;
    const ComplexMatrix xq = x * power[i];
    load += xq.cwiseProduct(x.conjugate()).rowwise().sum().real();
  }
  return load;
}

BisectionResult bisect_node(const NodeProblem& p, const MultiplierSet& start,
                            const BisectionOptions& opts) {
  const Eigen::Index m = p.caps.size();
  double wmax = 1e-12;
  for (const auto& u : p.users) {
    if (u.steer.rows() != m) throw InputError("bisect_node: antenna count");
    wmax = std::max(wmax, u.weight);
  }
  const double mu_max = opts.mu_max > 0.0 ? opts.mu_max : 1e3 * wmax / p.caps.minCoeff();

  BisectionResult out;
  out.mult.l = std::max(0.0, start.l);
  out.mult.psi = start.psi.size() == m ? RealVector(start.psi.cwiseMax(0.0)) : RealVector::Zero(m);

  const int n_mult = static_cast<int>(m) + 1;
  for (out.cycles = 1; out.cycles <= opts.max_cycles; ++out.cycles) {
    const MultiplierSet before = out.mult;
    for (int i = 0; i < n_mult; ++i) bisect_one(p, out.mult, i, mu_max, opts);
    bool settled = std::abs(out.mult.l - before.l) <=
                   opts.cycle_rel_tol * std::max(out.mult.l, before.l) + 2.0 * opts.tol;
    for (Eigen::Index i = 0; settled && i < m; ++i)
      settled = std::abs(out.mult.psi(i) - before.psi(i)) <=
                opts.cycle_rel_tol * std::max(out.mult.psi(i), before.psi(i)) + 2.0 * opts.tol;
    // Tied constraints (sum budget equal to the sum of caps) leave the
    // multipliers non-unique, so also stop once the primal KKT conditions hold.
    if (settled || kkt_met(p, out.mult, opts.cycle_rel_tol)) break;
  }
  out.cycles = std::min(out.cycles, opts.max_cycles);

  for (const auto& u : p.users) {
    const auto q = user_maximizer(u, out.mult);
    if (!q) throw BracketError("bisect_node: penalty not positive definite at final multipliers");
    out.power_matrix.push_back(*q);
  }

  // Project onto the constraints by a common scale.
  const RealVector load = node_loads(p, out.power_matrix).cwiseMax(0.0);
  double scale = 1.0;
  if (load.sum() > p.budget) scale = p.budget / load.sum();
  for (Eigen::Index i = 0; i < m; ++i)
    if (load(i) > p.caps(i)) scale = std::min(scale, p.caps(i) / load(i));
  out.scale = scale;
  for (const auto& q : out.power_matrix) {
    const Rediagonalized rd = rediagonalize(HermitianMatrix(q));
    out.rotation.push_back(rd.rotation);
    out.power.push_back(rd.diag * scale);
  }
  return out;
}

BisectionResult bisect_multipliers_ul(const ChannelSet& ch, const SystemConfig& cfg,
                                      const BeamformerState& s, const GradientSet& g,
                                      std::size_t k, const BisectionOptions& opts) {
  return bisect_node(node_problem_ul(ch, cfg, s, g, k), s.ul[k], opts);
}

BisectionResult bisect_multipliers_dl(const ChannelSet& ch, const SystemConfig& cfg,
                                      const BeamformerState& s, const GradientSet& g,
                                      const BisectionOptions& opts) {
  return bisect_node(node_problem_dl(ch, cfg, s, g), s.bs, opts);
}

}  // namespace fdhybf
