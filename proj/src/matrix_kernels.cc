#include "fdhybf/matrix_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace fdhybf {

namespace {

constexpr double kCondLimit = 1e12;
constexpr double kRidge = 1e-10;

void fix_phase(ComplexMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    const double mag = std::abs(v(arg, c));
    if (mag > 0.0) v.col(c) *= std::conj(v(arg, c)) / mag;
    v(arg, c) = cd(v(arg, c).real(), 0.0);
  }
}

}  // namespace

HermitianMatrix::HermitianMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw InputError("HermitianMatrix: expected a non-empty square matrix");
  if (!all_finite(m)) throw InputError("HermitianMatrix: non-finite entry");
  m_ = hermitian_part(m);
}

bool all_finite(const ComplexMatrix& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cd z = x.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

ComplexMatrix hermitian_part(const ComplexMatrix& x) {
  return (x + x.adjoint()) * 0.5;
}

ComplexMatrix diag_part(const ComplexMatrix& x) {
  ComplexMatrix d = ComplexMatrix::Zero(x.rows(), x.cols());
  d.diagonal() = x.diagonal();
  return d;
}

ComplexMatrix hpd_inverse(const ComplexMatrix& x) {
  Eigen::LLT<ComplexMatrix> llt(hermitian_part(x));
  if (llt.info() != Eigen::Success)
    throw SingularityError("hpd_inverse: matrix is not positive definite");
  ComplexMatrix inv = llt.solve(ComplexMatrix::Identity(x.rows(), x.cols()));
  return hermitian_part(inv);
}

double min_eigenvalue(const ComplexMatrix& x) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

GenEigResult gen_dominant_eigvecs(const HermitianMatrix& a, const HermitianMatrix& b,
                                  Eigen::Index d) {
  const Eigen::Index n = a.dim();
  if (b.dim() != n) throw InputError("gen_dominant_eigvecs: dimension mismatch");
  if (d < 1 || d > n) throw InputError("gen_dominant_eigvecs: need 1 <= d <= n");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> bes(b.mat());
  if (bes.info() != Eigen::Success)
    throw SingularityError("gen_dominant_eigvecs: eigen-decomposition of B failed");
  RealVector bvals = bes.eigenvalues();
  const double bmax = bvals(n - 1);
  if (!(bmax > 0.0)) throw SingularityError("gen_dominant_eigvecs: B is not positive definite");

  GenEigResult out;
  if (bvals(0) <= bmax / kCondLimit) {
    const double ridge = kRidge * b.mat().trace().real() / static_cast<double>(n);
    bvals.array() += ridge;
    out.regularized = true;
    out.ridge = ridge;
  }
  if (!(bvals(0) > 0.0))
    throw SingularityError("gen_dominant_eigvecs: B singular after regularization");

  // W = E diag(1/sqrt(l)), so W^H B W = I and C = W^H A W is Hermitian.
  const ComplexMatrix w = bes.eigenvectors() * bvals.cwiseSqrt().cwiseInverse().asDiagonal();
  const ComplexMatrix c = hermitian_part(w.adjoint() * a.mat() * w);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> ces(c);
  if (ces.info() != Eigen::Success)
    throw SingularityError("gen_dominant_eigvecs: whitened eigen-decomposition failed");

  out.vectors.resize(n, d);
  out.values.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    out.values(i) = ces.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = w * ces.eigenvectors().col(n - 1 - i);
  }
  fix_phase(out.vectors);
  return out;
}

double gen_eig_residual(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& v,
                        const RealVector& lambda) {
  const double anorm = a.norm();
  const double bnorm = b.norm();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const double vn = v.col(i).norm();
    if (vn == 0.0) continue;
    const double r = (a * v.col(i) - lambda(i) * (b * v.col(i))).norm();
    const double scale = (anorm + std::abs(lambda(i)) * bnorm) * vn;
    worst = std::max(worst, scale > 0.0 ? r / scale : r);
  }
  return worst;
}

double ln_det(const HermitianMatrix& x) {
  Eigen::LLT<ComplexMatrix> llt(x.mat());
  if (llt.info() != Eigen::Success) throw SingularityError("ln_det: matrix is not positive definite");
  const ComplexMatrix& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double lii = l(i, i).real();
    if (!(lii > 0.0)) throw SingularityError("ln_det: zero pivot");
    s += std::log(lii);
  }
  return 2.0 * s;
}

Rediagonalized rediagonalize(const HermitianMatrix& p) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p.mat());
  const Eigen::Index n = p.dim();
  Rediagonalized out;
  out.diag.resize(n);
  out.rotation.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.diag(i) = std::max(0.0, es.eigenvalues()(n - 1 - i));
    out.rotation.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

RealVector svd_rediagonalize(const HermitianMatrix& p) { return rediagonalize(p).diag; }

ComplexMatrix unit_modulus_project(const ComplexMatrix& x) {
  ComplexMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cd z = x.data()[i];
    const double m = std::abs(z);
    out.data()[i] = m > 0.0 ? z / m : cd(1.0, 0.0);
  }
  return out;
}

ComplexMatrix quantize_phases(const ComplexMatrix& x, int n_ps, bool preserve_amplitude) {
  if (n_ps < 2 || (n_ps & (n_ps - 1)) != 0)
    throw InputError("quantize_phases: n_ps must be a power of two >= 2");
  const double two_pi = 2.0 * std::numbers::pi;
  const double step = two_pi / n_ps;
  ComplexMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cd z = x.data()[i];
    double phase = std::arg(z);
    if (phase < 0.0) phase += two_pi;
    // ceil(t - 1/2) rounds to nearest and sends exact ties downward.
    const double t = phase / step;
    auto q = static_cast<long long>(std::ceil(t - 0.5));
    q %= n_ps;
    const double level = two_pi * static_cast<double>(q) / n_ps;
    const double mag = preserve_amplitude ? std::abs(z) : 1.0;
    out.data()[i] = std::polar(mag, level);
  }
  return out;
}

}  // namespace fdhybf
