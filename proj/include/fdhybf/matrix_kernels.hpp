#ifndef FDHYBF_MATRIX_KERNELS_HPP
#define FDHYBF_MATRIX_KERNELS_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace fdhybf {

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Error families shared by every module.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

/// Square complex matrix kept exactly Hermitian. Construction rejects
/// non-square or non-finite input and symmetrizes (X + X^H) / 2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& m);

  const ComplexMatrix& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

struct GenEigResult {
  ComplexMatrix vectors;  // n x d, B-orthonormal columns
  RealVector values;      // d generalized eigenvalues, descending
  bool regularized = false;
  double ridge = 0.0;  // added to B's diagonal when regularized
};

/// Dominant d generalized eigenpairs of A v = lambda B v.
///
/// B is whitened through its own eigen-decomposition. When its condition
/// number exceeds 1e12 a ridge of 1e-10 * tr(B) / n is added first. Each
/// returned column has its largest-magnitude entry rotated onto the
/// positive real axis.
GenEigResult gen_dominant_eigvecs(const HermitianMatrix& a, const HermitianMatrix& b,
                                  Eigen::Index d);

/// Largest normalized residual (backward error)
///   max_i ||A v_i - l_i B v_i|| / ((||A||_F + |l_i| ||B||_F) ||v_i||).
double gen_eig_residual(const ComplexMatrix& a, const ComplexMatrix& b,
                        const ComplexMatrix& v, const RealVector& lambda);

/// ln det X via Cholesky. Throws SingularityError if X is not positive definite.
double ln_det(const HermitianMatrix& x);

struct Rediagonalized {
  RealVector diag;         // descending, nonnegative
  ComplexMatrix rotation;  // unitary, P = rotation * diag * rotation^H
};

/// Diagonal factor of the SVD of a Hermitian PSD matrix, descending.
RealVector svd_rediagonalize(const HermitianMatrix& p);
/// Same as svd_rediagonalize but also returns the unitary factor.
Rediagonalized rediagonalize(const HermitianMatrix& p);

/// Elementwise x / |x|; exact zeros map to 1.
ComplexMatrix unit_modulus_project(const ComplexMatrix& x);

/// Snap each phase to the nearest of n_ps uniform levels (ties go to the
/// lower level index). Magnitudes become 1 unless preserve_amplitude.
ComplexMatrix quantize_phases(const ComplexMatrix& x, int n_ps, bool preserve_amplitude);

bool all_finite(const ComplexMatrix& x);
ComplexMatrix hermitian_part(const ComplexMatrix& x);
/// diag(X): keeps the main diagonal, zeroes everything else.
ComplexMatrix diag_part(const ComplexMatrix& x);
/// Inverse of a Hermitian positive definite matrix (Cholesky).
ComplexMatrix hpd_inverse(const ComplexMatrix& x);
double min_eigenvalue(const ComplexMatrix& x);

}  // namespace fdhybf

#endif  // FDHYBF_MATRIX_KERNELS_HPP
