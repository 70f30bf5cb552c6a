#ifndef CCFLOW_SPECTRAL_HPP
#define CCFLOW_SPECTRAL_HPP

#include <Eigen/Dense>

#include "ccflow/jacobian.hpp"

namespace ccflow {

// Eigendecomposition L = P^T diag(lambda) P with orthonormal rows of P and
// eigenvalues sorted descending. Eigenvalues with |lambda| <= zero_tol are
// clamped to exactly zero, and 0^s := 0 for every s when powers are taken;
// the clamp threshold is relative, 1e-9 * max|lambda|.
struct SpectralForm {
  VectorXd lambda;            // descending, clamped at zero
  MatrixXd P;                 // rows are eigenvectors
  double zero_tol = 0.0;

  int rank() const;
  double lambda_min() const { return lambda[lambda.size() - 1]; }
  double lambda_max() const { return lambda[0]; }
};

// Throws NotPSD when an eigenvalue falls below -1e-9 * max|lambda|.
SpectralForm spectral_decompose(const MatrixXd& L);
SpectralForm spectral_decompose(const JacobianL& J);

// L^s = P^T diag(lambda_i^s) P with the zero-clamp convention.
MatrixXd fractional_power(const SpectralForm& spec, double s);

// Delta^s x = -L^s x.
VectorXd apply_fractional_laplacian(const SpectralForm& spec, double s, const VectorXd& x);

} // namespace ccflow

#endif
