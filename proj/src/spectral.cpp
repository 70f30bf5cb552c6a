#include "ccflow/spectral.hpp"

#include <cmath>

namespace ccflow {

namespace {
constexpr double kZeroRel = 1e-9;
}

int SpectralForm::rank() const {
  int r = 0;
  for (int i = 0; i < lambda.size(); ++i)
    if (lambda[i] != 0.0) ++r;
  return r;
}

SpectralForm spectral_decompose(const MatrixXd& L) {
  const int n = static_cast<int>(L.rows());
  if (L.cols() != n) throw Error(ErrorCode::DimensionMismatch, "square matrix required");
  const double asym = (L - L.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * (1.0 + L.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NotPSD, "matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (L + L.transpose()));
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::NotPSD, "eigendecomposition failed");

  SpectralForm spec;
  spec.lambda.resize(n);
  spec.P.resize(n, n);
  // Eigen sorts ascending; flip to descending.
  for (int i = 0; i < n; ++i) {
    spec.lambda[i] = es.eigenvalues()[n - 1 - i];
    spec.P.row(i) = es.eigenvectors().col(n - 1 - i).transpose();
  }
  const double scale = spec.lambda.cwiseAbs().maxCoeff();
  // Relative clamp with an absolute floor so matrices that are zero up to
  // assembly roundoff (1x1 flat cases) are treated as zero, not as not-PSD.
  spec.zero_tol = kZeroRel * scale + 1e-13;
  for (int i = 0; i < n; ++i) {
    if (spec.lambda[i] < -spec.zero_tol)
      throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(spec.lambda[i]) +
                                         " below -" + std::to_string(spec.zero_tol));
    if (std::abs(spec.lambda[i]) <= spec.zero_tol) spec.lambda[i] = 0.0;
  }
  return spec;
}

SpectralForm spectral_decompose(const JacobianL& J) { return spectral_decompose(J.mat); }

MatrixXd fractional_power(const SpectralForm& spec, double s) {
  VectorXd pow_lambda(spec.lambda.size());
  for (int i = 0; i < spec.lambda.size(); ++i)
    pow_lambda[i] = spec.lambda[i] == 0.0 ? 0.0 : std::pow(spec.lambda[i], s);
  return spec.P.transpose() * pow_lambda.asDiagonal() * spec.P;
}

VectorXd apply_fractional_laplacian(const SpectralForm& spec, double s, const VectorXd& x) {
  if (x.size() != spec.lambda.size())
    throw Error(ErrorCode::DimensionMismatch, "vector size mismatch");
  VectorXd y = spec.P * x;
  for (int i = 0; i < y.size(); ++i)
    y[i] *= spec.lambda[i] == 0.0 ? 0.0 : std::pow(spec.lambda[i], s);
  return -(spec.P.transpose() * y);
}

} // namespace ccflow
