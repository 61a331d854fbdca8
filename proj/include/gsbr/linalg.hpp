#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace gsbr {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

namespace linalg {

/// Spectral norm (largest singular value).
double op_norm(const CMatrix& m);
double min_singular_value(const CMatrix& m);
RVector singular_values(const CMatrix& m);

/// ||m - m^*|| relative to max(1, ||m||)
double hermitian_residual(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);

struct HermitianEigen {
    RVector values;   // ascending
    CMatrix vectors;  // orthonormal columns
};

/// Throws NumericalError when m is not self-adjoint to `tol` (relative).
HermitianEigen hermitian_eigen(const CMatrix& m, double tol = 1e-10);

/// V fn(Lambda) V^*
template <typename Fn>
CMatrix spectral_function(const HermitianEigen& eig, Fn&& fn) {
    CVector d(eig.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = fn(eig.values(i));
    return eig.vectors * d.asDiagonal() * eig.vectors.adjoint();
}

/// Least-squares slope of log y against log x. Requires positive data and at least two points.
double log_log_slope(std::span<const double> x, std::span<const double> y);

} // namespace linalg
} // namespace gsbr
