#include "gsbr/linalg.hpp"

#include <cmath>

#include "gsbr/error.hpp"

namespace gsbr::linalg {

RVector singular_values(const CMatrix& m) {
    if (m.size() == 0) return RVector();
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues();
}

double op_norm(const CMatrix& m) {
    const RVector s = singular_values(m);
    return s.size() ? s(0) : 0.0;
}

double min_singular_value(const CMatrix& m) {
    const RVector s = singular_values(m);
    return s.size() ? s(s.size() - 1) : 0.0;
}

double hermitian_residual(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

HermitianEigen hermitian_eigen(const CMatrix& m, double tol) {
    if (m.rows() != m.cols()) throw StructuralError("hermitian_eigen: matrix is not square");
    if (hermitian_residual(m) > tol) throw NumericalError("hermitian_eigen: matrix is not self-adjoint");
    const CMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("hermitian_eigen: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("log_log_slope: need >= 2 paired points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw PreconditionError("log_log_slope: data must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-300) throw PreconditionError("log_log_slope: abscissae are all equal");
    return (n * sxy - sx * sy) / den;
}

} // namespace gsbr::linalg
