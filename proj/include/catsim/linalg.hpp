#pragma once

#include <Eigen/Dense>
#include <complex>

namespace catsim {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

/// Throws invalid_argument unless m is square with finite entries.
void require_square_finite(const ComplexMatrix& m, const char* what);
void require_finite(const ComplexVector& v, const char* what);

/// y = M x through the dispatched kernels.
ComplexVector matvec(const ComplexMatrix& m, const ComplexVector& x);
void apply_into(const ComplexMatrix& m, const ComplexVector& x, ComplexVector& y);

/// u^dagger v
cplx inner(const ComplexVector& u, const ComplexVector& v);
/// u^dagger M v
cplx bilinear(const ComplexVector& u, const ComplexMatrix& m, const ComplexVector& v);
double norm(const ComplexVector& v);

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}
inline ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b + b * a;
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol);
/// ||M M^dagger - M^dagger M||_F <= rel_tol * ||M||_F^2
bool is_normal(const ComplexMatrix& m, double rel_tol);
/// sigma_max / sigma_min (infinity when singular).
double condition_number(const ComplexMatrix& m);

}  // namespace catsim
