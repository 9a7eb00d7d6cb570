#include "catsim/linalg.hpp"

#include <cmath>
#include <limits>
#include <span>

#include "catsim/errors.hpp"
#include "catsim/kernels.hpp"

namespace catsim {

void require_square_finite(const ComplexMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    fail(Errc::invalid_argument, std::string(what) + ": matrix must be square and non-empty");
  if (!m.allFinite()) fail(Errc::invalid_argument, std::string(what) + ": non-finite entry");
}

void require_finite(const ComplexVector& v, const char* what) {
  if (!v.allFinite()) fail(Errc::invalid_argument, std::string(what) + ": non-finite amplitude");
}

void apply_into(const ComplexMatrix& m, const ComplexVector& x, ComplexVector& y) {
  if (m.cols() != x.size()) fail(Errc::dimension_mismatch, "apply: dimension mismatch");
  y.resize(m.rows());
  kernels::active().gemv(m.data(), static_cast<std::size_t>(m.rows()),
                         static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(m.rows()),
                         x.data(), y.data());
}

ComplexVector matvec(const ComplexMatrix& m, const ComplexVector& x) {
  ComplexVector y;
  apply_into(m, x, y);
  return y;
}

cplx inner(const ComplexVector& u, const ComplexVector& v) {
  if (u.size() != v.size()) fail(Errc::dimension_mismatch, "inner: dimension mismatch");
  return kernels::dotc({u.data(), static_cast<std::size_t>(u.size())},
                       {v.data(), static_cast<std::size_t>(v.size())});
}

cplx bilinear(const ComplexVector& u, const ComplexMatrix& m, const ComplexVector& v) {
  return inner(u, matvec(m, v));
}

double norm(const ComplexVector& v) {
  return std::sqrt(kernels::norm2({v.data(), static_cast<std::size_t>(v.size())}));
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.norm();
  return (m - m.adjoint()).norm() <= rel_tol * scale;
}

bool is_normal(const ComplexMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.squaredNorm();
  const ComplexMatrix mh = m.adjoint();
  return (m * mh - mh * m).norm() <= rel_tol * scale;
}

double condition_number(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace catsim
