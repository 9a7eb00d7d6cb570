#include "catsim/kernels.hpp"

namespace catsim::kernels {
namespace {

cplx dotc_scalar(const cplx* u, const cplx* v, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ur = u[i].real(), ui = u[i].imag();
    const double vr = v[i].real(), vi = v[i].imag();
    re += ur * vr + ui * vi;
    im += ur * vi - ui * vr;
  }
  return {re, im};
}

void axpy_scalar(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double ar = alpha.real(), ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr)};
  }
}

void gemv_scalar(const cplx* a, std::size_t rows, std::size_t cols, std::size_t lda, const cplx* x,
                 cplx* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = {0.0, 0.0};
  for (std::size_t j = 0; j < cols; ++j) axpy_scalar(x[j], a + j * lda, y, rows);
}

double norm2_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

constexpr KernelTable kScalar{"scalar", dotc_scalar, gemv_scalar, axpy_scalar, norm2_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace catsim::kernels
