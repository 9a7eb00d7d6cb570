#pragma once

// Dense complex inner-loop kernels. Every routine has a portable scalar
// reference implementation; an AVX2/FMA variant is compiled on x86-64 and
// picked at first use when the running CPU supports it. Setting the
// environment variable CATSIM_KERNELS=scalar forces the reference path.
//
// Storage is interleaved std::complex<double> (re, im), which is also the
// Eigen layout, so Eigen vectors and column-major matrices can be passed
// straight through.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace catsim::kernels {

using cplx = std::complex<double>;

struct KernelTable {
  std::string_view name;
  /// sum_i conj(u_i) * v_i
  cplx (*dotc)(const cplx* u, const cplx* v, std::size_t n);
  /// y = A x for column-major A (rows x cols, leading dimension lda)
  void (*gemv)(const cplx* a, std::size_t rows, std::size_t cols, std::size_t lda, const cplx* x,
               cplx* y);
  /// y += alpha * x
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  /// sum_i |x_i|^2
  double (*norm2)(const cplx* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;
/// The table used by the library, resolved once.
const KernelTable& active() noexcept;

inline cplx dotc(std::span<const cplx> u, std::span<const cplx> v) {
  return active().dotc(u.data(), v.data(), u.size());
}

inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double norm2(std::span<const cplx> x) { return active().norm2(x.data(), x.size()); }

}  // namespace catsim::kernels
