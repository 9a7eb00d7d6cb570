// Compiled with -mavx2 -mfma. Only reached through avx2_table(), which checks
// the CPU first.
#include <immintrin.h>

#include "catsim/kernels.hpp"

namespace catsim::kernels {

// Defined in dispatch.cpp.
bool cpu_has_avx2_fma() noexcept;

namespace {

// Each __m256d holds two complex numbers: (re0, im0, re1, im1).

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// conj(u) v: re = ur vr + ui vi, im = ur vi - ui vr.
cplx dotc_avx2(const cplx* u, const cplx* v, std::size_t n) {
  const double* up = reinterpret_cast<const double*>(u);
  const double* vp = reinterpret_cast<const double*>(v);
  __m256d re0 = _mm256_setzero_pd(), re1 = _mm256_setzero_pd();
  __m256d im0 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ua = _mm256_loadu_pd(up + 2 * i);
    const __m256d va = _mm256_loadu_pd(vp + 2 * i);
    const __m256d ub = _mm256_loadu_pd(up + 2 * i + 4);
    const __m256d vb = _mm256_loadu_pd(vp + 2 * i + 4);
    re0 = _mm256_fmadd_pd(ua, va, re0);
    re1 = _mm256_fmadd_pd(ub, vb, re1);
    im0 = _mm256_fmadd_pd(ua, _mm256_permute_pd(va, 0x5), im0);
    im1 = _mm256_fmadd_pd(ub, _mm256_permute_pd(vb, 0x5), im1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d ua = _mm256_loadu_pd(up + 2 * i);
    const __m256d va = _mm256_loadu_pd(vp + 2 * i);
    re0 = _mm256_fmadd_pd(ua, va, re0);
    im0 = _mm256_fmadd_pd(ua, _mm256_permute_pd(va, 0x5), im0);
  }
  const __m256d re = _mm256_add_pd(re0, re1);
  // im lanes hold (ur vi, ui vr, ...): even minus odd.
  const __m256d im = _mm256_add_pd(im0, im1);
  alignas(32) double t[4];
  _mm256_store_pd(t, im);
  double sre = hsum(re);
  double sim = (t[0] - t[1]) + (t[2] - t[3]);
  for (; i < n; ++i) {
    const double ur = u[i].real(), ui = u[i].imag();
    const double vr = v[i].real(), vi = v[i].imag();
    sre += ur * vr + ui * vi;
    sim += ur * vi - ui * vr;
  }
  return {sre, sim};
}

// y += (xr + i xi) * a, two complex entries at a time.
inline __m256d cmul_bcast(__m256d a, __m256d xr, __m256d xi) {
  const __m256d swapped = _mm256_permute_pd(a, 0x5);  // (ai, ar, ...)
  return _mm256_fmaddsub_pd(a, xr, _mm256_mul_pd(swapped, xi));
}

void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  double* yp = reinterpret_cast<double*>(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xa = _mm256_loadu_pd(xp + 2 * i);
    const __m256d xb = _mm256_loadu_pd(xp + 2 * i + 4);
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * i), cmul_bcast(xa, ar, ai)));
    _mm256_storeu_pd(yp + 2 * i + 4,
                     _mm256_add_pd(_mm256_loadu_pd(yp + 2 * i + 4), cmul_bcast(xb, ar, ai)));
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d xa = _mm256_loadu_pd(xp + 2 * i);
    _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yp + 2 * i), cmul_bcast(xa, ar, ai)));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + (alpha.real() * xr - alpha.imag() * xi),
            y[i].imag() + (alpha.real() * xi + alpha.imag() * xr)};
  }
}

void gemv_avx2(const cplx* a, std::size_t rows, std::size_t cols, std::size_t lda, const cplx* x,
               cplx* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = {0.0, 0.0};
  for (std::size_t j = 0; j < cols; ++j) axpy_avx2(x[j], a + j * lda, y, rows);
}

double norm2_avx2(const cplx* x, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(xp + 2 * i);
    const __m256d b = _mm256_loadu_pd(xp + 2 * i + 4);
    s0 = _mm256_fmadd_pd(a, a, s0);
    s1 = _mm256_fmadd_pd(b, b, s1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a = _mm256_loadu_pd(xp + 2 * i);
    s0 = _mm256_fmadd_pd(a, a, s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

constexpr KernelTable kAvx2{"avx2", dotc_avx2, gemv_avx2, axpy_avx2, norm2_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept { return cpu_has_avx2_fma() ? &kAvx2 : nullptr; }

}  // namespace catsim::kernels
