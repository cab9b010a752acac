// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2+FMA variants. Complex values are handled as interleaved (re, im)
// doubles, two complex numbers per __m256d. Only intrinsics are used inside
// the target region so no std:: inline code is compiled for AVX2.

#include "slowop/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace slowop::kernels::detail {
namespace {

#define SLOWOP_AVX2 __attribute__((target("avx2,fma")))

SLOWOP_AVX2 inline __m256d dup_pairs(const double* d) {
  // [d0, d0, d1, d1]
  __m256d v = _mm256_castpd128_pd256(_mm_loadu_pd(d));
  return _mm256_permute4x64_pd(v, 0x50);
}

SLOWOP_AVX2 double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

SLOWOP_AVX2 void diag_mul_avx2(const double* d, const cplx* xc, cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d dv = dup_pairs(d + i);
    _mm256_storeu_pd(y + 2 * i, _mm256_mul_pd(dv, _mm256_loadu_pd(x + 2 * i)));
  }
  for (; i < n; ++i) {
    y[2 * i] = d[i] * x[2 * i];
    y[2 * i + 1] = d[i] * x[2 * i + 1];
  }
}

SLOWOP_AVX2 void flip_axpy_avx2(double a, std::uint64_t mask, const cplx* xc, cplx* yc,
                                std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  const __m256d av = _mm256_set1_pd(a);
  if (n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i ^ mask;
      y[2 * i] += a * x[2 * j];
      y[2 * i + 1] += a * x[2 * j + 1];
    }
    return;
  }
  // (i, i+1) with i even maps onto the aligned pair starting at (i ^ mask) & ~1,
  // in swapped order when bit 0 of the mask is set.
  const std::uint64_t hi = mask & ~std::uint64_t{1};
  if (mask & 1) {
    for (std::size_t i = 0; i + 2 <= n; i += 2) {
      __m256d xv = _mm256_loadu_pd(x + 2 * (i ^ hi));
      xv = _mm256_permute2f128_pd(xv, xv, 0x01);
      __m256d yv = _mm256_loadu_pd(y + 2 * i);
      _mm256_storeu_pd(y + 2 * i, _mm256_fmadd_pd(av, xv, yv));
    }
    return;
  }
  for (std::size_t i = 0; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(x + 2 * (i ^ hi));
    __m256d yv = _mm256_loadu_pd(y + 2 * i);
    _mm256_storeu_pd(y + 2 * i, _mm256_fmadd_pd(av, xv, yv));
  }
}

SLOWOP_AVX2 void caxpy_avx2(cplx a, const cplx* xc, cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  const double* ap = reinterpret_cast<const double*>(&a);
  const double ar = ap[0], ai = ap[1];
  const __m256d arv = _mm256_set1_pd(ar);
  const __m256d aiv = _mm256_set1_pd(ai);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(x + 2 * i);
    __m256d xs = _mm256_permute_pd(xv, 0x5);  // [xi, xr, ...]
    __m256d prod = _mm256_addsub_pd(_mm256_mul_pd(arv, xv), _mm256_mul_pd(aiv, xs));
    _mm256_storeu_pd(y + 2 * i, _mm256_add_pd(_mm256_loadu_pd(y + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1];
    y[2 * i] += ar * xr - ai * xi;
    y[2 * i + 1] += ar * xi + ai * xr;
  }
}

SLOWOP_AVX2 void cheb_combine_avx2(double alpha, const cplx* wc, const cplx* pc, cplx* oc,
                                   std::size_t n) {
  const double* w = reinterpret_cast<const double*>(wc);
  const double* p = reinterpret_cast<const double*>(pc);
  double* o = reinterpret_cast<double*>(oc);
  const __m256d av = _mm256_set1_pd(alpha);
  const std::size_t m = 2 * n;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    _mm256_storeu_pd(o + i,
                     _mm256_fmsub_pd(av, _mm256_loadu_pd(w + i), _mm256_loadu_pd(p + i)));
  }
  for (; i < m; ++i) o[i] = alpha * w[i] - p[i];
}

SLOWOP_AVX2 cplx cdot_avx2(const cplx* xc, const cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  const double* y = reinterpret_cast<const double*>(yc);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(x + 2 * i);
    __m256d yv = _mm256_loadu_pd(y + 2 * i);
    acc_re = _mm256_fmadd_pd(xv, yv, acc_re);                           // xr*yr, xi*yi
    acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), acc_im);  // xr*yi, xi*yr
  }
  double re = hsum(acc_re);
  alignas(32) double im_lanes[4];
  _mm256_store_pd(im_lanes, acc_im);
  double im = (im_lanes[0] - im_lanes[1]) + (im_lanes[2] - im_lanes[3]);
  for (; i < n; ++i) {
    const double xr = x[2 * i], xi = x[2 * i + 1], yr = y[2 * i], yi = y[2 * i + 1];
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  cplx out;
  double* op = reinterpret_cast<double*>(&out);
  op[0] = re;
  op[1] = im;
  return out;
}

SLOWOP_AVX2 double norm2_avx2(const cplx* xc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  const std::size_t m = 2 * n;
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < m; ++i) s += x[i] * x[i];
  return s;
}

SLOWOP_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

SLOWOP_AVX2 void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

SLOWOP_AVX2 void scale_avx2(double a, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

#undef SLOWOP_AVX2

}  // namespace

const Table& avx2_table() {
  static const Table t{diag_mul_avx2, flip_axpy_avx2, caxpy_avx2, cheb_combine_avx2,
                       cdot_avx2,     norm2_avx2,     dot_avx2,   axpy_avx2,
                       scale_avx2};
  return t;
}

}  // namespace slowop::kernels::detail

#endif
