// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

// NEON variants: one complex value per float64x2_t.

#include "slowop/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace slowop::kernels::detail {
namespace {

void diag_mul_neon(const double* d, const cplx* xc, cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  for (std::size_t i = 0; i < n; ++i) {
    vst1q_f64(y + 2 * i, vmulq_n_f64(vld1q_f64(x + 2 * i), d[i]));
  }
}

void flip_axpy_neon(double a, std::uint64_t mask, const cplx* xc, cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  const float64x2_t av = vdupq_n_f64(a);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i ^ mask;
    vst1q_f64(y + 2 * i, vfmaq_f64(vld1q_f64(y + 2 * i), av, vld1q_f64(x + 2 * j)));
  }
}

void caxpy_neon(cplx a, const cplx* xc, cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  double* y = reinterpret_cast<double*>(yc);
  const double* ap = reinterpret_cast<const double*>(&a);
  const float64x2_t arv = vdupq_n_f64(ap[0]);
  const float64x2_t aiv = {-ap[1], ap[1]};
  for (std::size_t i = 0; i < n; ++i) {
    float64x2_t xv = vld1q_f64(x + 2 * i);
    float64x2_t xs = vextq_f64(xv, xv, 1);  // [xi, xr]
    float64x2_t yv = vld1q_f64(y + 2 * i);
    yv = vfmaq_f64(yv, arv, xv);
    yv = vfmaq_f64(yv, aiv, xs);
    vst1q_f64(y + 2 * i, yv);
  }
}

void cheb_combine_neon(double alpha, const cplx* wc, const cplx* pc, cplx* oc, std::size_t n) {
  const double* w = reinterpret_cast<const double*>(wc);
  const double* p = reinterpret_cast<const double*>(pc);
  double* o = reinterpret_cast<double*>(oc);
  const float64x2_t av = vdupq_n_f64(alpha);
  for (std::size_t i = 0; i < n; ++i) {
    float64x2_t r = vnegq_f64(vld1q_f64(p + 2 * i));
    vst1q_f64(o + 2 * i, vfmaq_f64(r, av, vld1q_f64(w + 2 * i)));
  }
}

cplx cdot_neon(const cplx* xc, const cplx* yc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  const double* y = reinterpret_cast<const double*>(yc);
  float64x2_t acc_re = vdupq_n_f64(0.0);
  float64x2_t acc_im = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    float64x2_t xv = vld1q_f64(x + 2 * i);
    float64x2_t yv = vld1q_f64(y + 2 * i);
    acc_re = vfmaq_f64(acc_re, xv, yv);
    acc_im = vfmaq_f64(acc_im, xv, vextq_f64(yv, yv, 1));
  }
  cplx out;
  double* op = reinterpret_cast<double*>(&out);
  op[0] = vaddvq_f64(acc_re);
  op[1] = vgetq_lane_f64(acc_im, 0) - vgetq_lane_f64(acc_im, 1);
  return out;
}

double norm2_neon(const cplx* xc, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(xc);
  float64x2_t acc = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    float64x2_t v = vld1q_f64(x + 2 * i);
    acc = vfmaq_f64(acc, v, v);
  }
  return vaddvq_f64(acc);
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), a));
  for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const Table& neon_table() {
  static const Table t{diag_mul_neon, flip_axpy_neon, caxpy_neon, cheb_combine_neon,
                       cdot_neon,     norm2_neon,     dot_neon,   axpy_neon,
                       scale_neon};
  return t;
}

}  // namespace slowop::kernels::detail

#endif
