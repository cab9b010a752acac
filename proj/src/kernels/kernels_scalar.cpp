// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations. Every SIMD variant is tested against these.

#include "slowop/kernels.hpp"

namespace slowop::kernels::detail {
namespace {

void diag_mul_scalar(const double* d, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
}

void flip_axpy_scalar(double a, std::uint64_t mask, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i ^ mask];
}

void caxpy_scalar(cplx a, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void cheb_combine_scalar(double alpha, const cplx* w, const cplx* prev, cplx* out,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * w[i] - prev[i];
}

cplx cdot_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double norm2_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(x[i]);
  return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{diag_mul_scalar, flip_axpy_scalar, caxpy_scalar, cheb_combine_scalar,
                       cdot_scalar,     norm2_scalar,     dot_scalar,   axpy_scalar,
                       scale_scalar};
  return t;
}

}  // namespace slowop::kernels::detail
