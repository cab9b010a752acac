// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Vector kernels used by the state-vector dynamics and the iterative
// eigensolvers. Each kernel has a scalar reference implementation and SIMD
// variants (AVX2+FMA on x86-64, NEON on AArch64); the variant is chosen once
// at runtime from the host CPU and can be pinned with SLOWOP_ISA=scalar.

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>

namespace slowop::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Best ISA supported by this CPU and compiled into the binary.
Isa detected_isa();

/// ISA currently used by the dispatching entry points below.
Isa active_isa();

/// Pins the dispatch table. Throws UsageError if `isa` is unavailable.
void set_active_isa(Isa isa);

/// True if `isa` was compiled in and the CPU supports it.
bool isa_available(Isa isa);

// Complex state-vector kernels. All spans must have equal length.

/// y[i] = d[i] * x[i]
void diag_mul(std::span<const double> d, std::span<const cplx> x, std::span<cplx> y);

/// y[i] += a * x[i ^ mask]; `mask` must be < size and size a power of two.
void flip_axpy(double a, std::uint64_t mask, std::span<const cplx> x, std::span<cplx> y);

/// y[i] += a * x[i]
void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y);

/// out[i] = alpha * w[i] - prev[i]   (Chebyshev three-term step)
void cheb_combine(double alpha, std::span<const cplx> w, std::span<const cplx> prev,
                  std::span<cplx> out);

/// sum_i conj(x[i]) * y[i]
cplx cdot(std::span<const cplx> x, std::span<const cplx> y);

/// sum_i |x[i]|^2
double norm2(std::span<const cplx> x);

// Real kernels.

double dot(std::span<const double> x, std::span<const double> y);

/// y[i] += a * x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);

/// x[i] *= a
void scale(double a, std::span<double> x);

/// Per-ISA implementation table; exposed so tests can compare variants
/// directly against the scalar reference.
struct Table {
  void (*diag_mul)(const double*, const cplx*, cplx*, std::size_t);
  void (*flip_axpy)(double, std::uint64_t, const cplx*, cplx*, std::size_t);
  void (*caxpy)(cplx, const cplx*, cplx*, std::size_t);
  void (*cheb_combine)(double, const cplx*, const cplx*, cplx*, std::size_t);
  cplx (*cdot)(const cplx*, const cplx*, std::size_t);
  double (*norm2)(const cplx*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
};

/// Implementation table for `isa`; throws UsageError if unavailable.
const Table& table(Isa isa);

namespace detail {
const Table& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const Table& avx2_table();
#endif
#if defined(__aarch64__)
const Table& neon_table();
#endif
}  // namespace detail

}  // namespace slowop::kernels
