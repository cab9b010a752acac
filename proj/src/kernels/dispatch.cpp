// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "slowop/error.hpp"
#include "slowop/kernels.hpp"

namespace slowop::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  const char* env = std::getenv("SLOWOP_ISA");
  if (env != nullptr) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
    if (v == "neon" && isa_available(Isa::neon)) return Isa::neon;
  }
  return detected_isa();
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{&table(initial_isa())};
  return t;
}

const Table& active() { return *current().load(std::memory_order_relaxed); }

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw UsageError(std::string(what) + ": span length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

const Table& table(Isa isa) {
  if (!isa_available(isa)) {
    throw UsageError("kernel ISA not available: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      return detail::avx2_table();
#endif
#if defined(__aarch64__)
    case Isa::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Isa active_isa() {
  const Table* t = &active();
  if (t == &detail::scalar_table()) return Isa::scalar;
#if defined(__x86_64__) || defined(_M_X64)
  if (t == &detail::avx2_table()) return Isa::avx2;
#endif
#if defined(__aarch64__)
  if (t == &detail::neon_table()) return Isa::neon;
#endif
  return Isa::scalar;
}

void set_active_isa(Isa isa) { current().store(&table(isa), std::memory_order_relaxed); }

void diag_mul(std::span<const double> d, std::span<const cplx> x, std::span<cplx> y) {
  require_same(d.size(), x.size(), "diag_mul");
  require_same(x.size(), y.size(), "diag_mul");
  active().diag_mul(d.data(), x.data(), y.data(), x.size());
}

void flip_axpy(double a, std::uint64_t mask, std::span<const cplx> x, std::span<cplx> y) {
  require_same(x.size(), y.size(), "flip_axpy");
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0 || mask >= n) {
    throw UsageError("flip_axpy: size must be a power of two and mask < size");
  }
  active().flip_axpy(a, mask, x.data(), y.data(), n);
}

void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
  require_same(x.size(), y.size(), "caxpy");
  active().caxpy(a, x.data(), y.data(), x.size());
}

void cheb_combine(double alpha, std::span<const cplx> w, std::span<const cplx> prev,
                  std::span<cplx> out) {
  require_same(w.size(), prev.size(), "cheb_combine");
  require_same(w.size(), out.size(), "cheb_combine");
  active().cheb_combine(alpha, w.data(), prev.data(), out.data(), w.size());
}

cplx cdot(std::span<const cplx> x, std::span<const cplx> y) {
  require_same(x.size(), y.size(), "cdot");
  return active().cdot(x.data(), y.data(), x.size());
}

double norm2(std::span<const cplx> x) { return active().norm2(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size(), "dot");
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  active().axpy(a, x.data(), y.data(), x.size());
}

void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }

}  // namespace slowop::kernels
