// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "slowop/error.hpp"
#include "slowop/kernels.hpp"

namespace slowop::kernels {
namespace {

std::vector<cplx> random_cvec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

std::vector<double> random_rvec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<Isa> simd_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {};

TEST_P(KernelEquivalence, SimdMatchesScalar) {
  const std::size_t n = GetParam();
  const auto isas = simd_isas();
  if (isas.empty()) GTEST_SKIP() << "no SIMD variant on this host";
  const Table& ref = table(Isa::scalar);
  std::mt19937_64 rng(n * 7 + 1);
  const auto x = random_cvec(n, rng), w = random_cvec(n, rng), y0 = random_cvec(n, rng);
  const auto d = random_rvec(n, rng), rx = random_rvec(n, rng), ry0 = random_rvec(n, rng);
  const cplx a(0.3, -1.7);

  for (Isa isa : isas) {
    SCOPED_TRACE(std::string(isa_name(isa)));
    const Table& t = table(isa);

    std::vector<cplx> y1(n), y2(n);
    ref.diag_mul(d.data(), x.data(), y1.data(), n);
    t.diag_mul(d.data(), x.data(), y2.data(), n);
    EXPECT_LE(max_diff(y1, y2), 1e-15);

    if ((n & (n - 1)) == 0) {
      for (std::uint64_t mask = 1; mask < n; mask <<= 1) {
        for (std::uint64_t m : {mask, mask | 1, (n - 1) & ~mask}) {
          if (m >= n) continue;
          y1 = y0;
          y2 = y0;
          ref.flip_axpy(-0.7, m, x.data(), y1.data(), n);
          t.flip_axpy(-0.7, m, x.data(), y2.data(), n);
          EXPECT_LE(max_diff(y1, y2), 1e-14) << "mask " << m;
        }
      }
    }

    y1 = y0;
    y2 = y0;
    ref.caxpy(a, x.data(), y1.data(), n);
    t.caxpy(a, x.data(), y2.data(), n);
    EXPECT_LE(max_diff(y1, y2), 1e-14);

    ref.cheb_combine(1.9, w.data(), x.data(), y1.data(), n);
    t.cheb_combine(1.9, w.data(), x.data(), y2.data(), n);
    EXPECT_LE(max_diff(y1, y2), 1e-14);

    const double tol = 1e-13 * static_cast<double>(n + 1);
    EXPECT_NEAR(std::abs(ref.cdot(x.data(), w.data(), n) - t.cdot(x.data(), w.data(), n)), 0.0,
                tol);
    EXPECT_NEAR(ref.norm2(x.data(), n), t.norm2(x.data(), n), tol);
    EXPECT_NEAR(ref.dot(rx.data(), d.data(), n), t.dot(rx.data(), d.data(), n), tol);

    auto r1 = ry0, r2 = ry0;
    ref.axpy(0.25, rx.data(), r1.data(), n);
    t.axpy(0.25, rx.data(), r2.data(), n);
    ref.scale(-3.0, r1.data(), n);
    t.scale(-3.0, r2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(r1[i], r2[i], 1e-14);
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, KernelEquivalence,
                         ::testing::Values(1, 2, 3, 4, 7, 8, 16, 33, 64, 1024));

TEST(Kernels, ScalarReferenceValues) {
  const Table& t = table(Isa::scalar);
  std::vector<cplx> x{{1, 2}, {3, -1}};
  std::vector<cplx> y{{0, 1}, {2, 2}};
  // conj(1+2i)(i) + conj(3-i)(2+2i) = (2+i) + (4+8i)
  const cplx c = t.cdot(x.data(), y.data(), 2);
  EXPECT_DOUBLE_EQ(c.real(), 6.0);
  EXPECT_DOUBLE_EQ(c.imag(), 9.0);
  EXPECT_DOUBLE_EQ(t.norm2(x.data(), 2), 15.0);
  std::vector<cplx> z(2);
  t.flip_axpy(2.0, 1, x.data(), z.data(), 2);
  EXPECT_EQ(z[0], cplx(6, -2));
  EXPECT_EQ(z[1], cplx(2, 4));
}

TEST(Kernels, DispatchValidatesSpans) {
  std::vector<cplx> x(4), y(3);
  EXPECT_THROW(caxpy(1.0, x, y), UsageError);
  std::vector<cplx> a(6), b(6);
  EXPECT_THROW(flip_axpy(1.0, 1, a, b), UsageError);
  std::vector<cplx> c(4), e(4);
  EXPECT_THROW(flip_axpy(1.0, 4, c, e), UsageError);
}

TEST(Kernels, ActiveIsaCanBePinned) {
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  EXPECT_EQ(active_isa(), Isa::scalar);
  set_active_isa(before);
  EXPECT_EQ(active_isa(), before);
  if (!isa_available(Isa::neon)) EXPECT_THROW(set_active_isa(Isa::neon), UsageError);
}

}  // namespace
}  // namespace slowop::kernels
