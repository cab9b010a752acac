// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "slowop/error.hpp"
#include "slowop/exact_solver.hpp"
#include "slowop/probes.hpp"

namespace slowop {
namespace {

void expect_unit_hermitian_traceless(const PauliSum& s) {
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.ntr()), 0.0, 1e-14);
  const Eigen::MatrixXcd d = oracle::dense(s);
  EXPECT_LE((d - d.adjoint()).norm(), 1e-12);
}

PauliString zz(int n, int i, int j) {
  PauliString s(n);
  s.set(i, Pauli::Z);
  s.set(j, Pauli::Z);
  return s;
}

TEST(Probes, DiffusionWeights) {
  EXPECT_NEAR(diffusion_bond_weight(0, 2), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(diffusion_field_weight(0, 2), 0.0, 1e-15);
  EXPECT_NEAR(diffusion_field_weight(1, 2), 1.0, 1e-15);
}

TEST(Probes, DiffusionModeTwoSites) {
  const PauliSum e = diffusion_mode({1.0, 0.0}, 2);
  const double n = std::sqrt(0.5 + 1.0);
  EXPECT_NEAR(e.coeff(zz(2, 0, 1)).real(), -std::sqrt(0.5) / n, 1e-14);
  EXPECT_NEAR(e.coeff(PauliString::single(2, 1, Pauli::X)).real(), 1.0 / n, 1e-14);
  EXPECT_NEAR(std::abs(e.coeff(PauliString::single(2, 0, Pauli::X))), 0.0, 1e-15);
  EXPECT_EQ(e.sorted_terms().size(), 2u);
}

TEST(Probes, EnergyFluxTwoSitesWrapEqualsBond) {
  const PauliSum e = energy_flux({0.0, 0.0}, 2);
  EXPECT_NEAR(e.coeff(zz(2, 0, 1)).real(), -1.0, 1e-14);
  EXPECT_EQ(e.sorted_terms().size(), 1u);
}

TEST(Probes, MagnetizationFourSites) {
  const PauliSum m = magnetization('z', 4);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(m.coeff(PauliString::single(4, i, Pauli::Z)).real(), 0.5, 1e-15);
  EXPECT_NEAR(overlap(m, magnetization('x', 4)), 0.0, 1e-15);
  EXPECT_NEAR(overlap(m, magnetization('y', 4)), 0.0, 1e-15);
  EXPECT_THROW(magnetization('w', 4), UsageError);
}

TEST(Probes, AllProbesUnitHermitianTraceless) {
  const IsingParams p{1.05, 0.1};
  for (ProbeTag t : {ProbeTag::diffusion_mode, ProbeTag::energy_flux, ProbeTag::magnetization_x,
                     ProbeTag::magnetization_y, ProbeTag::magnetization_z}) {
    expect_unit_hermitian_traceless(window_probe(t, p, 4));
    expect_unit_hermitian_traceless(ti_probe(t, p, 2, 7));
    EXPECT_EQ(parse_probe(probe_name(t)), t);
    const PauliSum w = window_probe(t, p, 5);
    EXPECT_NEAR(overlap(w, w), 1.0, 1e-12);
  }
}

TEST(Probes, TiVariants) {
  const IsingParams p{1.05, 0.1};
  const PauliSum h = build_hamiltonian(p, 9, true);
  const PauliSum f = ti_probe(ProbeTag::energy_flux, p, 3, 9);
  EXPECT_NEAR(overlap(f, h) / h.norm(), 1.0, 1e-12);
  EXPECT_NEAR(overlap(ti_probe(ProbeTag::magnetization_z, p, 1, 5), magnetization('z', 5)), 1.0, 1e-12);
  // Cyclic sum of a window magnetization is again the global one.
  EXPECT_NEAR(overlap(ti_probe(ProbeTag::magnetization_x, p, 3, 9), magnetization('x', 9)), 1.0, 1e-12);
  EXPECT_THROW(ti_probe(ProbeTag::magnetization_z, p, 3, 8), UsageError);
}

TEST(Probes, OverlapChecksSize) {
  EXPECT_THROW(overlap(magnetization('z', 3), magnetization('z', 4)), UsageError);
}

TEST(Probes, EnergyFluxOverlapsDiffusionMode) {
  const IsingParams p{1.05, 0.1};
  EXPECT_GT(overlap(energy_flux(p, 6), diffusion_mode(p, 6)), 0.0);
}

TEST(Probes, WindowLambdaMatchesDenseCommutator) {
  const IsingParams p{1.05, 0.1};
  const int N = 3;
  std::mt19937_64 rng(5);
  PauliSum O = oracle::random_sum(N, 12, rng, true);
  O *= cplx(1.0 / O.norm());
  // Dense oracle on an open chain of N+2 sites with O on the middle sites.
  const Eigen::MatrixXcd H = oracle::ising_dense(p.g, p.h, N + 2, false);
  const Eigen::MatrixXcd o = oracle::kron(oracle::kron(oracle::pauli2('I'), oracle::dense(O)), oracle::pauli2('I'));
  const Eigen::MatrixXcd c = H * o - o * H;
  EXPECT_NEAR(window_lambda(O, p), oracle::ntr_inner(c, c).real(), 1e-10);
}

TEST(Probes, OptimizedDiffusionBounds) {
  const IsingParams p{1.05, 0.1};
  const int N = 5;
  const OptimizedDiffusion opt = optimized_diffusion_mode(p, N);
  EXPECT_NEAR(opt.op.norm(), 1.0, 1e-12);
  EXPECT_NEAR(window_lambda(opt.op, p), opt.lambda, 1e-10);
  EXPECT_LE(opt.lambda, window_lambda(diffusion_mode(p, N), p) + 1e-12);
  EXPECT_GE(opt.lambda, solve(local_form(p, N)).lambda - 1e-10);
  EXPECT_EQ(opt.a.size(), N - 1);
  EXPECT_EQ(opt.b[0], 0.0);
  EXPECT_EQ(opt.c[0], 0.0);
  // Coefficients reproduce the operator.
  EXPECT_NEAR(opt.op.coeff(PauliString::single(N, 2, Pauli::X)).real(), opt.c[2] * diffusion_field_weight(2, N),
              1e-14);
  EXPECT_NEAR(opt.op.coeff(zz(N, 1, 2)).real(), -opt.a[1] * diffusion_bond_weight(1, N), 1e-14);
}

TEST(Probes, InstantSlopesAnalytic) {
  std::map<int, double> quad, quart, flat;
  for (int N = 4; N <= 8; ++N) {
    quad[N] = 3.0 / (N * N);
    quart[N] = 0.5 / std::pow(N, 4);
    flat[N] = 0.2;
  }
  const auto s2 = instant_slopes(quad);
  ASSERT_EQ(s2.size(), 4u);
  for (const auto& r : s2) EXPECT_NEAR(r.slope, -2.0, 1e-12);
  for (const auto& r : instant_slopes(quart)) EXPECT_NEAR(r.slope, -4.0, 1e-12);
  for (const auto& r : instant_slopes(flat)) EXPECT_NEAR(r.slope, 0.0, 1e-12);
  EXPECT_EQ(s2[0].N_low, 4);
  EXPECT_EQ(s2[0].N_high, 5);
  EXPECT_THROW(instant_slopes({{3, 0.1}, {4, 0.0}}), UsageError);
  EXPECT_NE(slopes_csv(s2).find("N_low,N_high,slope"), std::string::npos);
}

TEST(Probes, DetectTransition) {
  std::map<double, OverlapPoint> zero, step, ramp;
  for (int k = 0; k <= 30; ++k) {
    const double h = 0.02 * k;
    zero[h] = {0.0, 0.0};
    step[h] = {0.0, k >= 20 ? 0.8 : 0.0};
    ramp[h] = {-h / 4, 0.0};
  }
  EXPECT_FALSE(detect_transition(zero).has_value());
  const auto s = detect_transition(step);
  ASSERT_TRUE(s.has_value());
  EXPECT_DOUBLE_EQ(s->h_grid, 0.02 * 20);
  EXPECT_GT(s->h_star, 0.38);
  EXPECT_LE(s->h_star, s->h_grid);
  const auto r = detect_transition(ramp);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(r->h_star, 0.2, 1e-12);
  EXPECT_NE(transition_csv(6, 1.05, 0.05, r).find("N,g,threshold,h_star"), std::string::npos);
  EXPECT_NE(transition_csv(6, 1.05, 0.05, std::nullopt).find("none"), std::string::npos);
}

TEST(Probes, LocalSlowestResemblesDiffusionMode) {
  const IsingParams p{1.05, 0.4};
  const int N = 6;
  const PauliSum O = solve(local_form(p, N)).vector.to_sum();
  const double d = std::abs(overlap(O, diffusion_mode(p, N)));
  for (ProbeTag t : {ProbeTag::magnetization_x, ProbeTag::magnetization_y, ProbeTag::magnetization_z}) {
    EXPECT_GT(d, std::abs(overlap(O, window_probe(t, p, N)))) << probe_name(t);
  }
  EXPECT_LE(std::abs(overlap(O, magnetization('y', N))), 1e-8);
  const std::string csv = overlaps_csv({{1.05, 0.4, N, {ProbeTag::diffusion_mode, ProbeVariant::local_window}, d}});
  EXPECT_NE(csv.find("diffusion_mode,local_window"), std::string::npos);
}

}  // namespace
}  // namespace slowop
