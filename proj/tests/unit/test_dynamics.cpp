// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracle.hpp"
#include "slowop/dynamics.hpp"
#include "slowop/error.hpp"
#include "slowop/exact_solver.hpp"

namespace slowop {
namespace {

StateVector random_state(int L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  StateVector v(1 << L);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v.normalized();
}

// exp(-iHt) psi from a dense eigendecomposition.
StateVector dense_evolve(const Eigen::MatrixXcd& H, const StateVector& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const Eigen::VectorXcd ph = (es.eigenvalues() * t).unaryExpr([](double e) { return std::exp(cplx(0, -e)); });
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint() * psi;
}

PauliSum unit(PauliSum s) {
  s *= cplx(1.0 / s.norm());
  return s;
}

TEST(StateOperator, MatchesDenseMatrix) {
  std::mt19937_64 rng(3);
  const PauliSum s = oracle::random_sum(5, 30, rng, false);
  const StateOperator op(s);
  const StateVector x = random_state(5, 8);
  EXPECT_LE((op.apply(x) - oracle::dense(s) * x).norm(), 1e-12);
  double bound = 0;
  for (const auto& t : s.sorted_terms()) bound += std::abs(t.coeff);
  EXPECT_NEAR(op.norm_bound(), bound, 1e-12);
  const PauliSum h = build_hamiltonian({1.05, 0.3}, 4, true);
  EXPECT_LE((StateOperator(h).dense_real().cast<cplx>() - oracle::dense(h)).norm(), 1e-13);
  EXPECT_THROW(StateOperator(s).dense_real(), UsageError);
  EXPECT_THROW(StateOperator(PauliSum(15)), CapExceeded);
}

TEST(Chebyshev, BesselMatchesStdlib) {
  for (double x : {0.5, 10.0, 100.0, 1000.0}) {
    const int M = static_cast<int>(x) + 60;
    const auto J = bessel_j_sequence(x, M);
    for (int n : {0, 1, 2, 7, static_cast<int>(x / 2), static_cast<int>(x), static_cast<int>(x) + 20}) {
      EXPECT_NEAR(J[n], std::cyl_bessel_j(double(n), x), 1e-11) << x << ' ' << n;
    }
  }
  EXPECT_EQ(bessel_j_sequence(0.0, 3), (std::vector<double>{1, 0, 0, 0}));
}

TEST(Chebyshev, ZeroTimeIsIdentity) {
  const StateOperator H(build_hamiltonian({1.05, 0.1}, 6, true));
  const StateVector psi = random_state(6, 1);
  EXPECT_LE((chebyshev_evolve(psi, H, 0.0) - psi).norm(), 1e-15);
}

TEST(Chebyshev, SingleSpinClosedForm) {
  PauliSum z(1);
  z.add("Z", 1.0);
  const StateOperator H(z);
  StateVector psi(2);
  psi << cplx(0.6, 0), cplx(0, 0.8);
  const StateVector out = chebyshev_evolve(psi, H, 1.0);
  EXPECT_LE(std::abs(out[0] - std::exp(cplx(0, -1)) * psi[0]), 1e-10);
  EXPECT_LE(std::abs(out[1] - std::exp(cplx(0, 1)) * psi[1]), 1e-10);
}

TEST(Chebyshev, MatchesEigendecompositionAtL8) {
  const PauliSum h = build_hamiltonian({1.05, 0.1}, 8, true);
  const StateOperator H(h);
  const Eigen::MatrixXcd Hd = oracle::dense(h);
  const StateVector psi = random_state(8, 2);
  for (double t : {0.3, 2.0, 10.0}) {
    ChebyshevStats st;
    const StateVector out = chebyshev_evolve(psi, H, t, {}, &st);
    EXPECT_LE((out - dense_evolve(Hd, psi, t)).norm(), 1e-8) << t;
    EXPECT_LE(std::abs(out.squaredNorm() - 1.0), 1e-12) << t;
    EXPECT_DOUBLE_EQ(st.e_bar, 1000.0);
  }
  ChebyshevConfig a;
  a.auto_e_bar = true;
  EXPECT_LE((chebyshev_evolve(psi, H, -4.0, a) - dense_evolve(Hd, psi, -4.0)).norm(), 1e-8);
}

TEST(Chebyshev, GroupPropertyAndBounds) {
  const StateOperator H(build_hamiltonian({0.4, 1.05}, 8, true));
  const StateVector psi = random_state(8, 4);
  const StateVector a = chebyshev_evolve(chebyshev_evolve(psi, H, 1.3), H, 2.1);
  EXPECT_LE((a - chebyshev_evolve(psi, H, 3.4)).norm(), 1e-8);
  ChebyshevConfig small;
  small.e_bar = 1.0;
  EXPECT_THROW(chebyshev_evolve(psi, H, 1.0, small), UsageError);
  ChebyshevConfig capped;
  capped.max_terms = 100;
  EXPECT_THROW(chebyshev_evolve(psi, H, 5.0, capped), NumericalError);
}

TEST(Correlators, ExactMatchesDenseTrace) {
  const IsingParams p{1.05, 0.1};
  const int L = 6;
  std::mt19937_64 rng(9);
  PauliSum O = unit(oracle::random_sum(3, 10, rng, true));
  O = embed(O, L, 0, true);
  const std::vector<double> times = {0.0, 0.4, 1.7, 5.0};
  const TimeSeries ts = exact_correlator(O, p, times);
  const Eigen::MatrixXcd H = oracle::ising_dense(p.g, p.h, L, true);
  const Eigen::MatrixXcd Od = oracle::dense(O);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Eigen::VectorXcd ph =
        (es.eigenvalues() * times[i]).unaryExpr([](double e) { return std::exp(cplx(0, e)); });
    const Eigen::MatrixXcd U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    const cplx c = oracle::ntr_inner(Od, U * Od * U.adjoint());
    EXPECT_NEAR(ts.values[i], c.real(), 1e-10) << i;
    EXPECT_NEAR(ts.imag[i], 0.0, 1e-12);
  }
  EXPECT_NEAR(ts.values[0], 1.0, 1e-12);
  const TimeSeries neg = exact_correlator(O, p, {-1.7});
  EXPECT_NEAR(neg.values[0], ts.values[2], 1e-10);
}

TEST(Correlators, ShortTimeLaw) {
  const IsingParams p{1.05, 0.1};
  const int L = 7;
  std::mt19937_64 rng(11);
  const PauliSum O = embed(unit(oracle::random_sum(3, 12, rng, true)), L, 2, true);
  const double lam = evaluate_lambda(O, p, L);
  const double t = 0.01;
  const TimeSeries ts = exact_correlator(O, p, {t});
  EXPECT_NEAR(ts.values[0], 1.0 - lam * t * t / 2.0, 1e-6 * lam);
}

TEST(Correlators, StochasticMatchesExact) {
  const IsingParams p{1.05, 0.1};
  const int L = 8;
  const PauliSum O = unit(embed(build_h_loc(p, 3), L, 0, true));
  const std::vector<double> times = time_grid(0.0, 4.0, 0.5);
  const TimeSeries ex = exact_correlator(O, p, times);
  const TimeSeries st = two_point_correlator(O, p, times, 50, 7);
  ASSERT_EQ(st.values.size(), times.size());
  EXPECT_NEAR(st.values[0], 1.0, 3.0 / std::sqrt(50.0 * 256.0));
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(st.values[i], ex.values[i], std::max(6.0 * st.stderr_[i], 1e-3)) << times[i];
  }
  EXPECT_EQ(two_point_correlator(O, p, {0.0, 1.0}, 5, 3).values,
            two_point_correlator(O, p, {0.0, 1.0}, 5, 3).values);
  EXPECT_THROW(two_point_correlator(O, p, times, 0), UsageError);
  EXPECT_THROW(two_point_correlator(O, p, {1.0, 0.5}), UsageError);
  PauliSum big(15);
  big.add(PauliString::single(15, 0, Pauli::Z), 1.0);
  EXPECT_THROW(two_point_correlator(big, p, times), CapExceeded);
}

TEST(Correlators, ConservedOperatorStaysAtOne) {
  const IsingParams p{0.0, 0.7};
  PauliSum z(6);
  z.add(PauliString::single(6, 0, Pauli::Z), 1.0);
  const TimeSeries st = two_point_correlator(z, p, {0.0, 1.0, 3.0}, 4, 1);
  for (double v : st.values) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Otoc, ZeroTimeMatchesCommutator) {
  const IsingParams p{1.05, 0.1};
  const int L = 6;
  std::mt19937_64 rng(21);
  const PauliSum O = embed(unit(oracle::random_sum(3, 10, rng, true)), L, 0, true);
  const EigenSystem es = eigensystem(p, L);
  for (char axis : {'x', 'y', 'z'}) {
    for (int site : {0, 2, 4}) {
      const Pauli letter = axis == 'x' ? Pauli::X : axis == 'y' ? Pauli::Y : Pauli::Z;
      PauliSum s(L);
      s.add(PauliString::single(L, site, letter), 1.0);
      const PauliSum c = commutator(O, s);
      const TimeSeries ts = otoc(O, axis, {site}, es, {0.0, 0.8});
      EXPECT_NEAR(ts.values[0], hs_inner(c, c).real(), 1e-10) << axis << site;
      for (double v : ts.values) {
        EXPECT_GE(v, -1e-10);
        EXPECT_LE(v, 4.0 + 1e-10);
      }
    }
  }
  EXPECT_NEAR(otoc(O, 'z', {4}, es, {0.0}).values[0], 0.0, 1e-10);
  EXPECT_THROW(otoc(O, 'z', {6}, es, {0.0}), UsageError);
  EXPECT_THROW(otoc(O, 'q', {1}, es, {0.0}), UsageError);
}

TEST(Otoc, CenterSites) {
  EXPECT_EQ(otoc_center_sites(6, 11, 0), (std::vector<int>{3, 2}));
  EXPECT_EQ(otoc_center_sites(6, 11, 3), (std::vector<int>{6, 10}));
  EXPECT_EQ(otoc_center_sites(5, 11, 2), (std::vector<int>{4}));
}

TEST(Envelope, ValueAndCurvature) {
  const double lam = 0.3, h = 1e-3;
  const TimeSeries g = gaussian_envelope(lam, {-h, 0.0, h});
  EXPECT_DOUBLE_EQ(g.values[1], 1.0);
  EXPECT_NEAR((g.values[0] - 2 * g.values[1] + g.values[2]) / (h * h), -lam, 1e-6);
  EXPECT_THROW(gaussian_envelope(-1.0, {0.0}), UsageError);
}

TEST(TimeSeriesIo, CsvAndGrid) {
  EXPECT_EQ(time_grid(0.0, 1.0, 0.25).size(), 5u);
  TimeSeries ts;
  ts.times = {0.0, 1.0};
  ts.values = {1.0, 0.5};
  ts.meta["L"] = "8";
  const std::string csv = ts.to_csv();
  EXPECT_EQ(csv, "# L=8\nt,value\n0,1\n1,0.5\n");
}

}  // namespace
}  // namespace slowop
