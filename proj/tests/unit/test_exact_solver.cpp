// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "oracle.hpp"
#include "slowop/eigensolver.hpp"
#include "slowop/error.hpp"
#include "slowop/exact_solver.hpp"

namespace slowop {
namespace {

// ntr([H, A]^dagger [H, B]) with A, B placed at sites 1..N of an open
// (N+2)-site window; H is the dense open chain on that window.
double dense_local_entry(const IsingParams& p, int N, const PauliString& a, const PauliString& b) {
  const Eigen::MatrixXcd H = oracle::ising_dense(p.g, p.h, N + 2, false);
  const Eigen::MatrixXcd A = oracle::word_matrix("I" + a.str() + "I");
  const Eigen::MatrixXcd B = oracle::word_matrix("I" + b.str() + "I");
  const Eigen::MatrixXcd ca = H * A - A * H, cb = H * B - B * H;
  return oracle::ntr_inner(ca, cb).real();
}

Eigen::Matrix3d hand_n1(double g, double h) {
  Eigen::Matrix3d m;
  m << 4 * h * h + 8, 0, -4 * g * h,
       0, 4 * g * g + 4 * h * h + 8, 0,
       -4 * g * h, 0, 4 * g * g;
  return m;
}

TEST(LocalForm, SingleSiteMatchesHandAssembly) {
  for (auto [g, h] : {std::pair{1.05, 0.1}, {0.4, 1.05}, {0.0, 0.3}, {-0.7, 2.0}}) {
    const QuadraticForm f = local_form({g, h}, 1);
    ASSERT_EQ(f.dim(), 3);
    EXPECT_LE((f.dense() - hand_n1(g, h)).cwiseAbs().maxCoeff(), 1e-13);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        EXPECT_NEAR(f.dense()(a, b),
                    dense_local_entry({g, h}, 1, PauliString(1, a + 1), PauliString(1, b + 1)),
                    1e-12);
      }
    }
  }
}

TEST(LocalForm, SingleSiteMinimum) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hand_n1(1.05, 0.1));
  const double oracle_lambda = es.eigenvalues()[0];
  // The quoted anchor 4.3624 is the rounded value of 4.36204.
  EXPECT_NEAR(oracle_lambda, 4.3624, 5e-4);
  EXPECT_NEAR(oracle_lambda, 4.36204, 1e-5);
  const SlowestResult r = solve(local_form({1.05, 0.1}, 1));
  EXPECT_NEAR(r.lambda, oracle_lambda, 1e-12);
}

TEST(LocalForm, MatchesDenseOracleEntries) {
  const IsingParams p{0.83, -0.41};
  for (int N : {2, 3}) {
    const QuadraticForm f = local_form(p, N);
    const Eigen::MatrixXd M = f.dense();
    std::mt19937_64 rng(N);
    std::uniform_int_distribution<Eigen::Index> pick(0, f.dim() - 1);
    for (int k = 0; k < 40; ++k) {
      const Eigen::Index i = pick(rng), j = pick(rng);
      EXPECT_NEAR(M(i, j),
                  dense_local_entry(p, N, PauliString(N, f.basis[i]), PauliString(N, f.basis[j])),
                  1e-11);
    }
    EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(LocalForm, ZeroModesWithoutTransverseField) {
  for (int N : {2, 3, 4}) {
    const SlowestResult r = solve(local_form({0.0, 0.5}, N));
    EXPECT_LE(std::abs(r.lambda), 1e-12);
    EXPECT_TRUE(r.degenerate);
    EXPECT_NEAR(r.vector.norm(), 1.0, 1e-12);
    // Each single-site Z is a zero mode of the form.
    const QuadraticForm f = local_form({0.0, 0.5}, N);
    for (int i = 0; i < N; ++i) {
      OperatorVector z(N);
      z.coeffs()[PauliString::single(N, i, Pauli::Z).index()] = 1.0;
      EXPECT_EQ(f.value(f.restrict(z)), 0.0);
    }
  }
}

TEST(LocalForm, EigenResidualAndSign) {
  const QuadraticForm f = local_form({1.05, 0.1}, 3);
  const SlowestResult r = solve(f);
  EXPECT_LE(r.residuals.at("eigen"), 1e-9);
  EXPECT_EQ(r.residuals.at("trace"), 0.0);
  const Eigen::VectorXd& c = r.vector.coeffs();
  Eigen::Index imax;
  c.cwiseAbs().maxCoeff(&imax);
  EXPECT_GT(c[imax], 0.0);
  EXPECT_GT(r.lambda, 0.0);
}

TEST(LocalForm, LambdaNonIncreasingInWindow) {
  const IsingParams p{1.05, 0.1};
  double prev = solve(local_form(p, 2)).lambda;
  for (int N = 3; N <= 6; ++N) {
    const double cur = solve(local_form(p, N)).lambda;
    EXPECT_LE(cur, prev + 1e-10) << N;
    prev = cur;
  }
}

TEST(LocalForm, CapIsEnforced) {
  EXPECT_THROW(local_form({1, 1}, 9), CapExceeded);
  EXPECT_THROW(ti_form({1, 1}, 8), CapExceeded);
  ExactCaps caps;
  caps.local_max_n = 3;
  EXPECT_THROW(local_form({1, 1}, 4, caps), CapExceeded);
}

TEST(Solve, DavidsonAgreesWithDense) {
  ExactCaps forced;
  forced.dense_max_dim = 8;
  for (auto def : {Definition::local, Definition::translation_invariant}) {
    const IsingParams p{1.05, 0.3};
    const QuadraticForm f = def == Definition::local ? local_form(p, 4) : ti_form(p, 4);
    const SlowestResult dense = solve(f);
    const SlowestResult dav = solve(f, 99, forced);
    EXPECT_NEAR(dav.lambda, dense.lambda, 1e-10 * std::max(1.0, dense.lambda));
    EXPECT_LE(dav.residuals.at("eigen"), 1e-9);
    EXPECT_NEAR(std::abs(dav.vector.coeffs().dot(dense.vector.coeffs())), 1.0, 1e-8);
  }
}

TEST(Solve, JsonSchema) {
  const SlowestResult r = solve(local_form({1.05, 0.1}, 2));
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["definition"], "local");
  EXPECT_EQ(j["N"], 2);
  EXPECT_DOUBLE_EQ(j["lambda"].get<double>(), r.lambda);
  EXPECT_TRUE(j["residuals"].contains("eigen"));
  ASSERT_TRUE(j["coeffs"].is_array());
  double norm2 = 0;
  for (const auto& e : j["coeffs"]) {
    EXPECT_EQ(e[0].get<std::string>().size(), 2u);
    norm2 += e[1].get<double>() * e[1].get<double>();
  }
  EXPECT_NEAR(norm2, 1.0, 1e-10);
}

// Sum over cell shifts d of ntr([H, A]^dagger [H, shift_d B]) evaluated on a
// window of N+2+|d| sites with Pauli-sum arithmetic.
double shifted_window_entry(const IsingParams& p, int N, std::uint64_t a, std::uint64_t b) {
  double total = 0.0;
  for (int d = -(N + 1); d <= N + 1; ++d) {
    const int W = N + 2 + std::abs(d);
    const int oa = 1 + std::max(0, -d);
    const int ob = oa + d;
    PauliSum A(N), B(N);
    A.add(PauliString(N, a), 1.0);
    B.add(PauliString(N, b), 1.0);
    const PauliSum H = build_h_loc(p, W);
    const PauliSum ca = commutator(H, embed(A, W, oa));
    const PauliSum cb = commutator(H, embed(B, W, ob));
    total += hs_inner(ca, cb).real();
  }
  return total;
}

TEST(TiForm, BasisAndConstraint) {
  const QuadraticForm f = ti_form({1.05, 0.1}, 3);
  EXPECT_EQ(f.dim(), 48);
  for (auto b : f.basis) EXPECT_NE(PauliString(3, b).at(0), Pauli::I);
  ASSERT_EQ(f.constraints.size(), 1u);
  EXPECT_NEAR(f.constraints[0].norm(), 1.0, 1e-15);
}

TEST(TiForm, MatchesShiftedWindowBruteForce) {
  const IsingParams p{0.77, 0.52};
  const QuadraticForm f = ti_form(p, 3);
  const Eigen::MatrixXd M = f.dense();
  EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0; i < f.dim(); i += 5) {
    for (Eigen::Index j = 0; j < f.dim(); j += 3) {
      EXPECT_NEAR(M(i, j), shifted_window_entry(p, 3, f.basis[i], f.basis[j]), 1e-11)
          << PauliString(3, f.basis[i]).str() << " " << PauliString(3, f.basis[j]).str();
    }
  }
}

TEST(TiForm, MatchesDenseRingOracle) {
  const IsingParams p{1.05, 0.4};
  const int N = 2, L = 2 * N + 3;
  const QuadraticForm f = ti_form(p, N);
  const Eigen::MatrixXcd H = oracle::ising_dense(p.g, p.h, L, true);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd x(f.dim());
    for (auto& v : x) v = gauss(rng);
    Eigen::MatrixXcd O = Eigen::MatrixXcd::Zero(1 << L, 1 << L);
    for (Eigen::Index j = 0; j < f.dim(); ++j) {
      const std::string w = PauliString(N, f.basis[j]).str();
      for (int s = 0; s < L; ++s) {
        std::string ring(L, 'I');
        for (int k = 0; k < N; ++k) ring[(s + k) % L] = w[k];
        O += x[j] * oracle::word_matrix(ring);
      }
    }
    const Eigen::MatrixXcd c = H * O - O * H;
    const double per_cell = oracle::ntr_inner(c, c).real() / L;
    EXPECT_NEAR(f.value(x), per_cell, 1e-9 * per_cell);
  }
}

TEST(TiForm, IntegrableZeroModes) {
  const SlowestResult r = solve(ti_form({1.05, 0.0}, 5));
  EXPECT_LE(r.lambda, 1e-8);
  EXPECT_LE(r.residuals.at("h_overlap"), 1e-8);

  // At g=0 every diagonal operator commutes with H; the minimizer must be
  // diagonal (only I and Z letters) with vanishing lambda. It cannot be the
  // uniform Z magnetization because that has nonzero overlap with H.
  const SlowestResult z = solve(ti_form({0.0, 1.05}, 3));
  EXPECT_LE(z.lambda, 1e-10);
  for (Eigen::Index i = 0; i < z.vector.coeffs().size(); ++i) {
    if (std::abs(z.vector.coeffs()[i]) < 1e-8) continue;
    const std::string w = PauliString(3, static_cast<std::uint64_t>(i)).str();
    EXPECT_EQ(w.find_first_of("XY"), std::string::npos) << w;
  }
}

TEST(TiForm, NotAboveLocalValue) {
  for (double h : {0.2, 0.6, 1.0}) {
    const IsingParams p{1.05, h};
    EXPECT_LE(solve(ti_form(p, 5)).lambda, solve(local_form(p, 5)).lambda + 1e-10) << h;
  }
}

TEST(EvaluateLambda, HandCommutator) {
  for (double g : {0.0, 0.5, 1.3}) {
    PauliSum z(3);
    z.add("ZII", 1.0);
    EXPECT_NEAR(evaluate_lambda(z, {g, 0.7}, 3), 4 * g * g, 1e-13);
  }
  PauliSum id(4);
  id.add("IIII", 1.0);
  EXPECT_EQ(evaluate_lambda(id, {1.0, 1.0}, 4), 0.0);
}

TEST(EvaluateLambda, ConsistentWithSolverAndChainLength) {
  const IsingParams p{1.05, 0.1};
  const int N = 4;
  const SlowestResult r = solve(local_form(p, N));
  const double l2 = evaluate_lambda(materialize(r, N + 2), p, N + 2);
  EXPECT_NEAR(l2, r.lambda, 1e-10);
  EXPECT_NEAR(evaluate_lambda(materialize(r, N + 5), p, N + 5), l2, 1e-10);

  const SlowestResult t = solve(ti_form(p, 3));
  const int L = 2 * 3 + 3;
  const PauliSum O = materialize(t, L);
  EXPECT_NEAR(O.norm(), 1.0, 1e-12);
  EXPECT_NEAR(evaluate_lambda(O, p, L), t.lambda, 1e-10);
  EXPECT_NEAR(evaluate_lambda(translate(O, 2), p, L), t.lambda, 1e-10);
  EXPECT_LE(std::abs(hs_inner(build_hamiltonian(p, L, true), O)), 1e-9);
}

TEST(EvaluateLambda, RejectsMismatchedChain) {
  PauliSum z(3);
  z.add("ZII", 1.0);
  EXPECT_THROW(evaluate_lambda(z, {1, 1}, 4), UsageError);
}

TEST(Davidson, SmallestEigenpairsOfDiagonalPlusLowRank) {
  const int n = 300;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = 1.0 + i;
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
  const Eigen::MatrixXd M = Eigen::MatrixXd(d.asDiagonal()) + 5.0 * u * u.transpose();
  DavidsonOptions opt;
  opt.nroots = 3;
  opt.tol = 1e-10;
  auto res = davidson([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = M * x; }, n,
                      M.diagonal(), {}, {}, opt);
  ASSERT_TRUE(res.converged);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(res.values[k], es.eigenvalues()[k], 1e-9);

  // With the lowest eigenvector as constraint the first root moves up.
  std::vector<Eigen::VectorXd> cons{es.eigenvectors().col(0)};
  opt.nroots = 1;
  res = davidson([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = M * x; }, n,
                 M.diagonal(), cons, {}, opt);
  EXPECT_NEAR(res.values[0], es.eigenvalues()[1], 1e-9);
  const auto dres = dense_lowest(M, cons, 1);
  EXPECT_NEAR(dres.values[0], es.eigenvalues()[1], 1e-10);
}

}  // namespace
}  // namespace slowop
