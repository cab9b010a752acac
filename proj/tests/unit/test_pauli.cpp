// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "slowop/error.hpp"
#include "slowop/pauli.hpp"

namespace slowop {
namespace {

const cplx I1(0, 1);

PauliSum S(std::initializer_list<std::pair<const char*, cplx>> terms) {
  PauliSum s;
  bool first = true;
  for (const auto& [w, c] : terms) {
    if (first) {
      s = PauliSum(static_cast<int>(std::string(w).size()));
      first = false;
    }
    s.add(w, c);
  }
  return s;
}

TEST(PauliString, CanonicalIndexIsIdentityFirst) {
  EXPECT_EQ(PauliString::parse("III").index(), 0u);
  EXPECT_EQ(PauliString::parse("IIX").index(), 1u);
  EXPECT_EQ(PauliString::parse("XII").index(), 16u);
  EXPECT_EQ(PauliString::parse("ZZZ").index(), 63u);
  EXPECT_EQ(PauliString::parse("XYZI").str(), "XYZI");
  EXPECT_EQ(PauliString::parse("XIZY").weight(), 3);
  EXPECT_THROW(PauliString::parse("XQ"), UsageError);
}

TEST(PauliMultiply, SingleSiteTable) {
  auto m = pauli_multiply(PauliString::parse("X"), PauliString::parse("Y"));
  EXPECT_EQ(m.phase, I1);
  EXPECT_EQ(m.string.str(), "Z");
  m = pauli_multiply(PauliString::parse("III"), PauliString::parse("XYZ"));
  EXPECT_EQ(m.phase, cplx(1));
  EXPECT_EQ(m.string.str(), "XYZ");
  m = pauli_multiply(PauliString::parse("XZ"), PauliString::parse("XZ"));
  EXPECT_EQ(m.phase, cplx(1));
  EXPECT_EQ(m.string.str(), "II");
  EXPECT_THROW(pauli_multiply(PauliString::parse("X"), PauliString::parse("XX")), UsageError);
}

TEST(PauliMultiply, MatchesDenseProductsExhaustively) {
  for (std::uint64_t a = 0; a < 64; ++a) {
    for (std::uint64_t b = 0; b < 64; ++b) {
      const PauliString pa(3, a), pb(3, b);
      const auto m = pauli_multiply(pa, pb);
      const Eigen::MatrixXcd lhs = oracle::word_matrix(pa.str()) * oracle::word_matrix(pb.str());
      const Eigen::MatrixXcd rhs = m.phase * oracle::word_matrix(m.string.str());
      ASSERT_LE((lhs - rhs).norm(), 1e-14) << pa.str() << "*" << pb.str();
      const auto r = pauli_multiply(pb, pa);
      const cplx pp = m.phase * r.phase;
      EXPECT_TRUE(pp == cplx(1) || pp == cplx(-1));
      EXPECT_EQ(anticommutes(pa, pb), m.phase == -r.phase);
    }
  }
}

TEST(Commutator, Examples) {
  auto c = commutator(S({{"Z", 1}}), S({{"X", 1}}));
  EXPECT_EQ(c.num_terms(), 1u);
  EXPECT_EQ(c.coeff(PauliString::parse("Y")), 2.0 * I1);

  PauliSum h = S({{"ZZI", -1}, {"IZZ", -1}, {"XII", 0.3}, {"IIZ", 0.2}});
  EXPECT_TRUE(commutator(h, S({{"III", 1}})).empty());

  c = commutator(S({{"ZZ", 1}}), S({{"XI", 1}}));
  EXPECT_EQ(c.num_terms(), 1u);
  // Dense oracle for [Z0 Z1, X0].
  const Eigen::MatrixXcd zz = oracle::word_matrix("ZZ"), x0 = oracle::word_matrix("XI");
  const Eigen::MatrixXcd expect = zz * x0 - x0 * zz;
  EXPECT_LE((oracle::dense(c) - expect).norm(), 1e-14);
  EXPECT_EQ(c.coeff(PauliString::parse("YZ")), 2.0 * I1);
}

TEST(Commutator, MatchesDenseOracleOnRandomSums) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const bool herm = trial % 2 == 0;
    const PauliSum a = oracle::random_sum(3, 6, rng, herm);
    const PauliSum b = oracle::random_sum(3, 6, rng, herm);
    const Eigen::MatrixXcd da = oracle::dense(a), db = oracle::dense(b);
    EXPECT_LE((oracle::dense(commutator(a, b)) - (da * db - db * da)).norm(), 1e-12);
    EXPECT_LE((oracle::dense(a * b) - da * db).norm(), 1e-12);
    EXPECT_LE((to_dense(commutator(a, b)) - (da * db - db * da)).norm(), 1e-12);
    if (herm) {
      for (const auto& [bits, c] : commutator(a, b).raw()) EXPECT_EQ(c.real(), 0.0);
    }
  }
}

TEST(HsInner, Examples) {
  EXPECT_EQ(hs_inner(S({{"X", 1}}), S({{"X", 1}})), cplx(1));
  EXPECT_EQ(hs_inner(S({{"X", 1}}), S({{"Z", 1}})), cplx(0));
  const PauliSum v = S({{"X", 2}, {"Z", 3}});
  EXPECT_EQ(hs_inner(v, v), cplx(13));
  const PauliSum w = S({{"X", I1}});
  EXPECT_EQ(hs_inner(w, v), -2.0 * I1);
  EXPECT_EQ(hs_inner(v, w), 2.0 * I1);
}

TEST(HsInner, MatchesDenseNormalizedTrace) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const PauliSum a = oracle::random_sum(4, 8, rng, false);
    const PauliSum b = oracle::random_sum(4, 8, rng, false);
    const cplx expect = oracle::ntr_inner(oracle::dense(a), oracle::dense(b));
    EXPECT_LE(std::abs(hs_inner(a, b) - expect), 1e-12);
    EXPECT_GE(hs_inner(a, a).real(), 0.0);
  }
  EXPECT_EQ(hs_inner(PauliSum(3), PauliSum(3)), cplx(0));
}

TEST(Embed, PadsAndWraps) {
  EXPECT_EQ(embed(S({{"X", 1}}), 3, 1).sorted_terms()[0].string.str(), "IXI");
  EXPECT_EQ(embed(S({{"XZ", 1}}), 3, 2, true).sorted_terms()[0].string.str(), "ZIX");
  EXPECT_THROW(embed(S({{"XZ", 1}}), 3, 2, false), UsageError);
  std::mt19937_64 rng(3);
  const PauliSum p = oracle::random_sum(2, 5, rng, false);
  const PauliSum q = oracle::random_sum(2, 5, rng, false);
  for (int k = 0; k < 4; ++k) {
    EXPECT_LE(std::abs(hs_inner(embed(p, 5, k), embed(q, 5, k)) - hs_inner(p, q)), 1e-14);
  }
  EXPECT_EQ(translate(S({{"XIZ", 1}}), 1).sorted_terms()[0].string.str(), "ZXI");
}

TEST(ToDense, Examples) {
  Eigen::MatrixXcd z = to_dense(S({{"Z", 1}}));
  EXPECT_EQ(z(0, 0), cplx(1));
  EXPECT_EQ(z(1, 1), cplx(-1));
  EXPECT_EQ(z(0, 1), cplx(0));
  Eigen::MatrixXcd xx = to_dense(S({{"XX", 1}}));
  Eigen::MatrixXcd anti = Eigen::MatrixXcd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) anti(i, 3 - i) = 1;
  EXPECT_EQ(xx, anti);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const PauliSum a = oracle::random_sum(4, 10, rng, false);
    EXPECT_LE((to_dense(a) - oracle::dense(a)).norm(), 1e-13);
  }
  EXPECT_THROW(to_dense(PauliSum(5), 4), CapExceeded);
}

TEST(PauliSum, ArithmeticDropsZeros) {
  PauliSum a = S({{"XY", 1}, {"ZZ", 2}});
  a.add("XY", -1.0);
  EXPECT_EQ(a.num_terms(), 1u);
  a -= S({{"ZZ", 2}});
  EXPECT_TRUE(a.empty());
  EXPECT_EQ(S({{"II", 3}, {"XI", 1}}).ntr(), cplx(3));
  EXPECT_TRUE(S({{"X", 1}, {"Y", 2}}).is_hermitian());
  EXPECT_FALSE(S({{"X", I1}}).is_hermitian());
}

TEST(PauliSum, TextRoundTrip) {
  PauliSum a = S({{"ZZI", -1.0}, {"IXI", {0.25, -0.5}}, {"IIY", {0, 1e-3}}});
  const std::string text = a.to_text();
  const PauliSum b = PauliSum::from_text(text);
  EXPECT_EQ(b.size(), 3);
  EXPECT_EQ(b.num_terms(), 3u);
  EXPECT_EQ(b.coeff(PauliString::parse("IXI")), cplx(0.25, -0.5));
  EXPECT_EQ(b.coeff(PauliString::parse("ZZI")), cplx(-1.0));
  const PauliSum c = PauliSum::from_text("# fixture\n-1.0 ZZI\n0.5+2i IXI\n\n");
  EXPECT_EQ(c.coeff(PauliString::parse("IXI")), cplx(0.5, 2));
  EXPECT_THROW(PauliSum::from_text("abc ZZ"), UsageError);
  EXPECT_THROW(PauliSum::from_text("1.0 ZQ"), UsageError);
}

TEST(OperatorVector, RoundTripPreservesInner) {
  std::mt19937_64 rng(9);
  for (int n = 1; n <= 6; ++n) {
    const PauliSum a = oracle::random_sum(n, 12, rng, true);
    const PauliSum b = oracle::random_sum(n, 12, rng, true);
    const OperatorVector va = OperatorVector::from_sum(a), vb = OperatorVector::from_sum(b);
    EXPECT_NEAR(va.coeffs().dot(vb.coeffs()), hs_inner(a, b).real(), 1e-12);
    EXPECT_NEAR(va.norm() * va.norm(), hs_inner(a, a).real(), 1e-12);
    if (n <= 4) {
      const cplx dense_inner = oracle::ntr_inner(to_dense(va.to_sum()), to_dense(vb.to_sum()));
      EXPECT_NEAR(dense_inner.real(), va.coeffs().dot(vb.coeffs()), 1e-12);
    }
  }
  PauliSum bad(1);
  bad.add("X", I1);
  EXPECT_THROW(OperatorVector::from_sum(bad), UsageError);
}

TEST(PauliString, NonIdentityStringsAreTraceless) {
  for (std::uint64_t b = 0; b < 16; ++b) {
    const PauliString s(2, b);
    const cplx tr = oracle::word_matrix(s.str()).trace() / 4.0;
    EXPECT_NEAR(std::abs(tr), s.is_identity() ? 1.0 : 0.0, 1e-15);
  }
}

}  // namespace
}  // namespace slowop
