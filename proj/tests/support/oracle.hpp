// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent dense reference constructions shared by the unit tests. These
// build matrices from explicit 2x2 Pauli Kronecker products and never call
// the library's own dense conversion.

#include <complex>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "slowop/pauli.hpp"

namespace oracle {

using cplx = std::complex<double>;

inline Eigen::Matrix2cd pauli2(char c) {
  Eigen::Matrix2cd m;
  const cplx i(0, 1);
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// Site 0 is the leftmost Kronecker factor.
inline Eigen::MatrixXcd word_matrix(const std::string& w) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (char c : w) m = kron(m, pauli2(c));
  return m;
}

inline Eigen::MatrixXcd dense(const slowop::PauliSum& s) {
  const Eigen::Index dim = Eigen::Index(1) << s.size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : s.sorted_terms()) m += t.coeff * word_matrix(t.string.str());
  return m;
}

/// Dense mixed-field Ising chain assembled site by site.
inline Eigen::MatrixXcd ising_dense(double g, double h, int L, bool periodic) {
  auto op_at = [L](int site, char c) {
    std::string w(L, 'I');
    w[site] = c;
    return w;
  };
  const Eigen::Index dim = Eigen::Index(1) << L;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  const int bonds = periodic ? L : L - 1;
  for (int i = 0; i < bonds; ++i) {
    std::string w(L, 'I');
    w[i] = 'Z';
    w[(i + 1) % L] = 'Z';
    H -= word_matrix(w);
  }
  for (int i = 0; i < L; ++i) {
    H += h * word_matrix(op_at(i, 'Z')) + g * word_matrix(op_at(i, 'X'));
  }
  return H;
}

/// ntr(A^dagger B) on dense matrices.
inline cplx ntr_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.adjoint() * b).trace() / static_cast<double>(a.rows());
}

inline slowop::PauliSum random_sum(int n, int nterms, std::mt19937_64& rng, bool hermitian) {
  std::uniform_int_distribution<std::uint64_t> word(0, (1ULL << (2 * n)) - 1);
  std::normal_distribution<double> gauss;
  slowop::PauliSum s(n);
  for (int k = 0; k < nterms; ++k) {
    const double re = gauss(rng);
    const double im = hermitian ? 0.0 : gauss(rng);
    s.add(slowop::PauliString(n, word(rng)), {re, im});
  }
  return s;
}

}  // namespace oracle
