// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Exact quadratic form lambda(O) = -ntr([H,O]^2) over Pauli-coefficient space
// and its constrained minimization, for both slowest-operator definitions.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "slowop/ising.hpp"
#include "slowop/pauli.hpp"

namespace slowop {

enum class Definition { local, translation_invariant };

std::string definition_name(Definition d);
/// Accepts "local", "ti", "translation_invariant".
Definition parse_definition(const std::string& s);

struct ExactCaps {
  int local_max_n = 8;
  int ti_max_n = 7;
  /// Forms up to this dimension are diagonalized densely.
  Eigen::Index dense_max_dim = 1024;
};

/// M = A^T A where A maps basis coefficients to the (real) coefficients of
/// the commutator strings. The basis is a list of N-site Pauli words.
struct QuadraticForm {
  Definition definition = Definition::local;
  IsingParams params;
  int N = 0;
  std::vector<std::uint64_t> basis;  // packed words, ascending
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  /// Orthonormal directions removed from the search space.
  std::vector<Eigen::VectorXd> constraints;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd dense() const;
  /// x^T M x.
  double value(const Eigen::VectorXd& x) const;

  /// Basis coordinates of a full 4^N coefficient vector (entries outside the
  /// basis are ignored) and the reverse map.
  Eigen::VectorXd restrict(const OperatorVector& v) const;
  OperatorVector expand(const Eigen::VectorXd& x) const;
};

QuadraticForm local_form(const IsingParams& p, int N, const ExactCaps& caps = {});
QuadraticForm ti_form(const IsingParams& p, int N, const ExactCaps& caps = {});

/// Unnormalized functional c with c . x = ntr(H O) per cell for the TI basis.
Eigen::VectorXd ti_h_overlap_functional(const IsingParams& p, int N,
                                        const std::vector<std::uint64_t>& basis);

struct SlowestResult {
  Definition definition = Definition::local;
  IsingParams params;
  int N = 0;
  double lambda = 0.0;
  OperatorVector vector;
  std::map<std::string, double> residuals;
  std::optional<double> gap;
  bool degenerate = false;
  /// Free-form solver notes (e.g. DMRG non-convergence).
  std::vector<std::string> diagnostics;

  std::string to_json() const;
};

SlowestResult solve(const QuadraticForm& form, std::uint64_t seed = 12345,
                    const ExactCaps& caps = {});

/// Fixes the global sign so that the largest-magnitude coefficient is positive.
void fix_sign(Eigen::VectorXd& v);

/// ntr([H,O]^dagger [H,O]) with H the periodic chain on L sites and O
/// already living on L sites.
double evaluate_lambda(const PauliSum& O, const IsingParams& p, int L);

/// Places an N-site result on an L-site periodic chain: the window at sites
/// 0..N-1 for the local definition, the normalized cyclic sum for TI.
PauliSum materialize(const SlowestResult& r, int L);

}  // namespace slowop
