// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Smallest-eigenpair solvers for real symmetric operators given as matvecs.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace slowop {

using MatVec = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& y)>;

struct DavidsonOptions {
  int nroots = 1;
  /// Converged when ||A x - theta x|| <= tol for every requested root.
  double tol = 1e-10;
  int max_iter = 2000;
  /// Subspace is restarted from the current Ritz vectors above this size.
  int max_subspace = 40;
  std::uint64_t seed = 12345;
};

struct EigenResult {
  std::vector<double> values;      // ascending
  std::vector<Eigen::VectorXd> vectors;
  std::vector<double> residuals;
  int iterations = 0;
  bool converged = false;
};

/// Block Davidson for the lowest `nroots` eigenpairs of a symmetric operator
/// restricted to the orthogonal complement of `constraints` (orthonormal
/// vectors). `diag` is the operator diagonal used as preconditioner; pass an
/// empty vector for none. `guesses` may be empty.
EigenResult davidson(const MatVec& op, Eigen::Index n, const Eigen::VectorXd& diag,
                     const std::vector<Eigen::VectorXd>& constraints,
                     const std::vector<Eigen::VectorXd>& guesses, const DavidsonOptions& opt);

/// Dense symmetric eigensolve restricted to the complement of `constraints`.
EigenResult dense_lowest(const Eigen::MatrixXd& m, const std::vector<Eigen::VectorXd>& constraints,
                         int nroots);

/// Orthonormalizes `vs` in place (modified Gram-Schmidt, twice), dropping
/// vectors whose norm falls below `drop_tol` after projection.
void orthonormalize(std::vector<Eigen::VectorXd>& vs, double drop_tol = 1e-12);

}  // namespace slowop
