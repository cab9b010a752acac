// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense LAPACK drivers. Eigen 3.4.0's divide-and-conquer SVD can return
// NaN on rank-deficient input, which operator MPS routinely produce.

#include <Eigen/Dense>

namespace slowop::linalg {

struct Svd {
  Eigen::MatrixXd U;   // m x k
  Eigen::VectorXd s;   // k, descending
  Eigen::MatrixXd V;   // n x k
};

/// Throws NumericalError if LAPACK fails or the input is not finite.
Svd thin_svd(const Eigen::MatrixXd& a);

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
/// matrix; `a` is overwritten with the vectors.
Eigen::VectorXd sym_eig(Eigen::MatrixXd& a);

}  // namespace slowop::linalg
