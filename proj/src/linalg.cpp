// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "linalg.hpp"

#include <algorithm>

#include <lapacke.h>

#include "slowop/error.hpp"

namespace slowop::linalg {

Svd thin_svd(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw NumericalError("thin_svd: non-finite input", 0.0);
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  Svd r;
  r.s.resize(k);
  if (k == 0) {
    r.U.resize(m, 0);
    r.V.resize(n, 0);
    return r;
  }
  Eigen::MatrixXd U(m, k), VT(k, n);
  Eigen::MatrixXd work = a;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, r.s.data(), U.data(), m,
                                   VT.data(), k);
  if (info != 0 || !U.allFinite() || !VT.allFinite()) {
    work = a;
    Eigen::VectorXd superb(k);
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, work.data(), m, r.s.data(), U.data(), m,
                          VT.data(), k, superb.data());
    if (info != 0) throw NumericalError("thin_svd: LAPACK failed", static_cast<double>(info));
  }
  r.U = std::move(U);
  r.V = VT.transpose();
  return r;
}

Eigen::VectorXd sym_eig(Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw UsageError("sym_eig: matrix is not square");
  if (!a.allFinite()) throw NumericalError("sym_eig: non-finite input", 0.0);
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("sym_eig: LAPACK failed", static_cast<double>(info));
  return w;
}

}  // namespace slowop::linalg
