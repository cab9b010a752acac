// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "slowop/error.hpp"

namespace slowop {
namespace {

void project_out(const std::vector<Eigen::VectorXd>& cs, Eigen::VectorXd& v) {
  for (const auto& c : cs) v -= c.dot(v) * c;
}

// Orthogonalizes v against the first `m` columns of V and the constraints.
// Returns the norm after projection (before normalization).
double orthogonalize(const Eigen::MatrixXd& V, Eigen::Index m,
                     const std::vector<Eigen::VectorXd>& cs, Eigen::VectorXd& v) {
  for (int pass = 0; pass < 2; ++pass) {
    project_out(cs, v);
    if (m > 0) v -= V.leftCols(m) * (V.leftCols(m).transpose() * v);
  }
  return v.norm();
}

}  // namespace

void orthonormalize(std::vector<Eigen::VectorXd>& vs, double drop_tol) {
  std::vector<Eigen::VectorXd> out;
  for (auto& v : vs) {
    Eigen::VectorXd w = v;
    const double n0 = w.norm();
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out) w -= q.dot(w) * q;
    }
    const double n1 = w.norm();
    if (n1 <= drop_tol * std::max(1.0, n0)) continue;
    out.push_back(w / n1);
  }
  vs = std::move(out);
}

EigenResult dense_lowest(const Eigen::MatrixXd& m, const std::vector<Eigen::VectorXd>& constraints,
                         int nroots) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw UsageError("dense_lowest: matrix not square");
  Eigen::MatrixXd a = m;
  if (!constraints.empty()) {
    Eigen::MatrixXd C(n, constraints.size());
    for (std::size_t j = 0; j < constraints.size(); ++j) C.col(j) = constraints[j];
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - C * C.transpose();
    // Constrained directions are pushed above the spectrum of the projected form.
    const double shift = 1.0 + 2.0 * m.cwiseAbs().rowwise().sum().maxCoeff();
    a = P * m * P + shift * C * C.transpose();
  }
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolve failed", 0.0);
  EigenResult r;
  const int k = std::min<int>(nroots, static_cast<int>(n - constraints.size()));
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = es.eigenvectors().col(j);
    r.values.push_back(es.eigenvalues()[j]);
    r.residuals.push_back((m * v - es.eigenvalues()[j] * v).norm());
    r.vectors.push_back(std::move(v));
  }
  r.converged = true;
  return r;
}

EigenResult davidson(const MatVec& op, Eigen::Index n, const Eigen::VectorXd& diag,
                     const std::vector<Eigen::VectorXd>& constraints,
                     const std::vector<Eigen::VectorXd>& guesses, const DavidsonOptions& opt) {
  const Eigen::Index free_dim = n - static_cast<Eigen::Index>(constraints.size());
  const int k = static_cast<int>(std::min<Eigen::Index>(opt.nroots, free_dim));
  if (k < 1) throw UsageError("davidson: no free directions");
  const Eigen::Index max_sub = std::min<Eigen::Index>(std::max(opt.max_subspace, 3 * k), free_dim);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };

  Eigen::MatrixXd V(n, max_sub), AV(n, max_sub);
  Eigen::Index m = 0;
  auto append = [&](Eigen::VectorXd v) {
    const double n0 = v.norm();
    if (n0 == 0.0 || m >= max_sub) return false;
    const double n1 = orthogonalize(V, m, constraints, v);
    if (n1 <= 1e-10 * n0) return false;
    V.col(m) = v / n1;
    Eigen::VectorXd y(n);
    op(V.col(m), y);
    AV.col(m) = y;
    ++m;
    return true;
  };

  for (const auto& g : guesses) {
    if (g.size() == n && m < k) append(g);
  }
  for (int tries = 0; m < k && tries < 10 * k + 10; ++tries) append(random_vector());
  if (m < k) throw NumericalError("davidson: could not build a starting subspace", 0.0);

  EigenResult res;
  Eigen::MatrixXd X(n, k), AX(n, k), R(n, k);
  Eigen::VectorXd theta(k);
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    Eigen::MatrixXd Hs = V.leftCols(m).transpose() * AV.leftCols(m);
    Hs = 0.5 * (Hs + Hs.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hs);
    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(k);
    theta = es.eigenvalues().head(k);
    X.noalias() = V.leftCols(m) * Y;
    AX.noalias() = AV.leftCols(m) * Y;
    R = AX - X * theta.asDiagonal();
    std::vector<double> rn(k);
    bool all = true;
    for (int j = 0; j < k; ++j) {
      Eigen::VectorXd r = R.col(j);
      project_out(constraints, r);
      R.col(j) = r;
      rn[j] = r.norm();
      if (rn[j] > opt.tol) all = false;
    }
    res.iterations = iter;
    res.residuals = rn;
    if (all) {
      res.converged = true;
      break;
    }
    if (m + k > max_sub) {
      // Thick restart: keep the lowest third of the Ritz space.
      const Eigen::Index keep = std::min<Eigen::Index>(m, std::max<Eigen::Index>(k, max_sub / 3));
      const Eigen::MatrixXd Yk = es.eigenvectors().leftCols(keep);
      const Eigen::MatrixXd Vk = V.leftCols(m) * Yk;
      const Eigen::MatrixXd AVk = AV.leftCols(m) * Yk;
      V.leftCols(keep) = Vk;
      AV.leftCols(keep) = AVk;
      m = keep;
    }
    bool added = false;
    for (int j = 0; j < k; ++j) {
      if (rn[j] <= opt.tol) continue;
      Eigen::VectorXd t = R.col(j);
      if (diag.size() == n) {
        for (Eigen::Index i = 0; i < n; ++i) {
          double den = diag[i] - theta[j];
          if (std::abs(den) < 1e-8) den = den < 0 ? -1e-8 : 1e-8;
          t[i] /= den;
        }
      }
      if (append(t)) {
        added = true;
      } else if (append(R.col(j))) {
        added = true;
      }
    }
    if (!added && !append(random_vector())) break;
  }
  for (int j = 0; j < k; ++j) {
    res.values.push_back(theta[j]);
    res.vectors.push_back(X.col(j));
  }
  return res;
}

}  // namespace slowop
