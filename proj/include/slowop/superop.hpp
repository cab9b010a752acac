// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Matrix product operators acting on the 4-dimensional Pauli leg of an
// operator MPS ("superoperators"). In the real Pauli basis the commutator with
// a Hermitian H becomes the real map c -> coefficients of -i[H, O].

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "slowop/ising.hpp"

namespace slowop {

/// One MPO site, layout [left bond][sigma_out][sigma_in][right bond].
struct MpoSite {
  int wl = 1;
  int wr = 1;
  std::vector<double> data;

  MpoSite() = default;
  MpoSite(int l, int r) : wl(l), wr(r), data(std::size_t(l) * 16 * r, 0.0) {}

  double& at(int m, int s, int sp, int mp) { return data[((std::size_t(m) * 4 + s) * 4 + sp) * wr + mp]; }
  double at(int m, int s, int sp, int mp) const {
    return data[((std::size_t(m) * 4 + s) * 4 + sp) * wr + mp];
  }
  Eigen::Matrix4d block(int m, int mp) const;
  void set_block(int m, int mp, const Eigen::Matrix4d& w);
};

struct MpoBlock {
  int m;
  int mp;
  Eigen::Matrix4d w;  // (sigma_out, sigma_in)
};

class SuperMPO {
 public:
  SuperMPO() = default;
  explicit SuperMPO(std::vector<MpoSite> sites);

  int size() const { return static_cast<int>(sites_.size()); }
  const MpoSite& site(int i) const { return sites_.at(i); }
  /// Nonzero 4x4 blocks of site i.
  const std::vector<MpoBlock>& blocks(int i) const { return blocks_.at(i); }
  int max_bond() const;

  /// Dense 4^N x 4^N matrix in the canonical Pauli-string order.
  Eigen::MatrixXd to_dense() const;

 private:
  std::vector<MpoSite> sites_;
  std::vector<std::vector<MpoBlock>> blocks_;
};

namespace superop {

/// Single-site real maps in the (I, X, Y, Z) basis. J(a) P = coefficients of
/// -i[sigma_a, P] / 2; S(a) P = coefficients of {sigma_a, P} / 2.
Eigen::Matrix4d J(int a);
Eigen::Matrix4d S(int a);

/// -i ad(H_loc) on an open window of W sites, bond dimension 4.
SuperMPO commutator(const IsingParams& p, int W);
/// A^T A, bond dimension squared.
SuperMPO gram(const SuperMPO& a);
/// Sum of two MPOs on the same window (direct-sum bonds).
SuperMPO add(const SuperMPO& a, const SuperMPO& b);
/// Identity everywhere except `op` at `site`.
SuperMPO local_term(int W, int site, const Eigen::Matrix4d& op);
/// Removes numerically redundant bond directions: singular values below
/// rel_tol times the largest at each bond.
SuperMPO compress(const SuperMPO& a, double rel_tol = 1e-13);

}  // namespace superop

}  // namespace slowop
