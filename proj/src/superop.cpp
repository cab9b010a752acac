// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/superop.hpp"

#include <algorithm>
#include <cmath>

#include "slowop/error.hpp"
#include "linalg.hpp"

namespace slowop {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Matrix4d MpoSite::block(int m, int mp) const {
  Eigen::Matrix4d w;
  for (int s = 0; s < 4; ++s)
    for (int sp = 0; sp < 4; ++sp) w(s, sp) = at(m, s, sp, mp);
  return w;
}

void MpoSite::set_block(int m, int mp, const Eigen::Matrix4d& w) {
  for (int s = 0; s < 4; ++s)
    for (int sp = 0; sp < 4; ++sp) at(m, s, sp, mp) = w(s, sp);
}

SuperMPO::SuperMPO(std::vector<MpoSite> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw UsageError("SuperMPO: empty");
  if (sites_.front().wl != 1 || sites_.back().wr != 1) throw UsageError("SuperMPO: open boundary bonds must be 1");
  for (std::size_t i = 0; i + 1 < sites_.size(); ++i) {
    if (sites_[i].wr != sites_[i + 1].wl) throw UsageError("SuperMPO: bond mismatch");
  }
  for (const auto& s : sites_) {
    for (double x : s.data) {
      if (!std::isfinite(x)) throw NumericalError("SuperMPO: non-finite entry", 0.0);
    }
  }
  blocks_.resize(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const MpoSite& s = sites_[i];
    std::vector<MpoBlock> all;
    double biggest = 0.0;
    for (int m = 0; m < s.wl; ++m) {
      for (int mp = 0; mp < s.wr; ++mp) {
        MpoBlock b{m, mp, s.block(m, mp)};
        const double n = b.w.norm();
        if (n == 0.0) continue;
        biggest = std::max(biggest, n);
        all.push_back(b);
      }
    }
    for (auto& b : all) {
      if (b.w.norm() > 1e-15 * biggest) blocks_[i].push_back(b);
    }
  }
}

int SuperMPO::max_bond() const {
  int w = 1;
  for (const auto& s : sites_) w = std::max(w, s.wr);
  return w;
}

Eigen::MatrixXd SuperMPO::to_dense() const {
  if (size() > 6) throw CapExceeded("SuperMPO::to_dense: at most 6 sites");
  std::vector<Eigen::MatrixXd> t(1, Eigen::MatrixXd::Ones(1, 1));
  for (int i = 0; i < size(); ++i) {
    const MpoSite& s = sites_[i];
    const Eigen::Index n = t[0].rows() * 4;
    std::vector<Eigen::MatrixXd> next(s.wr, Eigen::MatrixXd::Zero(n, n));
    for (const auto& b : blocks_[i]) {
      const Eigen::MatrixXd& left = t[b.m];
      for (Eigen::Index r = 0; r < left.rows(); ++r)
        for (Eigen::Index c = 0; c < left.cols(); ++c) {
          if (left(r, c) == 0.0) continue;
          next[b.mp].block<4, 4>(4 * r, 4 * c) += left(r, c) * b.w;
        }
    }
    t = std::move(next);
  }
  return t[0];
}

namespace superop {

namespace {

int levi(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  // Cyclic permutations of (1,2,3) are even.
  return ((b - a + 3) % 3 == 1) ? 1 : -1;
}

std::vector<MpoSite> identity_chain(int W) {
  std::vector<MpoSite> sites(W, MpoSite(1, 1));
  for (auto& s : sites) s.set_block(0, 0, Eigen::Matrix4d::Identity());
  return sites;
}

void check_window(int W) {
  if (W < 1) throw UsageError("superop: window must have at least one site");
}

}  // namespace

Eigen::Matrix4d J(int a) {
  if (a < 1 || a > 3) throw UsageError("superop::J: axis must be 1..3");
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int k = 1; k <= 3; ++k)
    for (int c = 1; c <= 3; ++c) m(c, k) = levi(a, k, c);
  return m;
}

Eigen::Matrix4d S(int a) {
  if (a < 1 || a > 3) throw UsageError("superop::S: axis must be 1..3");
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(a, 0) = 1.0;
  m(0, a) = 1.0;
  return m;
}

SuperMPO commutator(const IsingParams& p, int W) {
  check_window(W);
  const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d field = 2.0 * (p.h * J(3) + p.g * J(1));
  // States: 0 nothing placed, 1 after S_Z, 2 after J_Z, 3 complete.
  std::array<std::array<Eigen::Matrix4d, 4>, 4> w;
  for (auto& row : w)
    for (auto& b : row) b.setZero();
  w[0][0] = I;
  w[0][1] = 2.0 * IsingParams::zz * S(3);
  w[0][2] = 2.0 * IsingParams::zz * J(3);
  w[0][3] = field;
  w[1][3] = J(3);
  w[2][3] = S(3);
  w[3][3] = I;

  std::vector<MpoSite> sites;
  for (int i = 0; i < W; ++i) {
    const int m0 = (i == 0) ? 0 : -1;           // row restricted to start state
    const int m1 = (i == W - 1) ? 3 : -1;       // column restricted to end state
    MpoSite s(m0 >= 0 ? 1 : 4, m1 >= 0 ? 1 : 4);
    for (int a = 0; a < 4; ++a) {
      if (m0 >= 0 && a != m0) continue;
      for (int b = 0; b < 4; ++b) {
        if (m1 >= 0 && b != m1) continue;
        s.set_block(m0 >= 0 ? 0 : a, m1 >= 0 ? 0 : b, w[a][b]);
      }
    }
    sites.push_back(std::move(s));
  }
  return SuperMPO(std::move(sites));
}

SuperMPO gram(const SuperMPO& a) {
  std::vector<MpoSite> sites;
  for (int i = 0; i < a.size(); ++i) {
    const MpoSite& s = a.site(i);
    MpoSite t(s.wl * s.wl, s.wr * s.wr);
    for (const auto& b1 : a.blocks(i))
      for (const auto& b2 : a.blocks(i)) {
        t.set_block(b1.m * s.wl + b2.m, b1.mp * s.wr + b2.mp, b1.w.transpose() * b2.w);
      }
    sites.push_back(std::move(t));
  }
  return SuperMPO(std::move(sites));
}

SuperMPO add(const SuperMPO& a, const SuperMPO& b) {
  if (a.size() != b.size()) throw UsageError("superop::add: window mismatch");
  const int W = a.size();
  std::vector<MpoSite> sites;
  for (int i = 0; i < W; ++i) {
    const MpoSite& x = a.site(i);
    const MpoSite& y = b.site(i);
    const bool first = (i == 0);
    const bool last = (i == W - 1);
    const int wl = first ? 1 : x.wl + y.wl;
    const int wr = last ? 1 : x.wr + y.wr;
    MpoSite t(wl, wr);
    for (const auto& blk : a.blocks(i)) {
      const Eigen::Matrix4d prev = t.block(blk.m, blk.mp);
      t.set_block(blk.m, blk.mp, prev + blk.w);
    }
    for (const auto& blk : b.blocks(i)) {
      const int m = first ? 0 : x.wl + blk.m;
      const int mp = last ? 0 : x.wr + blk.mp;
      const Eigen::Matrix4d prev = t.block(m, mp);
      t.set_block(m, mp, prev + blk.w);
    }
    sites.push_back(std::move(t));
  }
  return SuperMPO(std::move(sites));
}

SuperMPO local_term(int W, int site, const Eigen::Matrix4d& op) {
  check_window(W);
  if (site < 0 || site >= W) throw UsageError("superop::local_term: site outside window");
  std::vector<MpoSite> sites = identity_chain(W);
  sites[site].set_block(0, 0, op);
  return SuperMPO(std::move(sites));
}

SuperMPO compress(const SuperMPO& a, double rel_tol) {
  const int W = a.size();
  std::vector<MpoSite> s;
  for (int i = 0; i < W; ++i) s.push_back(a.site(i));

  // Left-orthogonalize.
  for (int i = 0; i + 1 < W; ++i) {
    Eigen::Map<RowMat> left(s[i].data.data(), s[i].wl * 16, s[i].wr);
    const Eigen::MatrixXd lm = left;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(lm);
    const int k = static_cast<int>(std::min<Eigen::Index>(left.rows(), left.cols()));
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(left.rows(), k);
    const Eigen::MatrixXd R = Q.transpose() * lm;
    MpoSite q(s[i].wl, k);
    Eigen::Map<RowMat>(q.data.data(), q.wl * 16, k) = Q;
    Eigen::Map<RowMat> right(s[i + 1].data.data(), s[i + 1].wl, 16 * s[i + 1].wr);
    MpoSite nxt(k, s[i + 1].wr);
    Eigen::Map<RowMat>(nxt.data.data(), k, 16 * nxt.wr) = R * right;
    s[i] = std::move(q);
    s[i + 1] = std::move(nxt);
  }
  // Truncating right-to-left SVD sweep.
  for (int i = W - 1; i > 0; --i) {
    Eigen::Map<RowMat> right(s[i].data.data(), s[i].wl, 16 * s[i].wr);
    const linalg::Svd svd = linalg::thin_svd(Eigen::MatrixXd(right));
    const Eigen::VectorXd& sv = svd.s;
    int keep = 1;
    while (keep < sv.size() && sv(keep) > rel_tol * sv(0)) ++keep;
    MpoSite v(keep, s[i].wr);
    Eigen::Map<RowMat>(v.data.data(), keep, 16 * v.wr) = svd.V.leftCols(keep).transpose();
    const Eigen::MatrixXd us = svd.U.leftCols(keep) * sv.head(keep).asDiagonal();
    Eigen::Map<RowMat> left(s[i - 1].data.data(), s[i - 1].wl * 16, s[i - 1].wr);
    MpoSite prev(s[i - 1].wl, keep);
    Eigen::Map<RowMat>(prev.data.data(), prev.wl * 16, keep) = left * us;
    s[i] = std::move(v);
    s[i - 1] = std::move(prev);
  }
  return SuperMPO(std::move(s));
}

}  // namespace superop

}  // namespace slowop
