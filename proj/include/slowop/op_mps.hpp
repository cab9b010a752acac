// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Operator-valued matrix product states over the Pauli physical index:
// O = sum_k A0[k0] A1[k1] ... A{N-1}[k{N-1}] P_{k0} x ... x P_{k{N-1}}
// with real tensors, so O is Hermitian.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slowop/pauli.hpp"

namespace slowop {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Real 3-index tensor (left bond, physical, right bond), row-major.
struct SiteTensor {
  int left = 1;
  int phys = 4;
  int right = 1;
  std::vector<double> data;

  SiteTensor() = default;
  SiteTensor(int l, int d, int r) : left(l), phys(d), right(r), data(std::size_t(l) * d * r, 0.0) {}

  double& operator()(int l, int k, int r) { return data[(std::size_t(l) * phys + k) * right + r]; }
  double operator()(int l, int k, int r) const {
    return data[(std::size_t(l) * phys + k) * right + r];
  }
  /// (left*phys) x right view.
  Eigen::Map<RowMatrix> as_left() { return {data.data(), left * phys, right}; }
  Eigen::Map<const RowMatrix> as_left() const { return {data.data(), left * phys, right}; }
  /// left x (phys*right) view.
  Eigen::Map<RowMatrix> as_right() { return {data.data(), left, phys * right}; }
  Eigen::Map<const RowMatrix> as_right() const { return {data.data(), left, phys * right}; }
  /// left x right slice at physical index k.
  Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>> slice(int k) const {
    return {data.data() + std::size_t(k) * right, left, right, Eigen::OuterStride<>(phys * right)};
  }
  Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>> slice(int k) {
    return {data.data() + std::size_t(k) * right, left, right, Eigen::OuterStride<>(phys * right)};
  }
  double norm2() const;
};

/// local: physical dimension 4 (I,X,Y,Z) everywhere. ti_first_site: site 0
/// has physical dimension 3 (X,Y,Z), making the cell traceless by structure.
enum class Gauge { local, ti_first_site };

std::string gauge_name(Gauge g);

class OperatorMPS {
 public:
  OperatorMPS() = default;
  OperatorMPS(Gauge gauge, std::vector<SiteTensor> sites);

  int size() const { return static_cast<int>(sites_.size()); }
  Gauge gauge() const { return gauge_; }
  const SiteTensor& site(int i) const { return sites_.at(i); }
  SiteTensor& site(int i) { return sites_.at(i); }
  const std::vector<SiteTensor>& sites() const { return sites_; }

  /// Bond dimension between sites i-1 and i, for i in 1..N-1.
  int bond_dim(int cut) const { return sites_.at(cut).left; }
  int max_bond_dim() const;

  /// Pauli letter (0..3) carried by physical index k at `site`.
  int letter(int site, int k) const;

  /// Largest bond dimensions allowed at each cut for a cap D:
  /// min(4^i, 4^(N-i), D), with 3*4^(i-1) on the left in TI gauge.
  static std::vector<int> bond_caps(int N, int D, Gauge g);

  /// Gaussian tensors with capped bond dimensions, canonicalized to site 0
  /// and normalized.
  static OperatorMPS random(int N, int D, Gauge g, std::uint64_t seed);
  /// Bond-dimension-1 MPS of a single Pauli string.
  static OperatorMPS product(const PauliString& s, Gauge g = Gauge::local);

  /// Successive SVDs with truncation to D (and singular values below
  /// 1e-14*s_max). In TI gauge, strings starting with I must have zero
  /// weight. `discarded` receives the total discarded squared weight.
  static OperatorMPS from_vector(const OperatorVector& v, int D, Gauge g = Gauge::local,
                                 double* discarded = nullptr);
  OperatorVector to_vector() const;
  PauliSum to_sum(double drop_tol = 0.0) const;

  void scale(double a);
  double norm() const;

  std::string to_json() const;
  static OperatorMPS from_json(const std::string& text);

 private:
  Gauge gauge_ = Gauge::local;
  std::vector<SiteTensor> sites_;
};

/// Left-orthogonal left of `center`, right-orthogonal right of it. QR/LQ
/// factors use a nonnegative diagonal so the result is idempotent.
OperatorMPS canonicalize(const OperatorMPS& m, int center);

/// Left-orthogonalizes site i in place and absorbs the remainder into i+1.
void move_center_right(OperatorMPS& m, int i);
/// Right-orthogonalizes site i in place and absorbs the remainder into i-1.
void move_center_left(OperatorMPS& m, int i);

struct EntropyProfile {
  std::vector<int> cuts;            // 1..N-1
  std::vector<double> entropy;      // nats
  std::vector<double> max_bound;    // log min(4^i, 4^(N-i))
  std::vector<std::vector<double>> schmidt;
  double log_d = 0.0;               // log of the largest bond dimension
};

/// Throws UsageError if |ntr(O^2) - 1| > 1e-8.
EntropyProfile entropy_profile(const OperatorMPS& m);

/// ntr(a b). A 3-dimensional first-site leg is promoted to 4 by zero padding
/// of the identity component. Throws UsageError on length mismatch.
double overlap_mps(const OperatorMPS& a, const OperatorMPS& b);

}  // namespace slowop
