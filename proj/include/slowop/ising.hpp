// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Mixed-field Ising chain H = -sum Z_i Z_{i+1} + h sum Z_i + g sum X_i.

#include <array>
#include <string>
#include <vector>

#include "slowop/pauli.hpp"

namespace slowop {

struct IsingParams {
  double g = 0.0;
  double h = 0.0;
  static constexpr double zz = -1.0;
};

/// Full chain Hamiltonian. `periodic` adds the Z_{L-1} Z_0 bond (at L=2 it
/// coincides with the open bond and doubles it). L=1 is accepted for open
/// chains and yields the single-spin field term.
PauliSum build_hamiltonian(const IsingParams& p, int L, bool periodic);

/// Open-window Hamiltonian on N sites: N-1 bonds and N fields.
PauliSum build_h_loc(const IsingParams& p, int N);

/// Bond-dimension-3 MPO of H_loc. Each site matrix entry is an operator on
/// one site, stored as real coefficients over (I, X, Y, Z).
struct HamiltonianMPO {
  using Block = std::array<double, 4>;
  using SiteMatrix = std::array<std::array<Block, 3>, 3>;  // [row][col]

  std::vector<SiteMatrix> sites;
  std::array<double, 3> vL{};
  std::array<double, 3> vR{};

  int size() const { return static_cast<int>(sites.size()); }
  int bond_dim() const { return 3; }

  /// vL · M^(0) ··· M^(N-1) · vR as a Pauli sum.
  PauliSum contract() const;

  std::string to_json() const;
  /// Throws UsageError on malformed input.
  static HamiltonianMPO from_json(const std::string& text);
};

HamiltonianMPO hamiltonian_mpo(const IsingParams& p, int N);

}  // namespace slowop
