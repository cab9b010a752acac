// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/ising.hpp"

#include <nlohmann/json.hpp>

#include "slowop/error.hpp"

namespace slowop {
namespace {

void add_bond(PauliSum& H, int L, int i, int j) {
  PauliString s(L);
  s.set(i, Pauli::Z);
  s.set(j, Pauli::Z);
  H.add(s, IsingParams::zz);
}

void add_fields(PauliSum& H, const IsingParams& p, int L) {
  for (int i = 0; i < L; ++i) {
    if (p.h != 0.0) H.add(PauliString::single(L, i, Pauli::Z), p.h);
    if (p.g != 0.0) H.add(PauliString::single(L, i, Pauli::X), p.g);
  }
}

}  // namespace

PauliSum build_hamiltonian(const IsingParams& p, int L, bool periodic) {
  if (L < 1 || (periodic && L < 2)) {
    throw UsageError("build_hamiltonian: need L >= 2 for a periodic chain (L >= 1 open)");
  }
  PauliSum H(L);
  for (int i = 0; i + 1 < L; ++i) add_bond(H, L, i, i + 1);
  if (periodic) add_bond(H, L, L - 1, 0);
  add_fields(H, p, L);
  return H;
}

PauliSum build_h_loc(const IsingParams& p, int N) {
  if (N < 1) throw UsageError("build_h_loc: N must be >= 1");
  return build_hamiltonian(p, N, false);
}

HamiltonianMPO hamiltonian_mpo(const IsingParams& p, int N) {
  if (N < 1) throw UsageError("hamiltonian_mpo: N must be >= 1");
  HamiltonianMPO::SiteMatrix M{};
  M[0][0] = {1, 0, 0, 0};            // I
  M[1][0] = {0, 0, 0, 1};            // Z
  M[2][0] = {0, p.g, 0, p.h};        // h Z + g X
  M[2][1] = {0, 0, 0, IsingParams::zz};  // -Z
  M[2][2] = {1, 0, 0, 0};            // I
  HamiltonianMPO mpo;
  mpo.sites.assign(N, M);
  mpo.vL = {0, 0, 1};
  mpo.vR = {1, 0, 0};
  return mpo;
}

PauliSum HamiltonianMPO::contract() const {
  const int n = size();
  if (n < 1) throw UsageError("HamiltonianMPO::contract: empty MPO");
  // Row vector of operators, one PauliSum per bond index.
  std::array<PauliSum, 3> row;
  for (int a = 0; a < 3; ++a) {
    row[a] = PauliSum(n);
    if (vL[a] != 0.0) row[a].add(PauliString(n), vL[a]);
  }
  for (int i = 0; i < n; ++i) {
    std::array<PauliSum, 3> next{PauliSum(n), PauliSum(n), PauliSum(n)};
    for (int a = 0; a < 3; ++a) {
      if (row[a].empty()) continue;
      for (int b = 0; b < 3; ++b) {
        for (int k = 0; k < 4; ++k) {
          const double c = sites[i][a][b][k];
          if (c == 0.0) continue;
          const PauliString local = PauliString::single(n, i, static_cast<Pauli>(k));
          for (const auto& [bits, v] : row[a].raw()) {
            // Sites >= i are identity in `row`, so the product is a plain XOR.
            next[b].add(PauliString(n, bits ^ local.bits()), v * c);
          }
        }
      }
    }
    row = std::move(next);
  }
  PauliSum out(n);
  for (int b = 0; b < 3; ++b) {
    if (vR[b] != 0.0) out += vR[b] * row[b];
  }
  return out;
}

std::string HamiltonianMPO::to_json() const {
  nlohmann::json j;
  j["bond_dim"] = 3;
  j["basis"] = "IXYZ";
  j["vL"] = vL;
  j["vR"] = vR;
  j["sites"] = nlohmann::json::array();
  for (const auto& M : sites) j["sites"].push_back(M);
  return j.dump(1);
}

HamiltonianMPO HamiltonianMPO::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    HamiltonianMPO mpo;
    mpo.vL = j.at("vL").get<std::array<double, 3>>();
    mpo.vR = j.at("vR").get<std::array<double, 3>>();
    for (const auto& s : j.at("sites")) mpo.sites.push_back(s.get<SiteMatrix>());
    if (mpo.sites.empty()) throw UsageError("MPO JSON has no sites");
    return mpo;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed MPO JSON: ") + e.what());
  }
}

}  // namespace slowop
