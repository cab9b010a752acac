// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Variational minimization of lambda(O) = -ntr([H,O]^2) over operator MPS by
// one-site DMRG sweeps with an externally stepped bond dimension.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "slowop/exact_solver.hpp"
#include "slowop/ising.hpp"
#include "slowop/op_mps.hpp"
#include "slowop/superop.hpp"

namespace slowop {

struct SweepSchedule {
  std::vector<int> bond_dims;
  /// Sweeps at one bond dimension stop when the relative change of the
  /// penalized form between consecutive sweeps drops below this.
  double inner_tol = 1e-7;
  /// Bond growth stops when lambda changes by less than this (relative).
  double outer_tol = 5e-3;
  int max_sweeps = 100;

  /// 8, 16, 32, ... up to max_D.
  static SweepSchedule local_default(int max_D = 1024);
  /// 64, 128, ... up to max_D, inner_tol 1e-4.
  static SweepSchedule ti_default(int max_D = 1024);
  void validate() const;
};

enum class FormKind { mpo_local, global_ti };

/// <O| K |O> with the bra cell at `bra_offset` and the ket cell at
/// `ket_offset` inside a window of `window` sites padded with identities.
struct FormTerm {
  int window = 0;
  int bra_offset = 0;
  int ket_offset = 0;
  std::shared_ptr<const SuperMPO> mpo;
};

/// weight * <functional|O>^2.
struct PenaltyTerm {
  std::string name;
  double weight = 1.0;
  OperatorMPS functional;
};

struct EffectiveForm {
  FormKind kind = FormKind::mpo_local;
  IsingParams params;
  int N = 0;
  std::vector<FormTerm> terms;
  std::vector<PenaltyTerm> penalties;

  Gauge gauge() const { return kind == FormKind::global_ti ? Gauge::ti_first_site : Gauge::local; }
  Definition definition() const {
    return kind == FormKind::global_ti ? Definition::translation_invariant : Definition::local;
  }
  /// Quadratic form without penalties (not divided by the norm).
  double value(const OperatorMPS& m) const;
  double penalty(const OperatorMPS& m) const;
};

/// K = A^T A for A = -i ad(H_loc) plus the two boundary sigma_z maps, with
/// the identity-trace penalty attached.
EffectiveForm build_local_effective(const IsingParams& p, int N);
/// Sum over cell shifts d in [-(N+1), N+1] of ntr([H,O_0][H,O_d]); each shift
/// is one FormTerm on N+2+|d| sites. Carries the ntr(HO) penalty.
EffectiveForm build_ti_effective(const IsingParams& p, int N);

struct DmrgOptions {
  double penalty_factor = 10.0;
  int max_penalty_reruns = 3;
  double trace_tol = 1e-8;       // local |ntr O|
  double h_overlap_tol = 1e-6;   // TI |ntr(H O)| per cell
  /// Local eigensolves stop at residual rel * |current estimate| (floored).
  double local_tol_rel = 1e-4;
  double local_tol_floor = 1e-13;
  int local_max_iter = 120;
  int local_max_subspace = 24;
  /// Local problems up to this size are diagonalized densely.
  int local_dense_max = 128;
  /// Amplitude of the random entries added when bonds grow.
  double growth_noise = 1e-3;
  /// Sweeps raising the penalized form by more than this (relative) are
  /// reported as numerically unstable.
  double monotonic_slack = 1e-9;
  /// Relative tolerances are taken against max(|value|, abs_floor).
  double abs_floor = 1e-10;
};

struct SweepLogRow {
  int stage = 0;
  int sweep = 0;
  int bond_dim = 0;
  double lambda = 0.0;
  double penalized = 0.0;
  double constraint = 0.0;
  double seconds = 0.0;
};

struct DmrgResult {
  SlowestResult result;
  OperatorMPS mps;
  std::vector<SweepLogRow> log;
  bool converged = true;

  std::string log_csv() const;
};

/// The returned MPS is normalized, canonical at site 0 and sign-fixed: the
/// largest coefficient is positive (dense check for N <= 10, otherwise among
/// strings of weight <= 2). result.vector is filled for N <= 10.
DmrgResult minimize(const EffectiveForm& form, const SweepSchedule& schedule, std::uint64_t seed,
                    const DmrgOptions& opt = {});

namespace detail {
/// Explicit matrix G of the local problem at site j, such that the form
/// (with or without penalties) equals x^T G x for x the tensor at site j.
Eigen::MatrixXd local_matrix(const EffectiveForm& form, const OperatorMPS& m, int j, bool penalties);
}  // namespace detail

}  // namespace slowop
