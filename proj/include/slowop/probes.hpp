// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Probe operators compared against slowest operators: cosine-enveloped
// energy density (diffusion mode), windowed energy, magnetizations, their
// translation-invariant sums, and the scaling / transition analyses built on
// top of overlaps.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slowop/ising.hpp"
#include "slowop/pauli.hpp"

namespace slowop {

enum class ProbeTag { diffusion_mode, energy_flux, magnetization_x, magnetization_y, magnetization_z };
enum class ProbeVariant { local_window, translation_invariant };

struct ProbeKind {
  ProbeTag tag = ProbeTag::diffusion_mode;
  ProbeVariant variant = ProbeVariant::local_window;
};

std::string probe_name(ProbeTag t);
ProbeTag parse_probe(const std::string& s);
std::string variant_name(ProbeVariant v);

/// Bond i (sites i, i+1) weight cos(-pi/2 + (i+1/2) pi/N).
double diffusion_bond_weight(int i, int N);
/// Field i weight cos(-pi/2 + i pi/N).
double diffusion_field_weight(int i, int N);

/// All probes below are Hermitian, traceless and have unit ntr-norm.
PauliSum diffusion_mode(const IsingParams& p, int N);
/// H_loc on N sites plus the wrap term -Z_{N-1} Z_0.
PauliSum energy_flux(const IsingParams& p, int N);
/// axis: 'x', 'y' or 'z'.
PauliSum magnetization(char axis, int N);
/// The N-site window probe of the given tag.
PauliSum window_probe(ProbeTag tag, const IsingParams& p, int N);

/// Cyclic sum of window probes over an L-site ring (L >= 2N+3), normalized
/// on the ring. The energy-flux variant is the periodic Hamiltonian itself.
PauliSum ti_probe(ProbeTag tag, const IsingParams& p, int N, int L);

/// Re ntr(O P). Throws UsageError on size mismatch.
double overlap(const PauliSum& O, const PauliSum& P);

/// -ntr([H,O]^2) of an N-site operator placed in an infinite chain.
double window_lambda(const PauliSum& O, const IsingParams& p);

struct OptimizedDiffusion {
  /// a_i for bonds (i = 0..N-2), b_i for Z fields and c_i for X fields
  /// (i = 0..N-1; entries at i = 0 are zero by construction).
  Eigen::VectorXd a, b, c;
  double lambda = 0.0;
  PauliSum op;
};

/// Minimizes -ntr([H,E]^2) at unit norm over cosine-weighted bond, Z-field
/// and X-field terms. The i = 0 field terms vanish identically and are left
/// out, so the generalized eigenproblem has dimension 3N-3. Throws
/// NumericalError if the Gram matrix is singular.
OptimizedDiffusion optimized_diffusion_mode(const IsingParams& p, int N);

struct SlopeRecord {
  int N_low = 0;
  int N_high = 0;
  double slope = 0.0;
};

/// Two-point log-log slopes between consecutive entries of the map.
/// Throws UsageError on non-positive lambda.
std::vector<SlopeRecord> instant_slopes(const std::map<int, double>& lambdas);

struct OverlapPoint {
  double x = 0.0;  // overlap with magnetization_x
  double z = 0.0;  // overlap with magnetization_z
};

struct Transition {
  /// Crossing of max(|x|, |z|) through the threshold, linearly interpolated
  /// between the bracketing grid points.
  double h_star = 0.0;
  /// First grid point at which the threshold is reached.
  double h_grid = 0.0;
};

/// Empty when the threshold is never reached on the grid. If the first grid
/// point already reaches it, both fields equal that point.
std::optional<Transition> detect_transition(const std::map<double, OverlapPoint>& overlaps,
                                            double threshold = 0.05);

// CSV writers. Rows carry the parameters named in each header.
struct OverlapRecord {
  double g = 0.0;
  double h = 0.0;
  int N = 0;
  ProbeKind probe;
  double value = 0.0;
};
std::string overlaps_csv(const std::vector<OverlapRecord>& rows);
std::string slopes_csv(const std::vector<SlopeRecord>& rows);
std::string transition_csv(int N, double g, double threshold, const std::optional<Transition>& t);

}  // namespace slowop
