// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Infinite-temperature dynamics on periodic chains: Chebyshev propagation of
// state vectors, the random-vector two-point correlator, and exact
// correlators and OTOCs from a full eigendecomposition.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slowop/ising.hpp"
#include "slowop/pauli.hpp"

namespace slowop {

using StateVector = Eigen::VectorXcd;

/// Matrix-free action of a Pauli sum on 2^L amplitudes (bit L-1-i of the
/// basis index is site i, matching to_dense). Terms are grouped by their
/// flip mask.
class StateOperator {
 public:
  StateOperator() = default;
  explicit StateOperator(const PauliSum& op, int cap = kDefaultDenseCap);

  int sites() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }
  /// Sum of |coefficients|, an upper bound on the spectral radius.
  double norm_bound() const { return norm_bound_; }
  /// y = A x.
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  StateVector apply(const StateVector& x) const;
  /// Dense real matrix. Throws UsageError if any entry is complex.
  Eigen::MatrixXd dense_real() const;

 private:
  struct Group {
    std::uint64_t mask = 0;
    bool uniform_real = false;  // every entry equals `scalar`
    double scalar = 0.0;
    std::vector<double> real_diag;  // used when the group is real but not uniform
    std::vector<cplx> diag;         // general case
  };
  int n_ = 0;
  double norm_bound_ = 0.0;
  std::vector<Group> groups_;
};

struct ChebyshevConfig {
  double e_bar = 1000.0;
  /// Use 1.1 * norm_bound() in place of e_bar.
  bool auto_e_bar = false;
  double trunc_tol = 1e-13;
  int max_terms = 2'000'000;
};

struct ChebyshevStats {
  int terms = 0;
  double norm_defect = 0.0;
  double e_bar = 0.0;
};

/// Bessel J_0..J_{M} at x >= 0 by Miller's backward recurrence, normalized
/// with J_0 + 2 sum J_{2k} = 1.
std::vector<double> bessel_j_sequence(double x, int M);

/// exp(-i H t) |psi>. Terms are added until n exceeds the expansion argument
/// and the squared norm of the partial sum is within trunc_tol of the input
/// norm. Throws NumericalError if max_terms is hit first and UsageError if
/// e_bar does not bound the spectrum.
StateVector chebyshev_evolve(const StateVector& psi, const StateOperator& H, double t,
                             const ChebyshevConfig& cfg = {}, ChebyshevStats* stats = nullptr);

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  /// Optional channels; empty when not produced.
  std::vector<double> imag;
  std::vector<double> stderr_;
  std::map<std::string, std::string> meta;

  /// `# key=value` lines then `t,value[,imag,stderr]`.
  std::string to_csv() const;
};

struct DynamicsCaps {
  int stochastic_max_L = 14;
  int exact_max_L = 12;
};

/// ntr(O(t) O(0)) estimated with K normalized complex Gaussian vectors.
/// O lives on the L-site periodic chain and has unit ntr-norm. Times must be
/// non-decreasing; states are propagated from one time to the next.
TimeSeries two_point_correlator(const PauliSum& O, const IsingParams& p, const std::vector<double>& times,
                                int K = 50, std::uint64_t seed = 12345, const ChebyshevConfig& cfg = {},
                                const DynamicsCaps& caps = {});

struct EigenSystem {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd vectors;   // columns
};

/// Full spectrum of the periodic chain on L sites.
EigenSystem eigensystem(const IsingParams& p, int L, const DynamicsCaps& caps = {});

/// ntr(O(t) O(0)) = 2^-L sum_ij exp(i(E_i-E_j)t) |<E_i|O|E_j>|^2.
TimeSeries exact_correlator(const PauliSum& O, const IsingParams& p, const std::vector<double>& times,
                            const DynamicsCaps& caps = {});
TimeSeries exact_correlator(const PauliSum& O, const EigenSystem& es, const std::vector<double>& times);

/// 2 - 2 ntr(O(t) s O(t) s) for s the Pauli `axis` at each listed site,
/// averaged over the sites. Values lie in [0, 4] for unit-norm O.
TimeSeries otoc(const PauliSum& O, char axis, const std::vector<int>& sites, const IsingParams& p,
                const std::vector<double>& times, const DynamicsCaps& caps = {});
TimeSeries otoc(const PauliSum& O, char axis, const std::vector<int>& sites, const EigenSystem& es,
                const std::vector<double>& times);

/// Sites probed at `offset` from the center of an N-site window placed at
/// 0..N-1 on an L-ring. Odd N: {c + offset}. Even N: the two central sites
/// c_l, c_r mirrored outward, {c_r + offset, c_l - offset}, wrapped mod L.
std::vector<int> otoc_center_sites(int N, int L, int offset);

/// exp(-lambda t^2 / 2).
TimeSeries gaussian_envelope(double lambda, const std::vector<double>& times);

/// start, start+step, ... up to stop (inclusive within 1e-9 step).
std::vector<double> time_grid(double start, double stop, double step);

}  // namespace slowop
