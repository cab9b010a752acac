// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/probes.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "slowop/error.hpp"
#include "slowop/exact_solver.hpp"

namespace slowop {

namespace {

PauliSum normalized(PauliSum s) {
  const double n = s.norm();
  if (n == 0.0) throw NumericalError("probe has zero norm", 0.0);
  s *= cplx(1.0 / n);
  return s;
}

void check_window(int N, int min) {
  if (N < min) throw UsageError("probe window too small");
}

Pauli axis_letter(char axis) {
  switch (axis) {
    case 'x': case 'X': return Pauli::X;
    case 'y': case 'Y': return Pauli::Y;
    case 'z': case 'Z': return Pauli::Z;
    default: throw UsageError(std::string("unknown magnetization axis: ") + axis);
  }
}

PauliString zz(int n, int i, int j) {
  PauliString s(n);
  s.set(i, Pauli::Z);
  s.set(j, Pauli::Z);
  return s;
}

}  // namespace

std::string probe_name(ProbeTag t) {
  switch (t) {
    case ProbeTag::diffusion_mode: return "diffusion_mode";
    case ProbeTag::energy_flux: return "energy_flux";
    case ProbeTag::magnetization_x: return "magnetization_x";
    case ProbeTag::magnetization_y: return "magnetization_y";
    case ProbeTag::magnetization_z: return "magnetization_z";
  }
  return "";
}

ProbeTag parse_probe(const std::string& s) {
  for (ProbeTag t : {ProbeTag::diffusion_mode, ProbeTag::energy_flux, ProbeTag::magnetization_x,
                     ProbeTag::magnetization_y, ProbeTag::magnetization_z}) {
    if (probe_name(t) == s) return t;
  }
  throw UsageError("unknown probe: " + s);
}

std::string variant_name(ProbeVariant v) {
  return v == ProbeVariant::local_window ? "local_window" : "translation_invariant";
}

double diffusion_bond_weight(int i, int N) {
  return std::cos(-std::numbers::pi / 2 + (i + 0.5) * std::numbers::pi / N);
}

double diffusion_field_weight(int i, int N) {
  return std::cos(-std::numbers::pi / 2 + i * std::numbers::pi / N);
}

PauliSum diffusion_mode(const IsingParams& p, int N) {
  check_window(N, 2);
  PauliSum e(N);
  for (int i = 0; i + 1 < N; ++i) e.add(zz(N, i, i + 1), IsingParams::zz * diffusion_bond_weight(i, N));
  for (int i = 0; i < N; ++i) {
    const double w = diffusion_field_weight(i, N);
    e.add(PauliString::single(N, i, Pauli::Z), p.h * w);
    e.add(PauliString::single(N, i, Pauli::X), p.g * w);
  }
  // cos(-pi/2) leaves ~1e-17 residues at i = 0.
  e.prune(1e-14);
  return normalized(e);
}

PauliSum energy_flux(const IsingParams& p, int N) {
  check_window(N, 2);
  PauliSum e = build_h_loc(p, N);
  e.add(zz(N, N - 1, 0), IsingParams::zz);
  return normalized(e);
}

PauliSum magnetization(char axis, int N) {
  check_window(N, 1);
  const Pauli a = axis_letter(axis);
  PauliSum m(N);
  for (int i = 0; i < N; ++i) m.add(PauliString::single(N, i, a), 1.0);
  return normalized(m);
}

PauliSum window_probe(ProbeTag tag, const IsingParams& p, int N) {
  switch (tag) {
    case ProbeTag::diffusion_mode: return diffusion_mode(p, N);
    case ProbeTag::energy_flux: return energy_flux(p, N);
    case ProbeTag::magnetization_x: return magnetization('x', N);
    case ProbeTag::magnetization_y: return magnetization('y', N);
    case ProbeTag::magnetization_z: return magnetization('z', N);
  }
  throw UsageError("unknown probe tag");
}

PauliSum ti_probe(ProbeTag tag, const IsingParams& p, int N, int L) {
  check_window(N, 1);
  if (L < 2 * N + 3) throw UsageError("ti_probe: ring must have at least 2N+3 sites");
  if (tag == ProbeTag::energy_flux) return normalized(build_hamiltonian(p, L, true));
  const PauliSum w = window_probe(tag, p, N);
  PauliSum total(L);
  for (int i = 0; i < L; ++i) total += embed(w, L, i, true);
  return normalized(total);
}

double overlap(const PauliSum& O, const PauliSum& P) {
  if (O.size() != P.size()) throw UsageError("overlap: operators live on different chains");
  return hs_inner(O, P).real();
}

double window_lambda(const PauliSum& O, const IsingParams& p) {
  const int L = O.size() + 2;
  return evaluate_lambda(embed(O, L, 1), p, L);
}

OptimizedDiffusion optimized_diffusion_mode(const IsingParams& p, int N) {
  check_window(N, 2);
  // Basis: (kind, site). kind 0 bond, 1 Z field, 2 X field.
  std::vector<std::pair<int, int>> idx;
  std::vector<PauliSum> basis;
  for (int i = 0; i + 1 < N; ++i) {
    PauliSum s(N);
    s.add(zz(N, i, i + 1), IsingParams::zz * diffusion_bond_weight(i, N));
    idx.push_back({0, i});
    basis.push_back(std::move(s));
  }
  for (int kind = 1; kind <= 2; ++kind) {
    for (int i = 1; i < N; ++i) {
      PauliSum s(N);
      s.add(PauliString::single(N, i, kind == 1 ? Pauli::Z : Pauli::X), diffusion_field_weight(i, N));
      idx.push_back({kind, i});
      basis.push_back(std::move(s));
    }
  }
  const int n = static_cast<int>(basis.size());
  const int L = N + 2;
  const PauliSum H = build_hamiltonian(p, L, false);
  std::vector<PauliSum> comm;
  for (const auto& b : basis) comm.push_back(commutator(H, embed(b, L, 1)));
  Eigen::MatrixXd M(n, n), S(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      M(a, b) = M(b, a) = hs_inner(comm[a], comm[b]).real();
      S(a, b) = S(b, a) = hs_inner(basis[a], basis[b]).real();
    }
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success || S.diagonal().minCoeff() <= 1e-14) {
    throw NumericalError("optimized_diffusion_mode: singular Gram matrix", 0.0);
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, S);
  if (es.info() != Eigen::Success) throw NumericalError("optimized_diffusion_mode: eigensolve failed", 0.0);
  Eigen::VectorXd v = es.eigenvectors().col(0);
  v /= std::sqrt(v.dot(S * v));

  OptimizedDiffusion out;
  out.a = Eigen::VectorXd::Zero(N - 1);
  out.b = Eigen::VectorXd::Zero(N);
  out.c = Eigen::VectorXd::Zero(N);
  out.op = PauliSum(N);
  // Sign: positive weight on the central bond.
  const int center = (N - 2) / 2;
  if (v[center] < 0) v = -v;
  for (int k = 0; k < n; ++k) {
    const auto [kind, i] = idx[k];
    (kind == 0 ? out.a : kind == 1 ? out.b : out.c)[i] = v[k];
    PauliSum t = basis[k];
    t *= cplx(v[k]);
    out.op += t;
  }
  out.lambda = v.dot(M * v);
  return out;
}

std::vector<SlopeRecord> instant_slopes(const std::map<int, double>& lambdas) {
  std::vector<SlopeRecord> out;
  for (const auto& [N, l] : lambdas) {
    if (!(l > 0)) throw UsageError("instant_slopes: lambda must be positive");
    if (N < 1) throw UsageError("instant_slopes: N must be positive");
  }
  for (auto it = lambdas.begin(); it != lambdas.end(); ++it) {
    auto nx = std::next(it);
    if (nx == lambdas.end()) break;
    out.push_back({it->first, nx->first,
                   (std::log(nx->second) - std::log(it->second)) /
                       (std::log(double(nx->first)) - std::log(double(it->first)))});
  }
  return out;
}

std::optional<Transition> detect_transition(const std::map<double, OverlapPoint>& overlaps,
                                            double threshold) {
  if (!(threshold > 0)) throw UsageError("detect_transition: threshold must be positive");
  bool first = true;
  double h_prev = 0.0, m_prev = 0.0;
  for (const auto& [h, o] : overlaps) {
    const double m = std::max(std::abs(o.x), std::abs(o.z));
    if (m >= threshold) {
      if (first) return Transition{h, h};
      return Transition{h_prev + (threshold - m_prev) / (m - m_prev) * (h - h_prev), h};
    }
    first = false;
    h_prev = h;
    m_prev = m;
  }
  return std::nullopt;
}

std::string overlaps_csv(const std::vector<OverlapRecord>& rows) {
  std::ostringstream os;
  os << std::setprecision(12) << "g,h,N,probe,variant,value\n";
  for (const auto& r : rows) {
    os << r.g << ',' << r.h << ',' << r.N << ',' << probe_name(r.probe.tag) << ','
       << variant_name(r.probe.variant) << ',' << r.value << '\n';
  }
  return os.str();
}

std::string slopes_csv(const std::vector<SlopeRecord>& rows) {
  std::ostringstream os;
  os << std::setprecision(12) << "N_low,N_high,slope\n";
  for (const auto& r : rows) os << r.N_low << ',' << r.N_high << ',' << r.slope << '\n';
  return os.str();
}

std::string transition_csv(int N, double g, double threshold, const std::optional<Transition>& t) {
  std::ostringstream os;
  os << std::setprecision(12) << "N,g,threshold,h_star\n" << N << ',' << g << ',' << threshold << ',';
  if (t) os << t->h_star; else os << "none";
  os << '\n';
  return os.str();
}

}  // namespace slowop
