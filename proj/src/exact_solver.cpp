// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/exact_solver.hpp"

#include <bit>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "slowop/eigensolver.hpp"
#include "slowop/error.hpp"

namespace slowop {
namespace {

using Triplet = Eigen::Triplet<double>;

struct RealTerm {
  std::uint64_t bits;
  double coeff;
};

std::vector<RealTerm> real_terms(const PauliSum& s) {
  std::vector<RealTerm> out;
  for (const auto& t : s.sorted_terms()) out.push_back({t.string.bits(), t.coeff.real()});
  return out;
}

// Appends the real coefficients of -i [H, P_b] (H given as real terms) to
// `emit(row_key, value)`.
template <typename Emit>
void commutator_column(const std::vector<RealTerm>& h, std::uint64_t b, Emit&& emit) {
  for (const auto& t : h) {
    if (!pauli_bits::anticommute(t.bits, b)) continue;
    const int k = pauli_bits::product_phase_exponent(t.bits, b);
    emit(t.bits ^ b, (k == 1 ? 2.0 : -2.0) * t.coeff);
  }
}

// Drops trailing identity pairs; the leading letter of a translation-class
// representative is then non-identity, so the packed value alone identifies it.
std::uint64_t trim_word(std::uint64_t s) {
  if (s == 0) return 0;
  return s >> (2 * (std::countr_zero(s) / 2));
}

}  // namespace

std::string definition_name(Definition d) {
  return d == Definition::local ? "local" : "translation_invariant";
}

Definition parse_definition(const std::string& s) {
  if (s == "local") return Definition::local;
  if (s == "ti" || s == "translation_invariant") return Definition::translation_invariant;
  throw UsageError("unknown definition '" + s + "' (expected local or ti)");
}

void QuadraticForm::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const Eigen::VectorXd ax = A * x;
  y.noalias() = A.transpose() * ax;
}

Eigen::VectorXd QuadraticForm::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dim());
  for (Eigen::Index r = 0; r < A.outerSize(); ++r) {
    for (decltype(A)::InnerIterator it(A, r); it; ++it) d[it.col()] += it.value() * it.value();
  }
  return d;
}

Eigen::MatrixXd QuadraticForm::dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd(A);
  return a.transpose() * a;
}

double QuadraticForm::value(const Eigen::VectorXd& x) const { return (A * x).squaredNorm(); }

Eigen::VectorXd QuadraticForm::restrict(const OperatorVector& v) const {
  if (v.size() != N) throw UsageError("QuadraticForm::restrict: window size mismatch");
  Eigen::VectorXd x(dim());
  for (Eigen::Index j = 0; j < dim(); ++j) x[j] = v.coeffs()[static_cast<Eigen::Index>(basis[j])];
  return x;
}

OperatorVector QuadraticForm::expand(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw UsageError("QuadraticForm::expand: length mismatch");
  OperatorVector v(N);
  for (Eigen::Index j = 0; j < dim(); ++j) v.coeffs()[static_cast<Eigen::Index>(basis[j])] = x[j];
  return v;
}

QuadraticForm local_form(const IsingParams& p, int N, const ExactCaps& caps) {
  if (N < 1) throw UsageError("local_form: N must be >= 1");
  if (N > caps.local_max_n) {
    throw CapExceeded("local_form: N=" + std::to_string(N) + " exceeds exact cap " +
                      std::to_string(caps.local_max_n));
  }
  QuadraticForm f;
  f.definition = Definition::local;
  f.params = p;
  f.N = N;
  const std::uint64_t full = 1ULL << (2 * N);
  f.basis.reserve(full - 1);
  for (std::uint64_t b = 1; b < full; ++b) f.basis.push_back(b);

  // Three orthogonal blocks: [H_loc, O] and the two boundary bonds, whose
  // commutators carry a Z outside the window and so reduce to [Z_0, O] and
  // [Z_{N-1}, O].
  const std::vector<RealTerm> blocks[3] = {
      real_terms(build_h_loc(p, N)),
      {{PauliString::single(N, 0, Pauli::Z).bits(), 1.0}},
      {{PauliString::single(N, N - 1, Pauli::Z).bits(), 1.0}}};

  std::vector<Triplet> trips;
  trips.reserve(f.basis.size() * (3 * N + 2));
  for (std::size_t j = 0; j < f.basis.size(); ++j) {
    for (int blk = 0; blk < 3; ++blk) {
      const std::uint64_t offset = blk * full;
      commutator_column(blocks[blk], f.basis[j], [&](std::uint64_t row, double v) {
        trips.emplace_back(static_cast<int>(offset + row), static_cast<int>(j), v);
      });
    }
  }
  f.A.resize(static_cast<Eigen::Index>(3 * full), f.dim());
  f.A.setFromTriplets(trips.begin(), trips.end());
  f.A.makeCompressed();
  return f;
}

Eigen::VectorXd ti_h_overlap_functional(const IsingParams& p, int N,
                                        const std::vector<std::uint64_t>& basis) {
  const int top = 2 * (N - 1);
  std::unordered_map<std::uint64_t, double> want;
  want[3ULL << top] += p.h;
  want[1ULL << top] += p.g;
  if (N >= 2) want[(3ULL << top) | (3ULL << (top - 2))] += IsingParams::zz;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    auto it = want.find(basis[j]);
    if (it != want.end()) c[static_cast<Eigen::Index>(j)] = it->second;
  }
  return c;
}

QuadraticForm ti_form(const IsingParams& p, int N, const ExactCaps& caps) {
  if (N < 1) throw UsageError("ti_form: N must be >= 1");
  if (N > caps.ti_max_n) {
    throw CapExceeded("ti_form: N=" + std::to_string(N) + " exceeds exact TI cap " +
                      std::to_string(caps.ti_max_n));
  }
  QuadraticForm f;
  f.definition = Definition::translation_invariant;
  f.params = p;
  f.N = N;
  const std::uint64_t full = 1ULL << (2 * N);
  const int top = 2 * (N - 1);
  for (std::uint64_t b = 1; b < full; ++b) {
    if ((b >> top) != 0) f.basis.push_back(b);
  }

  // Commutators with the cell at sites 1..N of an (N+2)-site window; rows are
  // translation classes, so each row sums the contributions of every shift.
  const std::vector<RealTerm> h = real_terms(build_h_loc(p, N + 2));
  std::unordered_map<std::uint64_t, int> row_of;
  std::vector<Triplet> trips;
  for (std::size_t j = 0; j < f.basis.size(); ++j) {
    commutator_column(h, f.basis[j] << 2, [&](std::uint64_t word, double v) {
      const auto key = trim_word(word);
      auto [it, inserted] = row_of.try_emplace(key, static_cast<int>(row_of.size()));
      trips.emplace_back(it->second, static_cast<int>(j), v);
    });
  }
  f.A.resize(static_cast<Eigen::Index>(row_of.size()), f.dim());
  f.A.setFromTriplets(trips.begin(), trips.end());
  f.A.makeCompressed();

  Eigen::VectorXd c = ti_h_overlap_functional(p, N, f.basis);
  if (c.norm() > 0.0) f.constraints.push_back(c / c.norm());
  return f;
}

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > best + 1e-14) {
      best = std::abs(v[i]);
      imax = i;
    }
  }
  if (v.size() > 0 && v[imax] < 0) v = -v;
}

SlowestResult solve(const QuadraticForm& form, std::uint64_t seed, const ExactCaps& caps) {
  const Eigen::VectorXd diag = form.diagonal();
  const double scale = std::max(1.0, diag.size() ? diag.maxCoeff() : 1.0);
  EigenResult er;
  if (form.dim() <= caps.dense_max_dim) {
    er = dense_lowest(form.dense(), form.constraints, 2);
  } else {
    DavidsonOptions opt;
    opt.nroots = 2;
    opt.tol = 1e-10;
    opt.seed = seed;
    opt.max_subspace = 48;
    opt.max_iter = 5000;
    er = davidson([&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { form.apply(x, y); },
                  form.dim(), diag, form.constraints, {}, opt);
    if (!er.converged) {
      throw NumericalError("exact solve: Davidson did not converge", er.residuals.at(0));
    }
  }

  Eigen::VectorXd v = er.vectors.at(0);
  v.normalize();
  fix_sign(v);

  SlowestResult r;
  r.definition = form.definition;
  r.params = form.params;
  r.N = form.N;
  r.lambda = form.value(v);
  r.vector = form.expand(v);
  Eigen::VectorXd mv;
  form.apply(v, mv);
  for (const auto& c : form.constraints) mv -= c.dot(mv) * c;
  r.residuals["eigen"] = (mv - r.lambda * v).norm();
  if (form.definition == Definition::local) {
    r.residuals["trace"] = std::abs(r.vector.coeffs()[0]);
  } else {
    r.residuals["h_overlap"] =
        std::abs(ti_h_overlap_functional(form.params, form.N, form.basis).dot(v));
    r.residuals["cell_trace"] = std::abs(r.vector.coeffs()[0]);
  }
  if (er.values.size() >= 2) {
    r.gap = er.values[1] - er.values[0];
    r.degenerate = *r.gap < 1e-10 * scale;
  }
  return r;
}

double evaluate_lambda(const PauliSum& O, const IsingParams& p, int L) {
  if (O.size() != L) throw UsageError("evaluate_lambda: operator must live on the L-site chain");
  const PauliSum c = commutator(build_hamiltonian(p, L, true), O);
  return hs_inner(c, c).real();
}

PauliSum materialize(const SlowestResult& r, int L) {
  const PauliSum cell = r.vector.to_sum();
  if (r.definition == Definition::local) {
    if (L < r.N) throw UsageError("materialize: chain shorter than the window");
    return embed(cell, L, 0, true);
  }
  if (L < 2 * r.N - 1) {
    throw UsageError("materialize: TI operator needs L >= 2N-1 for distinct cell shifts");
  }
  PauliSum out(L);
  for (int i = 0; i < L; ++i) out += embed(cell, L, i, true);
  out *= 1.0 / std::sqrt(static_cast<double>(L));
  return out;
}

std::string SlowestResult::to_json() const {
  nlohmann::json j;
  j["definition"] = definition_name(definition);
  j["g"] = params.g;
  j["h"] = params.h;
  j["N"] = N;
  j["lambda"] = lambda;
  j["residuals"] = residuals;
  if (gap) j["gap"] = *gap;
  j["degenerate"] = degenerate;
  nlohmann::json coeffs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < vector.coeffs().size(); ++i) {
    const double c = vector.coeffs()[i];
    if (std::abs(c) > 1e-12) {
      coeffs.push_back({PauliString(N, static_cast<std::uint64_t>(i)).str(), c});
    }
  }
  j["coeffs"] = coeffs;
  if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
  return j.dump(1);
}

}  // namespace slowop
