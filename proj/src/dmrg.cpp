// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/dmrg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "slowop/eigensolver.hpp"
#include "slowop/error.hpp"

namespace slowop {

namespace {

using Clock = std::chrono::steady_clock;

// Partial contraction of bra, MPO and ket legs: t has shape (b, m*k).
struct Env {
  int b = 1;
  int m = 1;
  int k = 1;
  RowMatrix t = RowMatrix::Ones(1, 1);
};

using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

Env left_step(const Env& E, const SiteTensor& bra, const SuperMPO& W, int s, const SiteTensor& ket) {
  const int B = E.b, M = E.m, K = E.k;
  const int Bp = bra.right, Mp = W.site(s).wr, Kp = ket.right;
  const RowMatrix T1 = bra.as_right().transpose() * E.t;  // [sigma][b'][m][k]
  RowMatrix T2 = RowMatrix::Zero(std::size_t(Bp) * Mp * K, 4);  // [b'][m'][k][sigma']
  for (const auto& blk : W.blocks(s)) {
    for (int bp = 0; bp < Bp; ++bp) {
      ConstStridedMap t1(T1.data() + std::size_t(bp) * M * K + std::size_t(blk.m) * K, 4, K,
                         Eigen::OuterStride<>(std::size_t(Bp) * M * K));
      Eigen::Map<RowMatrix> t2(T2.data() + (std::size_t(bp) * Mp + blk.mp) * K * 4, K, 4);
      t2.noalias() += t1.transpose() * blk.w;
    }
  }
  (void)B;
  Env out;
  out.b = Bp;
  out.m = Mp;
  out.k = Kp;
  Eigen::Map<const RowMatrix> t2v(T2.data(), std::size_t(Bp) * Mp, std::size_t(K) * 4);
  RowMatrix r = t2v * ket.as_left();
  out.t = Eigen::Map<RowMatrix>(r.data(), Bp, std::size_t(Mp) * Kp);
  return out;
}

Env right_step(const Env& F, const SiteTensor& bra, const SuperMPO& W, int s, const SiteTensor& ket) {
  const int Mp = F.m, Kp = F.k;
  const int B = bra.left, M = W.site(s).wl, K = ket.left;
  const RowMatrix T1 = bra.as_left() * F.t;  // [b][sigma][m'][k']
  RowMatrix T2 = RowMatrix::Zero(std::size_t(B) * M * 4, Kp);  // [b][m][sigma'][k']
  for (const auto& blk : W.blocks(s)) {
    const Eigen::Matrix4d wt = blk.w.transpose();
    for (int b = 0; b < B; ++b) {
      ConstStridedMap t1(T1.data() + std::size_t(b) * 4 * Mp * Kp + std::size_t(blk.mp) * Kp, 4, Kp,
                         Eigen::OuterStride<>(std::size_t(Mp) * Kp));
      Eigen::Map<RowMatrix> t2(T2.data() + (std::size_t(b) * M + blk.m) * 4 * Kp, 4, Kp);
      t2.noalias() += wt * t1;
    }
  }
  Env out;
  out.b = B;
  out.m = M;
  out.k = K;
  Eigen::Map<const RowMatrix> t2v(T2.data(), std::size_t(B) * M, std::size_t(4) * Kp);
  RowMatrix r = t2v * ket.as_right().transpose();
  out.t = Eigen::Map<RowMatrix>(r.data(), B, std::size_t(M) * K);
  return out;
}

// y[b, sigma, b'] = E[b,m,k] W[m,m'](sigma, sigma') x[k, sigma', k'] F[b',m',k'].
void apply_eff(const Env& E, const SuperMPO& W, int s, const SiteTensor& x, const Env& F, SiteTensor& y) {
  const int B = E.b, M = E.m, K = E.k;
  const int Mp = F.m, Kp = F.k;
  (void)K;
  Eigen::Map<const RowMatrix> ev(E.t.data(), std::size_t(B) * M, K);
  const RowMatrix T1 = ev * x.as_right();  // [b][m][sigma'][k']
  RowMatrix T2 = RowMatrix::Zero(std::size_t(B) * 4, std::size_t(Mp) * Kp);  // [b][sigma][m'][k']
  for (const auto& blk : W.blocks(s)) {
    for (int b = 0; b < B; ++b) {
      Eigen::Map<const RowMatrix> t1(T1.data() + (std::size_t(b) * M + blk.m) * 4 * Kp, 4, Kp);
      StridedMap t2(T2.data() + std::size_t(b) * 4 * Mp * Kp + std::size_t(blk.mp) * Kp, 4, Kp,
                    Eigen::OuterStride<>(std::size_t(Mp) * Kp));
      t2.noalias() += blk.w * t1;
    }
  }
  y.as_left().noalias() += T2 * F.t.transpose();
}

SiteTensor pad_first(const SiteTensor& t) {
  if (t.phys == 4) return t;
  SiteTensor p(t.left, 4, t.right);
  for (int l = 0; l < t.left; ++l)
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < t.right; ++r) p(l, k + 1, r) = t(l, k, r);
  return p;
}

SiteTensor unpad_first(const SiteTensor& p) {
  SiteTensor t(p.left, 3, p.right);
  for (int l = 0; l < p.left; ++l)
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < p.right; ++r) t(l, k, r) = p(l, k + 1, r);
  return t;
}

const SiteTensor& identity_pad() {
  static const SiteTensor pad = [] {
    SiteTensor p(1, 4, 1);
    p.data[0] = 1.0;
    return p;
  }();
  return pad;
}

// Overlap environments between a penalty functional p (bra) and O (ket).
RowMatrix overlap_left(const RowMatrix& PL, const SiteTensor& p, const SiteTensor& o) {
  RowMatrix out = RowMatrix::Zero(p.right, o.right);
  for (int k = 0; k < 4; ++k) out.noalias() += p.slice(k).transpose() * PL * o.slice(k);
  return out;
}

RowMatrix overlap_right(const RowMatrix& PR, const SiteTensor& p, const SiteTensor& o) {
  RowMatrix out = RowMatrix::Zero(p.left, o.left);
  for (int k = 0; k < 4; ++k) out.noalias() += p.slice(k) * PR * o.slice(k).transpose();
  return out;
}

// Environments and matvecs for one EffectiveForm on a working MPS.
class Engine {
 public:
  Engine(const EffectiveForm& form, OperatorMPS mps) : form_(form), mps_(std::move(mps)) {
    weights_.reserve(form_.penalties.size());
    for (const auto& p : form_.penalties) {
      weights_.push_back(p.weight);
      std::vector<SiteTensor> pad;
      for (int i = 0; i < p.functional.size(); ++i) pad.push_back(pad_first(p.functional.site(i)));
      functionals_.push_back(std::move(pad));
    }
    reset();
  }

  OperatorMPS& mps() { return mps_; }
  const OperatorMPS& mps() const { return mps_; }
  std::vector<double>& weights() { return weights_; }

  void reset() {
    padded_.clear();
    for (int i = 0; i < mps_.size(); ++i) padded_.push_back(pad_first(mps_.site(i)));
    caches_.assign(form_.terms.size(), Cache{});
    for (std::size_t t = 0; t < form_.terms.size(); ++t) {
      const int W = form_.terms[t].window;
      caches_[t].L.assign(W + 1, Env{});
      caches_[t].R.assign(W + 1, Env{});
      caches_[t].l_valid = 0;
      caches_[t].r_valid = W;
    }
  }

  void touched(int j) {
    padded_[j] = pad_first(mps_.site(j));
    for (std::size_t t = 0; t < form_.terms.size(); ++t) {
      const FormTerm& ft = form_.terms[t];
      Cache& c = caches_[t];
      c.l_valid = std::min(c.l_valid, std::min(ft.bra_offset, ft.ket_offset) + j);
      c.r_valid = std::max(c.r_valid, std::max(ft.bra_offset, ft.ket_offset) + j + 1);
    }
  }

  /// Unpenalized form value.
  double value() {
    double v = 0.0;
    for (std::size_t t = 0; t < form_.terms.size(); ++t) v += left_env(t, form_.terms[t].window).t(0, 0);
    return v;
  }

  /// Per-functional overlaps <p|O>.
  std::vector<double> functional_overlaps() const {
    std::vector<double> out;
    for (const auto& f : functionals_) {
      RowMatrix PL = RowMatrix::Ones(1, 1);
      for (int i = 0; i < mps_.size(); ++i) PL = overlap_left(PL, f[i], padded_[i]);
      out.push_back(PL(0, 0));
    }
    return out;
  }

  double penalty() const {
    const auto ov = functional_overlaps();
    double p = 0.0;
    for (std::size_t i = 0; i < ov.size(); ++i) p += weights_[i] * ov[i] * ov[i];
    return p;
  }

  /// Prepares penalty gradients for a local problem at site j.
  void prepare_site(int j) {
    grads_.clear();
    for (const auto& f : functionals_) {
      RowMatrix PL = RowMatrix::Ones(1, 1);
      for (int i = 0; i < j; ++i) PL = overlap_left(PL, f[i], padded_[i]);
      RowMatrix PR = RowMatrix::Ones(1, 1);
      for (int i = mps_.size() - 1; i > j; --i) PR = overlap_right(PR, f[i], padded_[i]);
      const SiteTensor& pj = f[j];
      SiteTensor g(padded_[j].left, 4, padded_[j].right);
      for (int k = 0; k < 4; ++k) g.slice(k) = PL.transpose() * pj.slice(k) * PR;
      grads_.push_back(pack(j, g));
    }
  }

  Eigen::Index local_dim(int j) const { return static_cast<Eigen::Index>(mps_.site(j).data.size()); }

  void matvec(int j, const Eigen::VectorXd& xv, Eigen::VectorXd& yv) {
    SiteTensor x = unpack(j, xv);
    SiteTensor y(x.left, 4, x.right);
    for (std::size_t t = 0; t < form_.terms.size(); ++t) term_matvec(t, j, x, y);
    yv = pack(j, y);
    for (std::size_t i = 0; i < grads_.size(); ++i) yv += weights_[i] * grads_[i].dot(xv) * grads_[i];
  }

  void set_site(int j, const Eigen::VectorXd& v) {
    SiteTensor& s = mps_.site(j);
    std::copy(v.data(), v.data() + v.size(), s.data.begin());
    touched(j);
  }

 private:
  struct Cache {
    std::vector<Env> L, R;
    int l_valid = 0;
    int r_valid = 0;
  };

  // Packs a padded tensor into the actual site layout.
  Eigen::VectorXd pack(int j, const SiteTensor& padded) const {
    if (mps_.site(j).phys == 4) return Eigen::Map<const Eigen::VectorXd>(padded.data.data(), padded.data.size());
    const SiteTensor t = unpad_first(padded);
    return Eigen::Map<const Eigen::VectorXd>(t.data.data(), t.data.size());
  }

  SiteTensor unpack(int j, const Eigen::VectorXd& v) const {
    const SiteTensor& s = mps_.site(j);
    SiteTensor t(s.left, s.phys, s.right);
    std::copy(v.data(), v.data() + v.size(), t.data.begin());
    return pad_first(t);
  }

  const SiteTensor& bra_at(const FormTerm& ft, int s) const {
    const int c = s - ft.bra_offset;
    return (c >= 0 && c < mps_.size()) ? padded_[c] : identity_pad();
  }
  const SiteTensor& ket_at(const FormTerm& ft, int s) const {
    const int c = s - ft.ket_offset;
    return (c >= 0 && c < mps_.size()) ? padded_[c] : identity_pad();
  }

  const Env& left_env(std::size_t t, int s) {
    const FormTerm& ft = form_.terms[t];
    Cache& c = caches_[t];
    while (c.l_valid < s) {
      const int p = c.l_valid;
      c.L[p + 1] = left_step(c.L[p], bra_at(ft, p), *ft.mpo, p, ket_at(ft, p));
      ++c.l_valid;
    }
    return c.L[s];
  }

  const Env& right_env(std::size_t t, int s) {
    const FormTerm& ft = form_.terms[t];
    Cache& c = caches_[t];
    while (c.r_valid > s) {
      const int p = c.r_valid - 1;
      c.R[p] = right_step(c.R[p + 1], bra_at(ft, p), *ft.mpo, p, ket_at(ft, p));
      --c.r_valid;
    }
    return c.R[s];
  }

  // Adds the gradient of <O|K|O> with respect to the bra copy of site j,
  // with the ket copy of site j replaced by x.
  void term_matvec(std::size_t t, int j, const SiteTensor& x, SiteTensor& y) {
    const FormTerm& ft = form_.terms[t];
    const SuperMPO& W = *ft.mpo;
    const int sb = ft.bra_offset + j;
    const int sk = ft.ket_offset + j;
    if (sb == sk) {
      apply_eff(left_env(t, sb), W, sb, x, right_env(t, sb + 1), y);
    } else if (sk > sb) {
      Env F = right_step(right_env(t, sk + 1), bra_at(ft, sk), W, sk, x);
      for (int s = sk - 1; s > sb; --s) F = right_step(F, bra_at(ft, s), W, s, ket_at(ft, s));
      apply_eff(left_env(t, sb), W, sb, ket_at(ft, sb), F, y);
    } else {
      Env E = left_step(left_env(t, sk), bra_at(ft, sk), W, sk, x);
      for (int s = sk + 1; s < sb; ++s) E = left_step(E, bra_at(ft, s), W, s, ket_at(ft, s));
      apply_eff(E, W, sb, ket_at(ft, sb), right_env(t, sb + 1), y);
    }
  }

  const EffectiveForm& form_;
  OperatorMPS mps_;
  std::vector<SiteTensor> padded_;
  std::vector<Cache> caches_;
  std::vector<double> weights_;
  std::vector<std::vector<SiteTensor>> functionals_;
  std::vector<Eigen::VectorXd> grads_;
};

OperatorMPS identity_functional(int N) {
  return OperatorMPS::product(PauliString(N, 0));
}

// Per-cell ntr(H O) functional in first-site gauge.
OperatorMPS h_cell_functional(const IsingParams& p, int N) {
  std::vector<SiteTensor> sites;
  SiteTensor s0(1, 3, 2);
  s0(0, 0, 0) = p.g;               // X
  s0(0, 2, 0) = p.h;               // Z
  s0(0, 2, 1) = IsingParams::zz;   // Z, continued by Z on site 1
  sites.push_back(s0);
  SiteTensor s1(2, 4, 1);
  s1(0, 0, 0) = 1.0;
  s1(1, 3, 0) = 1.0;
  sites.push_back(s1);
  for (int i = 2; i < N; ++i) sites.push_back(identity_pad());
  return OperatorMPS(Gauge::ti_first_site, std::move(sites));
}

std::shared_ptr<const SuperMPO> window_gram(const IsingParams& p, int W) {
  return std::make_shared<const SuperMPO>(superop::compress(superop::gram(superop::commutator(p, W))));
}

double relative_change(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Coefficient of a Pauli word (letters per site) in the MPS.
double coefficient(const OperatorMPS& m, const std::vector<int>& letters) {
  RowMatrix v = RowMatrix::Ones(1, 1);
  for (int i = 0; i < m.size(); ++i) {
    const int k = (m.site(i).phys == 3) ? letters[i] - 1 : letters[i];
    if (k < 0) return 0.0;
    v = v * m.site(i).slice(k);
  }
  return v(0, 0);
}

double sign_reference(const OperatorMPS& m) {
  const int N = m.size();
  if (N <= 10) {
    const Eigen::VectorXd c = m.to_vector().coeffs();
    Eigen::Index idx = 0;
    c.cwiseAbs().maxCoeff(&idx);
    return c[idx];
  }
  double best = 0.0;
  std::vector<int> w(N, 0);
  auto consider = [&] {
    const double c = coefficient(m, w);
    if (std::abs(c) > std::abs(best)) best = c;
  };
  for (int i = 0; i < N; ++i)
    for (int a = 1; a <= 3; ++a) {
      w[i] = a;
      consider();
      for (int j = i + 1; j < N; ++j)
        for (int b = 1; b <= 3; ++b) {
          w[j] = b;
          consider();
          w[j] = 0;
        }
      w[i] = 0;
    }
  return best;
}

// Pads every bond to its capped size with small random entries.
OperatorMPS grow(const OperatorMPS& m, int D, double noise, std::mt19937_64& rng) {
  const int N = m.size();
  const auto caps = OperatorMPS::bond_caps(N, D, m.gauge());
  std::normal_distribution<double> gauss;
  std::vector<SiteTensor> sites;
  for (int i = 0; i < N; ++i) {
    const SiteTensor& s = m.site(i);
    const int l = std::max(caps[i], s.left), r = std::max(caps[i + 1], s.right);
    SiteTensor t(l, s.phys, r);
    const double amp = noise / std::sqrt(double(l) * s.phys * r);
    for (auto& x : t.data) x = amp * gauss(rng);
    for (int a = 0; a < s.left; ++a)
      for (int k = 0; k < s.phys; ++k)
        for (int b = 0; b < s.right; ++b) t(a, k, b) = s(a, k, b);
    sites.push_back(std::move(t));
  }
  OperatorMPS out = canonicalize(OperatorMPS(m.gauge(), std::move(sites)), 0);
  out.scale(1.0 / out.norm());
  return out;
}

bool saturated(const OperatorMPS& m, int D) {
  const auto caps = OperatorMPS::bond_caps(m.size(), std::numeric_limits<int>::max() / 8, m.gauge());
  const auto now = OperatorMPS::bond_caps(m.size(), D, m.gauge());
  return caps == now;
}

}  // namespace

// ---------------------------------------------------------------------------

SweepSchedule SweepSchedule::local_default(int max_D) {
  SweepSchedule s;
  for (int d = 8; d <= max_D; d *= 2) s.bond_dims.push_back(d);
  if (s.bond_dims.empty()) s.bond_dims.push_back(std::max(1, max_D));
  return s;
}

SweepSchedule SweepSchedule::ti_default(int max_D) {
  SweepSchedule s;
  for (int d = 64; d <= max_D; d *= 2) s.bond_dims.push_back(d);
  if (s.bond_dims.empty()) s.bond_dims.push_back(std::max(1, max_D));
  s.inner_tol = 1e-4;
  return s;
}

void SweepSchedule::validate() const {
  if (bond_dims.empty()) throw UsageError("SweepSchedule: no bond dimensions");
  for (std::size_t i = 0; i < bond_dims.size(); ++i) {
    if (bond_dims[i] < 1) throw UsageError("SweepSchedule: bond dimensions must be positive");
    if (i > 0 && bond_dims[i] <= bond_dims[i - 1]) {
      throw UsageError("SweepSchedule: bond dimensions must increase strictly");
    }
  }
  if (!(inner_tol > 0) || !(outer_tol > 0)) throw UsageError("SweepSchedule: tolerances must be positive");
  if (max_sweeps < 1) throw UsageError("SweepSchedule: max_sweeps must be positive");
}

double EffectiveForm::value(const OperatorMPS& m) const {
  if (m.size() != N) throw UsageError("EffectiveForm::value: size mismatch");
  EffectiveForm bare = *this;
  bare.penalties.clear();
  Engine e(bare, m);
  return e.value();
}

double EffectiveForm::penalty(const OperatorMPS& m) const {
  double p = 0.0;
  for (const auto& t : penalties) {
    const double o = overlap_mps(t.functional, m);
    p += t.weight * o * o;
  }
  return p;
}

EffectiveForm build_local_effective(const IsingParams& p, int N) {
  if (N < 2) throw UsageError("build_local_effective: N must be >= 2");
  Eigen::Matrix4d boundary = Eigen::Matrix4d::Zero();
  boundary(1, 1) = boundary(2, 2) = 4.0;
  SuperMPO k = superop::gram(superop::commutator(p, N));
  k = superop::add(k, superop::local_term(N, 0, boundary));
  k = superop::add(k, superop::local_term(N, N - 1, boundary));
  EffectiveForm f;
  f.kind = FormKind::mpo_local;
  f.params = p;
  f.N = N;
  f.terms.push_back({N, 0, 0, std::make_shared<const SuperMPO>(superop::compress(k))});
  f.penalties.push_back({"trace", 1.0, identity_functional(N)});
  return f;
}

EffectiveForm build_ti_effective(const IsingParams& p, int N) {
  if (N < 2) throw UsageError("build_ti_effective: N must be >= 2");
  EffectiveForm f;
  f.kind = FormKind::global_ti;
  f.params = p;
  f.N = N;
  std::map<int, std::shared_ptr<const SuperMPO>> grams;
  for (int d = -(N + 1); d <= N + 1; ++d) {
    const int W = N + 2 + std::abs(d);
    auto& g = grams[W];
    if (!g) g = window_gram(p, W);
    const int bra = 1 + std::max(0, -d);
    f.terms.push_back({W, bra, bra + d, g});
  }
  f.penalties.push_back({"h_overlap", 1.0, h_cell_functional(p, N)});
  return f;
}

namespace detail {

Eigen::MatrixXd local_matrix(const EffectiveForm& form, const OperatorMPS& m, int j, bool penalties) {
  EffectiveForm f = form;
  if (!penalties) f.penalties.clear();
  Engine e(f, m);
  e.prepare_site(j);
  const Eigen::Index n = e.local_dim(j);
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n), col;
  for (Eigen::Index i = 0; i < n; ++i) {
    unit[i] = 1.0;
    e.matvec(j, unit, col);
    A.col(i) = col;
    unit[i] = 0.0;
  }
  return A;
}

}  // namespace detail

std::string DmrgResult::log_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "stage,sweep,bond_dim,lambda,penalized,constraint,seconds\n";
  for (const auto& r : log) {
    os << r.stage << ',' << r.sweep << ',' << r.bond_dim << ',' << r.lambda << ',' << r.penalized << ','
       << r.constraint << ',' << r.seconds << '\n';
  }
  return os.str();
}

namespace {

struct SweepOutcome {
  double lambda = 0.0;
  double penalized = 0.0;
};

class Runner {
 public:
  Runner(const EffectiveForm& form, const DmrgOptions& opt, Engine& engine, DmrgResult& out)
      : form_(form), opt_(opt), e_(engine), out_(out) {}

  double constraint() const {
    const auto ov = e_.functional_overlaps();
    return ov.empty() ? 0.0 : std::abs(ov[0]);
  }

  void set_weights(double lambda_est, double escalation) {
    for (auto& w : e_.weights()) w = opt_.penalty_factor * (std::max(0.0, lambda_est) + 1.0) * escalation;
  }

  SweepOutcome sweep(double estimate) {
    OperatorMPS& m = e_.mps();
    const int N = m.size();
    for (int j = 0; j + 1 < N; ++j) {
      estimate = optimize(j, estimate);
      move_center_right(m, j);
      e_.touched(j);
      e_.touched(j + 1);
    }
    for (int j = N - 1; j > 0; --j) {
      estimate = optimize(j, estimate);
      move_center_left(m, j);
      e_.touched(j);
      e_.touched(j - 1);
    }
    SweepOutcome o;
    o.lambda = e_.value();
    o.penalized = o.lambda + e_.penalty();
    return o;
  }

  // Runs sweeps at the current bond dimension until the penalized value settles.
  SweepOutcome run_stage(int stage, int D, const SweepSchedule& sched, double estimate, bool& converged) {
    const auto t0 = Clock::now();
    SweepOutcome prev{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    SweepOutcome cur = prev;
    converged = false;
    for (int s = 1; s <= sched.max_sweeps; ++s) {
      cur = sweep(std::isfinite(prev.penalized) ? prev.penalized : estimate);
      SweepLogRow row;
      row.stage = stage;
      row.sweep = s;
      row.bond_dim = e_.mps().max_bond_dim();
      row.lambda = cur.lambda;
      row.penalized = cur.penalized;
      row.constraint = constraint();
      row.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
      out_.log.push_back(row);
      (void)D;
      if (std::isfinite(prev.penalized)) {
        if (cur.penalized > prev.penalized + opt_.monotonic_slack * std::max(1.0, std::abs(prev.penalized))) {
          std::ostringstream os;
          os << "form increased during sweep " << s << " at D=" << D << ": " << prev.penalized << " -> "
             << cur.penalized;
          out_.result.diagnostics.push_back(os.str());
        }
        if (relative_change(cur.penalized, prev.penalized, opt_.abs_floor) <= sched.inner_tol) {
          converged = true;
          break;
        }
      }
      prev = cur;
    }
    return cur;
  }

 private:
  double optimize(int j, double estimate) {
    e_.prepare_site(j);
    const Eigen::Index n = e_.local_dim(j);
    const SiteTensor& cur = e_.mps().site(j);
    Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(cur.data.data(), n);
    MatVec op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { e_.matvec(j, x, y); };
    Eigen::VectorXd best;
    double theta;
    if (n <= opt_.local_dense_max) {
      Eigen::MatrixXd A(n, n);
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(n), col;
      for (Eigen::Index i = 0; i < n; ++i) {
        unit[i] = 1.0;
        op(unit, col);
        A.col(i) = col;
        unit[i] = 0.0;
      }
      const EigenResult r = dense_lowest(0.5 * (A + A.transpose()), {}, 1);
      best = r.vectors[0];
      theta = r.values[0];
    } else {
      DavidsonOptions d;
      d.nroots = 1;
      d.tol = std::max(opt_.local_tol_floor,
                       opt_.local_tol_rel * (std::isfinite(estimate) ? std::abs(estimate) : 1.0));
      d.max_iter = opt_.local_max_iter;
      d.max_subspace = opt_.local_max_subspace;
      d.seed = 7 + static_cast<std::uint64_t>(j);
      const EigenResult r = davidson(op, n, Eigen::VectorXd(), {}, {x0}, d);
      best = r.vectors[0];
      theta = r.values[0];
    }
    // Keep the sign continuous with the previous tensor.
    if (best.dot(x0) < 0) best = -best;
    best /= best.norm();
    e_.set_site(j, best);
    return theta;
  }

  const EffectiveForm& form_;
  const DmrgOptions& opt_;
  Engine& e_;
  DmrgResult& out_;
};

}  // namespace

DmrgResult minimize(const EffectiveForm& form, const SweepSchedule& schedule, std::uint64_t seed,
                    const DmrgOptions& opt) {
  schedule.validate();
  if (form.terms.empty()) throw UsageError("minimize: empty form");
  DmrgResult out;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const int N = form.N;
  const Gauge gauge = form.gauge();

  Engine engine(form, OperatorMPS::random(N, schedule.bond_dims.front(), gauge, seed));
  Runner runner(form, opt, engine, out);

  double lambda = std::numeric_limits<double>::quiet_NaN();
  double prev_stage = std::numeric_limits<double>::quiet_NaN();
  bool all_converged = true;
  int stage = 0;
  int last_D = schedule.bond_dims.front();
  for (int D : schedule.bond_dims) {
    if (stage > 0) {
      engine.mps() = grow(engine.mps(), D, opt.growth_noise, rng);
      engine.reset();
    }
    last_D = D;
    runner.set_weights(std::isfinite(lambda) ? lambda : 0.0, 1.0);
    bool conv = false;
    const SweepOutcome o = runner.run_stage(stage, D, schedule, std::isfinite(lambda) ? lambda : 1.0, conv);
    if (!conv) {
      all_converged = false;
      out.result.diagnostics.push_back("sweeps did not converge within max_sweeps at D=" + std::to_string(D));
    }
    lambda = o.lambda;
    ++stage;
    if (std::isfinite(prev_stage) && relative_change(lambda, prev_stage, opt.abs_floor) < schedule.outer_tol) break;
    if (saturated(engine.mps(), D)) break;
    prev_stage = lambda;
  }

  // Constraint check with escalating penalty weights.
  const double tol = form.kind == FormKind::global_ti ? opt.h_overlap_tol : opt.trace_tol;
  double escalation = 1.0;
  for (int rerun = 0; rerun < opt.max_penalty_reruns && runner.constraint() > tol; ++rerun) {
    escalation *= 10.0;
    std::ostringstream os;
    os << "constraint residual " << runner.constraint() << " above " << tol << "; rerun with weight x"
       << escalation;
    out.result.diagnostics.push_back(os.str());
    runner.set_weights(lambda, escalation);
    bool conv = false;
    lambda = runner.run_stage(stage++, last_D, schedule, lambda, conv).lambda;
    if (!conv) all_converged = false;
  }

  OperatorMPS mps = canonicalize(engine.mps(), 0);
  mps.scale(1.0 / mps.norm());
  if (sign_reference(mps) < 0) mps.scale(-1.0);

  SlowestResult& r = out.result;
  r.definition = form.definition();
  r.params = form.params;
  r.N = N;
  r.lambda = form.value(mps);
  if (N <= 10) r.vector = mps.to_vector();
  if (form.kind == FormKind::mpo_local) {
    r.residuals["trace"] = std::abs(overlap_mps(identity_functional(N), mps));
  } else {
    r.residuals["h_overlap"] = std::abs(overlap_mps(h_cell_functional(form.params, N), mps));
    r.residuals["cell_trace"] = 0.0;
  }
  if (!out.log.empty() && out.log.size() >= 2) {
    const auto& a = out.log[out.log.size() - 2];
    const auto& b = out.log.back();
    r.residuals["sweep_change"] = relative_change(b.penalized, a.penalized, opt.abs_floor);
  }
  const double c = form.kind == FormKind::mpo_local ? r.residuals["trace"] : r.residuals["h_overlap"];
  if (c > tol) {
    all_converged = false;
    r.diagnostics.push_back("constraint residual above threshold after reruns");
  }
  out.converged = all_converged;
  out.mps = std::move(mps);
  return out;
}

}  // namespace slowop
