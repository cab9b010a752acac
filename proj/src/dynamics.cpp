// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "linalg.hpp"
#include "slowop/error.hpp"
#include "slowop/kernels.hpp"

namespace slowop {

namespace {

constexpr cplx kI{0.0, 1.0};

std::span<const cplx> span_of(const StateVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<cplx> span_of(StateVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void check_unit(const PauliSum& O) {
  if (std::abs(O.norm() - 1.0) > 1e-8) throw UsageError("dynamics: operator must have unit ntr-norm");
  if (!O.is_hermitian(1e-12)) throw UsageError("dynamics: operator must be Hermitian");
}

void check_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw UsageError("dynamics: non-finite time");
    if (i > 0 && times[i] < times[i - 1]) throw UsageError("dynamics: times must be non-decreasing");
  }
}

Pauli axis_letter(char axis) {
  switch (axis) {
    case 'x': case 'X': return Pauli::X;
    case 'y': case 'Y': return Pauli::Y;
    case 'z': case 'Z': return Pauli::Z;
    default: throw UsageError(std::string("unknown Pauli axis: ") + axis);
  }
}

// M = V^T B for real V and complex B.
Eigen::MatrixXcd real_left_product(const Eigen::MatrixXd& Vt, const Eigen::MatrixXcd& B) {
  const Eigen::MatrixXd re = Vt * B.real();
  const Eigen::MatrixXd im = Vt * B.imag();
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

// Matrix elements V^T O V in the eigenbasis, computed in column blocks.
template <typename Sink>
void eigenbasis_blocks(const StateOperator& op, const Eigen::MatrixXd& V, Sink&& sink) {
  const Eigen::Index D = V.rows();
  const Eigen::Index block = 64;
  const Eigen::MatrixXd Vt = V.transpose();
  StateVector in(D), out(D);
  for (Eigen::Index c0 = 0; c0 < D; c0 += block) {
    const Eigen::Index nb = std::min(block, D - c0);
    Eigen::MatrixXcd B(D, nb);
    for (Eigen::Index j = 0; j < nb; ++j) {
      in = V.col(c0 + j).cast<cplx>();
      op.apply(span_of(in), span_of(out));
      B.col(j) = out;
    }
    sink(c0, real_left_product(Vt, B));
  }
}

Eigen::MatrixXcd eigenbasis_matrix(const StateOperator& op, const Eigen::MatrixXd& V) {
  Eigen::MatrixXcd A(V.rows(), V.cols());
  eigenbasis_blocks(op, V, [&](Eigen::Index c0, const Eigen::MatrixXcd& blk) {
    A.middleCols(c0, blk.cols()) = blk;
  });
  return A;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- StateOperator

StateOperator::StateOperator(const PauliSum& op, int cap) : n_(op.size()) {
  if (n_ < 1) throw UsageError("StateOperator: empty chain");
  if (n_ > cap) throw CapExceeded("StateOperator: " + std::to_string(n_) + " sites exceeds cap");
  const std::size_t D = dim();
  struct Term {
    std::uint64_t z;
    cplx c;
  };
  std::unordered_map<std::uint64_t, std::vector<Term>> by_mask;
  for (const auto& t : op.sorted_terms()) {
    std::uint64_t x = 0, z = 0;
    int ny = 0;
    for (int i = 0; i < n_; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << (n_ - 1 - i);
      switch (t.string.at(i)) {
        case Pauli::X: x |= bit; break;
        case Pauli::Y: x |= bit; z |= bit; ++ny; break;
        case Pauli::Z: z |= bit; break;
        case Pauli::I: break;
      }
    }
    cplx c = t.coeff;
    for (int k = 0; k < ny % 4; ++k) c *= kI;
    by_mask[x].push_back({z, c});
    norm_bound_ += std::abs(t.coeff);
  }
  std::vector<std::uint64_t> masks;
  for (const auto& [m, _] : by_mask) masks.push_back(m);
  std::sort(masks.begin(), masks.end());
  for (const std::uint64_t m : masks) {
    const auto& terms = by_mask[m];
    Group g;
    g.mask = m;
    if (terms.size() == 1 && terms[0].z == 0 && terms[0].c.imag() == 0.0) {
      g.uniform_real = true;
      g.scalar = terms[0].c.real();
    } else {
      // d[j] = sum_terms c * (-1)^{popcount((j ^ m) & z)}
      std::vector<cplx> d(D, cplx(0.0));
      for (const Term& t : terms) {
        for (std::size_t j = 0; j < D; ++j) {
          d[j] += (std::popcount((j ^ m) & t.z) & 1) ? -t.c : t.c;
        }
      }
      const bool real = std::all_of(d.begin(), d.end(), [](cplx v) { return v.imag() == 0.0; });
      if (real) {
        g.real_diag.resize(D);
        for (std::size_t j = 0; j < D; ++j) g.real_diag[j] = d[j].real();
      } else {
        g.diag = std::move(d);
      }
    }
    groups_.push_back(std::move(g));
  }
}

void StateOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t D = dim();
  if (x.size() != D || y.size() != D) throw UsageError("StateOperator::apply: size mismatch");
  std::fill(y.begin(), y.end(), cplx(0.0));
  for (const Group& g : groups_) {
    if (g.uniform_real) {
      kernels::flip_axpy(g.scalar, g.mask, x, y);
    } else if (!g.real_diag.empty()) {
      const double* d = g.real_diag.data();
      for (std::size_t j = 0; j < D; ++j) y[j] += d[j] * x[j ^ g.mask];
    } else {
      const cplx* d = g.diag.data();
      for (std::size_t j = 0; j < D; ++j) y[j] += d[j] * x[j ^ g.mask];
    }
  }
}

StateVector StateOperator::apply(const StateVector& x) const {
  StateVector y(x.size());
  apply(span_of(x), span_of(y));
  return y;
}

Eigen::MatrixXd StateOperator::dense_real() const {
  const Eigen::Index D = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(D, D);
  for (const Group& g : groups_) {
    if (!g.diag.empty()) throw UsageError("StateOperator::dense_real: operator has complex entries");
    for (Eigen::Index j = 0; j < D; ++j) {
      const Eigen::Index src = static_cast<Eigen::Index>(static_cast<std::uint64_t>(j) ^ g.mask);
      M(j, src) += g.uniform_real ? g.scalar : g.real_diag[j];
    }
  }
  return M;
}

// ---------------------------------------------------------------- Chebyshev

std::vector<double> bessel_j_sequence(double x, int M) {
  if (x < 0 || !std::isfinite(x)) throw UsageError("bessel_j_sequence: x must be finite and >= 0");
  if (M < 0) throw UsageError("bessel_j_sequence: negative order");
  std::vector<double> J(M + 1, 0.0);
  if (x == 0.0) {
    J[0] = 1.0;
    return J;
  }
  // Start far enough above both M and x for the backward recurrence to settle.
  int start = std::max(M, static_cast<int>(std::ceil(x))) + 20 + static_cast<int>(10 * std::cbrt(x));
  if (start % 2) ++start;
  double next = 0.0, cur = 1e-300, sum = 0.0;
  std::vector<double> f(start + 1, 0.0);
  f[start] = cur;
  for (int k = start; k > 0; --k) {
    const double prev = 2.0 * k / x * cur - next;
    next = cur;
    cur = prev;
    f[k - 1] = cur;
    if (std::abs(cur) > 1e250) {
      for (int j = k - 1; j <= start; ++j) f[j] *= 1e-250;
      next *= 1e-250;
      cur *= 1e-250;
    }
  }
  sum = f[0];
  for (int k = 2; k <= start; k += 2) sum += 2.0 * f[k];
  for (int k = 0; k <= M; ++k) J[k] = f[k] / sum;
  return J;
}

StateVector chebyshev_evolve(const StateVector& psi, const StateOperator& H, double t,
                             const ChebyshevConfig& cfg, ChebyshevStats* stats) {
  if (static_cast<std::size_t>(psi.size()) != H.dim()) throw UsageError("chebyshev_evolve: size mismatch");
  if (!(cfg.trunc_tol > 0)) throw UsageError("chebyshev_evolve: trunc_tol must be positive");
  const double e_bar = cfg.auto_e_bar ? 1.1 * H.norm_bound() : cfg.e_bar;
  if (!(e_bar > 0) || e_bar < H.norm_bound()) {
    throw UsageError("chebyshev_evolve: e_bar must exceed the spectral bound " + fmt(H.norm_bound()));
  }
  const double x = e_bar * std::abs(t);
  const int M = static_cast<int>(std::ceil(x + 15.0 * std::cbrt(x) + 30.0));
  if (M > cfg.max_terms) {
    throw NumericalError("chebyshev_evolve: expansion needs more than max_terms", static_cast<double>(M));
  }
  const std::vector<double> J = bessel_j_sequence(x, M);
  // exp(-iHt) = sum (2 - delta_n0) (-i sgn t)^n J_n(x) T_n(H / e_bar)
  const cplx step = t >= 0 ? -kI : kI;

  const double n0 = psi.squaredNorm();
  StateVector out = J[0] * psi;
  StateVector prev = psi;
  StateVector cur = H.apply(psi) / e_bar;
  StateVector w(psi.size());
  cplx phase = step;
  int n = 1;
  double defect = std::abs(out.squaredNorm() - n0);
  for (; n <= M; ++n) {
    kernels::caxpy(2.0 * J[n] * phase, span_of(cur), span_of(out));
    defect = std::abs(kernels::norm2(span_of(out)) - n0);
    if (n >= x && defect < cfg.trunc_tol) break;
    if (n == M) break;
    H.apply(span_of(cur), span_of(w));
    kernels::cheb_combine(2.0 / e_bar, span_of(w), span_of(prev), span_of(prev));
    std::swap(prev, cur);
    phase *= step;
  }
  if (stats) *stats = {std::min(n, M) + 1, defect, e_bar};
  return out;
}

// ---------------------------------------------------------------- TimeSeries

std::string TimeSeries::to_csv() const {
  std::ostringstream os;
  for (const auto& [k, v] : meta) os << "# " << k << '=' << v << '\n';
  const bool has_imag = !imag.empty();
  const bool has_err = !stderr_.empty();
  os << "t,value";
  if (has_imag) os << ",imag";
  if (has_err) os << ",stderr";
  os << '\n' << std::setprecision(15);
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << times[i] << ',' << values[i];
    if (has_imag) os << ',' << imag[i];
    if (has_err) os << ',' << stderr_[i];
    os << '\n';
  }
  return os.str();
}

std::vector<double> time_grid(double start, double stop, double step) {
  if (!(step > 0) || !(stop >= start)) throw UsageError("time_grid: need step > 0 and stop >= start");
  std::vector<double> t;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= n; ++i) t.push_back(start + static_cast<double>(i) * step);
  return t;
}

TimeSeries gaussian_envelope(double lambda, const std::vector<double>& times) {
  if (!(lambda >= 0)) throw UsageError("gaussian_envelope: lambda must be >= 0");
  TimeSeries ts;
  ts.times = times;
  for (double t : times) ts.values.push_back(std::exp(-lambda * t * t / 2.0));
  ts.meta["observable"] = "gaussian_envelope";
  ts.meta["lambda"] = fmt(lambda);
  return ts;
}

// ---------------------------------------------------------------- correlators

TimeSeries two_point_correlator(const PauliSum& O, const IsingParams& p, const std::vector<double>& times, int K,
                                std::uint64_t seed, const ChebyshevConfig& cfg, const DynamicsCaps& caps) {
  const int L = O.size();
  if (L > caps.stochastic_max_L) {
    throw CapExceeded("two_point_correlator: L=" + std::to_string(L) + " exceeds dynamics cap");
  }
  if (K < 1) throw UsageError("two_point_correlator: K must be >= 1");
  check_unit(O);
  check_times(times);
  const StateOperator H(build_hamiltonian(p, L, true), caps.stochastic_max_L);
  const StateOperator op(O, caps.stochastic_max_L);
  const std::size_t D = H.dim();
  const std::size_t T = times.size();

  // samples[k][i]
  std::vector<std::vector<cplx>> samples(K, std::vector<cplx>(T));
  std::atomic<int> next{0};
  auto worker = [&] {
    StateVector tmp(D);
    for (int k = next++; k < K; k = next++) {
      std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(ss);
      std::normal_distribution<double> gauss;
      StateVector chi(D);
      for (std::size_t j = 0; j < D; ++j) chi[j] = cplx(gauss(rng), gauss(rng));
      chi.normalize();
      StateVector phi = op.apply(chi);
      double t_prev = 0.0;
      for (std::size_t i = 0; i < T; ++i) {
        const double dt = times[i] - t_prev;
        if (dt != 0.0) {
          chi = chebyshev_evolve(chi, H, -dt, cfg);
          phi = chebyshev_evolve(phi, H, -dt, cfg);
        }
        t_prev = times[i];
        op.apply(span_of(chi), span_of(tmp));
        samples[k][i] = kernels::cdot(span_of(phi), span_of(tmp));
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(K, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (int w = 1; w < nthreads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  TimeSeries ts;
  ts.times = times;
  for (std::size_t i = 0; i < T; ++i) {
    cplx mean = 0.0;
    for (int k = 0; k < K; ++k) mean += samples[k][i];
    mean /= static_cast<double>(K);
    double var = 0.0;
    for (int k = 0; k < K; ++k) var += std::norm(samples[k][i].real() - mean.real());
    ts.values.push_back(mean.real());
    ts.imag.push_back(mean.imag());
    ts.stderr_.push_back(K > 1 ? std::sqrt(var / (K - 1) / K) : 0.0);
  }
  ts.meta = {{"observable", "two_point_stochastic"}, {"L", std::to_string(L)}, {"g", fmt(p.g)},
             {"h", fmt(p.h)}, {"K", std::to_string(K)}, {"seed", std::to_string(seed)},
             {"e_bar", cfg.auto_e_bar ? std::string("auto") : fmt(cfg.e_bar)}};
  return ts;
}

EigenSystem eigensystem(const IsingParams& p, int L, const DynamicsCaps& caps) {
  if (L > caps.exact_max_L) throw CapExceeded("eigensystem: L=" + std::to_string(L) + " exceeds exact cap");
  if (L < 1) throw UsageError("eigensystem: L must be >= 1");
  EigenSystem es;
  es.vectors = StateOperator(build_hamiltonian(p, L, true), caps.exact_max_L).dense_real();
  es.energies = linalg::sym_eig(es.vectors);
  return es;
}

TimeSeries exact_correlator(const PauliSum& O, const IsingParams& p, const std::vector<double>& times,
                            const DynamicsCaps& caps) {
  if (O.size() > caps.exact_max_L) {
    throw CapExceeded("exact_correlator: L=" + std::to_string(O.size()) + " exceeds exact cap");
  }
  TimeSeries ts = exact_correlator(O, eigensystem(p, O.size(), caps), times);
  ts.meta["g"] = fmt(p.g);
  ts.meta["h"] = fmt(p.h);
  return ts;
}

TimeSeries exact_correlator(const PauliSum& O, const EigenSystem& es, const std::vector<double>& times) {
  const Eigen::Index D = es.energies.size();
  if (D != (Eigen::Index{1} << O.size())) throw UsageError("exact_correlator: operator and spectrum sizes differ");
  check_unit(O);
  check_times(times);
  const StateOperator op(O, O.size());
  Eigen::MatrixXd W(D, D);
  eigenbasis_blocks(op, es.vectors, [&](Eigen::Index c0, const Eigen::MatrixXcd& blk) {
    W.middleCols(c0, blk.cols()) = blk.cwiseAbs2();
  });
  TimeSeries ts;
  ts.times = times;
  Eigen::MatrixXd cs(D, 2);
  for (double t : times) {
    cs.col(0) = (es.energies * t).array().cos();
    cs.col(1) = (es.energies * t).array().sin();
    const Eigen::MatrixXd Wcs = W * cs;
    const double re = cs.col(0).dot(Wcs.col(0)) + cs.col(1).dot(Wcs.col(1));
    const double im = cs.col(1).dot(Wcs.col(0)) - cs.col(0).dot(Wcs.col(1));
    ts.values.push_back(re / static_cast<double>(D));
    ts.imag.push_back(im / static_cast<double>(D));
  }
  ts.meta = {{"observable", "two_point_exact"}, {"L", std::to_string(O.size())}};
  return ts;
}

std::vector<int> otoc_center_sites(int N, int L, int offset) {
  if (N < 1 || L < N) throw UsageError("otoc_center_sites: need 1 <= N <= L");
  auto wrap = [L](int s) { return ((s % L) + L) % L; };
  if (N % 2 == 1) return {wrap((N - 1) / 2 + offset)};
  return {wrap(N / 2 + offset), wrap(N / 2 - 1 - offset)};
}

TimeSeries otoc(const PauliSum& O, char axis, const std::vector<int>& sites, const IsingParams& p,
                const std::vector<double>& times, const DynamicsCaps& caps) {
  if (O.size() > caps.exact_max_L) {
    throw CapExceeded("otoc: L=" + std::to_string(O.size()) + " exceeds exact cap");
  }
  TimeSeries ts = otoc(O, axis, sites, eigensystem(p, O.size(), caps), times);
  ts.meta["g"] = fmt(p.g);
  ts.meta["h"] = fmt(p.h);
  return ts;
}

TimeSeries otoc(const PauliSum& O, char axis, const std::vector<int>& sites, const EigenSystem& es,
                const std::vector<double>& times) {
  const int L = O.size();
  const Eigen::Index D = es.energies.size();
  if (D != (Eigen::Index{1} << L)) throw UsageError("otoc: operator and spectrum sizes differ");
  if (sites.empty()) throw UsageError("otoc: no sites given");
  for (int s : sites) {
    if (s < 0 || s >= L) throw UsageError("otoc: site " + std::to_string(s) + " outside the chain");
  }
  check_unit(O);
  check_times(times);
  const Pauli letter = axis_letter(axis);
  const Eigen::MatrixXcd A = eigenbasis_matrix(StateOperator(O, L), es.vectors);
  std::vector<Eigen::MatrixXcd> S;
  for (int s : sites) {
    PauliSum sigma(L);
    sigma.add(PauliString::single(L, s, letter), 1.0);
    S.push_back(eigenbasis_matrix(StateOperator(sigma, L), es.vectors));
  }
  TimeSeries ts;
  ts.times = times;
  Eigen::MatrixXcd Ot(D, D);
  for (double t : times) {
    const Eigen::VectorXcd u = (es.energies * t).unaryExpr([](double e) { return std::exp(kI * e); });
    // O(t)_ij = exp(i(E_i - E_j) t) A_ij
    Ot = u.asDiagonal() * A * u.conjugate().asDiagonal();
    double acc = 0.0;
    for (const auto& s : S) {
      const Eigen::MatrixXcd Mt = Ot * s;
      const cplx tr = Mt.cwiseProduct(Mt.transpose()).sum();
      acc += 2.0 - 2.0 * tr.real() / static_cast<double>(D);
    }
    ts.values.push_back(acc / static_cast<double>(S.size()));
  }
  std::string site_list;
  for (int s : sites) site_list += (site_list.empty() ? "" : ";") + std::to_string(s);
  ts.meta = {{"observable", std::string("otoc_") + static_cast<char>(std::tolower(axis))},
             {"L", std::to_string(L)},
             {"sites", site_list}};
  return ts;
}

}  // namespace slowop
