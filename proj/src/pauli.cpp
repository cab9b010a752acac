// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/pauli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slowop/error.hpp"

namespace slowop {
namespace {

constexpr std::uint64_t kLoMask = 0x5555555555555555ULL;

void check_sites(int n) {
  if (n < 0 || n > kMaxPauliSites) {
    throw UsageError("Pauli window size must be in [0, 32], got " + std::to_string(n));
  }
}

int shift_of(int n, int site) { return 2 * (n - 1 - site); }

std::uint64_t window_mask(int n) {
  return n >= 32 ? ~0ULL : ((1ULL << (2 * n)) - 1);
}

void check_same_size(int a, int b, const char* what) {
  if (a != b) {
    throw UsageError(std::string(what) + ": window size mismatch (" + std::to_string(a) +
                     " vs " + std::to_string(b) + ")");
  }
}

const cplx kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

namespace pauli_bits {

int product_phase_exponent(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t alo = a & kLoMask, ahi = (a >> 1) & kLoMask;
  const std::uint64_t blo = b & kLoMask, bhi = (b >> 1) & kLoMask;
  const std::uint64_t ax = alo & ~ahi, ay = ahi & ~alo, az = ahi & alo;
  const std::uint64_t bx = blo & ~bhi, by = bhi & ~blo, bz = bhi & blo;
  const int pos = std::popcount((ax & by) | (ay & bz) | (az & bx));
  const int neg = std::popcount((ay & bx) | (az & by) | (ax & bz));
  return ((pos - neg) % 4 + 4) % 4;
}

bool anticommute(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t alo = a & kLoMask, ahi = (a >> 1) & kLoMask;
  const std::uint64_t blo = b & kLoMask, bhi = (b >> 1) & kLoMask;
  const std::uint64_t a_any = alo | ahi, b_any = blo | bhi;
  // Two non-identity letters anticommute iff they differ.
  const std::uint64_t differ = (alo ^ blo) | (ahi ^ bhi);
  return (std::popcount(a_any & b_any & differ) & 1) != 0;
}

}  // namespace pauli_bits

PauliString::PauliString(int n) : n_(n) { check_sites(n); }

PauliString::PauliString(int n, std::uint64_t bits) : n_(n), bits_(bits) {
  check_sites(n);
  if ((bits & ~window_mask(n)) != 0) throw UsageError("Pauli word bits exceed window");
}

PauliString PauliString::parse(std::string_view word) {
  PauliString s(static_cast<int>(word.size()));
  for (int i = 0; i < s.n_; ++i) {
    Pauli p;
    switch (word[i]) {
      case 'I': p = Pauli::I; break;
      case 'X': p = Pauli::X; break;
      case 'Y': p = Pauli::Y; break;
      case 'Z': p = Pauli::Z; break;
      default:
        throw UsageError("invalid Pauli letter '" + std::string(1, word[i]) + "' in " +
                         std::string(word));
    }
    s.set(i, p);
  }
  return s;
}

PauliString PauliString::single(int n, int site, Pauli p) {
  PauliString s(n);
  s.set(site, p);
  return s;
}

Pauli PauliString::at(int site) const {
  if (site < 0 || site >= n_) throw UsageError("Pauli site out of range");
  return static_cast<Pauli>((bits_ >> shift_of(n_, site)) & 3);
}

void PauliString::set(int site, Pauli p) {
  if (site < 0 || site >= n_) throw UsageError("Pauli site out of range");
  const int sh = shift_of(n_, site);
  bits_ = (bits_ & ~(3ULL << sh)) | (static_cast<std::uint64_t>(p) << sh);
}

int PauliString::weight() const {
  return std::popcount((bits_ | (bits_ >> 1)) & kLoMask);
}

std::uint64_t PauliString::support_mask() const {
  std::uint64_t m = 0;
  for (int i = 0; i < n_; ++i) {
    if (((bits_ >> shift_of(n_, i)) & 3) != 0) m |= 1ULL << i;
  }
  return m;
}

std::string PauliString::str() const {
  static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
  std::string out(n_, 'I');
  for (int i = 0; i < n_; ++i) out[i] = kLetters[(bits_ >> shift_of(n_, i)) & 3];
  return out;
}

PauliProduct pauli_multiply(const PauliString& a, const PauliString& b) {
  check_same_size(a.size(), b.size(), "pauli_multiply");
  const int k = pauli_bits::product_phase_exponent(a.bits(), b.bits());
  return {kIPow[k], PauliString(a.size(), a.bits() ^ b.bits())};
}

bool anticommutes(const PauliString& a, const PauliString& b) {
  check_same_size(a.size(), b.size(), "anticommutes");
  return pauli_bits::anticommute(a.bits(), b.bits());
}

void PauliSum::add(const PauliString& s, cplx c) {
  check_same_size(n_, s.size(), "PauliSum::add");
  if (c == cplx(0.0)) return;
  auto [it, inserted] = terms_.try_emplace(s.bits(), c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0.0)) terms_.erase(it);
  }
}

cplx PauliSum::coeff(const PauliString& s) const {
  check_same_size(n_, s.size(), "PauliSum::coeff");
  auto it = terms_.find(s.bits());
  return it == terms_.end() ? cplx(0.0) : it->second;
}

std::vector<PauliTerm> PauliSum::sorted_terms() const {
  std::vector<std::pair<std::uint64_t, cplx>> kv(terms_.begin(), terms_.end());
  std::sort(kv.begin(), kv.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<PauliTerm> out;
  out.reserve(kv.size());
  for (const auto& [bits, c] : kv) out.push_back({c, PauliString(n_, bits)});
  return out;
}

void PauliSum::prune(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

bool PauliSum::is_hermitian(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [tol](const auto& kv) { return std::abs(kv.second.imag()) <= tol; });
}

cplx PauliSum::ntr() const {
  auto it = terms_.find(0);
  return it == terms_.end() ? cplx(0.0) : it->second;
}

double PauliSum::norm() const {
  double s = 0.0;
  for (const auto& [bits, c] : terms_) s += std::norm(c);
  return std::sqrt(s);
}

PauliSum& PauliSum::operator+=(const PauliSum& o) {
  check_same_size(n_, o.n_, "PauliSum +");
  for (const auto& [bits, c] : o.terms_) add(PauliString(n_, bits), c);
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& o) {
  check_same_size(n_, o.n_, "PauliSum -");
  for (const auto& [bits, c] : o.terms_) add(PauliString(n_, bits), -c);
  return *this;
}

PauliSum& PauliSum::operator*=(cplx c) {
  if (c == cplx(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& kv : terms_) kv.second *= c;
  return *this;
}

std::string PauliSum::to_text() const {
  std::ostringstream os;
  char buf[96];
  for (const auto& t : sorted_terms()) {
    if (t.coeff.imag() == 0.0) {
      std::snprintf(buf, sizeof buf, "%.17g", t.coeff.real());
    } else {
      std::snprintf(buf, sizeof buf, "%.17g%+.17gi", t.coeff.real(), t.coeff.imag());
    }
    os << buf << ' ' << t.string.str() << '\n';
  }
  return os.str();
}

PauliSum PauliSum::from_text(std::string_view text) {
  PauliSum out;
  bool sized = false;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line.substr(first));
    std::string coeff_tok, word;
    if (!(ls >> coeff_tok >> word)) {
      throw UsageError("Pauli text line " + std::to_string(lineno) + ": expected '<coeff> <word>'");
    }
    const char* p = coeff_tok.data();
    const char* end = p + coeff_tok.size();
    double re = 0.0, im = 0.0;
    auto r = std::from_chars(p, end, re);
    if (r.ec != std::errc()) {
      throw UsageError("Pauli text line " + std::to_string(lineno) + ": bad coefficient");
    }
    if (r.ptr != end) {
      const char* q = r.ptr;
      if (*q == '+') ++q;  // from_chars rejects a leading '+'
      auto r2 = std::from_chars(q, end, im);
      if (r2.ec != std::errc() || r2.ptr + 1 != end || *r2.ptr != 'i') {
        throw UsageError("Pauli text line " + std::to_string(lineno) + ": bad imaginary part");
      }
    }
    PauliString s = PauliString::parse(word);
    if (!sized) {
      out = PauliSum(s.size());
      sized = true;
    }
    out.add(s, {re, im});
  }
  return out;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  check_same_size(a.size(), b.size(), "PauliSum *");
  PauliSum out(a.size());
  for (const auto& [ba, ca] : a.raw()) {
    for (const auto& [bb, cb] : b.raw()) {
      const int k = pauli_bits::product_phase_exponent(ba, bb);
      out.add(PauliString(a.size(), ba ^ bb), ca * cb * kIPow[k]);
    }
  }
  return out;
}

PauliSum commutator(const PauliSum& a, const PauliSum& b) {
  check_same_size(a.size(), b.size(), "commutator");
  PauliSum out(a.size());
  for (const auto& [ba, ca] : a.raw()) {
    for (const auto& [bb, cb] : b.raw()) {
      if (!pauli_bits::anticommute(ba, bb)) continue;
      const int k = pauli_bits::product_phase_exponent(ba, bb);
      out.add(PauliString(a.size(), ba ^ bb), 2.0 * ca * cb * kIPow[k]);
    }
  }
  return out;
}

cplx hs_inner(const PauliSum& a, const PauliSum& b) {
  check_same_size(a.size(), b.size(), "hs_inner");
  const PauliSum& small = a.num_terms() <= b.num_terms() ? a : b;
  const PauliSum& large = &small == &a ? b : a;
  cplx s = 0.0;
  for (const auto& [bits, c] : small.raw()) {
    auto it = large.raw().find(bits);
    if (it == large.raw().end()) continue;
    s += &small == &a ? std::conj(c) * it->second : std::conj(it->second) * c;
  }
  return s;
}

PauliString embed(const PauliString& s, int n, int offset, bool periodic) {
  check_sites(n);
  const int len = s.size();
  if (len > n) throw UsageError("embed: operand longer than target window");
  if (!periodic && (offset < 0 || offset + len > n)) {
    throw UsageError("embed: offset out of range on open window");
  }
  PauliString out(n);
  for (int i = 0; i < len; ++i) {
    const Pauli p = s.at(i);
    if (p == Pauli::I) continue;
    out.set((((offset + i) % n) + n) % n, p);
  }
  return out;
}

PauliSum embed(const PauliSum& a, int n, int offset, bool periodic) {
  PauliSum out(n);
  for (const auto& [bits, c] : a.raw()) {
    out.add(embed(PauliString(a.size(), bits), n, offset, periodic), c);
  }
  return out;
}

PauliSum translate(const PauliSum& a, int shift) {
  return embed(a, a.size(), shift, true);
}

Eigen::MatrixXcd to_dense(const PauliSum& a, int cap) {
  const int n = a.size();
  if (n > cap) {
    throw CapExceeded("to_dense: " + std::to_string(n) + " sites exceeds cap " +
                      std::to_string(cap));
  }
  const std::uint64_t dim = 1ULL << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [bits, c] : a.raw()) {
    std::uint64_t xmask = 0, zmask = 0;
    int ny = 0;
    for (int j = 0; j < n; ++j) {  // j = basis bit = pair position
      const unsigned letter = (bits >> (2 * j)) & 3;
      if (letter == 1 || letter == 2) xmask |= 1ULL << j;
      if (letter == 2 || letter == 3) zmask |= 1ULL << j;
      if (letter == 2) ++ny;
    }
    const cplx base = c * kIPow[ny % 4];
    for (std::uint64_t s = 0; s < dim; ++s) {
      const double sign = (std::popcount(s & zmask) & 1) ? -1.0 : 1.0;
      m(s ^ xmask, s) += sign * base;
    }
  }
  return m;
}

OperatorVector::OperatorVector(int n) : n_(n) {
  if (n < 0 || n > 13) throw CapExceeded("OperatorVector supports at most 13 sites");
  c_ = Eigen::VectorXd::Zero(Eigen::Index(1) << (2 * n));
}

OperatorVector::OperatorVector(int n, Eigen::VectorXd coeffs) : OperatorVector(n) {
  if (coeffs.size() != c_.size()) throw UsageError("OperatorVector: coefficient length != 4^N");
  c_ = std::move(coeffs);
}

OperatorVector OperatorVector::from_sum(const PauliSum& s, double imag_tol) {
  OperatorVector v(s.size());
  for (const auto& [bits, c] : s.raw()) {
    if (std::abs(c.imag()) > imag_tol) {
      throw UsageError("OperatorVector: non-Hermitian coefficient on " +
                       PauliString(s.size(), bits).str());
    }
    v.c_[static_cast<Eigen::Index>(bits)] = c.real();
  }
  return v;
}

PauliSum OperatorVector::to_sum(double drop_tol) const {
  PauliSum s(n_);
  for (Eigen::Index i = 0; i < c_.size(); ++i) {
    if (std::abs(c_[i]) > drop_tol) s.add(PauliString(n_, static_cast<std::uint64_t>(i)), c_[i]);
  }
  return s;
}

}  // namespace slowop
