// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Pauli-string algebra on finite windows and the normalized-trace geometry of
// operator space.
//
// A PauliString packs two bits per site: I=0, X=1, Y=2, Z=3. Site 0 occupies
// the most significant pair, so the packed word is also the canonical index
// of the string (identity first, then lexicographic in site order).

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace slowop {

using cplx = std::complex<double>;

inline constexpr int kMaxPauliSites = 32;
inline constexpr int kDefaultDenseCap = 14;

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

class PauliString {
 public:
  PauliString() = default;
  /// Identity string on `n` sites.
  explicit PauliString(int n);
  PauliString(int n, std::uint64_t bits);

  /// Parses a word over {I,X,Y,Z}; throws UsageError on other characters.
  static PauliString parse(std::string_view word);
  /// Single non-identity letter `p` at `site` on an `n`-site window.
  static PauliString single(int n, int site, Pauli p);

  int size() const { return n_; }
  std::uint64_t bits() const { return bits_; }
  /// Canonical index in [0, 4^n).
  std::uint64_t index() const { return bits_; }

  Pauli at(int site) const;
  void set(int site, Pauli p);

  bool is_identity() const { return bits_ == 0; }
  /// Number of non-identity sites.
  int weight() const;
  /// Bit masks over sites (bit i set = site i) of non-identity letters.
  std::uint64_t support_mask() const;

  std::string str() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend auto operator<=>(const PauliString& a, const PauliString& b) {
    if (a.n_ != b.n_) return a.n_ <=> b.n_;
    return a.bits_ <=> b.bits_;
  }

 private:
  int n_ = 0;
  std::uint64_t bits_ = 0;
};

struct PauliProduct {
  cplx phase;  // one of 1, -1, i, -i
  PauliString string;
};

/// a·b = phase · string. Throws UsageError on length mismatch.
PauliProduct pauli_multiply(const PauliString& a, const PauliString& b);

/// True if the two strings anticommute (odd number of anticommuting sites).
bool anticommutes(const PauliString& a, const PauliString& b);

namespace pauli_bits {

/// Phase exponent k (phase = i^k, k in 0..3) of the product of packed words.
int product_phase_exponent(std::uint64_t a, std::uint64_t b);
/// Same parity test as anticommutes() on raw packed words.
bool anticommute(std::uint64_t a, std::uint64_t b);

}  // namespace pauli_bits

struct PauliTerm {
  cplx coeff;
  PauliString string;
};

/// Sparse complex combination of Pauli strings on a fixed window of n sites.
/// Zero coefficients are never stored.
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(int n) : n_(n) {}

  int size() const { return n_; }
  std::size_t num_terms() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  /// Adds c·s, merging with an existing term and dropping exact zeros.
  void add(const PauliString& s, cplx c);
  void add(std::string_view word, cplx c) { add(PauliString::parse(word), c); }
  cplx coeff(const PauliString& s) const;

  /// Terms in canonical order.
  std::vector<PauliTerm> sorted_terms() const;
  const std::unordered_map<std::uint64_t, cplx>& raw() const { return terms_; }

  /// Removes terms with |coeff| <= tol.
  void prune(double tol);

  bool is_hermitian(double tol = 0.0) const;
  /// Normalized trace: coefficient of the identity string.
  cplx ntr() const;
  /// sqrt(hs_inner(this, this)).
  double norm() const;

  PauliSum& operator+=(const PauliSum& o);
  PauliSum& operator-=(const PauliSum& o);
  PauliSum& operator*=(cplx c);
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(cplx c, PauliSum a) { return a *= c; }
  friend PauliSum operator*(PauliSum a, cplx c) { return a *= c; }

  /// Textual form, one `<real>[+/-<imag>i] <word>` line per term.
  std::string to_text() const;
  /// Parses to_text() output. Blank lines and lines starting with '#' are skipped.
  static PauliSum from_text(std::string_view text);

 private:
  int n_ = 0;
  std::unordered_map<std::uint64_t, cplx> terms_;
};

PauliSum operator*(const PauliSum& a, const PauliSum& b);

/// [a, b] = ab - ba.
PauliSum commutator(const PauliSum& a, const PauliSum& b);

/// ntr(a^dagger b).
cplx hs_inner(const PauliSum& a, const PauliSum& b);

/// Places `a` on sites offset..offset+len(a)-1 of an n-site window, padding with
/// identities. With `periodic`, positions wrap modulo n.
PauliSum embed(const PauliSum& a, int n, int offset, bool periodic = false);
PauliString embed(const PauliString& s, int n, int offset, bool periodic = false);

/// Cyclic translation by `shift` sites on the sum's own window.
PauliSum translate(const PauliSum& a, int shift);

/// Dense 2^n x 2^n matrix. Basis state bit (n-1-i) is site i. Throws
/// CapExceeded if n > cap.
Eigen::MatrixXcd to_dense(const PauliSum& a, int cap = kDefaultDenseCap);

/// Real coefficient vector over the 4^N strings of an N-site window, indexed
/// by PauliString::index().
class OperatorVector {
 public:
  OperatorVector() = default;
  explicit OperatorVector(int n);
  OperatorVector(int n, Eigen::VectorXd coeffs);

  int size() const { return n_; }
  const Eigen::VectorXd& coeffs() const { return c_; }
  Eigen::VectorXd& coeffs() { return c_; }

  /// Throws UsageError if any coefficient has |imag| > tol.
  static OperatorVector from_sum(const PauliSum& s, double imag_tol = 1e-12);
  PauliSum to_sum(double drop_tol = 0.0) const;

  double norm() const { return c_.norm(); }

 private:
  int n_ = 0;
  Eigen::VectorXd c_;
};

}  // namespace slowop
