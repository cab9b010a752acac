// Copyright 2026 The slowop Authors
// SPDX-License-Identifier: Apache-2.0

#include "slowop/op_mps.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "linalg.hpp"
#include "slowop/error.hpp"

namespace slowop {
namespace {

struct QrResult {
  Eigen::MatrixXd q;  // m x k, orthonormal columns
  Eigen::MatrixXd r;  // k x n, upper triangular with nonnegative diagonal
};

QrResult signed_qr(const Eigen::MatrixXd& m) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  QrResult out;
  out.q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.r(j, j) < 0) {
      out.r.row(j) *= -1.0;
      out.q.col(j) *= -1.0;
    }
  }
  return out;
}

SiteTensor tensor_from(const Eigen::MatrixXd& m, int l, int d, int r) {
  SiteTensor t(l, d, r);
  t.as_left() = m;  // m is (l*d) x r, or any matrix with the same row-major layout
  return t;
}

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

double SiteTensor::norm2() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return s;
}

std::string gauge_name(Gauge g) { return g == Gauge::local ? "local" : "ti_first_site"; }

OperatorMPS::OperatorMPS(Gauge gauge, std::vector<SiteTensor> sites)
    : gauge_(gauge), sites_(std::move(sites)) {
  const int n = size();
  if (n == 0) throw UsageError("OperatorMPS: no sites");
  for (int i = 0; i < n; ++i) {
    const auto& t = sites_[i];
    const int want_phys = (gauge_ == Gauge::ti_first_site && i == 0) ? 3 : 4;
    if (t.phys != want_phys) throw UsageError("OperatorMPS: wrong physical dimension");
    if (t.data.size() != std::size_t(t.left) * t.phys * t.right) {
      throw UsageError("OperatorMPS: tensor data size does not match shape");
    }
    if (i > 0 && sites_[i - 1].right != t.left) throw UsageError("OperatorMPS: bond mismatch");
  }
  if (sites_.front().left != 1 || sites_.back().right != 1) {
    throw UsageError("OperatorMPS: boundary bonds must be 1");
  }
}

int OperatorMPS::max_bond_dim() const {
  int d = 1;
  for (const auto& t : sites_) d = std::max(d, t.right);
  return d;
}

int OperatorMPS::letter(int site, int k) const {
  return (gauge_ == Gauge::ti_first_site && site == 0) ? k + 1 : k;
}

std::vector<int> OperatorMPS::bond_caps(int N, int D, Gauge g) {
  // caps[i] = bond between site i-1 and i; caps[0] = caps[N] = 1.
  std::vector<int> caps(N + 1, 1);
  for (int i = 1; i < N; ++i) {
    double left = std::pow(4.0, i);
    if (g == Gauge::ti_first_site) left = 3.0 * std::pow(4.0, i - 1);
    const double right = std::pow(4.0, N - i);
    caps[i] = static_cast<int>(std::min({left, right, static_cast<double>(D)}));
  }
  return caps;
}

OperatorMPS OperatorMPS::random(int N, int D, Gauge g, std::uint64_t seed) {
  if (N < 1 || D < 1) throw UsageError("OperatorMPS::random: need N >= 1 and D >= 1");
  const auto caps = bond_caps(N, D, g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<SiteTensor> sites;
  for (int i = 0; i < N; ++i) {
    const int d = (g == Gauge::ti_first_site && i == 0) ? 3 : 4;
    SiteTensor t(caps[i], d, caps[i + 1]);
    for (auto& v : t.data) v = gauss(rng);
    sites.push_back(std::move(t));
  }
  OperatorMPS m = canonicalize(OperatorMPS(g, std::move(sites)), 0);
  m.scale(1.0 / m.norm());
  return m;
}

OperatorMPS OperatorMPS::product(const PauliString& s, Gauge g) {
  std::vector<SiteTensor> sites;
  for (int i = 0; i < s.size(); ++i) {
    const bool ti0 = g == Gauge::ti_first_site && i == 0;
    SiteTensor t(1, ti0 ? 3 : 4, 1);
    const int letter = static_cast<int>(s.at(i));
    if (ti0 && letter == 0) throw UsageError("TI gauge: first letter cannot be I");
    t(0, ti0 ? letter - 1 : letter, 0) = 1.0;
    sites.push_back(std::move(t));
  }
  return OperatorMPS(g, std::move(sites));
}

OperatorMPS OperatorMPS::from_vector(const OperatorVector& v, int D, Gauge g, double* discarded) {
  const int N = v.size();
  if (N < 1) throw UsageError("from_vector: empty operator");
  if (D < 1) throw UsageError("from_vector: D must be >= 1");
  const std::uint64_t tail = ipow(4, N - 1);
  RowMatrix rest;
  if (g == Gauge::ti_first_site) {
    Eigen::Map<const RowMatrix> all(v.coeffs().data(), 4, static_cast<Eigen::Index>(tail));
    if (all.row(0).cwiseAbs().maxCoeff() > 1e-12) {
      throw UsageError("from_vector: TI gauge requires zero weight on strings starting with I");
    }
    rest = all.bottomRows(3);
  } else {
    rest = Eigen::Map<const RowMatrix>(v.coeffs().data(), 1, v.coeffs().size());
  }
  double lost = 0.0;
  std::vector<SiteTensor> sites;
  int left = 1;
  for (int i = 0; i < N - 1; ++i) {
    const int d = (g == Gauge::ti_first_site && i == 0) ? 3 : 4;
    const Eigen::Index cols = rest.size() / (Eigen::Index(left) * d);
    const Eigen::Map<const RowMatrix> m(rest.data(), Eigen::Index(left) * d, cols);
    const linalg::Svd svd = linalg::thin_svd(Eigen::MatrixXd(m));
    const Eigen::VectorXd& s = svd.s;
    const double smax = s.size() ? s[0] : 0.0;
    int keep = 0;
    while (keep < s.size() && keep < D && s[keep] > 1e-14 * smax) ++keep;
    keep = std::max(keep, 1);
    for (Eigen::Index j = keep; j < s.size(); ++j) lost += s[j] * s[j];
    sites.push_back(tensor_from(svd.U.leftCols(keep), left, d, keep));
    rest = s.head(keep).asDiagonal() * svd.V.leftCols(keep).transpose();
    left = keep;
  }
  {
    const int d = (g == Gauge::ti_first_site && N == 1) ? 3 : 4;
    SiteTensor t(left, d, 1);
    Eigen::Map<RowMatrix>(t.data.data(), left, d) =
        Eigen::Map<const RowMatrix>(rest.data(), left, d);
    sites.push_back(std::move(t));
  }
  if (discarded) *discarded = lost;
  return OperatorMPS(g, std::move(sites));
}

OperatorVector OperatorMPS::to_vector() const {
  const int N = size();
  RowMatrix T = RowMatrix::Ones(1, 1);
  for (const auto& t : sites_) {
    RowMatrix next = T * t.as_right();  // P x (d*r)
    T = Eigen::Map<RowMatrix>(next.data(), next.rows() * t.phys, t.right);
  }
  OperatorVector v(N);
  if (gauge_ == Gauge::ti_first_site) {
    const Eigen::Index tail = static_cast<Eigen::Index>(ipow(4, N - 1));
    v.coeffs().segment(tail, 3 * tail) = Eigen::Map<Eigen::VectorXd>(T.data(), 3 * tail);
  } else {
    v.coeffs() = Eigen::Map<Eigen::VectorXd>(T.data(), T.size());
  }
  return v;
}

PauliSum OperatorMPS::to_sum(double drop_tol) const { return to_vector().to_sum(drop_tol); }

void OperatorMPS::scale(double a) {
  for (auto& v : sites_.front().data) v *= a;
}

double OperatorMPS::norm() const { return std::sqrt(std::max(0.0, overlap_mps(*this, *this))); }

std::string OperatorMPS::to_json() const {
  nlohmann::json j;
  j["gauge"] = gauge_name(gauge_);
  j["sites"] = nlohmann::json::array();
  for (const auto& t : sites_) {
    j["sites"].push_back({{"shape", {t.left, t.phys, t.right}}, {"data", t.data}});
  }
  return j.dump();
}

OperatorMPS OperatorMPS::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const std::string g = j.at("gauge").get<std::string>();
    Gauge gauge;
    if (g == "local") {
      gauge = Gauge::local;
    } else if (g == "ti_first_site") {
      gauge = Gauge::ti_first_site;
    } else {
      throw UsageError("unknown gauge '" + g + "'");
    }
    std::vector<SiteTensor> sites;
    for (const auto& s : j.at("sites")) {
      const auto shape = s.at("shape").get<std::vector<int>>();
      if (shape.size() != 3) throw UsageError("site shape must have 3 entries");
      SiteTensor t(shape[0], shape[1], shape[2]);
      t.data = s.at("data").get<std::vector<double>>();
      sites.push_back(std::move(t));
    }
    return OperatorMPS(gauge, std::move(sites));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed MPS JSON: ") + e.what());
  }
}

void move_center_right(OperatorMPS& m, int i) {
  if (i < 0 || i + 1 >= m.size()) throw UsageError("move_center_right: site out of range");
  SiteTensor& a = m.site(i);
  SiteTensor& b = m.site(i + 1);
  const QrResult f = signed_qr(Eigen::MatrixXd(a.as_left()));
  const int k = static_cast<int>(f.q.cols());
  SiteTensor na = tensor_from(f.q, a.left, a.phys, k);
  RowMatrix nb = f.r * b.as_right();
  SiteTensor t(k, b.phys, b.right);
  t.as_right() = nb;
  a = std::move(na);
  b = std::move(t);
}

void move_center_left(OperatorMPS& m, int i) {
  if (i <= 0 || i >= m.size()) throw UsageError("move_center_left: site out of range");
  SiteTensor& a = m.site(i);
  SiteTensor& b = m.site(i - 1);
  const QrResult f = signed_qr(Eigen::MatrixXd(a.as_right().transpose()));
  const int k = static_cast<int>(f.q.cols());
  SiteTensor na(k, a.phys, a.right);
  na.as_right() = f.q.transpose();
  RowMatrix nb = b.as_left() * f.r.transpose();
  SiteTensor t(b.left, b.phys, k);
  t.as_left() = nb;
  a = std::move(na);
  b = std::move(t);
}

OperatorMPS canonicalize(const OperatorMPS& m, int center) {
  if (center < 0 || center >= m.size()) throw UsageError("canonicalize: center out of range");
  OperatorMPS out = m;
  for (int i = 0; i < center; ++i) move_center_right(out, i);
  for (int i = out.size() - 1; i > center; --i) move_center_left(out, i);
  return out;
}

EntropyProfile entropy_profile(const OperatorMPS& m) {
  OperatorMPS c = canonicalize(m, 0);
  const double n2 = c.site(0).norm2();
  if (std::abs(n2 - 1.0) > 1e-8) {
    throw UsageError("entropy_profile: operator is not normalized (ntr(O^2) = " +
                     std::to_string(n2) + ")");
  }
  const int N = c.size();
  EntropyProfile p;
  p.log_d = std::log(static_cast<double>(m.max_bond_dim()));
  for (int i = 0; i + 1 < N; ++i) {
    SiteTensor& a = c.site(i);
    SiteTensor& b = c.site(i + 1);
    const linalg::Svd svd = linalg::thin_svd(Eigen::MatrixXd(a.as_left()));
    const Eigen::VectorXd s = svd.s;
    const int k = static_cast<int>(s.size());
    const double total = s.squaredNorm();
    double S = 0.0;
    std::vector<double> sch(s.data(), s.data() + k);
    for (int j = 0; j < k; ++j) {
      const double w = s[j] * s[j] / total;
      if (w > 0.0) S -= w * std::log(w);
    }
    p.cuts.push_back(i + 1);
    p.entropy.push_back(S);
    const int cut = i + 1;
    p.max_bound.push_back(std::log(2.0) * 2.0 * std::min(cut, N - cut));
    p.schmidt.push_back(std::move(sch));
    SiteTensor na = tensor_from(svd.U, a.left, a.phys, k);
    RowMatrix nb = s.asDiagonal() * svd.V.transpose() * b.as_right();
    SiteTensor t(k, b.phys, b.right);
    t.as_right() = nb;
    a = std::move(na);
    b = std::move(t);
  }
  return p;
}

double overlap_mps(const OperatorMPS& a, const OperatorMPS& b) {
  if (a.size() != b.size()) throw UsageError("overlap_mps: length mismatch");
  RowMatrix E = RowMatrix::Ones(1, 1);
  for (int i = 0; i < a.size(); ++i) {
    const SiteTensor& ta = a.site(i);
    const SiteTensor& tb = b.site(i);
    RowMatrix next = RowMatrix::Zero(ta.right, tb.right);
    for (int ka = 0; ka < ta.phys; ++ka) {
      const int letter = a.letter(i, ka);
      const int kb = b.letter(i, 0) == 1 ? letter - 1 : letter;
      if (kb < 0 || kb >= tb.phys) continue;
      next.noalias() += ta.slice(ka).transpose() * E * tb.slice(kb);
    }
    E = std::move(next);
  }
  return E(0, 0);
}

}  // namespace slowop
