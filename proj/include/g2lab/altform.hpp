#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace g2lab {

// Alternating forms on an oriented Euclidean 7-space with a fixed orthonormal
// coframe e^0..e^6. Components are stored densely over sorted multi-indices
// (lexicographic order); the volume form is e^{0123456} and all Hodge-star
// signs follow from that orientation.

inline constexpr int kFormDim = 7;
inline constexpr std::array<int, 8> kBinom7 = {1, 7, 21, 35, 35, 21, 7, 1};

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

/// General endomorphism of the frame, acting on vectors e_0..e_6.
using FrameEndo = Mat7;

namespace detail {

struct IndexTables {
  std::array<std::vector<std::uint8_t>, 8> masks;      // degree -> ordered masks
  std::array<std::array<std::int16_t, 128>, 8> rank;   // degree -> mask -> rank

  IndexTables() {
    for (auto& r : rank) r.fill(-1);
    for (int p = 0; p <= kFormDim; ++p) {
      std::array<int, kFormDim> c{};
      for (int i = 0; i < p; ++i) c[i] = i;
      while (true) {
        std::uint8_t mask = 0;
        for (int i = 0; i < p; ++i) mask |= std::uint8_t(1u << c[i]);
        rank[p][mask] = std::int16_t(masks[p].size());
        masks[p].push_back(mask);
        // advance to the next combination in lexicographic order
        int i = p - 1;
        while (i >= 0 && c[i] == kFormDim - p + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < p; ++j) c[j] = c[j - 1] + 1;
      }
    }
  }
};

inline const IndexTables& tables() {
  static const IndexTables t;
  return t;
}

// Parity sign of concatenating index set `a` before disjoint set `b`,
// relative to the fully sorted arrangement.
inline int merge_sign(std::uint8_t a, std::uint8_t b) {
  int inv = 0;
  for (int j = 0; j < kFormDim; ++j)
    if (b & (1u << j)) inv += std::popcount(unsigned(a) >> (j + 1));
  return (inv & 1) ? -1 : 1;
}

// Determinant of the p x p matrix entry(r,c); plain Gaussian elimination.
template <typename EntryFn>
double small_det(int p, EntryFn entry) {
  if (p == 0) return 1.0;
  std::array<std::array<double, 7>, 7> m{};
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) m[r][c] = entry(r, c);
  double det = 1.0;
  for (int k = 0; k < p; ++k) {
    int piv = k;
    for (int r = k + 1; r < p; ++r)
      if (std::abs(m[r][k]) > std::abs(m[piv][k])) piv = r;
    if (m[piv][k] == 0.0) return 0.0;
    if (piv != k) {
      std::swap(m[piv], m[k]);
      det = -det;
    }
    det *= m[k][k];
    for (int r = k + 1; r < p; ++r) {
      const double f = m[r][k] / m[k][k];
      for (int c = k; c < p; ++c) m[r][c] -= f * m[k][c];
    }
  }
  return det;
}

}  // namespace detail

class AltForm {
 public:
  explicit AltForm(int degree) : degree_(checked(degree)), c_(kBinom7[degree_], 0.0) {}

  static AltForm scalar(double v) {
    AltForm a(0);
    a.c_[0] = v;
    return a;
  }

  /// e^{i1...ip} scaled by `coeff`; indices may be unsorted (sign absorbed).
  static AltForm monomial(std::initializer_list<int> indices, double coeff = 1.0) {
    std::array<int, kFormDim> idx{};
    int p = 0;
    for (int i : indices) {
      if (i < 0 || i >= kFormDim) throw std::invalid_argument("frame index out of range");
      idx[p++] = i;
    }
    if (p > kFormDim) throw std::invalid_argument("too many indices");
    int sign = 1;
    for (int i = 1; i < p; ++i)  // insertion sort, counting swaps
      for (int j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
        std::swap(idx[j - 1], idx[j]);
        sign = -sign;
      }
    for (int i = 1; i < p; ++i)
      if (idx[i - 1] == idx[i]) throw std::invalid_argument("repeated frame index");
    AltForm a(p);
    std::uint8_t mask = 0;
    for (int i = 0; i < p; ++i) mask |= std::uint8_t(1u << idx[i]);
    a.c_[detail::tables().rank[p][mask]] = sign * coeff;
    return a;
  }

  int degree() const { return degree_; }
  int size() const { return int(c_.size()); }

  double operator[](int r) const { return c_[size_t(r)]; }
  double& operator[](int r) { return c_[size_t(r)]; }

  /// Signed component on a (possibly unsorted) index tuple.
  double coeff(std::initializer_list<int> indices) const {
    std::array<int, kFormDim> idx{};
    int p = 0;
    for (int i : indices) {
      if (i < 0 || i >= kFormDim) throw std::invalid_argument("frame index out of range");
      if (p >= degree_) throw std::invalid_argument("coeff: wrong number of indices");
      idx[p++] = i;
    }
    if (p != degree_) throw std::invalid_argument("coeff: wrong number of indices");
    int sign = 1;
    for (int i = 1; i < p; ++i)
      for (int j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
        std::swap(idx[j - 1], idx[j]);
        sign = -sign;
      }
    std::uint8_t mask = 0;
    for (int i = 0; i < p; ++i) {
      if (i > 0 && idx[i - 1] == idx[i]) return 0.0;
      mask |= std::uint8_t(1u << idx[i]);
    }
    return sign * c_[size_t(detail::tables().rank[p][mask])];
  }

  const std::vector<double>& components() const { return c_; }

  AltForm& operator+=(const AltForm& o) {
    require_same_degree(o);
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  AltForm& operator-=(const AltForm& o) {
    require_same_degree(o);
    for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  AltForm& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  friend AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
  friend AltForm operator-(AltForm a, const AltForm& b) { return a -= b; }
  friend AltForm operator*(AltForm a, double s) { return a *= s; }
  friend AltForm operator*(double s, AltForm a) { return a *= s; }
  friend AltForm operator-(AltForm a) { return a *= -1.0; }

  double inner(const AltForm& o) const {
    require_same_degree(o);
    double s = 0.0;
    for (size_t i = 0; i < c_.size(); ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm_sq() const { return inner(*this); }
  double norm() const { return std::sqrt(norm_sq()); }
  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  static const std::vector<std::uint8_t>& masks(int degree) {
    return detail::tables().masks[size_t(degree)];
  }

 private:
  static int checked(int degree) {
    if (degree < 0 || degree > kFormDim) throw std::invalid_argument("form degree out of range");
    return degree;
  }
  void require_same_degree(const AltForm& o) const {
    if (degree_ != o.degree_) throw std::invalid_argument("degree mismatch");
  }

  int degree_;
  std::vector<double> c_;
};

inline double max_abs_diff(const AltForm& a, const AltForm& b) {
  return (a - b).max_abs();
}

/// Exterior product. Throws if the degrees add up beyond 7.
inline AltForm wedge(const AltForm& a, const AltForm& b) {
  const int p = a.degree(), q = b.degree();
  if (p + q > kFormDim)
    throw std::invalid_argument("wedge: degree " + std::to_string(p + q) + " exceeds 7");
  const auto& ta = AltForm::masks(p);
  const auto& tb = AltForm::masks(q);
  AltForm out(p + q);
  for (int i = 0; i < int(ta.size()); ++i) {
    const double av = a[i];
    if (av == 0.0) continue;
    for (int j = 0; j < int(tb.size()); ++j) {
      const double bv = b[j];
      if (bv == 0.0) continue;
      if (ta[size_t(i)] & tb[size_t(j)]) continue;
      const std::uint8_t m = ta[size_t(i)] | tb[size_t(j)];
      out[detail::tables().rank[size_t(p + q)][m]] +=
          detail::merge_sign(ta[size_t(i)], tb[size_t(j)]) * av * bv;
    }
  }
  return out;
}

/// Hodge star for the orthonormal coframe and volume e^{0123456};
/// satisfies w ^ *n = <w,n> Vol and ** = Id on every degree.
inline AltForm hodge_star(const AltForm& a) {
  const int p = a.degree();
  const auto& tp = AltForm::masks(p);
  AltForm out(kFormDim - p);
  for (int i = 0; i < int(tp.size()); ++i) {
    const std::uint8_t m = tp[size_t(i)];
    const std::uint8_t comp = std::uint8_t(0x7Fu & ~m);
    out[detail::tables().rank[size_t(kFormDim - p)][comp]] = detail::merge_sign(m, comp) * a[i];
  }
  return out;
}

/// Interior product with the frame vector e_v.
inline AltForm interior(int v, const AltForm& a) {
  const int p = a.degree();
  if (p < 1) throw std::invalid_argument("interior: degree must be >= 1");
  if (v < 0 || v >= kFormDim) throw std::invalid_argument("interior: bad frame index");
  const auto& tp = AltForm::masks(p);
  AltForm out(p - 1);
  for (int i = 0; i < int(tp.size()); ++i) {
    const std::uint8_t m = tp[size_t(i)];
    if (!(m & (1u << v))) continue;
    const int pos = std::popcount(unsigned(m) & ((1u << v) - 1u));
    const std::uint8_t rm = std::uint8_t(m & ~(1u << v));
    out[detail::tables().rank[size_t(p - 1)][rm]] += ((pos & 1) ? -1.0 : 1.0) * a[i];
  }
  return out;
}

/// Interior product with a general vector.
inline AltForm interior(const Vec7& v, const AltForm& a) {
  AltForm out(a.degree() - 1);
  for (int k = 0; k < kFormDim; ++k)
    if (v[k] != 0.0) out += v[k] * interior(k, a);
  return out;
}

/// Multilinear evaluation of a p-form on p arbitrary vectors.
inline double eval_form(const AltForm& a, std::span<const Vec7> vs) {
  const int p = a.degree();
  if (int(vs.size()) != p) throw std::invalid_argument("eval_form: arity mismatch");
  const auto& tp = AltForm::masks(p);
  double total = 0.0;
  std::array<int, kFormDim> idx{};
  for (int i = 0; i < int(tp.size()); ++i) {
    if (a[i] == 0.0) continue;
    const std::uint8_t m = tp[size_t(i)];
    int n = 0;
    for (int b = 0; b < kFormDim; ++b)
      if (m & (1u << b)) idx[n++] = b;
    total += a[i] * detail::small_det(p, [&](int r, int c) { return vs[size_t(c)][idx[r]]; });
  }
  return total;
}

/// Signed contraction  a o (B_1 ^ ... ^ B_p)  summing over all permutations;
/// the raw sum is returned (no 1/p! or 1/2 normalisation).
inline AltForm circ_contract(const AltForm& a, std::span<const FrameEndo> bs) {
  const int p = a.degree();
  if (int(bs.size()) != p)
    throw std::invalid_argument("circ_contract: need exactly degree-many endomorphisms");
  AltForm out(p);
  if (p == 0) {
    out[0] = a[0];
    return out;
  }
  const auto& tp = AltForm::masks(p);
  std::array<int, kFormDim> base{};
  std::array<int, kFormDim> perm{};
  std::vector<Vec7> args;
  args.resize(size_t(p));
  for (int oi = 0; oi < int(tp.size()); ++oi) {
    const std::uint8_t m = tp[size_t(oi)];
    int n = 0;
    for (int b = 0; b < kFormDim; ++b)
      if (m & (1u << b)) base[n++] = b;
    double val = 0.0;
    for (int i = 0; i < p; ++i) perm[i] = i;
    do {
      int inv = 0;
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
          if (perm[i] > perm[j]) ++inv;
      for (int c = 0; c < p; ++c) args[size_t(c)] = bs[size_t(c)].col(base[perm[c]]);
      const double term = eval_form(a, args);
      val += (inv & 1) ? -term : term;
    } while (std::next_permutation(perm.begin(), perm.begin() + p));
    out[oi] = val;
  }
  return out;
}

/// Pullback through a linear map:  (pullback(L,a))(v_1..v_p) = a(L v_1, .., L v_p).
inline AltForm pullback(const Mat7& L, const AltForm& a) {
  const int p = a.degree();
  const auto& tp = AltForm::masks(p);
  AltForm out(p);
  std::array<int, kFormDim> ridx{}, cidx{};
  for (int oi = 0; oi < int(tp.size()); ++oi) {
    const std::uint8_t mo = tp[size_t(oi)];
    int nc = 0;
    for (int b = 0; b < kFormDim; ++b)
      if (mo & (1u << b)) cidx[nc++] = b;
    double val = 0.0;
    for (int ji = 0; ji < int(tp.size()); ++ji) {
      if (a[ji] == 0.0) continue;
      const std::uint8_t mj = tp[size_t(ji)];
      int nr = 0;
      for (int b = 0; b < kFormDim; ++b)
        if (mj & (1u << b)) ridx[nr++] = b;
      val += a[ji] * detail::small_det(p, [&](int r, int c) { return L(ridx[r], cidx[c]); });
    }
    out[oi] = val;
  }
  return out;
}

}  // namespace g2lab
