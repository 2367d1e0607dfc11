#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "g2lab/altform.hpp"
#include "g2lab/types.hpp"

namespace g2lab {

// Quaternionic structure attached to an oriented Euclidean 4-space Q with a
// distinguished unit vector u: the cross product on u-perp is defined by
// <X x Y, Z> = Vol(u, X, Y, Z), and the product
// (l u + X)(m u + Y) = (l m - <X,Y>) u + l Y + m X + X x Y follows.
// Components below are taken in an orthonormal basis (u, f1, f2, f3) with
// Vol(u, f1, f2, f3) = +1, so the cross product has standard components.

struct Quaternion {
  double re = 0.0;
  Vec3 im = Vec3::Zero();

  double norm_sq() const { return re * re + im.squaredNorm(); }
  double norm() const { return std::sqrt(norm_sq()); }
};

inline Quaternion conj(const Quaternion& q) { return {q.re, -q.im}; }

inline Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.re + b.re, a.im + b.im};
}
inline Quaternion operator-(const Quaternion& a, const Quaternion& b) {
  return {a.re - b.re, a.im - b.im};
}
inline Quaternion operator*(double s, const Quaternion& q) { return {s * q.re, s * q.im}; }

inline double quat_inner(const Quaternion& a, const Quaternion& b) {
  return a.re * b.re + a.im.dot(b.im);
}

inline Quaternion quat_mul(const Quaternion& p, const Quaternion& q) {
  return {p.re * q.re - p.im.dot(q.im), p.re * q.im + q.re * p.im + p.im.cross(q.im)};
}

class QuatContext {
 public:
  QuatContext() : basis_(Mat4::Identity()) {}

  /// Columns are (u, f1, f2, f3); must be orthonormal and positively oriented.
  explicit QuatContext(const Mat4& basis) : basis_(basis) {
    const double gram_err = (basis.transpose() * basis - Mat4::Identity()).cwiseAbs().maxCoeff();
    if (gram_err > 1e-12) throw std::invalid_argument("QuatContext: basis not orthonormal");
    if (basis.determinant() < 0.0)
      throw std::invalid_argument("QuatContext: basis must satisfy Vol(u,f1,f2,f3) = +1");
  }

  Vec4 u() const { return basis_.col(0); }
  Vec4 f(int i) const { return basis_.col(i); }

  /// Cross product of two ambient vectors orthogonal to u, back in ambient
  /// coordinates: <X x Y, Z> = Vol(u, X, Y, Z).
  Vec4 cross(const Vec4& x, const Vec4& y) const {
    return to_ambient(components(x).cross(components(y)));
  }

  /// u-perp components of an ambient vector (its u-part is discarded).
  Vec3 components(const Vec4& x) const {
    Vec3 c;
    for (int i = 1; i <= 3; ++i) c[i - 1] = basis_.col(i).dot(x);
    return c;
  }

  Vec4 to_ambient(const Vec3& c) const {
    return c[0] * basis_.col(1) + c[1] * basis_.col(2) + c[2] * basis_.col(3);
  }

  Quaternion from_ambient(const Vec4& x) const { return {basis_.col(0).dot(x), components(x)}; }

 private:
  Mat4 basis_;
};

// Octonions as pairs of quaternions under the Cayley-Dickson product
// (a1, a2)(a3, a4) = (a1 a3 - conj(a4) a2, a4 a1 + a2 conj(a3)).

struct Octonion {
  Quaternion a;
  Quaternion b;

  double norm_sq() const { return a.norm_sq() + b.norm_sq(); }
  double norm() const { return std::sqrt(norm_sq()); }
};

inline Octonion operator+(const Octonion& x, const Octonion& y) { return {x.a + y.a, x.b + y.b}; }
inline Octonion operator*(double s, const Octonion& x) { return {s * x.a, s * x.b}; }

inline double oct_inner(const Octonion& x, const Octonion& y) {
  return quat_inner(x.a, y.a) + quat_inner(x.b, y.b);
}

inline Octonion oct_mul(const Octonion& x, const Octonion& y) {
  return {quat_mul(x.a, y.a) - quat_mul(conj(y.b), x.b),
          quat_mul(y.b, x.a) + quat_mul(x.b, conj(y.a))};
}

/// Element of the imaginary slice u-perp + Q on which the trilinear form
/// lives: the first slot carries no u-component by construction.
struct ImOctonion {
  Vec3 x;        // first quaternion, imaginary part only
  Quaternion a;  // second quaternion, unrestricted

  Octonion embed() const { return {{0.0, x}, a}; }
};

/// phi(o1, o2, o3) = <o1 o2, o3> on imaginary octonions.
inline double phi_trilinear(const ImOctonion& o1, const ImOctonion& o2, const ImOctonion& o3) {
  return oct_inner(oct_mul(o1.embed(), o2.embed()), o3.embed());
}

/// Dictionary between the adapted frame e_0..e_6 and the imaginary slice:
/// e_0 is the real part of the second quaternion, e_1..e_3 its imaginary
/// parts, and e_4..e_6 sit in the first (u-perp) slot. This is the unique
/// assignment under which the trilinear form reproduces
/// phi = alpha + mu ^ beta - alpha_2 on all basis triples.
inline ImOctonion frame_im_octonion(int k) {
  ImOctonion o{Vec3::Zero(), {0.0, Vec3::Zero()}};
  if (k == 0)
    o.a.re = 1.0;
  else if (k >= 1 && k <= 3)
    o.a.im[k - 1] = 1.0;
  else if (k >= 4 && k <= 6)
    o.x[k - 4] = 1.0;
  else
    throw std::invalid_argument("frame index out of range");
  return o;
}

/// The 3-form induced by phi_trilinear through the dictionary above.
inline AltForm octonion_phi_form() {
  AltForm out(3);
  const auto& masks = AltForm::masks(3);
  for (int r = 0; r < int(masks.size()); ++r) {
    int idx[3], n = 0;
    for (int b = 0; b < kFormDim; ++b)
      if (masks[size_t(r)] & (1u << b)) idx[n++] = b;
    out[r] = phi_trilinear(frame_im_octonion(idx[0]), frame_im_octonion(idx[1]),
                           frame_im_octonion(idx[2]));
  }
  return out;
}

}  // namespace g2lab
