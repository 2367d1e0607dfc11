#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "g2lab/types.hpp"

namespace g2lab {

using MetricD1 = std::array<Mat4, 4>;                  // d1[k] = d_k g
using MetricD2 = std::array<std::array<Mat4, 4>, 4>;   // d2[k][l] = d_k d_l g

struct Domain {
  Vec4 lo = Vec4::Constant(-10.0);
  Vec4 hi = Vec4::Constant(10.0);
  Vec4 sample_lo = Vec4::Constant(-1.0);
  Vec4 sample_hi = Vec4::Constant(1.0);

  bool contains(const Vec4& x, double margin = 0.0) const {
    for (int i = 0; i < 4; ++i)
      if (x[i] < lo[i] + margin || x[i] > hi[i] - margin) return false;
    return true;
  }
};

struct NearBoundaryError : std::domain_error {
  explicit NearBoundaryError(const std::string& msg) : std::domain_error(msg) {}
};

/// A 4-manifold chart: metric coefficients as a function of the chart point,
/// optionally with analytic first/second derivatives. Immutable after
/// construction; evaluation is pure.
struct MetricModel {
  std::string id = "custom";
  std::function<Mat4(const Vec4&)> g;
  std::function<MetricD1(const Vec4&)> dg;   // may be empty -> finite differences
  std::function<MetricD2(const Vec4&)> d2g;  // may be empty -> finite differences
  Domain domain;
  double fd_step = 1e-5;
  double fd_step2 = 1e-4;
  bool analytic = false;
  std::optional<bool> einstein_expected;       // catalog knowledge
  std::optional<double> constant_curvature;    // sectional curvature when constant

  double boundary_margin() const { return 10.0 * std::max(fd_step, fd_step2); }
};

namespace detail {

inline double coord_step(double base, double x) { return base * std::max(1.0, std::abs(x)); }

// Central difference with one Richardson level.
template <typename Fn>
auto rich_central(Fn f, double h) -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  const R coarse = (f(h) - f(-h)) * (1.0 / (2.0 * h));
  const R fine = (f(h / 2) - f(-h / 2)) * (1.0 / h);
  return R((4.0 * fine - coarse) * (1.0 / 3.0));
}

}  // namespace detail

namespace detail {

inline MetricD1 metric_d1_step(const MetricModel& m, const Vec4& x, double step) {
  MetricD1 out;
  for (int k = 0; k < 4; ++k) {
    const double h = coord_step(step, x[k]);
    out[size_t(k)] = rich_central(
        [&](double t) {
          Vec4 y = x;
          y[k] += t;
          return Mat4(m.g(y));
        },
        h);
  }
  return out;
}

}  // namespace detail

/// First derivatives of g, analytic when the model provides them.
inline MetricD1 metric_d1(const MetricModel& m, const Vec4& x) {
  if (m.dg) return m.dg(x);
  return detail::metric_d1_step(m, x, m.fd_step);
}

/// Second derivatives via nested central differences, both levels at
/// fd_step2 (a finer inner step would only amplify rounding noise).
inline MetricD2 metric_d2(const MetricModel& m, const Vec4& x) {
  if (m.d2g) return m.d2g(x);
  MetricD2 out;
  for (int k = 0; k < 4; ++k) {
    const double h = detail::coord_step(m.fd_step2, x[k]);
    const auto dk = detail::rich_central(
        [&](double t) {
          Vec4 y = x;
          y[k] += t;
          const MetricD1 d1 = detail::metric_d1_step(m, y, m.fd_step2);
          Eigen::Matrix<double, 16, 4> flat;
          for (int l = 0; l < 4; ++l)
            flat.col(l) = Eigen::Map<const Eigen::Matrix<double, 16, 1>>(d1[size_t(l)].data());
          return flat;
        },
        h);
    for (int l = 0; l < 4; ++l)
      out[size_t(k)][size_t(l)] = Eigen::Map<const Mat4>(dk.col(l).data());
  }
  return out;
}

namespace detail {

// Round metrics in conformal charts: g = c(x) Id with c = 4 / (1 + s|x|^2)^2,
// s = +1 for the unit sphere (stereographic), s = -1 for the Poincare ball.
inline MetricModel conformal_model(double s, const std::string& id) {
  MetricModel m;
  m.id = id;
  m.analytic = true;
  m.g = [s](const Vec4& x) {
    const double d = 1.0 + s * x.squaredNorm();
    return Mat4(Mat4::Identity() * (4.0 / (d * d)));
  };
  m.dg = [s](const Vec4& x) {
    const double d = 1.0 + s * x.squaredNorm();
    MetricD1 out;
    for (int k = 0; k < 4; ++k)
      out[size_t(k)] = Mat4::Identity() * (-16.0 * s * x[k] / (d * d * d));
    return out;
  };
  m.d2g = [s](const Vec4& x) {
    const double d = 1.0 + s * x.squaredNorm();
    const double d3 = d * d * d, d4 = d3 * d;
    MetricD2 out;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        const double c = -16.0 * s * (k == l ? 1.0 : 0.0) / d3 + 96.0 * x[k] * x[l] / d4;
        out[size_t(k)][size_t(l)] = Mat4::Identity() * c;
      }
    return out;
  };
  return m;
}

// Fubini-Study metric on an affine chart of CP^2, from the Kahler potential
// log(1 + |z|^2) with z = (x1 + i x2, x3 + i x4). The Hermitian components
// are G_ij = d_i d_jbar log(1+|z|^2) = A delta_ij - zbar_i z_j A^2, A = 1/(1+|z|^2),
// and the Riemannian metric is g(X, Y) = Re sum G_ij X_i conj(Y_j).
struct FubiniStudy {
  using C = std::complex<double>;

  static std::array<C, 2> z(const Vec4& x) { return {C(x[0], x[1]), C(x[2], x[3])}; }

  // dz_i / dx_a (constant)
  static C zc(int i, int a) {
    if (i == 0 && a == 0) return {1, 0};
    if (i == 0 && a == 1) return {0, 1};
    if (i == 1 && a == 2) return {1, 0};
    if (i == 1 && a == 3) return {0, 1};
    return {0, 0};
  }

  struct Hermitian {
    std::array<std::array<C, 2>, 2> G;
    std::array<std::array<std::array<C, 2>, 2>, 4> dG;
    std::array<std::array<std::array<std::array<C, 2>, 2>, 4>, 4> d2G;
  };

  static Hermitian hermitian(const Vec4& x, bool first, bool second) {
    Hermitian h{};
    const auto zz = z(x);
    const double rho = std::norm(zz[0]) + std::norm(zz[1]);
    const double A = 1.0 / (1.0 + rho);
    const double A2 = A * A, A3 = A2 * A, A4 = A3 * A;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        h.G[size_t(i)][size_t(j)] = (i == j ? A : 0.0) - std::conj(zz[size_t(i)]) * zz[size_t(j)] * A2;
    if (!first && !second) return h;
    for (int a = 0; a < 4; ++a) {
      const double dA = -2.0 * x[a] * A2;
      const double dA2 = -4.0 * x[a] * A3;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const C P = std::conj(zz[size_t(i)]) * zz[size_t(j)];
          const C dP = std::conj(zc(i, a)) * zz[size_t(j)] + std::conj(zz[size_t(i)]) * zc(j, a);
          h.dG[size_t(a)][size_t(i)][size_t(j)] =
              (i == j ? C(dA, 0) : C(0, 0)) - (dP * A2 + P * dA2);
        }
    }
    if (!second) return h;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double d2A = -2.0 * (a == b ? 1.0 : 0.0) * A2 + 8.0 * x[a] * x[b] * A3;
        const double dA2a = -4.0 * x[a] * A3, dA2b = -4.0 * x[b] * A3;
        const double d2A2 = -4.0 * (a == b ? 1.0 : 0.0) * A3 + 24.0 * x[a] * x[b] * A4;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const C P = std::conj(zz[size_t(i)]) * zz[size_t(j)];
            const C dPa = std::conj(zc(i, a)) * zz[size_t(j)] + std::conj(zz[size_t(i)]) * zc(j, a);
            const C dPb = std::conj(zc(i, b)) * zz[size_t(j)] + std::conj(zz[size_t(i)]) * zc(j, b);
            const C d2P = std::conj(zc(i, a)) * zc(j, b) + std::conj(zc(i, b)) * zc(j, a);
            h.d2G[size_t(a)][size_t(b)][size_t(i)][size_t(j)] =
                (i == j ? C(d2A, 0) : C(0, 0)) -
                (d2P * A2 + dPa * dA2b + dPb * dA2a + P * d2A2);
          }
      }
    return h;
  }

  template <typename Entry>
  static Mat4 assemble(Entry e) {
    Mat4 out;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        C v{0, 0};
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) v += e(i, j) * zc(i, a) * std::conj(zc(j, b));
        out(a, b) = v.real();
      }
    return out;
  }
};

}  // namespace detail

/// Catalog of reference metrics. Names: flat, sphere4, hyperbolic4, cp2,
/// s2xs2 (product of round 2-spheres, radii r1 and r2, in spherical charts
/// (theta1, phi1, theta2, phi2)).
inline MetricModel catalog(const std::string& name, double r1 = 1.0, double r2 = 1.0) {
  if (name == "flat") {
    MetricModel m;
    m.id = "flat";
    m.analytic = true;
    m.g = [](const Vec4&) { return Mat4(Mat4::Identity()); };
    m.dg = [](const Vec4&) { return MetricD1{Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()}; };
    m.d2g = [](const Vec4&) {
      MetricD2 out;
      for (auto& row : out) row.fill(Mat4::Zero());
      return out;
    };
    m.einstein_expected = true;
    m.constant_curvature = 0.0;
    return m;
  }
  if (name == "sphere4") {
    MetricModel m = detail::conformal_model(+1.0, "sphere4");
    m.domain.lo = Vec4::Constant(-4.0);
    m.domain.hi = Vec4::Constant(4.0);
    m.domain.sample_lo = Vec4::Constant(-0.8);
    m.domain.sample_hi = Vec4::Constant(0.8);
    m.einstein_expected = true;
    m.constant_curvature = 1.0;
    return m;
  }
  if (name == "hyperbolic4") {
    MetricModel m = detail::conformal_model(-1.0, "hyperbolic4");
    m.domain.lo = Vec4::Constant(-0.49);
    m.domain.hi = Vec4::Constant(0.49);
    m.domain.sample_lo = Vec4::Constant(-0.3);
    m.domain.sample_hi = Vec4::Constant(0.3);
    m.einstein_expected = true;
    m.constant_curvature = -1.0;
    return m;
  }
  if (name == "cp2") {
    MetricModel m;
    m.id = "cp2";
    m.analytic = true;
    m.g = [](const Vec4& x) {
      const auto h = detail::FubiniStudy::hermitian(x, false, false);
      return detail::FubiniStudy::assemble(
          [&](int i, int j) { return h.G[size_t(i)][size_t(j)]; });
    };
    m.dg = [](const Vec4& x) {
      const auto h = detail::FubiniStudy::hermitian(x, true, false);
      MetricD1 out;
      for (int a = 0; a < 4; ++a)
        out[size_t(a)] = detail::FubiniStudy::assemble(
            [&](int i, int j) { return h.dG[size_t(a)][size_t(i)][size_t(j)]; });
      return out;
    };
    m.d2g = [](const Vec4& x) {
      const auto h = detail::FubiniStudy::hermitian(x, true, true);
      MetricD2 out;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          out[size_t(a)][size_t(b)] = detail::FubiniStudy::assemble(
              [&](int i, int j) { return h.d2G[size_t(a)][size_t(b)][size_t(i)][size_t(j)]; });
      return out;
    };
    m.domain.lo = Vec4::Constant(-4.0);
    m.domain.hi = Vec4::Constant(4.0);
    m.domain.sample_lo = Vec4::Constant(-0.8);
    m.domain.sample_hi = Vec4::Constant(0.8);
    m.einstein_expected = true;
    return m;
  }
  if (name == "s2xs2") {
    if (r1 <= 0.0 || r2 <= 0.0) throw std::invalid_argument("s2xs2: radii must be positive");
    MetricModel m;
    m.id = "s2xs2";
    m.analytic = true;
    const double a1 = r1 * r1, a2 = r2 * r2;
    m.g = [a1, a2](const Vec4& x) {
      Mat4 g = Mat4::Zero();
      g(0, 0) = a1;
      g(1, 1) = a1 * std::sin(x[0]) * std::sin(x[0]);
      g(2, 2) = a2;
      g(3, 3) = a2 * std::sin(x[2]) * std::sin(x[2]);
      return g;
    };
    m.dg = [a1, a2](const Vec4& x) {
      MetricD1 out{Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
      out[0](1, 1) = a1 * std::sin(2.0 * x[0]);
      out[2](3, 3) = a2 * std::sin(2.0 * x[2]);
      return out;
    };
    m.d2g = [a1, a2](const Vec4& x) {
      MetricD2 out;
      for (auto& row : out) row.fill(Mat4::Zero());
      out[0][0](1, 1) = 2.0 * a1 * std::cos(2.0 * x[0]);
      out[2][2](3, 3) = 2.0 * a2 * std::cos(2.0 * x[2]);
      return out;
    };
    const double pi = 3.14159265358979323846;
    m.domain.lo = Vec4(0.05, 0.05, 0.05, 0.05);
    m.domain.hi = Vec4(pi - 0.05, 2 * pi - 0.05, pi - 0.05, 2 * pi - 0.05);
    m.domain.sample_lo = Vec4(0.5, 0.6, 0.5, 0.6);
    m.domain.sample_hi = Vec4(pi - 0.5, 2 * pi - 0.6, pi - 0.5, 2 * pi - 0.6);
    m.einstein_expected = (r1 == r2);
    return m;
  }
  throw std::invalid_argument("unknown catalog metric '" + name + "'");
}

/// Deterministic g-orthonormal frame at x: Gram-Schmidt over the coordinate
/// basis in fixed order; the result is positively oriented.
inline Mat4 orthonormal_frame(const MetricModel& m, const Vec4& x) {
  const Mat4 g = m.g(x);
  Mat4 f = Mat4::Zero();
  for (int k = 0; k < 4; ++k) {
    Vec4 v = Vec4::Unit(k);
    for (int a = 0; a < k; ++a) v -= (f.col(a).transpose() * g * v)(0) * f.col(a);
    const double n = std::sqrt((v.transpose() * g * v)(0));
    f.col(k) = v / n;
  }
  return f;  // upper-triangular change of basis: det(f) > 0 automatically
}

}  // namespace g2lab
