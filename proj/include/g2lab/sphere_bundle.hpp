#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "g2lab/altform.hpp"
#include "g2lab/curvature.hpp"
#include "g2lab/g2forms.hpp"
#include "g2lab/metric.hpp"
#include "g2lab/types.hpp"

namespace g2lab {

// The unit tangent sphere bundle S_M of a 4-manifold chart. Points of TM are
// written in chart coordinates as 8-vectors (4 base + 4 fiber components);
// the induced metric pairs horizontal and vertical parts separately, where
// the vertical part of a tangent vector (X, W) at (x, u) is W + Gamma_x(X, u).

using Vec7c = Eigen::Matrix<double, 7, 1>;  // chart coordinates / coefficients on S_M

struct SpherePoint {
  Vec4 x;
  Vec4 u;  // g_x(u,u) = 1
};

inline SpherePoint make_sphere_point(const MetricModel& m, const Vec4& x, const Vec4& u_raw) {
  const Mat4 g = m.g(x);
  const double n2 = u_raw.dot(g * u_raw);
  if (!(n2 > 0.0)) throw std::invalid_argument("make_sphere_point: zero direction");
  return {x, u_raw / std::sqrt(n2)};
}

/// Horizontal lift of a base vector X at (x,u): the fiber components cancel
/// the connection so that the canonical section stays parallel along it.
inline Vec8 horizontal_lift(const std::array<Mat4, 4>& gamma, const SpherePoint& p,
                            const Vec4& x_vec) {
  Vec8 out;
  out.head<4>() = x_vec;
  out.tail<4>() = -christoffel_apply(gamma, x_vec, p.u);
  return out;
}

inline Vec8 horizontal_lift(const MetricModel& m, const SpherePoint& p, const Vec4& x_vec) {
  return horizontal_lift(christoffel(m, p.x), p, x_vec);
}

/// Embedding of a fiber-tangent vector (must be g-orthogonal to u).
inline Vec8 vertical_embed(const Vec4& y) {
  Vec8 out = Vec8::Zero();
  out.tail<4>() = y;
  return out;
}

/// Vertical part of a TTM vector at (x,u): W + Gamma(X, u).
inline Vec4 vertical_part(const std::array<Mat4, 4>& gamma, const SpherePoint& p, const Vec8& t) {
  return Vec4(t.tail<4>()) + christoffel_apply(gamma, Vec4(t.head<4>()), p.u);
}

/// Induced (Sasaki-type) inner product of two TTM vectors at (x,u).
inline double sphere_inner(const Mat4& g, const std::array<Mat4, 4>& gamma, const SpherePoint& p,
                           const Vec8& a, const Vec8& b) {
  const Vec4 va = vertical_part(gamma, p, a);
  const Vec4 vb = vertical_part(gamma, p, b);
  return Vec4(a.head<4>()).dot(g * Vec4(b.head<4>())) + va.dot(g * vb);
}

/// Adapted orthonormal frame e_0..e_6 at a sphere point: e_0 is the
/// horizontal copy of u, e_1..e_3 horizontal lifts of a completion of u,
/// e_{a+3} the vertical images of the same completion.
struct AdaptedFrame {
  SpherePoint p;
  Mat4 base;               // columns b0..b3, b0 = u, g-orthonormal, oriented
  std::array<Vec8, 7> e;   // tangent vectors of S_M
  Vec8 unit_normal;        // (0, u): the fiber direction U itself
};

/// Deterministic completion: coordinate axes tried in `axis_order`, an axis
/// being skipped when its residual after projection is below 1e-6.
inline AdaptedFrame adapted_frame(const MetricModel& m, const SpherePoint& p,
                                  const std::array<int, 4>& axis_order = {0, 1, 2, 3}) {
  const Mat4 g = m.g(p.x);
  Mat4 base = Mat4::Zero();
  base.col(0) = p.u;
  int have = 1;
  for (int a : axis_order) {
    if (have == 4) break;
    Vec4 v = Vec4::Unit(a);
    for (int b = 0; b < have; ++b) v -= (base.col(b).transpose() * g * v)(0) * base.col(b);
    const double deficit = std::sqrt(std::max(0.0, (v.transpose() * g * v)(0)));
    if (deficit < 1e-6) continue;
    base.col(have++) = v / deficit;
  }
  if (have < 4) throw std::runtime_error("adapted_frame: could not complete the frame");
  if (base.determinant() < 0.0) base.col(3) = -base.col(3);

  AdaptedFrame f;
  f.p = p;
  f.base = base;
  const auto gamma = christoffel(m, p.x);
  for (int k = 0; k < 4; ++k) f.e[size_t(k)] = horizontal_lift(gamma, p, base.col(k));
  for (int a = 1; a <= 3; ++a) f.e[size_t(a + 3)] = vertical_embed(base.col(a));
  f.unit_normal = vertical_embed(p.u);
  return f;
}

/// Frame components of a tangent vector (slots 0..3 horizontal, 4..6 vertical).
inline Vec7 frame_components(const MetricModel& m, const AdaptedFrame& f, const Vec8& t) {
  const Mat4 g = m.g(f.p.x);
  const auto gamma = christoffel(m, f.p.x);
  const Vec4 h = t.head<4>();
  const Vec4 v = vertical_part(gamma, f.p, t);
  Vec7 out;
  for (int k = 0; k < 4; ++k) out[k] = h.dot(g * f.base.col(k));
  for (int a = 1; a <= 3; ++a) out[a + 3] = v.dot(g * f.base.col(a));
  return out;
}

/// The canonical forms in an adapted frame. They are frame-constant: any
/// admissible completion yields the same values, which is what the
/// frame-independence oracle checks through coordinate components.
struct CanonicalForms {
  AltForm alpha, mu, beta, alpha1, alpha2, phi, star_phi;
};

inline CanonicalForms canonical_forms(const AdaptedFrame&) {
  return {fiber_volume(), mu_form(),  beta_form(), alpha1_form(),
          alpha2_form(),  g2_phi(),   g2_star_phi()};
}

enum class FieldId { Alpha, Mu, Beta, Alpha1, Alpha2, Phi, StarPhi, StarMu, BaseVol };

inline AltForm model_form(FieldId id) {
  switch (id) {
    case FieldId::Alpha: return fiber_volume();
    case FieldId::Mu: return mu_form();
    case FieldId::Beta: return beta_form();
    case FieldId::Alpha1: return alpha1_form();
    case FieldId::Alpha2: return alpha2_form();
    case FieldId::Phi: return g2_phi();
    case FieldId::StarPhi: return g2_star_phi();
    case FieldId::StarMu: return hodge_star(mu_form());
    case FieldId::BaseVol: return base_volume();
  }
  throw std::invalid_argument("unknown field id");
}

struct PoleError : std::domain_error {
  explicit PoleError(const std::string& msg) : std::domain_error(msg) {}
};

/// Chart (x, w) on S_M around a center point: u(x, w) = F(x) sigma(w) with
/// F the deterministic orthonormal frame of the base chart and sigma the
/// inverse stereographic map R^3 -> S^3 whose pole is -F(x) e_1.
class SphereChart {
 public:
  SphereChart(MetricModel m, const SpherePoint& center) : m_(std::move(m)) {
    const Mat4 f0 = orthonormal_frame(m_, center.x);
    const Vec4 c = f0.transpose() * m_.g(center.x) * center.u;  // F^-1 u = F^T g u
    if (c[0] <= -1.0 + 1e-12) throw PoleError("SphereChart: center at the stereographic pole");
    q0_.head<4>() = center.x;
    q0_.tail<3>() = Vec3(c[1], c[2], c[3]) / (1.0 + c[0]);
    if (q0_.tail<3>().norm() > pole_limit())
      throw PoleError("SphereChart: center too close to the stereographic pole");
  }

  static double pole_limit() { return 10.0; }

  const MetricModel& metric() const { return m_; }
  Vec7c center() const { return q0_; }

  static Vec4 sigma(const Vec3& w) {
    const double rho = w.squaredNorm();
    Vec4 s;
    s[0] = (1.0 - rho) / (1.0 + rho);
    s.tail<3>() = 2.0 * w / (1.0 + rho);
    return s;
  }

  static Mat4 frame_of(const MetricModel& m, const Vec4& x) { return orthonormal_frame(m, x); }

  Vec4 base_point(const Vec7c& q) const { return q.head<4>(); }

  Vec4 unit_vector(const Vec7c& q) const {
    return orthonormal_frame(m_, base_point(q)) * sigma(q.tail<3>());
  }

  SpherePoint point(const Vec7c& q) const { return {base_point(q), unit_vector(q)}; }

  bool valid(const Vec7c& q, double margin = 0.0) const {
    return q.tail<3>().norm() <= pole_limit() &&
           m_.domain.contains(base_point(q), std::max(margin, m_.boundary_margin()));
  }

  void require_valid(const Vec7c& q) const {
    if (q.tail<3>().norm() > pole_limit())
      throw PoleError("SphereChart: fiber coordinate too close to the pole");
    if (!m_.domain.contains(base_point(q), m_.boundary_margin()))
      throw NearBoundaryError("SphereChart: base point too close to the chart boundary");
  }

  /// The seven coordinate tangent fields as TTM 8-vectors.
  std::array<Vec8, 7> coordinate_fields(const Vec7c& q) const {
    std::array<Vec8, 7> out;
    const Vec4 x = base_point(q);
    const Vec3 w = q.tail<3>();
    const Vec4 sig = sigma(w);
    for (int i = 0; i < 4; ++i) {
      const double h = detail::coord_step(1e-5, x[i]);
      const Mat4 dF = detail::rich_central(
          [&](double t) {
            Vec4 y = x;
            y[i] += t;
            return Mat4(orthonormal_frame(m_, y));
          },
          h);
      out[size_t(i)].head<4>() = Vec4::Unit(i);
      out[size_t(i)].tail<4>() = dF * sig;
    }
    const Mat4 f = orthonormal_frame(m_, x);
    const double rho = w.squaredNorm();
    const double den = 1.0 + rho;
    for (int a = 0; a < 3; ++a) {
      Vec4 ds;
      ds[0] = -4.0 * w[a] / (den * den);
      for (int b = 0; b < 3; ++b)
        ds[b + 1] = 2.0 * ((a == b ? 1.0 : 0.0) / den - 2.0 * w[a] * w[b] / (den * den));
      out[size_t(a) + 4].head<4>().setZero();
      out[size_t(a) + 4].tail<4>() = f * ds;
    }
    return out;
  }

  /// Induced metric on the chart coordinates.
  Mat7 metric_matrix(const Vec7c& q) const {
    const auto flds = coordinate_fields(q);
    const SpherePoint p = point(q);
    const Mat4 g = m_.g(p.x);
    const auto gamma = christoffel(m_, p.x);
    Mat7 out;
    for (int i = 0; i < 7; ++i)
      for (int j = i; j < 7; ++j) {
        out(i, j) = sphere_inner(g, gamma, p, flds[size_t(i)], flds[size_t(j)]);
        out(j, i) = out(i, j);
      }
    return out;
  }

  /// C(k, i) = frame component k of the coordinate field i.
  Mat7 frame_matrix(const Vec7c& q, const AdaptedFrame& f) const {
    const auto flds = coordinate_fields(q);
    Mat7 c;
    for (int i = 0; i < 7; ++i) c.col(i) = frame_components(m_, f, flds[size_t(i)]);
    return c;
  }

 private:
  MetricModel m_;
  Vec7c q0_;
};

/// Coordinate components of a frame-constant form at q: pullback through the
/// frame coefficient matrix of the coordinate fields.
inline AltForm to_coordinates(const Mat7& c, const AltForm& frame_form) {
  return pullback(c, frame_form);
}

inline AltForm to_frame(const Mat7& c, const AltForm& coord_form) {
  return pullback(Mat7(c.inverse()), coord_form);
}

using FormField = std::function<AltForm(const Vec7c&)>;

/// Smooth field of coordinate components of one of the canonical forms.
/// The field owns a copy of the chart and stays valid on its own.
inline FormField form_field(const SphereChart& chart, FieldId id) {
  const AltForm form = model_form(id);
  return [chart, form](const Vec7c& q) {
    chart.require_valid(q);
    const SpherePoint p = chart.point(q);
    const AdaptedFrame f = adapted_frame(chart.metric(), p);
    return to_coordinates(chart.frame_matrix(q, f), form);
  };
}

/// Central-difference exterior derivative of a coordinate-component field,
/// one Richardson level; the result is in the coordinate cobasis.
inline AltForm d_numeric(const FormField& field, const Vec7c& q, double h) {
  if (h < 1e-6 || h > 1e-3) throw std::invalid_argument("d_numeric: step outside [1e-6, 1e-3]");
  std::array<AltForm, 7> deriv{AltForm(0), AltForm(0), AltForm(0), AltForm(0),
                               AltForm(0), AltForm(0), AltForm(0)};
  for (int j = 0; j < 7; ++j) {
    auto shifted = [&](double t) {
      Vec7c qq = q;
      qq[j] += t;
      return field(qq);
    };
    const AltForm coarse = (shifted(h) - shifted(-h)) * (1.0 / (2.0 * h));
    const AltForm fine = (shifted(h / 2) - shifted(-h / 2)) * (1.0 / h);
    deriv[size_t(j)] = (4.0 * fine - coarse) * (1.0 / 3.0);
  }
  const int p = deriv[0].degree();
  if (p + 1 > kFormDim) throw std::invalid_argument("d_numeric: degree overflow");
  AltForm out(p + 1);
  const auto& masks = AltForm::masks(p);
  const auto& tables = detail::tables();
  for (int j = 0; j < 7; ++j)
    for (int r = 0; r < int(masks.size()); ++r) {
      const std::uint8_t mj = masks[size_t(r)];
      if (mj & (1u << j)) continue;
      const std::uint8_t mk = std::uint8_t(mj | (1u << j));
      const int pos = std::popcount(unsigned(mk) & ((1u << j) - 1u));
      out[tables.rank[size_t(p + 1)][mk]] += ((pos & 1) ? -1.0 : 1.0) * deriv[size_t(j)][r];
    }
  return out;
}

/// d_numeric converted to the adapted frame at q.
inline AltForm d_numeric_frame(const SphereChart& chart, const FormField& field, const Vec7c& q,
                               double h) {
  const AdaptedFrame f = adapted_frame(chart.metric(), chart.point(q));
  return to_frame(chart.frame_matrix(q, f), d_numeric(field, q, h));
}

using VecField = std::function<Vec7c(const Vec7c&)>;  // chart coefficient functions

namespace detail {

template <typename Fn>
double dir_deriv(Fn f, const Vec7c& q, const Vec7c& dir, double h) {
  return rich_central([&](double t) { return f(Vec7c(q + t * dir)); }, h);
}

inline Vec7c field_partial(const VecField& f, const Vec7c& q, int j, double h) {
  return rich_central(
      [&](double t) {
        Vec7c qq = q;
        qq[j] += t;
        return Vec7c(f(qq));
      },
      h);
}

}  // namespace detail

struct KoszulResult {
  Vec7c chart_coeffs;  // D_X Y in the coordinate fields
  Vec7 frame;          // same vector in the adapted frame at q
  Vec7 bracket_frame;  // [X, Y] in the adapted frame
};

/// Levi-Civita connection of S_M evaluated by the Koszul formula with
/// finite differences on the induced metric; fully independent of the
/// closed-form decomposition it is checked against.
inline KoszulResult levi_civita_koszul(const SphereChart& chart, const Vec7c& q, const VecField& X,
                                       const VecField& Y, double h = 1e-3) {
  const Vec7c x0 = X(q), y0 = Y(q);
  const Mat7 g0 = chart.metric_matrix(q);

  std::array<Vec7c, 7> dX, dY;
  for (int j = 0; j < 7; ++j) {
    dX[size_t(j)] = detail::field_partial(X, q, j, h);
    dY[size_t(j)] = detail::field_partial(Y, q, j, h);
  }
  Vec7c bracket = Vec7c::Zero();
  for (int j = 0; j < 7; ++j) bracket += x0[j] * dY[size_t(j)] - y0[j] * dX[size_t(j)];

  auto g_of = [&](const Vec7c& qq) { return chart.metric_matrix(qq); };
  Vec7c rhs;
  for (int mcol = 0; mcol < 7; ++mcol) {
    const double t1 = detail::dir_deriv(
        [&](const Vec7c& qq) { return double((g_of(qq) * Y(qq))[mcol]); }, q, x0, h);
    const double t2 = detail::dir_deriv(
        [&](const Vec7c& qq) { return double((g_of(qq) * X(qq))[mcol]); }, q, y0, h);
    const double t3 = detail::dir_deriv(
        [&](const Vec7c& qq) { return double(X(qq).transpose() * g_of(qq) * Y(qq)); }, q,
        Vec7c::Unit(mcol), h);
    const double t4 = (g0 * bracket)[mcol];
    const double t5 = (-dY[size_t(mcol)]).dot(g0 * x0);  // <[Y, d_m], X>
    const double t6 = dX[size_t(mcol)].dot(g0 * y0);     // <[d_m, X], Y>
    rhs[mcol] = 0.5 * (t1 + t2 - t3 + t4 - t5 + t6);
  }
  KoszulResult res;
  res.chart_coeffs = g0.ldlt().solve(rhs);
  const AdaptedFrame f = adapted_frame(chart.metric(), chart.point(q));
  const Mat7 c = chart.frame_matrix(q, f);
  res.frame = c * res.chart_coeffs;
  res.bracket_frame = c * bracket;
  return res;
}

struct SplitTangent {
  Vec4 horizontal;  // df of the vector
  Vec4 vertical;    // fiber part, orthogonal to u for tangent vectors
};

inline SplitTangent split_tangent(const MetricModel& m, const SpherePoint& p, const Vec8& t) {
  const auto gamma = christoffel(m, p.x);
  return {t.head<4>(), vertical_part(gamma, p, t)};
}

/// The direct-sum connection nabla* applied to the field Y along the chart
/// direction X at q, evaluated by finite differences of the pullback
/// connection on the horizontal and vertical components separately.
inline SplitTangent nabla_star_numeric(const SphereChart& chart, const Vec7c& q, const VecField& Y,
                                       const Vec7c& x_coeffs, double h = 1e-4) {
  const MetricModel& m = chart.metric();
  auto section = [&](double t) {
    const Vec7c qq = q + t * x_coeffs;
    const auto flds = chart.coordinate_fields(qq);
    const Vec7c yc = Y(qq);
    Vec8 y8 = Vec8::Zero();
    for (int i = 0; i < 7; ++i) y8 += yc[i] * flds[size_t(i)];
    const SpherePoint pt = chart.point(qq);
    const auto gamma = christoffel(m, pt.x);
    Eigen::Matrix<double, 8, 1> hv;
    hv.head<4>() = y8.head<4>();
    hv.tail<4>() = vertical_part(gamma, pt, y8);
    return hv;
  };
  const Eigen::Matrix<double, 8, 1> s0 = section(0.0);
  const Eigen::Matrix<double, 8, 1> ds = detail::rich_central(section, h);

  const SpherePoint p = chart.point(q);
  const Mat4 g = m.g(p.x);
  const auto gamma = christoffel(m, p.x);
  const auto flds = chart.coordinate_fields(q);
  Vec8 x8 = Vec8::Zero();
  for (int i = 0; i < 7; ++i) x8 += x_coeffs[i] * flds[size_t(i)];
  const Vec4 xdot = x8.head<4>();

  SplitTangent out;
  out.horizontal = Vec4(ds.head<4>()) + christoffel_apply(gamma, xdot, Vec4(s0.head<4>()));
  Vec4 v = Vec4(ds.tail<4>()) + christoffel_apply(gamma, xdot, Vec4(s0.tail<4>()));
  v -= v.dot(g * p.u) * p.u;  // correction term keeps the result tangent to the fiber
  out.vertical = v;
  return out;
}

/// Closed-form corrections D - nabla*: the vertical piece -1/2 R(X,Y)u and
/// the horizontal piece A_X Y, both tensorial in X and Y.
struct ConnectionCorrections {
  Vec4 vertical;
  Vec4 horizontal;
};

inline ConnectionCorrections connection_corrections(const MetricModel& m, const CurvatureData& cd,
                                                    const AdaptedFrame& f, const Vec8& x8,
                                                    const Vec8& y8) {
  const SpherePoint& p = f.p;
  const SplitTangent xs = split_tangent(m, p, x8);
  const SplitTangent ys = split_tangent(m, p, y8);
  ConnectionCorrections out;
  out.vertical = -0.5 * riemann_apply(cd, xs.horizontal, ys.horizontal, p.u);
  out.horizontal = Vec4::Zero();
  for (int k = 0; k < 4; ++k) {
    const Vec4 bk = f.base.col(k);
    const double ck = 0.5 * (riemann_eval(cd, xs.horizontal, bk, p.u, ys.vertical) +
                             riemann_eval(cd, ys.horizontal, bk, p.u, xs.vertical));
    out.horizontal += ck * bk;
  }
  return out;
}

/// Frame components (slots 0..3 horizontal, 4..6 vertical) of a split vector.
inline Vec7 split_frame_components(const MetricModel& m, const AdaptedFrame& f,
                                   const SplitTangent& s) {
  const Mat4 g = m.g(f.p.x);
  Vec7 out;
  for (int k = 0; k < 4; ++k) out[k] = s.horizontal.dot(g * f.base.col(k));
  for (int a = 1; a <= 3; ++a) out[a + 3] = s.vertical.dot(g * f.base.col(a));
  return out;
}

/// Seeded sample of sphere points: base points uniform in the sampling box,
/// directions from normalised Gaussians. Points whose fiber coordinate would
/// sit too close to the stereographic pole are redrawn, so every sample
/// admits the chart with margin.
inline std::vector<SpherePoint> sample_sphere_points(const MetricModel& m, int n,
                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SpherePoint> out;
  out.reserve(size_t(n));
  while (int(out.size()) < n) {
    Vec4 x;
    for (int i = 0; i < 4; ++i)
      x[i] = m.domain.sample_lo[i] + uni(rng) * (m.domain.sample_hi[i] - m.domain.sample_lo[i]);
    Vec4 u(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    if (u.norm() < 1e-6) continue;
    const SpherePoint p = make_sphere_point(m, x, u);
    const Vec4 c = orthonormal_frame(m, x).transpose() * m.g(x) * p.u;
    if (c[0] <= -1.0 + 1e-6) continue;
    if ((Vec3(c[1], c[2], c[3]) / (1.0 + c[0])).norm() > 0.8 * SphereChart::pole_limit()) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace g2lab
