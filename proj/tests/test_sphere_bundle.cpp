#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "g2lab/sphere_bundle.hpp"
#include "g2lab/torsion.hpp"

using namespace g2lab;

namespace {

// RK4 parallel transport of u along the straight base line x + t X.
Vec4 transport(const MetricModel& m, const Vec4& x0, const Vec4& x_dir, const Vec4& u0,
               double t_end, int steps) {
  Vec4 u = u0;
  const double dt = t_end / steps;
  auto rhs = [&](double t, const Vec4& v) {
    const auto gamma = christoffel(m, Vec4(x0 + t * x_dir));
    return Vec4(-christoffel_apply(gamma, x_dir, v));
  };
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const Vec4 k1 = rhs(t, u);
    const Vec4 k2 = rhs(t + dt / 2, u + dt / 2 * k1);
    const Vec4 k3 = rhs(t + dt / 2, u + dt / 2 * k2);
    const Vec4 k4 = rhs(t + dt, u + dt * k3);
    u += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

VecField seeded_field(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::Matrix<double, 7, 1> a;
  Eigen::Matrix<double, 7, 7> b;
  Eigen::Matrix<double, 7, 7> c;
  for (int i = 0; i < 7; ++i) {
    a[i] = d(rng);
    for (int j = 0; j < 7; ++j) {
      b(i, j) = 0.3 * d(rng);
      c(i, j) = d(rng);
    }
  }
  return [a, b, c](const Vec7c& q) {
    Vec7c out;
    for (int i = 0; i < 7; ++i) {
      double v = a[i];
      for (int j = 0; j < 7; ++j) v += b(i, j) * std::sin(q[j] + c(i, j));
      out[i] = v;
    }
    return out;
  };
}

}  // namespace

TEST_CASE("horizontal lift on the flat model", "[sphere_bundle]") {
  const MetricModel m = catalog("flat");
  const SpherePoint p = make_sphere_point(m, Vec4(0.1, 0.2, 0.3, 0.4), Vec4(1, 1, 0, 0));
  const Vec8 lift = horizontal_lift(m, p, Vec4(0, 1, 0, 0));
  CHECK(Vec4(lift.head<4>()) == Vec4(0, 1, 0, 0));
  CHECK(Vec4(lift.tail<4>()).norm() == 0.0);
}

TEST_CASE("lift direction matches parallel transport", "[sphere_bundle]") {
  // central difference of RK4 transport recovers the lift's fiber velocity
  for (const char* name : {"sphere4", "cp2", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 3, 42);
    for (const auto& p : pts) {
      const Vec4 dir = Vec4(0.3, -0.2, 0.5, 0.1);
      const Vec8 lift = horizontal_lift(m, p, dir);
      const double h = 1e-3;
      const Vec4 up = transport(m, p.x, dir, p.u, h, 8);
      const Vec4 um = transport(m, p.x, dir, p.u, -h, 8);
      const Vec4 velocity = (up - um) / (2 * h);
      CHECK((velocity - Vec4(lift.tail<4>())).norm() < 1e-6);
      // transport stays on the sphere
      CHECK(std::abs(up.dot(m.g(p.x + h * dir) * up) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("vertical directions differentiate the canonical section to themselves",
          "[sphere_bundle]") {
  const MetricModel m = catalog("sphere4");
  const auto pts = sample_sphere_points(m, 3, 43);
  for (const auto& p : pts) {
    const AdaptedFrame f = adapted_frame(m, p);
    const Vec4 y = f.base.col(2);  // g-unit, orthogonal to u
    // curve (x, normalized(u + t y)); covariant derivative of u(t) at 0 is y
    const Mat4 g = m.g(p.x);
    auto u_of = [&](double t) {
      const Vec4 v = p.u + t * y;
      return Vec4(v / std::sqrt(v.dot(g * v)));
    };
    const double h = 1e-4;
    const Vec4 du =
        (4.0 * (u_of(h / 2) - u_of(-h / 2)) / h - (u_of(h) - u_of(-h)) / (2 * h)) / 3.0;
    CHECK((du - y).norm() < 1e-6);
  }
}

TEST_CASE("adapted frame on the flat model with an axis direction", "[sphere_bundle]") {
  const MetricModel m = catalog("flat");
  const SpherePoint p = make_sphere_point(m, Vec4::Zero(), Vec4(1, 0, 0, 0));
  const AdaptedFrame f = adapted_frame(m, p);
  // the aligned axis is skipped; the remaining axes complete the frame
  CHECK((f.base - Mat4::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f.e[0] - (Vec8() << 1, 0, 0, 0, 0, 0, 0, 0).finished()).norm() == 0.0);
  CHECK((f.e[1] - (Vec8() << 0, 1, 0, 0, 0, 0, 0, 0).finished()).norm() == 0.0);
  CHECK((f.e[4] - (Vec8() << 0, 0, 0, 0, 0, 1, 0, 0).finished()).norm() == 0.0);
  CHECK((f.unit_normal - (Vec8() << 0, 0, 0, 0, 1, 0, 0, 0).finished()).norm() == 0.0);
}

TEST_CASE("adapted frame gram matrix and orientation over seeded points", "[sphere_bundle]") {
  for (const char* name : {"flat", "sphere4", "hyperbolic4", "cp2", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 20, 7);
    for (const auto& p : pts) {
      const AdaptedFrame f = adapted_frame(m, p);
      const Mat4 g = m.g(p.x);
      const auto gamma = christoffel(m, p.x);
      Mat7 gram;
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
          gram(i, j) = sphere_inner(g, gamma, p, f.e[size_t(i)], f.e[size_t(j)]);
      CHECK((gram - Mat7::Identity()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(f.base.determinant() > 0.0);
      // vertical parts orthogonal to u
      for (int a = 4; a < 7; ++a)
        CHECK(std::abs(Vec4(f.e[size_t(a)].tail<4>()).dot(g * p.u)) < 1e-12);
    }
  }
}

TEST_CASE("canonical forms are frame independent in coordinates", "[sphere_bundle]") {
  for (const char* name : {"sphere4", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 3, 11);
    for (const auto& p : pts) {
      const SphereChart chart(m, p);
      const Vec7c q = chart.center();
      const AdaptedFrame f1 = adapted_frame(m, p);
      const AdaptedFrame f2 = adapted_frame(m, p, {3, 1, 0, 2});
      const CanonicalForms forms = canonical_forms(f1);
      for (const AltForm* w : {&forms.mu, &forms.beta, &forms.alpha, &forms.alpha1,
                               &forms.alpha2, &forms.phi, &forms.star_phi}) {
        const AltForm c1 = to_coordinates(chart.frame_matrix(q, f1), *w);
        const AltForm c2 = to_coordinates(chart.frame_matrix(q, f2), *w);
        CHECK(max_abs_diff(c1, c2) < 1e-9);
      }
    }
  }
}

TEST_CASE("chart center round trip and validity", "[sphere_bundle]") {
  const MetricModel m = catalog("sphere4");
  const auto pts = sample_sphere_points(m, 5, 13);
  for (const auto& p : pts) {
    const SphereChart chart(m, p);
    const Vec7c q = chart.center();
    CHECK((chart.base_point(q) - p.x).norm() == 0.0);
    CHECK((chart.unit_vector(q) - p.u).norm() < 1e-12);
    // unit along the whole fiber coordinate patch
    for (double s : {-2.0, -0.5, 0.7, 3.0}) {
      Vec7c qq = q;
      qq[4] += s;
      const Vec4 u = chart.unit_vector(qq);
      const Vec4 x = chart.base_point(qq);
      CHECK(std::abs(u.dot(m.g(x) * u) - 1.0) < 1e-12);
    }
    // coordinate fields stay independent
    const AdaptedFrame f = adapted_frame(m, p);
    CHECK(std::abs(chart.frame_matrix(q, f).determinant()) > 1e-6);
    Vec7c bad = q;
    bad[4] = 11.0;
    CHECK_THROWS_AS(chart.require_valid(bad), PoleError);
  }
}

TEST_CASE("chart metric equals the frame gram product", "[sphere_bundle]") {
  // the coordinate metric matrix must factor through any adapted frame:
  // G = C^T C since the frame is orthonormal
  for (const char* name : {"sphere4", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 2, 211);
    for (const auto& p : pts) {
      const SphereChart chart(m, p);
      const Vec7c q = chart.center();
      const Mat7 c = chart.frame_matrix(q, adapted_frame(m, p));
      CHECK((chart.metric_matrix(q) - c.transpose() * c).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("beta is closed", "[sphere_bundle]") {
  // beta = -d mu, so its numeric exterior derivative vanishes on any base
  const MetricModel m = catalog("sphere4");
  const auto pts = sample_sphere_points(m, 2, 223);
  for (const auto& p : pts) {
    const SphereChart chart(m, p);
    const AltForm dbeta =
        d_numeric_frame(chart, form_field(chart, FieldId::Beta), chart.center(), 1e-4);
    CHECK(dbeta.max_abs() < 1e-5);
  }
}

TEST_CASE("form field reconstructs at the center", "[sphere_bundle]") {
  const MetricModel m = catalog("cp2");
  const auto pts = sample_sphere_points(m, 2, 17);
  for (const auto& p : pts) {
    const SphereChart chart(m, p);
    const Vec7c q = chart.center();
    const AdaptedFrame f = adapted_frame(m, p);
    const Mat7 c = chart.frame_matrix(q, f);
    const FormField field = form_field(chart, FieldId::Phi);
    CHECK(max_abs_diff(to_frame(c, field(q)), g2_phi()) < 1e-12);
  }
}

TEST_CASE("form field components vary smoothly", "[sphere_bundle]") {
  const MetricModel m = catalog("sphere4");
  const auto pts = sample_sphere_points(m, 1, 19);
  const SphereChart chart(m, pts[0]);
  const FormField field = form_field(chart, FieldId::Phi);
  const Vec7c q = chart.center();
  const double h = 1e-3;
  for (int j = 0; j < 7; ++j) {
    Vec7c qp = q, qm = q;
    qp[j] += h;
    qm[j] -= h;
    const AltForm second = field(qp) - 2.0 * field(q) + field(qm);
    CHECK(second.max_abs() / (h * h) < 100.0);  // bounded second differences
  }
}

TEST_CASE("numeric exterior derivative of a constant field vanishes", "[sphere_bundle]") {
  // on the flat model the base-volume field has constant coordinate components
  const MetricModel m = catalog("flat");
  const auto pts = sample_sphere_points(m, 1, 23);
  const SphereChart chart(m, pts[0]);
  const FormField field = form_field(chart, FieldId::BaseVol);
  CHECK(d_numeric(field, chart.center(), 1e-4).max_abs() < 1e-9);
}

TEST_CASE("d mu = -beta against the finite-difference oracle", "[sphere_bundle]") {
  for (const char* name : {"flat", "sphere4"}) {
    const MetricModel m = catalog(name);
    const auto pts = sample_sphere_points(m, 3, 29);
    for (const auto& p : pts) {
      const SphereChart chart(m, p);
      const Vec7c q = chart.center();
      const AltForm dmu = d_numeric_frame(chart, form_field(chart, FieldId::Mu), q, 1e-4);
      CHECK(max_abs_diff(dmu, -beta_form()) < 1e-5);
    }
  }
}

TEST_CASE("delta mu vanishes", "[sphere_bundle]") {
  const MetricModel m = catalog("sphere4");
  const auto pts = sample_sphere_points(m, 2, 31);
  for (const auto& p : pts) {
    const SphereChart chart(m, p);
    const Vec7c q = chart.center();
    // delta mu = -*d*mu with the star-mu field differentiated numerically
    const AltForm dstar =
        d_numeric_frame(chart, form_field(chart, FieldId::StarMu), q, 1e-4);
    CHECK(hodge_star(dstar).max_abs() < 1e-5);
  }
}

TEST_CASE("order of the numeric derivative improves when halving h", "[sphere_bundle]") {
  // plain central differences (no Richardson) are second order; check the
  // error against the closed form drops by about 4 when h halves
  const MetricModel m = catalog("sphere4");
  const auto pts = sample_sphere_points(m, 1, 37);
  const SpherePoint p = pts[0];
  const SphereChart chart(m, p);
  const Vec7c q = chart.center();
  const FormField field = form_field(chart, FieldId::Phi);
  const AdaptedFrame f = adapted_frame(m, p);
  const Mat7 cmat = chart.frame_matrix(q, f);
  const AltForm expect = dphi_closed(frame_curvature(m, f)) + dphi_oracle_gap();

  auto plain_central_d = [&](double h) {
    std::array<AltForm, 7> deriv{AltForm(3), AltForm(3), AltForm(3), AltForm(3),
                                 AltForm(3), AltForm(3), AltForm(3)};
    for (int j = 0; j < 7; ++j) {
      Vec7c qp = q, qm = q;
      qp[j] += h;
      qm[j] -= h;
      deriv[size_t(j)] = (field(qp) - field(qm)) * (1.0 / (2.0 * h));
    }
    AltForm out(4);
    const auto& masks = AltForm::masks(3);
    for (int j = 0; j < 7; ++j)
      for (int r = 0; r < int(masks.size()); ++r) {
        const std::uint8_t mj = masks[size_t(r)];
        if (mj & (1u << j)) continue;
        const std::uint8_t mk = std::uint8_t(mj | (1u << j));
        const int pos = std::popcount(unsigned(mk) & ((1u << j) - 1u));
        out[detail::tables().rank[4][mk]] += ((pos & 1) ? -1.0 : 1.0) * deriv[size_t(j)][r];
      }
    return to_frame(cmat, out);
  };
  const double e1 = max_abs_diff(plain_central_d(8e-4), expect);
  const double e2 = max_abs_diff(plain_central_d(4e-4), expect);
  CHECK(e1 / e2 > 2.5);
  CHECK(e1 / e2 < 6.0);
  // and the Richardson version beats both
  CHECK(max_abs_diff(d_numeric_frame(chart, field, q, 4e-4), expect) < e2);
}

TEST_CASE("step validation for the numeric derivative", "[sphere_bundle]") {
  const MetricModel m = catalog("flat");
  const auto pts = sample_sphere_points(m, 1, 39);
  const SphereChart chart(m, pts[0]);
  const FormField field = form_field(chart, FieldId::Mu);
  CHECK_THROWS_AS(d_numeric(field, chart.center(), 1e-7), std::invalid_argument);
  CHECK_THROWS_AS(d_numeric(field, chart.center(), 1e-2), std::invalid_argument);
}

TEST_CASE("degenerate sphere points and pole centers are rejected", "[sphere_bundle]") {
  const MetricModel m = catalog("flat");
  CHECK_THROWS_AS(make_sphere_point(m, Vec4::Zero(), Vec4::Zero()), std::invalid_argument);
  // a direction antipodal to the first frame column sits at the chart pole
  const SpherePoint at_pole = make_sphere_point(m, Vec4::Zero(), Vec4(-1, 0, 0, 0));
  CHECK_THROWS_AS(SphereChart(m, at_pole), PoleError);
}

TEST_CASE("koszul connection is torsion free and metric", "[sphere_bundle]") {
  for (const char* name : {"sphere4", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 2, 41);
    const VecField X = seeded_field(1), Y = seeded_field(2), Z = seeded_field(3);
    for (const auto& p : pts) {
      const SphereChart chart(m, p);
      const Vec7c q = chart.center();
      const KoszulResult dxy = levi_civita_koszul(chart, q, X, Y);
      const KoszulResult dyx = levi_civita_koszul(chart, q, Y, X);
      CHECK((dxy.frame - dyx.frame - dxy.bracket_frame).norm() < 1e-4);

      // metric compatibility: X<Y,Z> = <D_X Y, Z> + <Y, D_X Z>
      const KoszulResult dxz = levi_civita_koszul(chart, q, X, Z);
      const Mat7 g0 = chart.metric_matrix(q);
      const double lhs = detail::dir_deriv(
          [&](const Vec7c& qq) {
            return double(Y(qq).transpose() * chart.metric_matrix(qq) * Z(qq));
          },
          q, X(q), 1e-3);
      const double rhs = dxy.chart_coeffs.dot(g0 * Z(q)) + Y(q).dot(g0 * dxz.chart_coeffs);
      CHECK(std::abs(lhs - rhs) < 1e-4);
    }
  }
}

TEST_CASE("koszul connection splits into nabla* plus curvature corrections", "[sphere_bundle]") {
  for (const char* name : {"sphere4", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 2, 47);
    const VecField X = seeded_field(4), Y = seeded_field(5);
    for (const auto& p : pts) {
      const SphereChart chart(m, p);
      const Vec7c q = chart.center();
      const AdaptedFrame f = adapted_frame(m, p);
      const CurvatureData cd = curvature(m, p.x);

      const KoszulResult dxy = levi_civita_koszul(chart, q, X, Y);
      const SplitTangent ns = nabla_star_numeric(chart, q, Y, X(q));
      const Vec7 ns_frame = split_frame_components(m, f, ns);

      const auto flds = chart.coordinate_fields(q);
      Vec8 x8 = Vec8::Zero(), y8 = Vec8::Zero();
      for (int i = 0; i < 7; ++i) {
        x8 += X(q)[i] * flds[size_t(i)];
        y8 += Y(q)[i] * flds[size_t(i)];
      }
      const ConnectionCorrections corr = connection_corrections(m, cd, f, x8, y8);
      const Vec7 corr_frame = split_frame_components(m, f, {corr.horizontal, corr.vertical});

      CHECK((dxy.frame - ns_frame - corr_frame).cwiseAbs().maxCoeff() < 1e-4);
    }
  }
}

TEST_CASE("flat model: connection preserves the splitting", "[sphere_bundle]") {
  const MetricModel m = catalog("flat");
  const auto pts = sample_sphere_points(m, 2, 53);
  const VecField X = seeded_field(6), Y = seeded_field(7);
  for (const auto& p : pts) {
    const SphereChart chart(m, p);
    const Vec7c q = chart.center();
    const KoszulResult dxy = levi_civita_koszul(chart, q, X, Y);
    const SplitTangent ns = nabla_star_numeric(chart, q, Y, X(q));
    const AdaptedFrame f = adapted_frame(m, p);
    const Vec7 ns_frame = split_frame_components(m, f, ns);
    CHECK((dxy.frame - ns_frame).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("derivative of mu along the connection", "[sphere_bundle]") {
  // (D_X mu)(Y) = <X, theta Y> - mu(A_X Y)
  for (const char* name : {"sphere4", "s2xs2"}) {
    const MetricModel m =
        name == std::string("s2xs2") ? catalog(name, 1.0, 2.0) : catalog(name);
    const auto pts = sample_sphere_points(m, 2, 59);
    const VecField X = seeded_field(8), Y = seeded_field(9);
    for (const auto& p : pts) {
      const SphereChart chart(m, p);
      const Vec7c q = chart.center();
      const AdaptedFrame f = adapted_frame(m, p);
      const CurvatureData cd = curvature(m, p.x);
      const Mat4 g = m.g(p.x);

      const KoszulResult dxy = levi_civita_koszul(chart, q, X, Y);
      auto mu_of_y = [&](const Vec7c& qq) {
        const AdaptedFrame fq = adapted_frame(m, chart.point(qq));
        return double((chart.frame_matrix(qq, fq) * Y(qq))[0]);
      };
      const double lhs = detail::dir_deriv(mu_of_y, q, X(q), 1e-3) - dxy.frame[0];

      const Mat7 c = chart.frame_matrix(q, f);
      const Vec7 xf = c * X(q), yf = c * Y(q);
      double theta_pair = 0.0;
      for (int i = 1; i <= 3; ++i) theta_pair += xf[i + 3] * yf[i];

      const auto flds = chart.coordinate_fields(q);
      Vec8 x8 = Vec8::Zero(), y8 = Vec8::Zero();
      for (int i = 0; i < 7; ++i) {
        x8 += X(q)[i] * flds[size_t(i)];
        y8 += Y(q)[i] * flds[size_t(i)];
      }
      const ConnectionCorrections corr = connection_corrections(m, cd, f, x8, y8);
      const double rhs = theta_pair - corr.horizontal.dot(g * p.u);
      CHECK(std::abs(lhs - rhs) < 1e-4);
    }
  }
}
