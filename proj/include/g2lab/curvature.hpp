#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "g2lab/metric.hpp"
#include "g2lab/types.hpp"

namespace g2lab {

// Curvature conventions. The curvature operator is
//   R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y],
// with the sign fixed so that the round 4-sphere satisfies
//   R(X,Y)Z = <Y,Z> X - <X,Z> Y   (sectional curvature +1).
// Lowered components: R_{ijkl} = <R(d_i, d_j) d_k, d_l>.
// The Ricci tensor is r(X,Y) = tr(Z -> R(Z,X)Y), so r(X,X) = 3 C |X|^2 on a
// space of constant sectional curvature C.

struct CurvatureData {
  Mat4 g;
  Mat4 g_inv;
  std::array<Mat4, 4> christoffel;  // christoffel[k](i,j) = Gamma^k_{ij}
  double riemann[4][4][4][4];       // lowered R_{ijkl}
  Mat4 ricci;                       // r_{ij}
  double scalar = 0.0;
  Mat4 ricci_endo;                  // g^{-1} r
  double einstein_residual = 0.0;   // |Ric - (scal/4) Id|_inf in an orthonormal frame
};

/// Christoffel symbols only (no second derivatives of g needed).
inline std::array<Mat4, 4> christoffel(const MetricModel& m, const Vec4& x) {
  const Mat4 g = m.g(x);
  const Mat4 gi = g.inverse();
  const MetricD1 dg = metric_d1(m, x);
  std::array<Mat4, 4> out;
  for (int k = 0; k < 4; ++k) {
    Mat4 gk = Mat4::Zero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l)
          s += gi(k, l) * (dg[size_t(i)](j, l) + dg[size_t(j)](i, l) - dg[size_t(l)](i, j));
        gk(i, j) = 0.5 * s;
      }
    out[size_t(k)] = gk;
  }
  return out;
}

/// Gamma(X, u): the vector with components Gamma^k_{ij} X^i u^j.
inline Vec4 christoffel_apply(const std::array<Mat4, 4>& gamma, const Vec4& x, const Vec4& u) {
  Vec4 out;
  for (int k = 0; k < 4; ++k) out[k] = x.dot(gamma[size_t(k)] * u);
  return out;
}

/// Full curvature data at a chart point. Throws NearBoundaryError close to
/// the chart boundary and domain_error for degenerate metrics.
inline CurvatureData curvature(const MetricModel& m, const Vec4& x) {
  if (!m.domain.contains(x, m.boundary_margin()))
    throw NearBoundaryError(m.id + ": point too close to the chart boundary");

  CurvatureData cd;
  cd.g = m.g(x);
  {
    Eigen::SelfAdjointEigenSolver<Mat4> es(cd.g);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo <= 0.0) throw std::domain_error(m.id + ": metric not positive-definite");
    if (hi / lo > 1e8) throw std::domain_error(m.id + ": metric ill-conditioned");
  }
  cd.g_inv = cd.g.inverse();
  const MetricD1 dg = metric_d1(m, x);
  const MetricD2 d2g = metric_d2(m, x);

  cd.christoffel = christoffel(m, x);

  // dGamma[m][k](i,j) = d_m Gamma^k_{ij}
  std::array<Mat4, 4> dginv;
  for (int mm = 0; mm < 4; ++mm) dginv[size_t(mm)] = -cd.g_inv * dg[size_t(mm)] * cd.g_inv;
  std::array<std::array<Mat4, 4>, 4> dgamma;
  for (int mm = 0; mm < 4; ++mm)
    for (int k = 0; k < 4; ++k) {
      Mat4 out = Mat4::Zero();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
          double s = 0.0;
          for (int l = 0; l < 4; ++l) {
            s += dginv[size_t(mm)](k, l) *
                 (dg[size_t(i)](j, l) + dg[size_t(j)](i, l) - dg[size_t(l)](i, j));
            s += cd.g_inv(k, l) * (d2g[size_t(mm)][size_t(i)](j, l) +
                                   d2g[size_t(mm)][size_t(j)](i, l) -
                                   d2g[size_t(mm)][size_t(l)](i, j));
          }
          out(i, j) = 0.5 * s;
        }
      dgamma[size_t(mm)][size_t(k)] = out;
    }

  // R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
  //             + Gamma^l_{im} Gamma^m_{jk} - Gamma^l_{jm} Gamma^m_{ik}
  double rup[4][4][4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double v = dgamma[size_t(i)][size_t(l)](j, k) - dgamma[size_t(j)][size_t(l)](i, k);
          for (int mm = 0; mm < 4; ++mm)
            v += cd.christoffel[size_t(l)](i, mm) * cd.christoffel[size_t(mm)](j, k) -
                 cd.christoffel[size_t(l)](j, mm) * cd.christoffel[size_t(mm)](i, k);
          rup[i][j][k][l] = v;
        }

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double v = 0.0;
          for (int mm = 0; mm < 4; ++mm) v += cd.g(mm, l) * rup[i][j][k][mm];
          cd.riemann[i][j][k][l] = v;
        }

  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      double v = 0.0;
      for (int i = 0; i < 4; ++i) v += rup[i][j][k][i];
      cd.ricci(j, k) = v;
    }
  cd.scalar = (cd.g_inv * cd.ricci).trace();
  cd.ricci_endo = cd.g_inv * cd.ricci;

  const Mat4 f = orthonormal_frame(m, x);
  cd.einstein_residual =
      (f.transpose() * cd.ricci * f - (cd.scalar / 4.0) * Mat4::Identity()).cwiseAbs().maxCoeff();
  return cd;
}

/// R(X,Y,Z,W) with lowered components.
inline double riemann_eval(const CurvatureData& cd, const Vec4& x, const Vec4& y, const Vec4& z,
                           const Vec4& w) {
  double v = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < 4; ++j) {
      if (y[j] == 0.0) continue;
      for (int k = 0; k < 4; ++k) {
        if (z[k] == 0.0) continue;
        for (int l = 0; l < 4; ++l) v += cd.riemann[i][j][k][l] * x[i] * y[j] * z[k] * w[l];
      }
    }
  }
  return v;
}

/// The vector R(X,Y)Z.
inline Vec4 riemann_apply(const CurvatureData& cd, const Vec4& x, const Vec4& y, const Vec4& z) {
  Vec4 lowered = Vec4::Zero();
  for (int l = 0; l < 4; ++l) lowered[l] = riemann_eval(cd, x, y, z, Vec4::Unit(l));
  return cd.g_inv * lowered;
}

/// Max residual of the first Bianchi identity, cyclic in the first three slots.
inline double first_bianchi_residual(const CurvatureData& cd) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          worst = std::max(worst, std::abs(cd.riemann[i][j][k][l] + cd.riemann[j][k][i][l] +
                                           cd.riemann[k][i][j][l]));
  return worst;
}

/// Sectional curvature of the plane spanned by X and Y.
inline double sectional(const CurvatureData& cd, const Vec4& x, const Vec4& y) {
  const double num = riemann_eval(cd, x, y, y, x);
  const double xx = x.dot(cd.g * x), yy = y.dot(cd.g * y), xy = x.dot(cd.g * y);
  return num / (xx * yy - xy * xy);
}

}  // namespace g2lab
