#pragma once

#include <utility>

#include "g2lab/altform.hpp"

namespace g2lab {

// Canonical forms of the adapted coframe on a 7-space split as
//   e_0      horizontal unit direction,
//   e_1..e_3 horizontal complement,
//   e_4..e_6 vertical images e_{i+3} = theta(e_i).
// All of them are constant in any adapted frame.

/// Volume of the vertical 3-space, alpha = e^{456}.
inline AltForm fiber_volume() { return AltForm::monomial({4, 5, 6}); }

/// mu = e^0.
inline AltForm mu_form() { return AltForm::monomial({0}); }

/// beta = e^{14} + e^{25} + e^{36}.
inline AltForm beta_form() {
  return AltForm::monomial({1, 4}) + AltForm::monomial({2, 5}) + AltForm::monomial({3, 6});
}

/// alpha_1 = e^{156} + e^{264} + e^{345}.
inline AltForm alpha1_form() {
  return AltForm::monomial({1, 5, 6}) + AltForm::monomial({2, 6, 4}) +
         AltForm::monomial({3, 4, 5});
}

/// alpha_2 = e^{126} + e^{234} + e^{315}.
inline AltForm alpha2_form() {
  return AltForm::monomial({1, 2, 6}) + AltForm::monomial({2, 3, 4}) +
         AltForm::monomial({3, 1, 5});
}

/// Pullback of the base volume, e^{0123}.
inline AltForm base_volume() { return AltForm::monomial({0, 1, 2, 3}); }

/// Volume of the total space, e^{0123456}.
inline AltForm total_volume() { return AltForm::monomial({0, 1, 2, 3, 4, 5, 6}); }

/// The associative 3-form phi = alpha + mu ^ beta - alpha_2.
inline AltForm g2_phi() {
  return fiber_volume() + wedge(mu_form(), beta_form()) - alpha2_form();
}

/// The coassociative 4-form *phi = e^{0123} - 1/2 beta^2 - mu ^ alpha_1.
inline AltForm g2_star_phi() {
  const AltForm beta = beta_form();
  return base_volume() - 0.5 * wedge(beta, beta) - wedge(mu_form(), alpha1_form());
}

/// (phi, *phi) as a pair.
inline std::pair<AltForm, AltForm> g2_model_forms() { return {g2_phi(), g2_star_phi()}; }

/// theta on the frame: e_i -> e_{i+3} for i = 1..3, zero elsewhere.
inline FrameEndo theta_endo() {
  FrameEndo t = FrameEndo::Zero();
  for (int i = 1; i <= 3; ++i) t(i + 3, i) = 1.0;
  return t;
}

struct G2Split2 {
  AltForm part7;
  AltForm part14;
};

struct G2Split3 {
  AltForm part1;
  AltForm part7;
  AltForm part27;
};

/// Split a 2-form along Lambda^2 = Lambda^2_7 + Lambda^2_14 using the
/// operator T(g) = *(g ^ phi), whose eigenvalues are -2 and +1.
inline G2Split2 g2_project2(const AltForm& gamma) {
  if (gamma.degree() != 2) throw std::invalid_argument("g2_project2: need a 2-form");
  const AltForm t = hodge_star(wedge(gamma, g2_phi()));
  return {(gamma - t) * (1.0 / 3.0), (t + 2.0 * gamma) * (1.0 / 3.0)};
}

/// Split a 3-form along Lambda^3 = R phi + Lambda^3_7 + Lambda^3_27, the
/// 7-part living in span{*(e^i ^ phi)}.
inline G2Split3 g2_project3(const AltForm& gamma) {
  if (gamma.degree() != 3) throw std::invalid_argument("g2_project3: need a 3-form");
  const AltForm phi = g2_phi();
  AltForm part1 = (gamma.inner(phi) / 7.0) * phi;
  const AltForm rest = gamma - part1;

  std::array<AltForm, 7> basis{AltForm(3), AltForm(3), AltForm(3), AltForm(3),
                               AltForm(3), AltForm(3), AltForm(3)};
  for (int i = 0; i < kFormDim; ++i)
    basis[size_t(i)] = hodge_star(wedge(AltForm::monomial({i}), phi));
  Mat7 gram;
  Vec7 rhs;
  for (int i = 0; i < kFormDim; ++i) {
    rhs[i] = rest.inner(basis[size_t(i)]);
    for (int j = 0; j < kFormDim; ++j) gram(i, j) = basis[size_t(i)].inner(basis[size_t(j)]);
  }
  const Vec7 c = gram.ldlt().solve(rhs);
  AltForm part7(3);
  for (int i = 0; i < kFormDim; ++i) part7 += c[i] * basis[size_t(i)];
  return {part1, part7, gamma - part1 - part7};
}

}  // namespace g2lab
