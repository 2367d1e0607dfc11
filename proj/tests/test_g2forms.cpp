#include <random>

#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Dense>

#include "g2lab/altform.hpp"
#include "g2lab/g2forms.hpp"

using namespace g2lab;

namespace {

AltForm random_form(int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  AltForm a(degree);
  for (int i = 0; i < a.size(); ++i) a[i] = dist(rng);
  return a;
}

// Numeric rank of a family of forms, treated as vectors of components.
int family_rank(const std::vector<AltForm>& fam) {
  Eigen::MatrixXd m(fam.front().size(), long(fam.size()));
  for (size_t j = 0; j < fam.size(); ++j)
    for (int i = 0; i < fam[j].size(); ++i) m(i, long(j)) = fam[j][i];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-9);
  return int(lu.rank());
}

}  // namespace

TEST_CASE("phi components and norm", "[g2forms]") {
  const AltForm phi = g2_phi();
  CHECK(phi.coeff({4, 5, 6}) == 1.0);
  CHECK(phi.coeff({0, 1, 4}) == 1.0);
  CHECK(phi.coeff({0, 2, 5}) == 1.0);
  CHECK(phi.coeff({0, 3, 6}) == 1.0);
  CHECK(phi.coeff({1, 2, 6}) == -1.0);
  CHECK(phi.coeff({2, 3, 4}) == -1.0);
  CHECK(phi.coeff({3, 1, 5}) == -1.0);
  CHECK(phi.norm_sq() == 7.0);
}

TEST_CASE("star phi agrees with the monomial expansion", "[g2forms]") {
  const AltForm beta = beta_form();
  const AltForm expansion = base_volume() - 0.5 * wedge(beta, beta) -
                            wedge(mu_form(), alpha1_form());
  CHECK(max_abs_diff(hodge_star(g2_phi()), expansion) == 0.0);
  CHECK(max_abs_diff(g2_star_phi(), expansion) == 0.0);
}

TEST_CASE("structure equations", "[g2forms]") {
  const AltForm alpha = fiber_volume();
  const AltForm mu = mu_form();
  const AltForm beta = beta_form();
  const AltForm a1 = alpha1_form();
  const AltForm a2 = alpha2_form();
  const AltForm beta2 = wedge(beta, beta);
  const AltForm beta3 = wedge(beta2, beta);
  const AltForm vol = total_volume();
  const AltForm phi = g2_phi();
  const AltForm star_phi = g2_star_phi();
  const double tol = 1e-12;

  CHECK(max_abs_diff(hodge_star(alpha), base_volume()) < tol);
  CHECK(max_abs_diff(hodge_star(a1), -wedge(mu, a2)) < tol);
  CHECK(max_abs_diff(hodge_star(a2), wedge(mu, a1)) < tol);
  CHECK(max_abs_diff(hodge_star(beta), -0.5 * wedge(mu, beta2)) < tol);
  CHECK(max_abs_diff(hodge_star(beta2), -2.0 * wedge(mu, beta)) < tol);
  CHECK(max_abs_diff(wedge(beta3, mu), -6.0 * vol) < tol);
  CHECK(max_abs_diff(wedge(a1, a2), 3.0 * hodge_star(mu)) < tol);
  CHECK(max_abs_diff(wedge(a1, a2), -0.5 * beta3) < tol);
  for (const AltForm* ai : {&alpha, &a1, &a2}) {
    CHECK(wedge(beta, *ai).max_abs() < tol);
    CHECK(wedge(beta, hodge_star(*ai)).max_abs() < tol);
    CHECK(wedge(alpha, *ai).max_abs() < tol);
  }
  CHECK(wedge(alpha, phi).max_abs() < tol);
  CHECK(wedge(a2, phi).max_abs() < tol);
  CHECK(wedge(hodge_star(a1), phi).max_abs() < tol);
  CHECK(max_abs_diff(wedge(hodge_star(alpha), phi), vol) < tol);
  CHECK(max_abs_diff(wedge(alpha, star_phi), vol) < tol);
}

TEST_CASE("beta lies in the 7-dimensional part of Lambda^2", "[g2forms]") {
  const AltForm beta = beta_form();
  // oracle: beta ^ phi = -2 * beta, so T(beta) = -2 beta
  CHECK(max_abs_diff(wedge(beta, g2_phi()), -2.0 * hodge_star(beta)) < 1e-14);
  const G2Split2 s = g2_project2(beta);
  CHECK(max_abs_diff(s.part7, beta) < 1e-14);
  CHECK(s.part14.max_abs() < 1e-14);
}

TEST_CASE("projecting the zero 2-form", "[g2forms]") {
  const G2Split2 s = g2_project2(AltForm(2));
  CHECK(s.part7.max_abs() == 0.0);
  CHECK(s.part14.max_abs() == 0.0);
}

TEST_CASE("rank sweep over the 21 basis 2-forms", "[g2forms]") {
  std::vector<AltForm> part7s, part14s;
  for (int r = 0; r < 21; ++r) {
    AltForm g(2);
    g[r] = 1.0;
    const G2Split2 s = g2_project2(g);
    part7s.push_back(s.part7);
    part14s.push_back(s.part14);
  }
  CHECK(family_rank(part7s) == 7);
  CHECK(family_rank(part14s) == 14);
}

TEST_CASE("rank sweep over the 35 basis 3-forms", "[g2forms]") {
  std::vector<AltForm> p1, p7, p27;
  for (int r = 0; r < 35; ++r) {
    AltForm g(3);
    g[r] = 1.0;
    const G2Split3 s = g2_project3(g);
    p1.push_back(s.part1);
    p7.push_back(s.part7);
    p27.push_back(s.part27);
  }
  CHECK(family_rank(p1) == 1);
  CHECK(family_rank(p7) == 7);
  CHECK(family_rank(p27) == 27);
}

TEST_CASE("phi projects onto its own line", "[g2forms]") {
  const G2Split3 s = g2_project3(g2_phi());
  CHECK(max_abs_diff(s.part1, g2_phi()) < 1e-13);
  CHECK(s.part7.max_abs() < 1e-13);
  CHECK(s.part27.max_abs() < 1e-13);
}

TEST_CASE("alpha_2 splits against a Gram-Schmidt oracle", "[g2forms]") {
  const AltForm phi = g2_phi();
  const AltForm a2 = alpha2_form();
  CHECK(a2.inner(phi) == -3.0);

  const G2Split3 s = g2_project3(a2);
  CHECK(max_abs_diff(s.part1, (-3.0 / 7.0) * phi) < 1e-14);

  // brute-force projector: orthonormalise {phi} and {*(e^i ^ phi)} in
  // component space and project directly
  std::vector<AltForm> span1 = {phi};
  std::vector<AltForm> span7;
  for (int i = 0; i < 7; ++i) span7.push_back(hodge_star(wedge(AltForm::monomial({i}), phi)));
  auto project_onto = [](const AltForm& v, std::vector<AltForm> basis) {
    // modified Gram-Schmidt, then sum of projections
    std::vector<AltForm> on;
    for (AltForm b : basis) {
      for (const AltForm& o : on) b -= b.inner(o) * o;
      const double n = b.norm();
      if (n > 1e-12) on.push_back(b * (1.0 / n));
    }
    AltForm out(v.degree());
    for (const AltForm& o : on) out += v.inner(o) * o;
    return out;
  };
  CHECK(max_abs_diff(s.part1, project_onto(a2, span1)) < 1e-13);
  CHECK(max_abs_diff(s.part7, project_onto(a2, span7)) < 1e-13);
  CHECK(max_abs_diff(s.part27, a2 - project_onto(a2, span1) - project_onto(a2, span7)) < 1e-13);
}

TEST_CASE("projector properties on random forms", "[g2forms]") {
  std::mt19937_64 rng(43);
  const AltForm phi = g2_phi();
  const AltForm star_phi = g2_star_phi();
  for (int rep = 0; rep < 10; ++rep) {
    const AltForm g = random_form(2, rng);
    const G2Split2 s = g2_project2(g);
    CHECK(max_abs_diff(s.part7 + s.part14, g) < 1e-12);
    CHECK(std::abs(s.part7.inner(s.part14)) < 1e-12);
    CHECK(max_abs_diff(wedge(s.part7, phi), -2.0 * hodge_star(s.part7)) < 1e-10);
    CHECK(max_abs_diff(wedge(s.part14, phi), hodge_star(s.part14)) < 1e-10);
    // idempotence
    CHECK(max_abs_diff(g2_project2(s.part7).part7, s.part7) < 1e-12);
    CHECK(max_abs_diff(g2_project2(s.part14).part14, s.part14) < 1e-12);
  }
  for (int rep = 0; rep < 10; ++rep) {
    const AltForm g = random_form(3, rng);
    const G2Split3 s = g2_project3(g);
    CHECK(max_abs_diff(s.part1 + s.part7 + s.part27, g) < 1e-12);
    CHECK(std::abs(s.part1.inner(s.part7)) < 1e-12);
    CHECK(std::abs(s.part1.inner(s.part27)) < 1e-12);
    CHECK(std::abs(s.part7.inner(s.part27)) < 1e-12);
    CHECK(wedge(s.part27, phi).max_abs() < 1e-10);
    CHECK(wedge(s.part27, star_phi).max_abs() < 1e-10);
    CHECK(max_abs_diff(g2_project3(s.part7).part7, s.part7) < 1e-12);
  }
}
