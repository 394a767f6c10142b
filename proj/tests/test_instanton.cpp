#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ymindex/instanton.hpp"

using namespace ymindex;

namespace {
double norm4(const std::array<AlgebraElement, 4>& A) {
  double s = 0.0;
  for (const auto& a : A) s += inner(a, a);
  return std::sqrt(s);
}

// fraction of the instanton energy inside |x| <= R (scale 1)
double energy_fraction(double R) {
  return oracle::radial([](double r) { return 0.5 * 48.0 / std::pow(1.0 + r * r, 4); }, 0.0, R) /
         (4.0 * oracle::pi * oracle::pi);
}
}  // namespace

TEST_CASE("energy constant matches the radial integral") {
  const double e = oracle::radial([](double r) { return 0.5 * 48.0 / std::pow(1.0 + r * r, 4); }, 0.0, 2000.0, 200000);
  CHECK(e == doctest::Approx(kInstantonEnergy).epsilon(1e-9));
  CHECK(bpst_curvature_norm_sq(0.0, 1.0) == doctest::Approx(48.0));
  CHECK(bpst_curvature_norm_sq(1.0, 2.0) == doctest::Approx(48.0 / 16.0 / std::pow(1.25, 4)));
  // closed form of the enclosed fraction
  for (double R : {0.5, 1.0, 3.0}) {
    const double t = 1.0 + R * R;
    CHECK(energy_fraction(R) == doctest::Approx(1.0 - (1.0 + 3.0 * R * R) / (t * t * t)).epsilon(1e-10));
  }
}

TEST_CASE("BPST potential: centre, decay, scale") {
  const auto A = bpst_sampler(1.3, {0.2, 0.1, 0.0, -0.4});
  CHECK(norm4(A({0.2, 0.1, 0.0, -0.4})) == 0.0);
  // |A| ~ c / |x| at infinity
  const auto B = bpst_sampler(1.0);
  const double c1 = 1e2 * norm4(B({1e2, 0, 0, 0}));
  const double c2 = 1e4 * norm4(B({0, 0, 1e4, 0}));
  CHECK(c1 == doctest::Approx(c2).epsilon(1e-3));
  CHECK_THROWS_AS(bpst_sampler(0.0), DomainError);
  CHECK_THROWS_AS(bpst_sampler(-1.0), DomainError);
}

TEST_CASE("closed-form curvature is anti-self-dual with the right norm") {
  const double lambda = 0.7;
  const Vec4 p{0.3, -0.1, 0.2, 0.0};
  for (const Vec4& x : {Vec4{0, 0, 0, 0}, Vec4{1.0, 0.5, -0.3, 2.0}, Vec4{-4, 3, 1, 0.2}}) {
    const auto F = bpst_curvature_at(x, lambda, p);
    // (F0..F5) -> (F5, -F4, F3, F2, -F1, F0)
    const std::array<int, 6> perm{5, 4, 3, 2, 1, 0};
    const std::array<double, 6> sign{1, -1, 1, 1, -1, 1};
    for (std::size_t k = 0; k < 6; ++k) {
      const AlgebraElement star = sign[k] * F[static_cast<std::size_t>(perm[k])];
      CHECK(norm(star + F[k]) <= 1e-12 * (norm(F[k]) + 1e-300));
    }
    const double r = distance(x, p);
    CHECK(curvature_norm_sq(F) == doctest::Approx(bpst_curvature_norm_sq(r, lambda)).epsilon(1e-12));
    const double l2r2 = lambda * lambda + r * r;
    CHECK(std::sqrt(curvature_norm_sq(F)) * l2r2 * l2r2 == doctest::Approx(std::sqrt(48.0) * lambda * lambda).epsilon(1e-10));
  }
}

TEST_CASE("grid curvature converges to the closed form at second order") {
  std::array<double, 3> h{}, e{}, asd{};
  const std::array<int, 3> Ns{13, 17, 25};
  for (std::size_t i = 0; i < 3; ++i) {
    const Grid g(1.5, Ns[i]);
    const TwoForm F = curvature(bpst(g, 1.0));
    const TwoForm Fc = bpst_curvature_closed_form(g, 1.0);
    h[i] = g.spacing();
    e[i] = std::sqrt(l2_norm_sq(F - Fc) / l2_norm_sq(Fc));
    asd[i] = std::sqrt(l2_norm_sq(F + hodge_star(F)) / l2_norm_sq(F));
  }
  MESSAGE("curvature order " << oracle::order(h, e) << ", self-dual part order " << oracle::order(h, asd));
  CHECK(oracle::order(h, e) >= 1.8);
  CHECK(oracle::order(h, asd) >= 1.8);
  // exact anti-self-duality of the closed form on the grid
  const Grid g(1.5, 9);
  const TwoForm Fc = bpst_curvature_closed_form(g, 1.0);
  CHECK(std::sqrt(l2_norm_sq(Fc + hodge_star(Fc)) / l2_norm_sq(Fc)) < 1e-12);
}

TEST_CASE("discrete energy on B_8 at N = 24") {
  // 2% needs h / lambda <~ 0.14; lambda = 5 gives h / lambda = 0.139.
  const Grid g(8.0, 24);
  const double lambda = 5.0;
  const NodeMask ball = ball_mask(g, {0, 0, 0, 0}, 8.0);
  const double E = ym_energy(bpst(g, lambda), &ball);
  const double expect = kInstantonEnergy * energy_fraction(8.0 / lambda);
  MESSAGE("E = " << E << ", oracle " << expect);
  CHECK(std::abs(E / expect - 1.0) < 0.02);
}

TEST_CASE("energy is independent of scale under proportional grids") {
  // scaling the grid with lambda maps nodes to nodes; the discrete energy is invariant
  const double e1 = ym_energy(bpst(Grid(2.0, 13), 1.0));
  for (double lambda : {0.25, 0.5, 3.0}) {
    const double e = ym_energy(bpst(Grid(2.0 * lambda, 13), lambda));
    CHECK(e == doctest::Approx(e1).epsilon(1e-12));
  }
}

TEST_CASE("pullback by dilation") {
  const Vec4 p{0.25, 0.0, -0.25, 0.5};
  // analytic: phi^* BPST(lambda, p) = BPST(1, 0)
  const auto pulled = pullback_dilation(bpst_sampler(0.5, p), 0.5, p);
  const auto unit = bpst_sampler(1.0);
  for (const Vec4& y : {Vec4{0.1, 0.2, 0.3, 0.4}, Vec4{-2, 1, 0, 3}}) {
    const auto a = pulled(y), b = unit(y);
    for (std::size_t mu = 0; mu < 4; ++mu) CHECK(norm(a[mu] - b[mu]) < 1e-14);
  }

  for (double lambda : {0.25, 0.5, 1.0}) {
    // aligned grids: target nodes land on source nodes
    const Grid target(1.6, 24);
    const Grid source(1.6 * lambda, 24, p);
    const Connection A = bpst(source, lambda, p);
    const Connection B = pullback_dilation(A, lambda, p, target);
    CHECK(ym_energy(B) == doctest::Approx(ym_energy(A)).epsilon(1e-10));
    CHECK(std::abs(ym_energy(B) / ym_energy(bpst(target, 1.0)) - 1.0) < 0.02);
  }

  // misaligned target: interpolation error only
  const Grid source(2.0, 25);
  const Connection A = bpst(source, 1.0);
  const Grid target(1.0, 17, {0.03, 0.0, 0.0, 0.0});
  const OneForm B = pullback_dilation(A.form, 1.0, {0, 0, 0, 0}, target);
  const OneForm exact = bpst(target, 1.0).form;
  CHECK(std::sqrt(l2_norm_sq(B - exact) / l2_norm_sq(exact)) < 1e-2);
  CHECK_THROWS_AS(pullback_dilation(A.form, 3.0, {0, 0, 0, 0}, target), OutOfGrid);
}

TEST_CASE("inversion pulls BPST back to a gauge-equivalent instanton") {
  // gauge-invariant check: |F|^2 of the pullback at y equals |y|^{-8} |F|^2 at y/|y|^2
  const auto inv = pullback_inversion(bpst_sampler(1.0));
  CHECK_THROWS_AS(inv({0, 0, 0, 0}), DomainError);
  for (const Vec4& y : {Vec4{0.7, 0.2, -0.3, 0.5}, Vec4{1.5, 0.0, 1.0, -0.5}}) {
    double r2 = 0.0;
    for (double c : y) r2 += c * c;
    const double h = 1e-4;
    const double lhs = curvature_norm_sq(discrete_curvature_at(inv, y, h));
    // conformal weight of a 2-form in 4d: |phi^* F|^2 = |dphi|^4 |F|^2, |dphi| = 1/|y|^2
    const double expect = bpst_curvature_norm_sq(1.0 / std::sqrt(r2), 1.0) / (r2 * r2 * r2 * r2);
    CHECK(lhs == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("stereographic weight") {
  for (double eta : {0.1, 0.5, 1.0}) {
    const double r0 = 1.0 / eta;
    CHECK(stereographic_weight_inner(r0, eta) == doctest::Approx(eta * eta));
    CHECK(stereographic_weight_outer(r0, eta) == doctest::Approx(eta * eta));
    CHECK(stereographic_weight_value(0.0, eta) == doctest::Approx(std::pow(1 + eta * eta, 2) / (eta * eta)));
    // non-increasing in r
    double prev = stereographic_weight_value(0.0, eta);
    for (double r = 0.05; r < 4.0 / eta; r += 0.05) {
      const double w = stereographic_weight_value(r, eta);
      CHECK(w <= prev * (1 + 1e-15));
      prev = w;
    }
  }
  CHECK_THROWS_AS(stereographic_weight_value(1.0, 0.0), DomainError);
  const Grid g(1.0, 5);
  const WeightField w = stereographic_weight(g, 0.5);
  CHECK(w.provenance == "hatinf:0.5");
  CHECK(w.values.size() == g.node_count());
}
