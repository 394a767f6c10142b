#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ymindex/lattice.hpp"

using namespace ymindex;

namespace {
ScalarGField scalar_field(const Grid& g, const std::function<AlgebraElement(const Vec4&)>& f) {
  ScalarGField s(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) s.set(n, 0, f(g.coord(n)));
  return s;
}

template <int C>
double max_abs(const Form<C>& f) {
  double m = 0.0;
  for (double v : f.raw()) m = std::max(m, std::abs(v));
  return m;
}

template <int C>
Form<C> random_form(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Form<C> f(g);
  for (auto& v : f.raw()) v = u(rng);
  return f;
}
}  // namespace

TEST_CASE("grid geometry and quadrature") {
  const Grid g(1.5, 7, {0.1, -0.2, 0.3, 0.0}, 1);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.coord(0, 0) == doctest::Approx(-1.4));
  CHECK(g.coord(0, 6) == doctest::Approx(1.6));
  double total = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n) total += g.quadrature_weight(n);
  CHECK(std::abs(total - std::pow(3.0, 4)) < 1e-12 * std::pow(3.0, 4));
  for (std::size_t n : {std::size_t{0}, std::size_t{1234}, g.node_count() - 1}) CHECK(g.node(g.index(n)) == n);
  CHECK(g.is_dirichlet(0));
  CHECK_FALSE(g.is_dirichlet(g.node({3, 3, 3, 3})));
  CHECK(g.depth_of(g.node({1, 2, 3, 5})) == 1);
  CHECK_THROWS_AS(Grid(1.0, 4), DomainError);
  CHECK_THROWS_AS(Grid(0.0, 9), DomainError);
}

TEST_CASE("derivative stencils are exact on quadratics") {
  const Grid g(1.0, 9);
  const ScalarGField f = scalar_field(g, [](const Vec4& x) { return AlgebraElement{{x[0], x[1] * x[1], 2.0}}; });
  const OneForm df = d(f);
  double err = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Vec4 x = g.coord(n);
    err = std::max(err, norm(df.get(n, 0) - AlgebraElement{{1.0, 0.0, 0.0}}));
    err = std::max(err, norm(df.get(n, 1) - AlgebraElement{{0.0, 2.0 * x[1], 0.0}}));
    err = std::max(err, norm(df.get(n, 2)) + norm(df.get(n, 3)));
  }
  CHECK(err < 1e-12);
  CHECK(max_abs(d(scalar_field(g, [](const Vec4&) { return AlgebraElement{{1.0, -2.0, 3.0}}; }))) == 0.0);
}

TEST_CASE("transposed stencil matches the row stencil") {
  for (int n : {5, 6, 9}) {
    const double h = 0.3;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double dij = 0.0, dtji = 0.0;
        const AxisStencil r = derivative_row(i, n, h);
        for (int k = 0; k < r.count; ++k)
          if (i + r.offset[k] == j) dij += r.weight[k];
        const AxisStencil c = derivative_column(j, n, h);
        for (int k = 0; k < c.count; ++k)
          if (j + c.offset[k] == i) dtji += c.weight[k];
        CHECK(dij == dtji);
      }
  }
}

TEST_CASE("codifferential on linear fields") {
  const Grid g(1.0, 7);
  OneForm a(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) a.set(n, 0, g.coord(n)[0] * AlgebraElement::basis(0));
  const ScalarGField s = dstar(a);
  for (std::size_t n = 0; n < g.node_count(); ++n) CHECK(norm(s.get(n, 0) + AlgebraElement::basis(0)) < 1e-12);
  CHECK(max_abs(dstar(OneForm(g))) == 0.0);
}

TEST_CASE("d o d vanishes") {
  // Tensor-product difference operators along distinct axes commute, so the
  // residual is at roundoff level on every grid.
  for (int N : {7, 11, 15}) {
    const Grid g(1.0, N);
    const ScalarGField f = scalar_field(g, [](const Vec4& x) {
      return AlgebraElement{{std::sin(x[0]) * std::cos(2 * x[1]), std::exp(x[2] * x[3]), x[0] * x[1] * x[2]}};
    });
    CHECK(max_abs(d(d(f))) < 1e-11);
  }
}

TEST_CASE("summation by parts for Dirichlet-compatible forms") {
  const Grid g(1.0, 13);
  const OneForm a = make_bump_oneform(g, {0.1, 0.0, -0.1, 0.05}, 0.5, 2, AlgebraElement{{0.3, -1.0, 0.5}}) +
                    make_bump_oneform(g, {0.0, 0.1, 0.0, 0.0}, 0.45, 0, AlgebraElement{{1.0, 0.2, 0.0}});
  const ScalarGField f = scalar_field(g, [](const Vec4& x) {
    return AlgebraElement{{std::sin(x[0] + x[2]), std::cos(x[1]) * x[3], 1.0 + x[0] * x[0]}};
  });
  // d^* is the adjoint of d: <df, a> = <f, d^* a>, exactly once the support of a
  // stays clear of the one-sided boundary stencils
  const double lhs = l2_inner(d(f), a) - l2_inner(f, dstar(a));
  CHECK(std::abs(lhs) < 1e-12 * std::sqrt(l2_norm_sq(a) * l2_norm_sq(f)));
  CHECK(std::abs(l2_inner(d(f), a)) > 1e-3);
}

TEST_CASE("hodge star") {
  const Grid g(1.0, 5);
  TwoForm F(g);
  F.set(7, 0, AlgebraElement::basis(1));
  const TwoForm s = hodge_star(F);
  CHECK(s.get(7, 5) == AlgebraElement::basis(1));
  const TwoForm R = random_form<6>(g, 5), G = random_form<6>(g, 6);
  CHECK(hodge_star(hodge_star(R)).raw() == R.raw());
  // same terms, summed in a different order
  CHECK(std::abs(l2_inner(hodge_star(R), hodge_star(G)) - l2_inner(R, G)) < 1e-14 * l2_norm_sq(R));
}

TEST_CASE("l2 inner product") {
  const Grid g(1.0, 9);
  ScalarGField one(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) one.set(n, 0, AlgebraElement::basis(0));
  CHECK(l2_norm_sq(one) == doctest::Approx(8.0).epsilon(1e-12));
  const WeightField two = WeightField::constant(g, 2.0);
  CHECK(l2_norm_sq(one, &two) == doctest::Approx(16.0).epsilon(1e-12));
  const Grid other(1.0, 11);
  CHECK_THROWS_AS(l2_inner(one, ScalarGField(other)), GridMismatch);
  const OneForm r = random_form<4>(g, 7);
  CHECK(l2_norm_sq(r) > 0.0);
  CHECK(l2_norm_sq(OneForm(g)) == 0.0);
}

TEST_CASE("bump one-forms") {
  const Grid g(1.0, 24);
  const AlgebraElement e{{0.0, 1.0, 0.0}};
  const Vec4 c{0.0, 0.0, 0.0, 0.0};
  const double radius = 0.8;
  const OneForm b = make_bump_oneform(g, c, radius, 3, e);
  CHECK(is_dirichlet_compatible(b));
  double outside = 0.0;
  for (std::size_t n = 0; n < g.node_count(); ++n)
    if (distance(g.coord(n), c) >= radius) outside = std::max(outside, norm(b.get(n, 3)));
  CHECK(outside == 0.0);
  // node-free oracle for the value at the centre
  const Grid odd(1.0, 9);
  const OneForm bc = make_bump_oneform(odd, c, 0.5, 1, e);
  CHECK(bc.get(odd.node({4, 4, 4, 4}), 1) == e);
  // ||grad b||^2 = <e,e> * 2 pi^2 int b'(r)^2 r^3 dr
  const double exact = inner(e, e) * oracle::radial(
                                         [&](double r) {
                                           const double t = 1.0 - r * r / (radius * radius);
                                           const double db = -6.0 * r / (radius * radius) * t * t;
                                           return db * db;
                                         },
                                         0.0, radius);
  // Second-order stencils at ~9 cells per radius: 5% low at N=24, then
  // converging at order 2 (Richardson extrapolation lands within 0.5%).
  const double e24 = std::abs(gradient_norm_sq(b) / exact - 1.0);
  CHECK(e24 < 0.06);
  const OneForm b16 = make_bump_oneform(Grid(1.0, 16), c, radius, 3, e);
  const OneForm b32 = make_bump_oneform(Grid(1.0, 32), c, radius, 3, e);
  const double g16 = gradient_norm_sq(b16), g32 = gradient_norm_sq(b32);
  const double e16 = std::abs(g16 / exact - 1.0), e32 = std::abs(g32 / exact - 1.0);
  const double p = oracle::order<3>({2.0 / 15, 2.0 / 23, 2.0 / 31}, {e16, e24, e32});
  CHECK(p > 1.8);
  const double h16 = 2.0 / 15, h32 = 2.0 / 31;
  const double rich = (g32 * h16 * h16 - g16 * h32 * h32) / (h16 * h16 - h32 * h32);
  CHECK(std::abs(rich / exact - 1.0) < 0.005);
  CHECK_THROWS_AS(make_bump_oneform(g, {0.5, 0.0, 0.0, 0.0}, 0.6, 0, e), OutOfGrid);
}

TEST_CASE("cutoff profile") {
  CHECK(cutoff_profile(0.3) == 1.0);
  CHECK(cutoff_profile(1.0) == 1.0);
  CHECK(cutoff_profile(2.0) == 0.0);
  CHECK(cutoff_profile(1.5) == doctest::Approx(0.5));
  double slope = 0.0, prev = 1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double t = 1.0 + i * 1e-4;
    const double v = cutoff_profile(t);
    CHECK(v <= prev);
    prev = v;
    slope = std::max(slope, std::abs(cutoff_profile_derivative(t)));
    const double fd = (cutoff_profile(t + 1e-6) - cutoff_profile(t - 1e-6)) / 2e-6;
    CHECK(std::abs(fd - cutoff_profile_derivative(t)) < 1e-5);
  }
  CHECK(slope <= 2.0 + 1e-9);
}

TEST_CASE("neck cutoff support and gradient") {
  const double lambda = 0.05, eta = 0.5;
  const AnnularCutoff chi = neck_cutoff({0.0, 0.0, 0.0, 0.0}, lambda, eta);
  const Grid g(1.2, 25);
  const OneForm one = [&] {
    OneForm a(g);
    for (std::size_t n = 0; n < g.node_count(); ++n) a.set(n, 0, AlgebraElement::basis(0));
    return a;
  }();
  const OneForm cut = apply_cutoff_profile(one, chi);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const double r = distance(g.coord(n), chi.center);
    const double v = cut.get(n, 0).c[0];
    if (r >= lambda / eta && r <= eta) CHECK(v == 1.0);
    if (r >= 2 * eta || r <= lambda / (2 * eta)) CHECK(v == 0.0);
  }
  // |x| |d chi| stays bounded under refinement
  double prev = 0.0;
  for (int N : {17, 25, 33}) {
    const Grid gn(1.2, N);
    const double b = cutoff_gradient_bound(gn, chi);
    CHECK(std::isfinite(b));
    CHECK(b < 8.0);
    if (prev > 0.0) CHECK(std::abs(b - prev) < 0.5 * prev);
    prev = b;
  }
  CHECK_THROWS_AS(annulus_mask(g, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(neck_cutoff({0, 0, 0, 0}, 0.5, 0.5), DomainError);
}

TEST_CASE("interpolation is exact on multilinear data") {
  const Grid g(1.0, 7);
  OneForm a(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Vec4 x = g.coord(n);
    a.set(n, 2, AlgebraElement{{x[0] + 2 * x[1], x[2] * x[3], 1.0}});
  }
  const Vec4 y{0.13, -0.41, 0.77, 0.05};
  const AlgebraElement v = interpolate(a, y, 2);
  CHECK(v.c[0] == doctest::Approx(y[0] + 2 * y[1]));
  CHECK(v.c[1] == doctest::Approx(y[2] * y[3]));
  CHECK_THROWS_AS(interpolate(a, {1.5, 0, 0, 0}, 0), OutOfGrid);
}

TEST_CASE("shell quadrature") {
  // int over R^4 of exp(-|x|^2) = pi^2; window covers [0, 8] fully.
  const double v =
      shell_sum({0.1, 0.0, 0.0, 0.0}, 0.25, 8.0, 21, [](const Vec4& x, double) {
        double r2 = (x[0] - 0.1) * (x[0] - 0.1) + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
        return std::exp(-r2);
      }, true);
  CHECK(std::abs(v / (oracle::pi * oracle::pi) - 1.0) < 5e-3);
}
