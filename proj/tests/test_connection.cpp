#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ymindex/connection.hpp"
#include "ymindex/instanton.hpp"

using namespace ymindex;

namespace {
// smooth, non-abelian generator for gauge transformations
AlgebraElement gauge_generator(const Vec4& x) {
  return {{0.4 * std::sin(x[0] + 0.5 * x[1]), 0.3 * std::cos(x[2]) * x[3], 0.25 * x[0] * x[1] + 0.1 * x[2]}};
}

ConnectionSampler smooth_connection() {
  return [](const Vec4& x) {
    std::array<AlgebraElement, 4> A;
    A[0] = {{0.3 * x[1], 0.1 * std::sin(x[2]), 0.0}};
    A[1] = {{0.0, 0.2 * x[0] * x[3], 0.15}};
    A[2] = {{0.1 * std::cos(x[0]), 0.0, 0.2 * x[1]}};
    A[3] = {{0.05, -0.1 * x[2], 0.1 * x[0] * x[0]}};
    return A;
  };
}

template <int C>
double max_abs(const Form<C>& f) {
  double m = 0.0;
  for (double v : f.raw()) m = std::max(m, std::abs(v));
  return m;
}

OneForm interior_bump(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  OneForm a(g);
  for (int mu = 0; mu < 4; ++mu) {
    const Vec4 c{0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng)};
    const AlgebraElement v{{u(rng), u(rng), u(rng)}};
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const double b = bump_profile(distance(g.coord(n), c), 0.45);
      a.set(n, mu, a.get(n, mu) + b * v);
    }
  }
  return a;
}
}  // namespace

TEST_CASE("curvature of trivial and abelian connections") {
  const Grid g(1.0, 9);
  CHECK(max_abs(curvature(Connection::zero(g))) == 0.0);
  CHECK(ym_energy(Connection::zero(g)) == 0.0);
  // constant commuting connection: F = 0 exactly
  const Connection c = sample_connection(g, [](const Vec4&) {
    std::array<AlgebraElement, 4> A;
    for (int mu = 0; mu < 4; ++mu) A[static_cast<std::size_t>(mu)] = {{0.3 * (mu + 1), 0.0, 0.0}};
    return A;
  });
  CHECK(max_abs(curvature(c)) < 1e-14);
  // constant non-commuting: F_{01} = [A_0, A_1], no derivative part
  const Connection nc = sample_connection(g, [](const Vec4&) {
    std::array<AlgebraElement, 4> A;
    A[0] = AlgebraElement::basis(0);
    A[1] = AlgebraElement::basis(1);
    return A;
  });
  const TwoForm F = curvature(nc);
  for (std::size_t n = 0; n < g.node_count(); n += 97) {
    CHECK(F.get(n, 0)[2] == doctest::Approx(1.0));
    CHECK(norm(F.get(n, 1)) == 0.0);
  }
}

TEST_CASE("grid curvature matches pointwise curvature at interior nodes") {
  const Grid g(1.0, 11);
  const auto s = bpst_sampler(0.7, {0.1, 0.0, -0.1, 0.2});
  const TwoForm F = curvature(sample_connection(g, s));
  for (std::size_t n = 0; n < g.node_count(); n += 13) {
    if (g.depth_of(n) < 1) continue;
    const auto f = discrete_curvature_at(s, g.coord(n), g.spacing());
    for (int k = 0; k < 6; ++k)
      for (std::size_t i = 0; i < 3; ++i) CHECK(F.get(n, k)[i] == doctest::Approx(f[k][i]).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("covariant derivatives reduce and are adjoint") {
  const Grid g(1.0, 13);
  const Connection A = sample_connection(g, smooth_connection());
  const OneForm a = interior_bump(g, 3);
  CHECK(max_abs(cov_d(Connection::zero(g), a) - d(a)) == 0.0);
  CHECK(max_abs(cov_d(A, OneForm(g))) == 0.0);

  // <d_A a, G> = <a, d_A^* G> for compactly supported a; G arbitrary smooth
  TwoForm G = curvature(A);
  const double lhs = l2_inner(cov_d(A, a), G);
  const double rhs = l2_inner(a, cov_dstar(A, G));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(lhs) + 1.0));

  ScalarGField phi(g);
  for (std::size_t n = 0; n < g.node_count(); ++n)
    phi.set(n, 0, bump_profile(distance(g.coord(n), {0.1, 0.0, 0.0, -0.1}), 0.5) * AlgebraElement{{1.0, -0.5, 0.3}});
  const double l2 = l2_inner(cov_d(A, phi), A.form);
  const double r2 = l2_inner(phi, cov_dstar(A, A.form));
  CHECK(std::abs(l2 - r2) <= 1e-12 * (std::abs(l2) + 1.0));
}

TEST_CASE("YM energy along a line is the exact quartic") {
  const Grid g(1.0, 11);
  const Connection A = sample_connection(g, bpst_sampler(0.8));
  const OneForm a = interior_bump(g, 7);
  const std::array<double, 5> ts{-1.0, -0.5, 0.25, 0.75, 1.5};
  Eigen::Matrix<double, 5, 5> V;
  Eigen::Matrix<double, 5, 1> E;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) V(i, j) = std::pow(ts[i], j);
    E(i) = ym_energy(Connection(A.form + ts[i] * a));
  }
  const Eigen::Matrix<double, 5, 1> c = V.fullPivLu().solve(E);

  const TwoForm F = curvature(A);
  const TwoForm dAa = cov_d(A, a);
  TwoForm aa = bracket(a, a);
  aa *= 0.5;
  const double scale = ym_energy(A) + l2_norm_sq(a);
  CHECK(c(0) == doctest::Approx(ym_energy(A)).epsilon(1e-11));
  CHECK(std::abs(c(1) - first_variation(A, a)) < 1e-10 * scale);
  CHECK(std::abs(c(2) - (0.5 * l2_norm_sq(dAa) + l2_inner(F, aa))) < 1e-10 * scale);
  CHECK(std::abs(c(3) - l2_inner(dAa, aa)) < 1e-10 * scale);
  CHECK(std::abs(c(4) - 0.5 * l2_norm_sq(aa)) < 1e-10 * scale);
}

TEST_CASE("first variation matches a central difference") {
  const Grid g(1.0, 11);
  const Connection A = sample_connection(g, smooth_connection());
  const OneForm a = interior_bump(g, 11);
  const double t = 1e-4;
  const double fd = (ym_energy(Connection(A.form + t * a)) - ym_energy(Connection(A.form - t * a))) / (2 * t);
  CHECK(fd == doctest::Approx(first_variation(A, a)).epsilon(1e-7));
}

TEST_CASE("pure gauge has curvature O(h^2)") {
  std::array<double, 3> h{}, e{};
  const std::array<int, 3> Ns{9, 13, 17};
  for (std::size_t i = 0; i < 3; ++i) {
    const Grid g(1.0, Ns[i]);
    const GaugeField u = GaugeField::from_generator(g, gauge_generator);
    const auto r = gauge_transform(Connection::zero(g), u, 1.0);
    h[i] = g.spacing();
    e[i] = std::sqrt(ym_energy(r.connection));
  }
  MESSAGE("pure gauge |F| order " << oracle::order(h, e));
  CHECK(oracle::order(h, e) > 1.8);
}

TEST_CASE("too rough a gauge is rejected") {
  const Grid g(1.0, 5);
  const GaugeField u = GaugeField::from_generator(g, [](const Vec4& x) {
    return AlgebraElement{{6.0 * x[0], 5.0 * x[1] * x[1], 0.0}};
  });
  CHECK_THROWS_AS(gauge_transform(Connection::zero(g), u), DomainError);
  CHECK_NOTHROW(gauge_transform(Connection::zero(g), GaugeField::identity(g)));
}

TEST_CASE("energy and covariant derivative are gauge covariant to O(h^2)") {
  std::array<double, 3> h{}, eE{}, eD{};
  const std::array<int, 3> Ns{9, 13, 17};
  for (std::size_t i = 0; i < 3; ++i) {
    const Grid g(1.0, Ns[i]);
    const Connection A = sample_connection(g, bpst_sampler(1.0, {0.1, 0.0, 0.0, 0.0}));
    const GaugeField u = GaugeField::from_generator(g, gauge_generator);
    const Connection Ag = gauge_transform(A, u, 1.0).connection;
    h[i] = g.spacing();
    eE[i] = std::abs(ym_energy(Ag) - ym_energy(A)) / ym_energy(A);
    const OneForm a = sample_connection(g, smooth_connection()).form;
    const NodeMask in = ball_mask(g, {0, 0, 0, 0}, 0.5);
    eD[i] = std::sqrt(l2_norm_sq(conjugate(cov_d(A, a), u) - cov_d(Ag, conjugate(a, u)), nullptr, &in));
  }
  MESSAGE("gauge energy order " << oracle::order(h, eE) << ", d_A covariance order " << oracle::order(h, eD));
  CHECK(eE[2] < 1e-2);
  CHECK(oracle::order(h, eE) > 1.8);
  CHECK(oracle::order(h, eD) > 1.8);
}

TEST_CASE("energy is translation invariant on shifted grids") {
  const Grid g0(1.5, 13);
  const Grid g1(1.5, 13, {0.3, -0.2, 0.1, 0.7});
  const double e0 = ym_energy(bpst(g0, 0.6));
  const double e1 = ym_energy(bpst(g1, 0.6, {0.3, -0.2, 0.1, 0.7}));
  CHECK(e1 == doctest::Approx(e0).epsilon(1e-12));
}

TEST_CASE("Bianchi identity and YM equation for BPST converge") {
  std::array<double, 3> h{}, eb{}, ey{};
  const std::array<int, 3> Ns{13, 17, 25};
  for (std::size_t i = 0; i < 3; ++i) {
    const Grid g(1.5, Ns[i]);
    const Connection A = bpst(g, 1.0);
    h[i] = g.spacing();
    eb[i] = bianchi_residual(A);
    ey[i] = ym_residual(A);
  }
  MESSAGE("bianchi order " << oracle::order(h, eb) << ", ym residual order " << oracle::order(h, ey));
  CHECK(oracle::order(h, eb) > 1.8);
  CHECK(oracle::order(h, ey) > 1.5);
  // generic connection: Bianchi still holds, YM equation does not
  const Grid g(1.0, 17);
  const Connection S = sample_connection(g, smooth_connection());
  CHECK(bianchi_residual(S) < 0.05 * ym_residual(S));
}

TEST_CASE("cutoff connection") {
  const Grid g(2.0, 21);
  CHECK_THROWS_AS(cutoff_connection(Connection::zero(g), 1.0, 1.0), DomainError);
  const auto z = cutoff_connection(Connection::zero(g), 0.8, 1.8);
  CHECK(z.lhs == 0.0);
  CHECK(z.ratio == 0.0);

  const Connection A = bpst(g, 0.5);
  const auto rep = cutoff_connection(A, 0.8, 1.8);
  // chi = 1 outside B_r, 0 inside B_{r/2}
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const double rho = distance(g.coord(n), {0, 0, 0, 0});
    for (int mu = 0; mu < 4; ++mu) {
      if (rho >= 0.8) {
        CHECK(rep.connection.form.get(n, mu) == A.form.get(n, mu));
      } else if (rho <= 0.4) {
        CHECK(norm(rep.connection.form.get(n, mu)) == 0.0);
      }
    }
  }
  CHECK(rep.max_dchi <= 4.0 / 0.8 * 1.1);
  CHECK(rep.ratio > 0.0);
  CHECK(rep.ratio < 10.0);
}
