#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ymindex/instanton.hpp"
#include "ymindex/secondvar.hpp"

using namespace ymindex;

namespace {
Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = nd(rng);
  return x;
}

ScalarGField bump_scalar(const Grid& g, const Vec4& c, double radius, const AlgebraElement& v) {
  ScalarGField f(g);
  for (std::size_t n = 0; n < g.node_count(); ++n) f.set(n, 0, bump_profile(distance(g.coord(n), c), radius) * v);
  return f;
}

// A with F != 0 and non-commuting components everywhere
Connection test_connection(const Grid& g) { return bpst(g, 0.8, {0.1, -0.05, 0.0, 0.1}); }
}  // namespace

TEST_CASE("dof space embed / restrict") {
  const Grid g(1.0, 6, {0, 0, 0, 0}, 1);
  const DofSpace dofs(g);
  CHECK(dofs.node_count() == 4 * 4 * 4 * 4);
  const Eigen::VectorXd x = random_vector(dofs.dim(), 1);
  const OneForm a = dofs.embed(x);
  CHECK(is_dirichlet_compatible(a));
  CHECK((dofs.restrict(a) - x).norm() == 0.0);
  OneForm b = a;
  b.set(0, 2, {{1.0, 0.0, 0.0}});
  CHECK_THROWS_AS(dofs.restrict(b), DomainError);

  const NodeMask ball = ball_mask(g, {0, 0, 0, 0}, 0.5);
  const DofSpace sub(g, &ball);
  CHECK(sub.node_count() == count(intersect(ball, free_nodes(g))));
  CHECK(sub.slot(0) == -1);
}

TEST_CASE("assembled quadratic form equals the direct evaluation") {
  const Grid g(1.0, 7);
  const Connection A = test_connection(g);
  const WeightField one = WeightField::constant(g, 1.0);
  const AssembledForm full(A, one);
  const AssembledForm q(A, one, nullptr, {false, true});
  const AssembledForm hodge(A, one, nullptr, {true, false});
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const Eigen::VectorXd x = random_vector(full.dim(), seed);
    const OneForm a = full.dofs().embed(x);
    const double cq = calq_form(A, a);
    CHECK(full.energy(x) == doctest::Approx(cq).epsilon(1e-10));
    CHECK(q.energy(x) == doctest::Approx(q_form(A, a)).epsilon(1e-10));
    CHECK(hodge.energy(x) == doctest::Approx(l2_norm_sq(cov_d(A, a)) + l2_norm_sq(cov_dstar(A, a))).epsilon(1e-10));
    CHECK(x.dot(full.mass().cwiseProduct(x)) == doctest::Approx(l2_norm_sq(a)).epsilon(1e-12));
  }
}

TEST_CASE("the potential term is the bracket pairing with F") {
  const Grid g(1.0, 7);
  const Connection A = test_connection(g);
  const WeightField one = WeightField::constant(g, 1.0);
  const AssembledForm with(A, one, nullptr, {false, true});
  const AssembledForm without(A, one, nullptr, {false, false});
  const Eigen::VectorXd x = random_vector(with.dim(), 9);
  const OneForm a = with.dofs().embed(x);
  const double direct = l2_inner(curvature(A), bracket(a, a));
  CHECK(with.energy(x) - without.energy(x) == doctest::Approx(direct).epsilon(1e-9));
  CHECK(without.energy(x) == doctest::Approx(l2_norm_sq(cov_d(A, a))).epsilon(1e-10));
}

TEST_CASE("stiffness is symmetric and consistent with apply") {
  const Grid g(1.0, 6);
  const Connection A = test_connection(g);
  const WeightField w = stereographic_weight(g, 0.5);
  const AssembledForm K(A, w);
  const SparseMatrix S = K.stiffness();
  const SparseMatrix St = S.transpose();
  CHECK((S - St).norm() <= 1e-14 * S.norm());
  const Eigen::VectorXd x = random_vector(K.dim(), 5);
  CHECK((S * x - K.apply(x)).norm() <= 1e-13 * (S * x).norm());
  CHECK((Eigen::VectorXd(S.diagonal()) - K.stiffness_diagonal()).norm() <= 1e-13 * S.diagonal().norm());
  // weighted mass
  const OneForm a = K.dofs().embed(x);
  CHECK(x.dot(K.mass().cwiseProduct(x)) == doctest::Approx(l2_norm_sq(a, &w)).epsilon(1e-12));
  CHECK(K.default_tau() == doctest::Approx(1e-6 * K.stiffness_diagonal().maxCoeff() / K.mass().minCoeff()));
}

TEST_CASE("second derivative of the energy is Q") {
  const Grid g(1.0, 9);
  const Connection A = test_connection(g);
  const DofSpace dofs(g);
  const OneForm a = dofs.embed(random_vector(dofs.dim(), 17));
  const double t = 1e-3;
  const double e0 = ym_energy(A);
  const double fd = (ym_energy(Connection(A.form + t * a)) - 2 * e0 + ym_energy(Connection(A.form - t * a))) / (t * t);
  CHECK(fd == doctest::Approx(q_form(A, a)).epsilon(1e-5));
}

TEST_CASE("assembly rejects bad input") {
  const Grid g(1.0, 5);
  const Connection A = Connection::zero(g);
  WeightField w = WeightField::constant(g, 1.0);
  w.values[g.node_count() / 2] = 0.0;
  CHECK_THROWS_AS(AssembledForm(A, w), DomainError);
  const NodeMask empty(g.node_count(), 0);
  CHECK_THROWS_AS(AssembledForm(A, WeightField::constant(g, 1.0), &empty), DomainError);
  CHECK_THROWS_AS(AssembledForm(A, WeightField::constant(Grid(1.0, 6), 1.0)), GridMismatch);
}

TEST_CASE("Coulomb projection removes the gauge part") {
  const Grid g(1.0, 9);
  const Connection A = test_connection(g);
  const DofSpace dofs(g);
  const OneForm a = dofs.embed(random_vector(dofs.dim(), 21));
  const CoulombResult r = coulomb_project(A, a);
  CHECK(r.relative_residual <= 1e-10);
  CHECK(r.iterations > 0);
  CHECK(is_dirichlet_compatible(r.projected));
  const double before = std::sqrt(l2_norm_sq(cov_dstar(A, a)));
  MESSAGE("divergence " << before << " -> " << r.divergence << " in " << r.iterations << " iterations");
  CHECK(r.divergence <= 1e-8 * before);
  // projecting again changes nothing
  const CoulombResult r2 = coulomb_project(A, r.projected);
  CHECK(std::sqrt(l2_norm_sq(r2.projected - r.projected)) <= 1e-8 * std::sqrt(l2_norm_sq(a)));
  // a pure gauge direction is removed entirely
  const ScalarGField phi = bump_scalar(g, {0, 0, 0, 0}, 0.5, {{1.0, 0.3, -0.2}});
  const CoulombResult r3 = coulomb_project(A, cov_d(A, phi));
  CHECK(std::sqrt(l2_norm_sq(r3.projected)) <= 1e-8 * std::sqrt(l2_norm_sq(cov_d(A, phi))));
  // too few iterations
  CHECK_THROWS_AS(coulomb_project(A, a, 1e-300), ConvergenceError);
}

TEST_CASE("gauge directions are null for Q at an instanton, to O(h^2)") {
  std::array<double, 3> h{}, e{};
  const std::array<int, 3> Ns{13, 17, 25};
  for (std::size_t i = 0; i < 3; ++i) {
    const Grid g(1.5, Ns[i]);
    const Connection A = bpst(g, 1.0);
    const OneForm v = cov_d(A, bump_scalar(g, {0.1, 0, 0, 0}, 0.9, {{1.0, -0.5, 0.25}}));
    h[i] = g.spacing();
    e[i] = std::abs(q_form(A, v)) / l2_norm_sq(v);
  }
  MESSAGE("Q(d_A phi) / |d_A phi|^2: " << e[0] << " " << e[1] << " " << e[2] << ", order " << oracle::order(h, e));
  CHECK(oracle::order(h, e) > 1.8);
}
