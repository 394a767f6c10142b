#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "ymindex/instanton.hpp"
#include "ymindex/spectral.hpp"

using namespace ymindex;

namespace {
// K = W^{1/2} Q diag(spec) Q^T W^{1/2}: pencil eigenvalues are exactly `spec`
Pencil planted(const std::vector<double>& spec, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = nd(rng);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
  Eigen::VectorXd w(n), l(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = u(rng);
    l[i] = spec[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd s = w.cwiseSqrt();
  const Eigen::MatrixXd K = s.asDiagonal() * Q * l.asDiagonal() * Q.transpose() * s.asDiagonal();
  Pencil P;
  P.dim = n;
  P.apply = [K](const Eigen::VectorXd& x) { return Eigen::VectorXd(K * x); };
  P.mass = w;
  P.stiffness_diagonal = K.diagonal();
  return P;
}

std::vector<double> planted_spectrum(int n) {
  std::vector<double> s{-2.0, -1.0, 0.0, 3.0};
  for (int i = 4; i < n; ++i) s.push_back(3.0 + 0.5 * i);
  return s;
}
}  // namespace

TEST_CASE("planted spectrum, dense and iterative") {
  const Pencil P = planted(planted_spectrum(300), 7);
  for (SolverKind kind : {SolverKind::dense, SolverKind::lanczos}) {
    SolverOptions opt;
    opt.kind = kind;
    const SpectralReport r = smallest_eigs(P, 6, 1e-6, opt);
    CAPTURE(r.solver);
    REQUIRE(r.valid);
    CHECK(r.eigenvalues.size() == 6);
    CHECK(r.eigenvalues[0] == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(r.eigenvalues[1] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(r.eigenvalues[2]) < 1e-8);
    CHECK(r.eigenvalues[3] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(r.morse_index == 2);
    CHECK(r.nullity == 1);
    CHECK(r.signature == 3);
    CHECK(r.complete);
    CHECK(r.gap_below == doctest::Approx(-1.0));
    CHECK(r.gap_above == doctest::Approx(3.0));
    for (double res : r.residuals) CHECK(res <= 1e-8);
    // W-orthonormal vectors
    REQUIRE(r.vectors.cols() == 6);
    const Eigen::MatrixXd G = r.vectors.transpose() * P.mass.asDiagonal() * r.vectors;
    CHECK((G - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-8);
  }
}

TEST_CASE("diagonal pencil and incomplete counts") {
  Eigen::VectorXd k(5), w(5);
  k << -3, 1, 4, 2, 8;
  w << 1, 1, 2, 1, 4;
  const Pencil P = Pencil::diagonal(k, w);
  SolverOptions opt;
  opt.kind = SolverKind::dense;
  const SpectralReport r = smallest_eigs(P, 3, 1e-9, opt);
  CHECK(r.eigenvalues[0] == doctest::Approx(-3));
  CHECK(r.eigenvalues[1] == doctest::Approx(1));
  CHECK(r.eigenvalues[2] == doctest::Approx(2));
  CHECK(r.morse_index == 1);
  CHECK(r.complete);
  // all computed eigenvalues negative: counts are lower bounds
  const SpectralReport r1 = smallest_eigs(P, 1, 1e-9, opt);
  CHECK_FALSE(r1.complete);
  CHECK(std::isnan(r1.gap_above));
  CHECK_THROWS_AS(smallest_eigs(P, 0), DomainError);
  CHECK_THROWS_AS(smallest_eigs(P, 6), DomainError);
  CHECK(largest_eig(P) == doctest::Approx(2.0).epsilon(1e-6));
  // count_signature on its own
  SpectralReport c;
  c.eigenvalues = {-1.0, -1e-12, 1e-12, 0.5};
  count_signature(c, 1e-9);
  CHECK(c.morse_index == 1);
  CHECK(c.nullity == 2);
  CHECK(c.signature == 3);
}

TEST_CASE("dense and iterative agree on an assembled instanton pencil") {
  // N = 6: 4^4 free nodes, 3072 dofs; forced dense vs forced iterative
  const Grid g(2.0, 6);
  const Connection A = bpst(g, 1.0);
  const AssembledForm form(A, WeightField::constant(g, 1.0));
  REQUIRE(form.dim() == 3072);
  const Pencil P = Pencil::from_form(form);
  const double tau = P.default_tau();
  SolverOptions dense, iter;
  dense.kind = SolverKind::dense;
  iter.kind = SolverKind::lanczos;
  const auto t0 = std::chrono::steady_clock::now();
  const SpectralReport a = smallest_eigs(P, 10, tau, dense);
  const auto t1 = std::chrono::steady_clock::now();
  const SpectralReport b = smallest_eigs(P, 10, tau, iter);
  const auto t2 = std::chrono::steady_clock::now();
  MESSAGE("dense " << std::chrono::duration<double>(t1 - t0).count() << " s, iterative "
                   << std::chrono::duration<double>(t2 - t1).count() << " s, " << b.matvecs << " matvecs");
  REQUIRE(a.valid);
  REQUIRE(b.valid);
  const double scale = std::abs(a.eigenvalues.back()) + 1.0;
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) <= 1e-8 * scale);
  CHECK(a.morse_index == b.morse_index);
  CHECK(a.nullity == b.nullity);
  CHECK(std::chrono::duration<double>(t2 - t1).count() < 60.0);
}

TEST_CASE("automatic choice follows the dense limit") {
  const Pencil P = planted(planted_spectrum(60), 3);
  SolverOptions opt;
  opt.dense_limit = 100;
  CHECK(smallest_eigs(P, 4, 1e-6, opt).solver == "dense");
  opt.dense_limit = 10;
  CHECK(smallest_eigs(P, 4, 1e-6, opt).solver == "block-lanczos");
}

TEST_CASE("inertia does not depend on the weight") {
  const Grid g(2.0, 6);
  const Connection A = bpst(g, 0.7);
  const WeightField one = WeightField::constant(g, 1.0);
  const WeightField hat = stereographic_weight(g, 0.5);
  SolverOptions opt;
  opt.kind = SolverKind::dense;
  const NodeMask ball = ball_mask(g, {0, 0, 0, 0}, 1.5);
  const InertiaReport r = inertia_invariance_check(A, one, hat, 12, 0.0, &ball, opt);
  CHECK(r.counts_match);
  CHECK(r.first.morse_index == r.second.morse_index);
  CHECK(r.first.nullity == r.second.nullity);

  const Pencil P = planted(planted_spectrum(80), 11);
  Eigen::VectorXd w2 = P.mass;
  for (Eigen::Index i = 0; i < w2.size(); ++i) w2[i] *= 1.0 + 0.5 * std::sin(static_cast<double>(i));
  const InertiaReport s = inertia_invariance_check(P, w2, 6, 1e-6, opt);
  CHECK(s.counts_match);
  CHECK(s.first.morse_index == 2);
  CHECK(s.second.morse_index == 2);
  CHECK(s.second.nullity == 1);
}

TEST_CASE("extended signature of the flat connection") {
  // QQ at A = 0 is the flat Hodge Laplacian with Dirichlet data: positive definite
  const Grid g(1.0, 6);
  SolverOptions opt;
  opt.kind = SolverKind::dense;
  const SpectralReport r = extended_signature(Connection::zero(g), WeightField::constant(g, 1.0), 4, 0.0, nullptr, opt);
  CHECK(r.valid);
  CHECK(r.signature == 0);
  CHECK(r.eigenvalues[0] > 0.0);
  // lowest Dirichlet mode of -Laplacian on [-1, 1]^4 is 4 (pi/2)^2; the wide central
  // stencil has symbol sin(kh)/h < k, so the discrete value sits below it (h = 0.4 here)
  const double cont = 4 * std::pow(std::acos(-1.0) / 2, 2);
  CHECK(r.eigenvalues[0] < cont);
  CHECK(r.eigenvalues[0] > 0.75 * cont);
}
