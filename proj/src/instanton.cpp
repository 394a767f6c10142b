#include "ymindex/instanton.hpp"

#include <cmath>
#include <sstream>

#include "ymindex/parallel.hpp"

namespace ymindex {

namespace {
Quaternion to_quaternion(const Vec4& x, double lambda, const Vec4& p) {
  return {(x[0] - p[0]) / lambda, (x[1] - p[1]) / lambda, (x[2] - p[2]) / lambda, (x[3] - p[3]) / lambda};
}
void check_scale(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("instanton scale must be positive");
}
}  // namespace

ConnectionSampler bpst_sampler(double lambda, const Vec4& p) {
  check_scale(lambda);
  return [lambda, p](const Vec4& x) {
    const Quaternion q = to_quaternion(x, lambda, p);
    const double s = 1.0 / (lambda * (1.0 + q.norm2()));
    std::array<AlgebraElement, 4> A;
    for (int mu = 0; mu < 4; ++mu)
      A[static_cast<std::size_t>(mu)] = s * quat_to_algebra_hom(q.conj() * Quaternion::coordinate(mu));
    return A;
  };
}

Connection bpst(const Grid& grid, double lambda, const Vec4& p) {
  return sample_connection(grid, bpst_sampler(lambda, p));
}

std::array<AlgebraElement, 6> bpst_curvature_at(const Vec4& x, double lambda, const Vec4& p) {
  check_scale(lambda);
  const Quaternion q = to_quaternion(x, lambda, p);
  const double den = lambda * (1.0 + q.norm2());
  const double s = 1.0 / (den * den);
  std::array<AlgebraElement, 6> F;
  for (std::size_t k = 0; k < 6; ++k) {
    const Quaternion em = Quaternion::coordinate(kPairs[k][0]);
    const Quaternion en = Quaternion::coordinate(kPairs[k][1]);
    F[k] = s * quat_to_algebra_hom(em.conj() * en - en.conj() * em);
  }
  return F;
}

TwoForm bpst_curvature_closed_form(const Grid& grid, double lambda, const Vec4& p) {
  check_scale(lambda);
  TwoForm F(grid);
  parallel_for(grid.node_count(), [&](std::size_t n) {
    const auto f = bpst_curvature_at(grid.coord(n), lambda, p);
    for (int k = 0; k < 6; ++k) F.set(n, k, f[static_cast<std::size_t>(k)]);
  });
  return F;
}

double bpst_curvature_norm_sq(double r, double lambda) {
  const double t = 1.0 + (r / lambda) * (r / lambda);
  const double l2 = lambda * lambda;
  return 48.0 / (l2 * l2 * t * t * t * t);
}

OneForm pullback_dilation(const OneForm& a, double lambda, const Vec4& p, const Grid& target) {
  check_scale(lambda);
  OneForm out(target);
  std::vector<char> bad(target.node_count(), 0);
  parallel_for(target.node_count(), [&](std::size_t n) {
    const Vec4 y = target.coord(n);
    Vec4 x;
    for (std::size_t i = 0; i < 4; ++i) x[i] = p[i] + lambda * y[i];
    try {
      for (int mu = 0; mu < 4; ++mu) out.set(n, mu, lambda * interpolate(a, x, mu));
    } catch (const OutOfGrid&) {
      bad[n] = 1;
    }
  });
  for (char b : bad)
    if (b) throw OutOfGrid("pullback target leaves the source grid");
  return out;
}

Connection pullback_dilation(const Connection& A, double lambda, const Vec4& p, const Grid& target) {
  return Connection(pullback_dilation(A.form, lambda, p, target));
}

ConnectionSampler pullback_dilation(const ConnectionSampler& A, double lambda, const Vec4& p) {
  check_scale(lambda);
  return [A, lambda, p](const Vec4& y) {
    Vec4 x;
    for (std::size_t i = 0; i < 4; ++i) x[i] = p[i] + lambda * y[i];
    auto v = A(x);
    for (auto& c : v) c *= lambda;
    return v;
  };
}

ConnectionSampler pullback_inversion(const ConnectionSampler& A) {
  return [A](const Vec4& y) {
    double r2 = 0.0;
    for (double c : y) r2 += c * c;
    if (r2 == 0.0) throw DomainError("inversion is undefined at the origin");
    Vec4 x;
    for (std::size_t i = 0; i < 4; ++i) x[i] = y[i] / r2;
    const auto v = A(x);
    std::array<AlgebraElement, 4> out;
    // d(y_nu / |y|^2)/d y_mu = delta_{mu nu} / |y|^2 - 2 y_mu y_nu / |y|^4
    for (std::size_t mu = 0; mu < 4; ++mu)
      for (std::size_t nu = 0; nu < 4; ++nu) {
        const double J = (mu == nu ? 1.0 / r2 : 0.0) - 2.0 * y[mu] * y[nu] / (r2 * r2);
        out[mu] += J * v[nu];
      }
    return out;
  };
}

double stereographic_weight_inner(double r, double eta) {
  const double a = 1.0 + eta * eta, b = 1.0 + r * r;
  return a * a / (eta * eta) / (b * b);
}

double stereographic_weight_outer(double r, double eta) {
  const double r2 = r * r;
  return 1.0 / (eta * eta * r2 * r2);
}

double stereographic_weight_value(double r, double eta) {
  if (!(eta > 0.0)) throw DomainError("stereographic weight needs eta > 0");
  return r <= 1.0 / eta ? stereographic_weight_inner(r, eta) : stereographic_weight_outer(r, eta);
}

WeightField stereographic_weight(const Grid& grid, double eta, const Vec4& p) {
  if (!(eta > 0.0)) throw DomainError("stereographic weight needs eta > 0");
  WeightField w{grid, std::vector<double>(grid.node_count()), ""};
  for (std::size_t n = 0; n < grid.node_count(); ++n)
    w.values[n] = stereographic_weight_value(distance(grid.coord(n), p), eta);
  std::ostringstream os;
  os << "hatinf:" << eta;
  w.provenance = os.str();
  return w;
}

}  // namespace ymindex
