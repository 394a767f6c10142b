#include "ymindex/connection.hpp"

#include <cmath>

#include "ymindex/parallel.hpp"

namespace ymindex {

GaugeField GaugeField::from_generator(const Grid& g, const std::function<AlgebraElement(const Vec4&)>& phi) {
  GaugeField out{g, std::vector<GroupElement>(g.node_count())};
  parallel_for(g.node_count(), [&](std::size_t n) { out.values[n] = exp(phi(g.coord(n))); });
  return out;
}

Connection sample_connection(const Grid& grid, const ConnectionSampler& A) {
  OneForm a(grid);
  parallel_for(grid.node_count(), [&](std::size_t n) {
    const auto v = A(grid.coord(n));
    for (int mu = 0; mu < 4; ++mu) a.set(n, mu, v[static_cast<std::size_t>(mu)]);
  });
  return Connection(std::move(a));
}

std::array<AlgebraElement, 6> discrete_curvature_at(const ConnectionSampler& A, const Vec4& x, double h) {
  std::array<std::array<AlgebraElement, 4>, 4> plus, minus;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    Vec4 xp = x, xm = x;
    xp[mu] += h;
    xm[mu] -= h;
    plus[mu] = A(xp);
    minus[mu] = A(xm);
  }
  const auto a0 = A(x);
  std::array<AlgebraElement, 6> F;
  const double s = 0.5 / h;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto mu = static_cast<std::size_t>(kPairs[k][0]);
    const auto nu = static_cast<std::size_t>(kPairs[k][1]);
    F[k] = s * (plus[mu][nu] - minus[mu][nu]) - s * (plus[nu][mu] - minus[nu][mu]) + bracket(a0[mu], a0[nu]);
  }
  return F;
}

double curvature_norm_sq(const std::array<AlgebraElement, 6>& F) {
  double s = 0.0;
  for (const auto& f : F) s += inner(f, f);
  return s;
}

TwoForm bracket(const OneForm& a, const OneForm& b) {
  a.check(b);
  TwoForm out(a.grid());
  parallel_for(a.node_count(), [&](std::size_t n) {
    for (int k = 0; k < 6; ++k) {
      const int mu = kPairs[static_cast<std::size_t>(k)][0];
      const int nu = kPairs[static_cast<std::size_t>(k)][1];
      out.set(n, k, bracket(a.get(n, mu), b.get(n, nu)) - bracket(a.get(n, nu), b.get(n, mu)));
    }
  });
  return out;
}

TwoForm curvature(const Connection& A) {
  TwoForm F = d(A.form);
  parallel_for(F.node_count(), [&](std::size_t n) {
    for (int k = 0; k < 6; ++k) {
      const int mu = kPairs[static_cast<std::size_t>(k)][0];
      const int nu = kPairs[static_cast<std::size_t>(k)][1];
      F.set(n, k, F.get(n, k) + bracket(A.form.get(n, mu), A.form.get(n, nu)));
    }
  });
  return F;
}

double ym_energy(const Connection& A, const NodeMask* region) {
  const TwoForm F = curvature(A);
  return 0.5 * l2_norm_sq(F, nullptr, region);
}

OneForm cov_d(const Connection& A, const ScalarGField& phi) {
  if (A.grid() != phi.grid()) throw GridMismatch();
  OneForm out = d(phi);
  parallel_for(out.node_count(), [&](std::size_t n) {
    const AlgebraElement p = phi.get(n, 0);
    for (int mu = 0; mu < 4; ++mu) out.set(n, mu, out.get(n, mu) + bracket(A.form.get(n, mu), p));
  });
  return out;
}

TwoForm cov_d(const Connection& A, const OneForm& a) {
  TwoForm out = d(a);
  out += bracket(A.form, a);
  return out;
}

ScalarGField cov_dstar(const Connection& A, const OneForm& a) {
  A.form.check(a);
  ScalarGField out = dstar(a);
  parallel_for(out.node_count(), [&](std::size_t n) {
    AlgebraElement s = out.get(n, 0);
    for (int mu = 0; mu < 4; ++mu) s -= bracket(A.form.get(n, mu), a.get(n, mu));
    out.set(n, 0, s);
  });
  return out;
}

OneForm cov_dstar(const Connection& A, const TwoForm& G) {
  if (A.grid() != G.grid()) throw GridMismatch();
  OneForm out = dstar(G);
  parallel_for(out.node_count(), [&](std::size_t n) {
    for (int nu = 0; nu < 4; ++nu) {
      AlgebraElement s = out.get(n, nu);
      for (int mu = 0; mu < 4; ++mu) {
        if (mu == nu) continue;
        const AlgebraElement g = G.get(n, pair_index(std::min(mu, nu), std::max(mu, nu)));
        const AlgebraElement b = bracket(A.form.get(n, mu), g);
        if (mu < nu)
          s -= b;
        else
          s += b;
      }
      out.set(n, nu, s);
    }
  });
  return out;
}

GaugeResult gauge_transform(const Connection& A, const GaugeField& g, double tol) {
  const Grid& grid = A.grid();
  if (g.grid != grid) throw GridMismatch();
  OneForm out(grid);
  std::vector<double> dev(grid.node_count(), 0.0);
  parallel_for(grid.node_count(), [&](std::size_t n) {
    const auto idx = grid.index(n);
    const GroupElement& gn = g.values[n];
    const Mat2 ginv = gn.matrix().adjoint();
    double worst = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
      const AxisStencil st = derivative_row(idx[static_cast<std::size_t>(mu)], grid.points(), grid.spacing());
      Mat2 dg = Mat2::zero();
      for (int k = 0; k < st.count; ++k) {
        const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) +
                                                 st.offset[static_cast<std::size_t>(k)] * grid.stride(mu));
        dg = dg + Complex(st.weight[static_cast<std::size_t>(k)]) * g.values[nb].matrix();
      }
      const Mat2 m = ginv * to_matrix(A.form.get(n, mu)) * gn.matrix() + ginv * dg;
      const Projection pr = project_to_algebra(m);
      worst = std::max(worst, pr.deviation);
      out.set(n, mu, pr.value);
    }
    dev[n] = worst;
  });
  GaugeResult r{Connection(std::move(out)), 0.0};
  for (double v : dev) r.max_deviation = std::max(r.max_deviation, v);
  if (r.max_deviation > tol)
    throw DomainError("gauge transform left the algebra by " + std::to_string(r.max_deviation) +
                      "; gauge too rough for the grid");
  return r;
}

template <int C>
static Form<C> conjugate_form(const Form<C>& a, const GaugeField& g) {
  if (g.grid != a.grid()) throw GridMismatch();
  Form<C> out(a.grid());
  parallel_for(a.node_count(), [&](std::size_t n) {
    for (int c = 0; c < C; ++c) out.set(n, c, g.values[n].conjugate(a.get(n, c)));
  });
  return out;
}

OneForm conjugate(const OneForm& a, const GaugeField& g) { return conjugate_form(a, g); }
TwoForm conjugate(const TwoForm& F, const GaugeField& g) { return conjugate_form(F, g); }

CutoffReport cutoff_connection(const Connection& A, double r, double R, const Vec4& center) {
  if (!(r > 0.0) || r >= R) throw DomainError("cutoff_connection needs 0 < r < R");
  const Grid& grid = A.grid();
  const AnnularCutoff chi{center, r, 0.0};

  CutoffReport rep;
  rep.connection = Connection(apply_cutoff_profile(A.form, chi));

  const NodeMask ball = ball_mask(grid, center, R);
  const NodeMask outer = annulus_mask(grid, 0.5 * r, R, center);
  const NodeMask inner = annulus_mask(grid, 0.5 * r, r, center);
  rep.lhs = std::sqrt(l2_norm_sq(curvature(rep.connection), nullptr, &ball));
  rep.curvature_term = std::sqrt(l2_norm_sq(curvature(A), nullptr, &outer));
  rep.sobolev_term = std::sqrt(l2_norm_sq(A.form, nullptr, &inner) + gradient_norm_sq(A.form, &inner));
  const double rhs = rep.curvature_term + rep.sobolev_term;
  rep.ratio = rhs > 0.0 ? rep.lhs / rhs : 0.0;

  ScalarGField c(grid);
  for (std::size_t n = 0; n < grid.node_count(); ++n) c.set(n, 0, {{chi.value(grid.coord(n)), 0.0, 0.0}});
  const OneForm dc = d(c);
  rep.max_dchi = deterministic_max(grid.node_count(), [&](std::size_t n) {
    double s = 0.0;
    for (int mu = 0; mu < 4; ++mu) s += dc.at(n, mu)[0] * dc.at(n, mu)[0];
    return std::sqrt(s);
  });
  return rep;
}

double first_variation(const Connection& A, const OneForm& a) {
  return l2_inner(curvature(A), cov_d(A, a));
}

NodeMask residual_nodes(const Grid& g) {
  const int depth = std::max(2, g.boundary_depth());
  NodeMask m(g.node_count(), 0);
  for (std::size_t n = 0; n < g.node_count(); ++n) m[n] = g.depth_of(n) >= depth ? 1 : 0;
  return m;
}

double ym_residual(const Connection& A) {
  const NodeMask interior = residual_nodes(A.grid());
  return std::sqrt(l2_norm_sq(cov_dstar(A, curvature(A)), nullptr, &interior));
}

double bianchi_residual(const Connection& A) {
  const Grid& g = A.grid();
  const TwoForm F = curvature(A);
  static constexpr int triples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  const NodeMask interior = residual_nodes(g);
  const double sum = deterministic_sum(g.node_count(), [&](std::size_t n) {
    if (!interior[n]) return 0.0;
    const auto idx = g.index(n);
    double s = 0.0;
    for (const auto& t : triples) {
      AlgebraElement r;
      for (int c = 0; c < 3; ++c) {
        const int mu = t[c], nu = t[(c + 1) % 3], la = t[(c + 2) % 3];
        // F_{nu la} with sign for the stored ordering
        const int k = pair_index(std::min(nu, la), std::max(nu, la));
        const double sg = nu < la ? 1.0 : -1.0;
        r += sg * (partial_at(F, n, idx, mu, k) + bracket(A.form.get(n, mu), F.get(n, k)));
      }
      s += inner(r, r);
    }
    return g.quadrature_weight(n) * s;
  });
  return std::sqrt(sum);
}

}  // namespace ymindex
