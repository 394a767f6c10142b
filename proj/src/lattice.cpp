#include "ymindex/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ymindex/parallel.hpp"

namespace ymindex {

Grid::Grid(double half_width, int points_per_axis, const Vec4& center, int boundary_depth)
    : half_width_(half_width), n_(points_per_axis), center_(center), depth_(boundary_depth) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("grid half width must be positive");
  if (points_per_axis < 5) throw DomainError("grid needs at least 5 points per axis");
  if (boundary_depth < 1 || 2 * boundary_depth >= points_per_axis)
    throw DomainError("boundary depth must be >= 1 and leave interior nodes");
  h_ = 2.0 * half_width / (n_ - 1);
  const auto n = static_cast<std::size_t>(n_);
  count_ = n * n * n * n;
  stride_ = {static_cast<std::ptrdiff_t>(n * n * n), static_cast<std::ptrdiff_t>(n * n),
             static_cast<std::ptrdiff_t>(n), 1};
}

std::array<int, 4> Grid::index(std::size_t node) const {
  std::array<int, 4> idx{};
  const auto n = static_cast<std::size_t>(n_);
  for (int a = 3; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(node % n);
    node /= n;
  }
  return idx;
}

std::size_t Grid::node(const std::array<int, 4>& idx) const {
  std::size_t k = 0;
  for (int i : idx) k = k * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  return k;
}

Vec4 Grid::coord(std::size_t node) const {
  const auto idx = index(node);
  Vec4 x{};
  for (int a = 0; a < 4; ++a) x[static_cast<std::size_t>(a)] = coord(a, idx[static_cast<std::size_t>(a)]);
  return x;
}

double Grid::quadrature_weight(std::size_t node) const {
  const auto idx = index(node);
  double w = 1.0;
  for (int i : idx) w *= (i == 0 || i == n_ - 1) ? 0.5 * h_ : h_;
  return w;
}

int Grid::depth_of(std::size_t node) const {
  const auto idx = index(node);
  int m = n_;
  for (int i : idx) m = std::min({m, i, n_ - 1 - i});
  return m;
}

bool Grid::is_dirichlet(std::size_t node) const { return depth_of(node) < depth_; }

bool Grid::operator==(const Grid& o) const {
  return half_width_ == o.half_width_ && n_ == o.n_ && center_ == o.center_ && depth_ == o.depth_;
}

AxisStencil derivative_row(int i, int n, double h) {
  const double s = 0.5 / h;
  AxisStencil st;
  if (i == 0) {
    st.count = 3;
    st.offset = {0, 1, 2, 0};
    st.weight = {-3.0 * s, 4.0 * s, -s, 0.0};
  } else if (i == n - 1) {
    st.count = 3;
    st.offset = {0, -1, -2, 0};
    st.weight = {3.0 * s, -4.0 * s, s, 0.0};
  } else {
    st.count = 2;
    st.offset = {1, -1, 0, 0};
    st.weight = {s, -s, 0.0, 0.0};
  }
  return st;
}

AxisStencil derivative_column(int j, int n, double h) {
  // Collect D(i, j) over the rows i that touch column j.
  AxisStencil st;
  auto push = [&](int row) {
    if (row < 0 || row >= n) return;
    const AxisStencil r = derivative_row(row, n, h);
    for (int k = 0; k < r.count; ++k)
      if (row + r.offset[static_cast<std::size_t>(k)] == j) {
        st.offset[static_cast<std::size_t>(st.count)] = row - j;
        st.weight[static_cast<std::size_t>(st.count)] = r.weight[static_cast<std::size_t>(k)];
        ++st.count;
      }
  };
  // Rows reaching j: j-2..j+2 (one-sided rows reach two away).
  for (int row = j - 2; row <= j + 2; ++row) push(row);
  return st;
}

int pair_index(int mu, int nu) {
  for (int k = 0; k < 6; ++k)
    if (kPairs[static_cast<std::size_t>(k)][0] == mu && kPairs[static_cast<std::size_t>(k)][1] == nu) return k;
  throw DomainError("pair_index expects mu < nu in 0..3");
}

WeightField WeightField::constant(const Grid& grid, double value) {
  return {grid, std::vector<double>(grid.node_count(), value), "constant"};
}

OneForm d(const ScalarGField& f) {
  const Grid& g = f.grid();
  OneForm out(g);
  parallel_for(g.node_count(), [&](std::size_t n) {
    const auto idx = g.index(n);
    for (int mu = 0; mu < 4; ++mu) out.set(n, mu, partial_at(f, n, idx, mu, 0));
  });
  return out;
}

TwoForm d(const OneForm& a) {
  const Grid& g = a.grid();
  TwoForm out(g);
  parallel_for(g.node_count(), [&](std::size_t n) {
    const auto idx = g.index(n);
    for (int k = 0; k < 6; ++k) {
      const int mu = kPairs[static_cast<std::size_t>(k)][0];
      const int nu = kPairs[static_cast<std::size_t>(k)][1];
      out.set(n, k, partial_at(a, n, idx, mu, nu) - partial_at(a, n, idx, nu, mu));
    }
  });
  return out;
}

ScalarGField dstar(const OneForm& a) {
  const Grid& g = a.grid();
  ScalarGField out(g);
  parallel_for(g.node_count(), [&](std::size_t n) {
    const auto idx = g.index(n);
    AlgebraElement s;
    for (int mu = 0; mu < 4; ++mu) s -= partial_at(a, n, idx, mu, mu);
    out.set(n, 0, s);
  });
  return out;
}

OneForm dstar(const TwoForm& F) {
  const Grid& g = F.grid();
  OneForm out(g);
  parallel_for(g.node_count(), [&](std::size_t n) {
    const auto idx = g.index(n);
    for (int nu = 0; nu < 4; ++nu) {
      AlgebraElement s;
      for (int mu = 0; mu < 4; ++mu) {
        if (mu == nu) continue;
        const AlgebraElement p = partial_at(F, n, idx, mu, pair_index(std::min(mu, nu), std::max(mu, nu)));
        if (mu < nu)
          s -= p;
        else
          s += p;  // F_{mu nu} = -F_{nu mu}
      }
      out.set(n, nu, s);
    }
  });
  return out;
}

TwoForm hodge_star(const TwoForm& F) {
  // *(12)=34, *(13)=-24, *(14)=23, *(23)=14, *(24)=-13, *(34)=12
  static constexpr int src[6] = {5, 4, 3, 2, 1, 0};
  static constexpr double sgn[6] = {1.0, -1.0, 1.0, 1.0, -1.0, 1.0};
  TwoForm out(F.grid());
  parallel_for(F.node_count(), [&](std::size_t n) {
    for (int k = 0; k < 6; ++k) out.set(n, k, sgn[k] * F.get(n, src[k]));
  });
  return out;
}

template <int C>
double l2_inner(const Form<C>& u, const Form<C>& v, const WeightField* omega, const NodeMask* mask) {
  u.check(v);
  const Grid& g = u.grid();
  if (omega && omega->grid != g) throw GridMismatch();
  return deterministic_sum(g.node_count(), [&](std::size_t n) {
    if (mask && !(*mask)[n]) return 0.0;
    const double* a = u.at(n, 0);
    const double* b = v.at(n, 0);
    double s = 0.0;
    for (int k = 0; k < 3 * C; ++k) s += a[k] * b[k];
    double w = 0.5 * g.quadrature_weight(n);
    if (omega) w *= omega->values[n];
    return w * s;
  });
}

template <int C>
double gradient_norm_sq(const Form<C>& u, const NodeMask* mask) {
  const Grid& g = u.grid();
  return deterministic_sum(g.node_count(), [&](std::size_t n) {
    if (mask && !(*mask)[n]) return 0.0;
    const auto idx = g.index(n);
    double s = 0.0;
    for (int c = 0; c < C; ++c)
      for (int mu = 0; mu < 4; ++mu) {
        const AlgebraElement p = partial_at(u, n, idx, mu, c);
        s += inner(p, p);
      }
    return g.quadrature_weight(n) * s;
  });
}

template double l2_inner<1>(const Form<1>&, const Form<1>&, const WeightField*, const NodeMask*);
template double l2_inner<4>(const Form<4>&, const Form<4>&, const WeightField*, const NodeMask*);
template double l2_inner<6>(const Form<6>&, const Form<6>&, const WeightField*, const NodeMask*);
template double gradient_norm_sq<1>(const Form<1>&, const NodeMask*);
template double gradient_norm_sq<4>(const Form<4>&, const NodeMask*);
template double gradient_norm_sq<6>(const Form<6>&, const NodeMask*);

NodeMask all_nodes(const Grid& grid) { return NodeMask(grid.node_count(), 1); }

NodeMask free_nodes(const Grid& grid) {
  NodeMask m(grid.node_count(), 0);
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = grid.is_dirichlet(n) ? 0 : 1;
  return m;
}

double distance(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

NodeMask ball_mask(const Grid& grid, const Vec4& p, double radius) {
  NodeMask m(grid.node_count(), 0);
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = distance(grid.coord(n), p) <= radius ? 1 : 0;
  return m;
}

NodeMask annulus_mask(const Grid& grid, double r, double R, const Vec4& p) {
  if (r < 0.0 || !(r < R)) throw DomainError("annulus needs 0 <= r < R");
  NodeMask m(grid.node_count(), 0);
  for (std::size_t n = 0; n < m.size(); ++n) {
    const double rho = distance(grid.coord(n), p);
    m[n] = (rho >= r && rho <= R) ? 1 : 0;
  }
  return m;
}

NodeMask intersect(const NodeMask& a, const NodeMask& b) {
  NodeMask m(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = (a[i] && b[i]) ? 1 : 0;
  return m;
}

std::size_t count(const NodeMask& m) {
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](std::uint8_t v) { return v != 0; }));
}

bool is_dirichlet_compatible(const OneForm& a, const NodeMask* mask) {
  const Grid& g = a.grid();
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const bool inside = mask ? (*mask)[n] != 0 : !g.is_dirichlet(n);
    if (inside) continue;
    const double* p = a.at(n, 0);
    for (int k = 0; k < 12; ++k)
      if (p[k] != 0.0) return false;
  }
  return true;
}

namespace {
double smooth_step_f(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double smooth_step_df(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }
}  // namespace

double cutoff_profile(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double u = smooth_step_f(2.0 - t), v = smooth_step_f(t - 1.0);
  return u / (u + v);
}

double cutoff_profile_derivative(double t) {
  if (t <= 1.0 || t >= 2.0) return 0.0;
  const double u = smooth_step_f(2.0 - t), v = smooth_step_f(t - 1.0);
  const double du = -smooth_step_df(2.0 - t), dv = smooth_step_df(t - 1.0);
  return (du * v - u * dv) / ((u + v) * (u + v));
}

void AnnularCutoff::validate() const {
  if (inner < 0.0 || outer < 0.0) throw DomainError("cutoff radii must be nonnegative");
  if (inner > 0.0 && outer > 0.0 && inner >= outer) throw DomainError("cutoff needs inner < outer");
}

double AnnularCutoff::value(const Vec4& x) const {
  const double rho = distance(x, center);
  double v = 1.0;
  if (outer > 0.0) v *= cutoff_profile(rho / outer);
  if (inner > 0.0) v *= 1.0 - cutoff_profile(2.0 * rho / inner);
  return v;
}

double AnnularCutoff::radial_derivative(double rho) const {
  const double a = outer > 0.0 ? cutoff_profile(rho / outer) : 1.0;
  const double da = outer > 0.0 ? cutoff_profile_derivative(rho / outer) / outer : 0.0;
  const double b = inner > 0.0 ? 1.0 - cutoff_profile(2.0 * rho / inner) : 1.0;
  const double db = inner > 0.0 ? -2.0 * cutoff_profile_derivative(2.0 * rho / inner) / inner : 0.0;
  return da * b + a * db;
}

AnnularCutoff neck_cutoff(const Vec4& p, double lambda, double eta) {
  if (!(lambda > 0.0) || !(eta > 0.0)) throw DomainError("neck cutoff needs lambda, eta > 0");
  AnnularCutoff c{p, lambda / eta, eta};
  c.validate();
  return c;
}

std::vector<double> sample_real(const Grid& grid, const std::function<double(const Vec4&)>& f) {
  std::vector<double> v(grid.node_count());
  parallel_for(v.size(), [&](std::size_t n) { v[n] = f(grid.coord(n)); });
  return v;
}

OneForm apply_cutoff_profile(const OneForm& a, const AnnularCutoff& chi) {
  chi.validate();
  const Grid& g = a.grid();
  OneForm out(g);
  parallel_for(g.node_count(), [&](std::size_t n) {
    const double c = chi.value(g.coord(n));
    const double* src = a.at(n, 0);
    double* dst = out.at(n, 0);
    for (int k = 0; k < 12; ++k) dst[k] = c * src[k];
  });
  return out;
}

double cutoff_gradient_bound(const Grid& grid, const AnnularCutoff& chi, const NodeMask* mask) {
  chi.validate();
  const std::vector<double> v = sample_real(grid, [&](const Vec4& x) { return chi.value(x); });
  return deterministic_max(grid.node_count(), [&](std::size_t n) {
    if (mask && !(*mask)[n]) return 0.0;
    const auto idx = grid.index(n);
    double s = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
      const AxisStencil st = derivative_row(idx[static_cast<std::size_t>(mu)], grid.points(), grid.spacing());
      double dv = 0.0;
      for (int k = 0; k < st.count; ++k)
        dv += st.weight[static_cast<std::size_t>(k)] *
              v[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) +
                                         st.offset[static_cast<std::size_t>(k)] * grid.stride(mu))];
      s += dv * dv;
    }
    return distance(grid.coord(n), chi.center) * std::sqrt(s);
  });
}

double bump_profile(double rho, double radius) {
  if (rho >= radius) return 0.0;
  const double t = 1.0 - (rho / radius) * (rho / radius);
  return t * t * t;
}

double bump_profile_derivative(double rho, double radius) {
  if (rho >= radius) return 0.0;
  const double t = 1.0 - (rho / radius) * (rho / radius);
  return -6.0 * rho / (radius * radius) * t * t;
}

OneForm make_bump_oneform(const Grid& grid, const Vec4& center, double radius, int axis,
                          const AlgebraElement& algebra_dir) {
  if (!(radius > 0.0)) throw DomainError("bump radius must be positive");
  if (axis < 0 || axis > 3) throw DomainError("bump slot must be 0..3");
  for (std::size_t a = 0; a < 4; ++a) {
    const double lo = grid.center()[a] - grid.half_width(), hi = grid.center()[a] + grid.half_width();
    if (center[a] - radius < lo || center[a] + radius > hi) throw OutOfGrid("bump support leaves the grid");
  }
  OneForm out(grid);
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const double b = bump_profile(distance(grid.coord(n), center), radius);
    if (b == 0.0) continue;
    if (grid.is_dirichlet(n)) throw OutOfGrid("bump support reaches Dirichlet nodes");
    out.set(n, axis, b * algebra_dir);
  }
  return out;
}

double shell_sum(const Vec4& p, double r_inner, double r_outer, int points,
                 const std::function<double(const Vec4& x, double h)>& f, bool core) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) throw DomainError("shell_sum needs 0 < r_inner < r_outer");
  const int shells = std::max(1, static_cast<int>(std::ceil(std::log2(r_outer / r_inner) - 1e-12)));
  const double q = std::pow(r_outer / r_inner, 1.0 / shells);

  // Window pieces profile(rho/b) - profile(rho/a), a < b, supported in [a, 2b].
  auto integrate = [&](double a, double b) {
    const Grid g(2.0 * b, points, p);
    return deterministic_sum(g.node_count(), [&](std::size_t n) {
      const Vec4 x = g.coord(n);
      const double rho = distance(x, p);
      const double w = cutoff_profile(rho / b) - (a > 0.0 ? cutoff_profile(rho / a) : 0.0);
      if (w == 0.0) return 0.0;
      return g.quadrature_weight(n) * w * f(x, g.spacing());
    });
  };

  std::vector<double> parts;
  if (core) parts.push_back(integrate(0.0, r_inner));
  double a = r_inner;
  for (int k = 0; k < shells; ++k) {
    const double b = (k + 1 == shells) ? r_outer : a * q;
    parts.push_back(integrate(a, b));
    a = b;
  }
  return pairwise_sum(parts);
}

}  // namespace ymindex
