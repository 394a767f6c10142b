#pragma once

// Uniform 4D boxes and su(2)-valued forms collocated at the nodes.
//
// Derivatives are second-order central differences at interior nodes and
// second-order one-sided differences on the box faces. Quadrature is the
// tensor-product trapezoidal rule. Forms are stored node-major, then
// component, then algebra coefficient.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ymindex/errors.hpp"
#include "ymindex/lie.hpp"

namespace ymindex {

class Grid {
 public:
  Grid() = default;
  // Throws DomainError unless half_width > 0, points >= 5, depth >= 1.
  Grid(double half_width, int points_per_axis, const Vec4& center = {0.0, 0.0, 0.0, 0.0}, int boundary_depth = 1);

  double half_width() const { return half_width_; }
  int points() const { return n_; }
  const Vec4& center() const { return center_; }
  int boundary_depth() const { return depth_; }
  double spacing() const { return h_; }

  std::size_t node_count() const { return count_; }
  std::ptrdiff_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }

  std::array<int, 4> index(std::size_t node) const;
  std::size_t node(const std::array<int, 4>& idx) const;
  Vec4 coord(std::size_t node) const;
  double coord(int axis, int i) const { return center_[static_cast<std::size_t>(axis)] - half_width_ + h_ * i; }

  double quadrature_weight(std::size_t node) const;
  bool is_dirichlet(std::size_t node) const;
  // Layers between the node and the nearest box face (0 on the faces).
  int depth_of(std::size_t node) const;

  bool operator==(const Grid& o) const;
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  double half_width_ = 1.0;
  int n_ = 5;
  Vec4 center_{0.0, 0.0, 0.0, 0.0};
  int depth_ = 1;
  double h_ = 0.5;
  std::size_t count_ = 625;
  std::array<std::ptrdiff_t, 4> stride_{125, 25, 5, 1};
};

// One row (or column) of the 1D derivative matrix along an axis.
struct AxisStencil {
  int count = 0;
  std::array<int, 4> offset{};
  std::array<double, 4> weight{};
};

// Row i of D: (Df)_i = sum_k weight_k f_{i + offset_k}.
AxisStencil derivative_row(int i, int n, double h);
// Column j of D, as a gather: (D^T g)_j = sum_k weight_k g_{j + offset_k}.
AxisStencil derivative_column(int j, int n, double h);

// Index of dx^mu ^ dx^nu (mu < nu) in the ordered basis 12,13,14,23,24,34.
inline constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
int pair_index(int mu, int nu);

template <int C>
class Form {
 public:
  static constexpr int kComponents = C;
  static constexpr int kStride = 3 * C;  // doubles per node

  Form() = default;
  explicit Form(const Grid& grid) : grid_(grid), data_(grid.node_count() * kStride, 0.0) {}

  const Grid& grid() const { return grid_; }
  std::size_t node_count() const { return grid_.node_count(); }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  double* at(std::size_t node, int comp) { return data_.data() + node * kStride + 3 * comp; }
  const double* at(std::size_t node, int comp) const { return data_.data() + node * kStride + 3 * comp; }

  AlgebraElement get(std::size_t node, int comp) const {
    const double* p = at(node, comp);
    return {{p[0], p[1], p[2]}};
  }
  void set(std::size_t node, int comp, const AlgebraElement& v) {
    double* p = at(node, comp);
    p[0] = v.c[0];
    p[1] = v.c[1];
    p[2] = v.c[2];
  }

  Form& operator+=(const Form& o) {
    check(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Form& operator-=(const Form& o) {
    check(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Form& operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  friend Form operator*(double s, Form a) { return a *= s; }

  void check(const Form& o) const {
    if (grid_ != o.grid_) throw GridMismatch();
  }

 private:
  Grid grid_;
  std::vector<double> data_;
};

using ScalarGField = Form<1>;
using OneForm = Form<4>;
using TwoForm = Form<6>;

// Node subset; 1 = included.
using NodeMask = std::vector<std::uint8_t>;

struct WeightField {
  Grid grid;
  std::vector<double> values;
  std::string provenance;

  static WeightField constant(const Grid& grid, double value);
};

// Exterior derivative and flat codifferential.
OneForm d(const ScalarGField& f);
TwoForm d(const OneForm& a);
ScalarGField dstar(const OneForm& a);
OneForm dstar(const TwoForm& F);
TwoForm hodge_star(const TwoForm& F);

// Partial derivative of one component along an axis at a node.
template <int C>
AlgebraElement partial_at(const Form<C>& f, std::size_t node, const std::array<int, 4>& idx, int axis, int comp) {
  const Grid& g = f.grid();
  const AxisStencil s = derivative_row(idx[static_cast<std::size_t>(axis)], g.points(), g.spacing());
  AlgebraElement r;
  for (int k = 0; k < s.count; ++k) {
    const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) + s.offset[k] * g.stride(axis));
    const double* p = f.at(nb, comp);
    for (std::size_t a = 0; a < 3; ++a) r.c[a] += s.weight[k] * p[a];
  }
  return r;
}

// Multilinear interpolation of one component at an arbitrary point.
// Throws OutOfGrid outside the box (with a relative slack of 1e-12).
template <int C>
AlgebraElement interpolate(const Form<C>& f, const Vec4& x, int comp) {
  const Grid& g = f.grid();
  std::array<int, 4> base{};
  std::array<double, 4> frac{};
  for (std::size_t a = 0; a < 4; ++a) {
    double t = (x[a] - (g.center()[a] - g.half_width())) / g.spacing();
    const double top = g.points() - 1;
    if (t < -1e-9 || t > top + 1e-9) throw OutOfGrid("interpolation point outside the grid");
    t = t < 0.0 ? 0.0 : (t > top ? top : t);
    int i = static_cast<int>(t);
    if (i >= g.points() - 1) i = g.points() - 2;
    base[a] = i;
    frac[a] = t - i;
  }
  AlgebraElement r;
  for (int corner = 0; corner < 16; ++corner) {
    double w = 1.0;
    std::array<int, 4> idx = base;
    for (std::size_t a = 0; a < 4; ++a) {
      const bool up = (corner >> a) & 1;
      w *= up ? frac[a] : 1.0 - frac[a];
      idx[a] += up ? 1 : 0;
    }
    if (w == 0.0) continue;
    r += w * f.get(g.node(idx), comp);
  }
  return r;
}

// sum over nodes of quadrature weight * omega * sum_comp <u, v>.
// Optional mask restricts the sum; throws GridMismatch on grid mismatch.
template <int C>
double l2_inner(const Form<C>& u, const Form<C>& v, const WeightField* omega = nullptr, const NodeMask* mask = nullptr);

template <int C>
double l2_norm_sq(const Form<C>& u, const WeightField* omega = nullptr, const NodeMask* mask = nullptr) {
  return l2_inner(u, u, omega, mask);
}

// ||grad a||^2 = sum_{mu,nu} ||d_mu a_nu||^2 (one-forms) or sum_mu ||d_mu f||^2.
template <int C>
double gradient_norm_sq(const Form<C>& u, const NodeMask* mask = nullptr);

// Masks
NodeMask all_nodes(const Grid& grid);
NodeMask free_nodes(const Grid& grid);  // complement of the Dirichlet layers
NodeMask ball_mask(const Grid& grid, const Vec4& p, double radius);
// r <= |x - p| <= R. Throws DomainError unless 0 <= r < R.
NodeMask annulus_mask(const Grid& grid, double r, double R, const Vec4& p = {0.0, 0.0, 0.0, 0.0});
NodeMask intersect(const NodeMask& a, const NodeMask& b);
std::size_t count(const NodeMask& m);

// Zero the form on nodes outside the mask.
template <int C>
void restrict_to(Form<C>& f, const NodeMask& mask) {
  for (std::size_t n = 0; n < f.node_count(); ++n)
    if (!mask[n])
      for (int c = 0; c < C; ++c) f.set(n, c, {});
}

// Vanishes on every node outside `mask` (by default, the Dirichlet layers).
bool is_dirichlet_compatible(const OneForm& a, const NodeMask* mask = nullptr);

double distance(const Vec4& a, const Vec4& b);

// Smooth transition: 1 on [0,1], 0 on [2,inf), C-infinity in between.
double cutoff_profile(double t);
double cutoff_profile_derivative(double t);

// chi(x) = profile(|x-p|/outer) * (1 - profile(2|x-p|/inner)):
// chi = 1 on inner <= |x-p| <= outer, supp chi in [inner/2, 2 outer].
struct AnnularCutoff {
  Vec4 center{0.0, 0.0, 0.0, 0.0};
  double inner = 0.0;  // 0 disables the inner cut
  double outer = 0.0;  // 0 disables the outer cut

  // Throws DomainError when inner >= outer (both enabled) or negative radii.
  void validate() const;
  double value(const Vec4& x) const;
  double radial_derivative(double rho) const;
};

// Cutoff for the neck between lambda/eta and eta around p.
AnnularCutoff neck_cutoff(const Vec4& p, double lambda, double eta);

// Real scalar sampled at every node.
std::vector<double> sample_real(const Grid& grid, const std::function<double(const Vec4&)>& f);
OneForm apply_cutoff_profile(const OneForm& a, const AnnularCutoff& chi);

// max over masked nodes of |x - p| * |d chi| with the discrete d.
double cutoff_gradient_bound(const Grid& grid, const AnnularCutoff& chi, const NodeMask* mask = nullptr);

// Smooth bump (1 - (rho/radius)^2)^3 times `algebra_dir` in slot `axis` (0..3).
// Throws OutOfGrid when the support reaches a Dirichlet node or leaves the box.
OneForm make_bump_oneform(const Grid& grid, const Vec4& center, double radius, int axis,
                          const AlgebraElement& algebra_dir);
double bump_profile(double rho, double radius);
double bump_profile_derivative(double rho, double radius);

// Integral of f over a window W(rho), rho = |x - p|, computed on a chain of
// dyadic-shell grids, each with `points` nodes per axis and spacing
// proportional to its radius. W is a smooth partition of unity: W = 1 on
// [2 r_inner, r_outer] (on [0, r_outer] with `core`), W = 0 outside
// [r_inner, 2 r_outer]. f receives the node and the local spacing and must be
// safe to call concurrently. Used for integrands spread over many scales.
double shell_sum(const Vec4& p, double r_inner, double r_outer, int points,
                 const std::function<double(const Vec4& x, double h)>& f, bool core = false);

}  // namespace ymindex
