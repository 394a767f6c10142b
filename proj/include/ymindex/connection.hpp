#pragma once

// Connections held as one global su(2)-valued 1-form.
//
// Conventions: (A^A)_{mu nu} = [A_mu, A_nu], so F = dA + A^A;
// [a, b]_{mu nu} = [a_mu, b_nu] - [a_nu, b_mu], hence [a, a] = 2 a^a.

#include <array>
#include <functional>
#include <vector>

#include "ymindex/lattice.hpp"

namespace ymindex {

struct Connection {
  OneForm form;

  Connection() = default;
  explicit Connection(OneForm a) : form(std::move(a)) {}
  static Connection zero(const Grid& g) { return Connection(OneForm(g)); }
  const Grid& grid() const { return form.grid(); }
};

struct GaugeField {
  Grid grid;
  std::vector<GroupElement> values;

  static GaugeField identity(const Grid& g) { return {g, std::vector<GroupElement>(g.node_count())}; }
  // g(x) = exp(phi(x)).
  static GaugeField from_generator(const Grid& g, const std::function<AlgebraElement(const Vec4&)>& phi);
};

// Analytic connection, x -> (A_0..A_3)(x). Must be safe to call concurrently.
using ConnectionSampler = std::function<std::array<AlgebraElement, 4>(const Vec4&)>;

Connection sample_connection(const Grid& grid, const ConnectionSampler& A);

// Curvature of an analytic connection at x from central differences of step h
// (same stencil as the interior grid operator, no grid stored).
std::array<AlgebraElement, 6> discrete_curvature_at(const ConnectionSampler& A, const Vec4& x, double h);
double curvature_norm_sq(const std::array<AlgebraElement, 6>& F);

TwoForm bracket(const OneForm& a, const OneForm& b);  // [a, b] as above
TwoForm curvature(const Connection& A);
double ym_energy(const Connection& A, const NodeMask* region = nullptr);

OneForm cov_d(const Connection& A, const ScalarGField& phi);   // d phi + [A, phi]
TwoForm cov_d(const Connection& A, const OneForm& a);          // da + [A, a]
ScalarGField cov_dstar(const Connection& A, const OneForm& a); // -sum (d_mu a_mu + [A_mu, a_mu])
OneForm cov_dstar(const Connection& A, const TwoForm& G);      // -sum_mu (d_mu G_{mu nu} + [A_mu, G_{mu nu}])

struct GaugeResult {
  Connection connection;
  double max_deviation = 0.0;  // largest non-algebra part dropped by the projection
};

// A^g = g^{-1} A g + g^{-1} dg, with dg from the lattice stencil on matrix
// entries. Throws DomainError when the projection drops more than `tol`
// (the gauge is too rough for the grid).
GaugeResult gauge_transform(const Connection& A, const GaugeField& g, double tol = 1e-6);
// g^{-1} a g
OneForm conjugate(const OneForm& a, const GaugeField& g);
TwoForm conjugate(const TwoForm& F, const GaugeField& g);

struct CutoffReport {
  Connection connection;  // chi A
  double lhs = 0.0;          // ||F_{chi A}||_{L2(B_R)}
  double curvature_term = 0.0;  // ||F_A||_{L2(B_R \ B_{r/2})}
  double sobolev_term = 0.0;    // ||A||_{W^{1,2}(B_r \ B_{r/2})}
  double ratio = 0.0;           // lhs / (curvature_term + sobolev_term)
  double max_dchi = 0.0;        // sup |d chi| on the grid
};

// chi = 1 on B_R \ B_r, supp chi in B_R \ B_{r/2}, |d chi| <= 4/r.
CutoffReport cutoff_connection(const Connection& A, double r, double R, const Vec4& center = {0.0, 0.0, 0.0, 0.0});

double first_variation(const Connection& A, const OneForm& a);
// Nodes at least max(2, boundary depth) layers inside, where second
// differences never see a one-sided boundary stencil.
NodeMask residual_nodes(const Grid& g);
// ||d_A^* F_A||_{L2} over residual_nodes.
double ym_residual(const Connection& A);
// ||d_A F_A||_{L2} over residual_nodes, with
// (d_A F)_{mu nu la} = cyclic sum of (d_mu F_{nu la} + [A_mu, F_{nu la}]).
double bianchi_residual(const Connection& A);

}  // namespace ymindex
