#pragma once

// The BPST instanton of scale lambda centred at p,
//
//   A_mu(x) = iota(Im(conj(q) e_mu)) / (lambda (1 + |q|^2)),   q = (x - p) / lambda,
//
// where e_mu = (1, i, j, k) and iota: Im H -> su(2) is the Lie algebra
// isomorphism i, j, k -> 2e1, 2e2, 2e3. Its curvature is
//
//   F_{mu nu} = iota(conj(e_mu) e_nu - conj(e_nu) e_mu) / (lambda^2 (1 + |q|^2)^2),
//
// anti-self-dual, with |F|^2 = 48 / (lambda^4 (1 + |q|^2)^4) and energy 4 pi^2.
// See docs/bpst.md for the derivation.

#include <array>

#include "ymindex/connection.hpp"

namespace ymindex {

inline constexpr double kPi = 3.14159265358979323846;
// (1/2) int |F|^2 for the unit-charge instanton with <X,Y> = -tr(XY).
inline constexpr double kInstantonEnergy = 4.0 * kPi * kPi;

ConnectionSampler bpst_sampler(double lambda, const Vec4& p = {0.0, 0.0, 0.0, 0.0});
// Throws DomainError for lambda <= 0.
Connection bpst(const Grid& grid, double lambda, const Vec4& p = {0.0, 0.0, 0.0, 0.0});

std::array<AlgebraElement, 6> bpst_curvature_at(const Vec4& x, double lambda, const Vec4& p);
TwoForm bpst_curvature_closed_form(const Grid& grid, double lambda, const Vec4& p = {0.0, 0.0, 0.0, 0.0});
// |F|^2 at distance r from the centre.
double bpst_curvature_norm_sq(double r, double lambda);

// (phi^* a)_mu(x) = lambda a_mu(p + lambda x), phi(x) = p + lambda x, sampled on
// `target` by multilinear interpolation of `a`. Throws OutOfGrid when phi(target)
// leaves the source grid.
OneForm pullback_dilation(const OneForm& a, double lambda, const Vec4& p, const Grid& target);
Connection pullback_dilation(const Connection& A, double lambda, const Vec4& p, const Grid& target);
ConnectionSampler pullback_dilation(const ConnectionSampler& A, double lambda, const Vec4& p);
// Pullback by the inversion x -> x / |x|^2 (undefined at 0).
ConnectionSampler pullback_inversion(const ConnectionSampler& A);

// Weight on the R^4 chart of S^4:
//   1 / (eta^2 |y|^4)                           for |y| >= 1/eta
//   (1 + eta^2)^2 / eta^2 / (1 + |y|^2)^2       for |y| <= 1/eta
double stereographic_weight_value(double r, double eta);
double stereographic_weight_inner(double r, double eta);
double stereographic_weight_outer(double r, double eta);
WeightField stereographic_weight(const Grid& grid, double eta, const Vec4& p = {0.0, 0.0, 0.0, 0.0});

}  // namespace ymindex
