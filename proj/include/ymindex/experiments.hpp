#pragma once

// Synthetic bubbling sequences: a background with a shrinking BPST bubble
// glued in at p, energy bookkeeping along the sequence, the index /
// signature comparison with the two limits, and the curvature-weight floor.
//
// Gluing. The regular-gauge bubble tends to the pure gauge g^-1 dg,
// g = (x-p)/|x-p|, away from its core, so it cannot be cut off to zero inside
// the neck without leaving a charge -1 transition there. The background is
// therefore brought into the same frame instead:
//
//   A_k = bpst(lambda, p) + (1 - chi) g^-1 A_inf g
//
// with chi = 1 on |x-p| <= sqrt(lambda), chi = 0 on |x-p| >= eta (profile in
// log |x-p|). Outside B_eta this is the gauge transform of A_inf by g plus the
// O(lambda^2 / |x|^3) bubble tail; inside B_sqrt(lambda) it is the bubble.
// With a zero background A_k is exactly bpst(lambda, p).

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymindex/connection.hpp"
#include "ymindex/spectral.hpp"

namespace ymindex {

struct BackgroundSpec {
  std::string kind = "zero";  // "zero" | "bpst"
  double lambda = 1.0;        // for "bpst"
  Vec4 center{0.0, 0.0, 0.0, 0.0};

  ConnectionSampler sampler() const;
  Connection on(const Grid& g) const;
  bool is_zero() const { return kind == "zero"; }
};

struct BubbleSchedule {
  BackgroundSpec background;
  std::vector<double> lambdas;  // strictly decreasing
  Vec4 p{0.0, 0.0, 0.0, 0.0};
  double eta = 0.5;

  // energy bookkeeping: product rule around p, Gauss-Legendre in log|x-p| times a
  // uniform rule on S^3 in Hopf coordinates, so region edges are exact
  double domain_radius = 1.0;  // total energy over B_domain(p)
  int angular_points = 16;     // per Hopf angle; half as many Gauss nodes in sin^2 xi
  int radial_panels = 6;       // 5-point panels per unit of log radius

  // spectral runs: one grid per k, [-L, L]^4 around p, spacing <= lambda_k / cells_per_lambda
  double half_width = 0.5;
  double cells_per_lambda = 2.0;
  int max_points = 33;         // beyond this the bubble counts as under-resolved
  double region_radius = 0.0;  // > 0: dofs restricted to B_region(p) (and its pullback on the chart)
  int eigs = 8;
  double tau_rel = 1e-4;  // tau = tau_rel * largest eigenvalue of each pencil
  SolverOptions solver;

  // Throws DomainError on an empty or non-decreasing list, lambda <= 0, eta <= 0.
  void validate() const;
  // Additionally lambda_k / eta < eta for every k (needed by omega_{eta,k} and the glue).
  void validate_neck() const;
  int points_for(double lambda) const;  // odd, so p is a node; throws DomainError past max_points
  Grid grid_for(double lambda) const;

  nlohmann::json to_json() const;
  static BubbleSchedule from_json(const nlohmann::json& j);  // throws FormatError
};

// The twisting gauge g(x) = (x-p)/|x-p| applied to an algebra element: g^-1 X g.
AlgebraElement twist(const AlgebraElement& X, const Vec4& x, const Vec4& p);
// chi of the glue: 1 on rho <= sqrt(lambda), 0 on rho >= eta.
double glue_cutoff(double rho, double lambda, double eta);

// Throws DomainError unless lambda / eta < eta.
ConnectionSampler glue_bubble(const ConnectionSampler& background, double lambda, const Vec4& p, double eta);
// Grid version; nodes with chi = 1 carry bpst(grid, lambda, p) bitwise.
Connection glue_bubble(const Connection& background, double lambda, const Vec4& p, double eta);

// ---- energy quantization

struct QuantizationRow {
  double lambda = 0.0;
  double total = 0.0;       // (1/2) int_{B_domain} |F_k|^2
  double core = 0.0;        // |x-p| <= lambda/eta
  double neck = 0.0;        // lambda/eta < |x-p| < eta (0 when empty)
  double outer = 0.0;       // eta <= |x-p| <= domain
  double bubble = 0.0;      // pulled back to the chart: |y| <= eta/lambda
  double background = 0.0;  // limit energy (1/2) int_{B_domain} |F_inf|^2
  double deficit = 0.0;     // |total - background - bubble|
  bool neck_empty = false;
};

struct QuantizationReport {
  std::vector<QuantizationRow> rows;
  double unit_energy = 0.0;  // 4 pi^2, the energy of bpst(1, 0)
  bool neck_decreasing = false;     // within 1e-3 relative
  bool deficit_decreasing = false;
  double bubble_error = 0.0;        // |bubble - unit| / unit at the last k
  bool bubble_within_3pct = false;
};

// Neck and glue need lambda/eta < eta only when the background is nonzero;
// with a zero background a k whose neck is empty is reported as such.
QuantizationReport quantization_run(const BubbleSchedule& s);

// ---- semicontinuity

struct SemicontinuityRow {
  double lambda = 0.0;
  int points = 0;
  double ym_residual = 0.0;
  SpectralReport sequence;    // (QQ_{A_k}, omega_{eta,k}) on the grid of k
  SpectralReport background;  // (QQ_{A_inf}, omega_{eta,inf}) on the same grid
  SpectralReport bubble;      // (QQ_{bpst(1)}, hat omega_{eta,inf}) on the pulled-back grid
  int index_margin = 0;       // ind_k - ind_inf - ind_hat  (>= 0 expected)
  int signature_margin = 0;   // sig_inf + sig_hat - sig_k  (>= 0 expected)
  bool index_ok = false, signature_ok = false, dimension_ok = false;
  bool conclusive = false;    // every solve valid and every count complete
  double min_eigenvalue = 0.0;
};

struct SemicontinuityReport {
  std::vector<SemicontinuityRow> rows;
  double mu0 = 0.0;  // single floor: every computed eigenvalue of the sequence pencils >= -mu0
  double mu0_curvature = 0.0;  // max |F_k| / omega_{eta,k} over the schedule
  double mu0_bound = 0.0;      // bracket_constant() * mu0_curvature
  bool floor_consistent = false;
  bool index_inequality = false, signature_inequality = false, dimension_inequality = false;
  bool conclusive = false;
};

SemicontinuityReport semicontinuity_run(const BubbleSchedule& s);
// The comparison step alone, for injected reports (planted pencils).
void evaluate_semicontinuity(SemicontinuityRow& row);
void finish_semicontinuity(SemicontinuityReport& rep);

// ---- curvature against the weight

struct CurvatureWeightRow {
  double lambda = 0.0;
  double max_ratio = 0.0;  // max |F_k| / omega_{eta,k}
  double outer = 0.0, neck = 0.0, core = 0.0;  // maxima per region
};

struct CurvatureWeightReport {
  double eta = 0.0;
  std::vector<CurvatureWeightRow> rows;
  double mu0 = 0.0;  // max over k
  double core_limit = 0.0;  // sqrt(48) eta^2 / (1 + eta^2)^2, the lambda -> 0 value on the core
};

// Sampled on `radii` log-spaced radii in [lambda/(8 eta), domain] x `directions` directions.
CurvatureWeightReport curvature_weight_bound_run(const BubbleSchedule& s, int radii = 192, int directions = 48);

// Floor sweep over eta (no admissible eta_0 is known in closed form).
struct EtaSweepRow {
  double eta = 0.0;
  double mu0 = 0.0;
  bool valid = false;  // schedule admissible for this eta
};
std::vector<EtaSweepRow> eta_sweep(const BubbleSchedule& s, const std::vector<double>& etas = {0.5, 0.35, 0.25});

// Weight spec mini-language: const:c | rr:R,r | etak:eta,lambda,px,py,pz,pw |
// etainf:eta | hatinf:eta. Throws DomainError on anything else.
WeightField weight_from_spec(const Grid& grid, const std::string& spec);

// C with |<F, [a, a]>| <= C |F| |a|^2 pointwise, for the pairing used in QQ.
double bracket_constant();

}  // namespace ymindex
