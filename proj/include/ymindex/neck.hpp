#pragma once

// Neck weights, the inequality harness, the scaling family, neck coercivity
// and the sharp decay check.
//
//   omega_{R,r}(x) = |x|^-2 ((|x|/R)^2 + (r/|x|)^2) = 1/R^2 + r^2/|x|^4
//
//   omega_{eta,k}:  (1/eta^2)(1 + (lambda/eta^2)^2)                          |x-p| >= eta
//                   |x-p|^-2 ((|x-p|/eta)^2 + (lambda/(eta|x-p|))^2)        lambda/eta <= |x-p| <= eta
//                   (eta/lambda)^2 ((1+eta^-2)^2/(1+|x-p|^2/lambda^2)^2 + (lambda/eta^2)^2)   inside
//
// Nodes exactly on an interface take the middle branch.

#include <cstdint>
#include <string>
#include <vector>

#include "ymindex/connection.hpp"
#include "ymindex/secondvar.hpp"

namespace ymindex {

inline constexpr std::uint64_t kDefaultSeed = 0x594D4E4B;

// ---- weights

double omega_Rr_value(double rho, double R, double r);
// Formula applied at every node; nodes off r <= |x-p| <= R are extrapolated
// and listed by annulus_mask's complement. Throws DomainError unless 0 < r < R.
WeightField omega_Rr(const Grid& grid, double R, double r, const Vec4& p = {0.0, 0.0, 0.0, 0.0});

enum class EtaBranch { outer, middle, inner };
EtaBranch omega_eta_k_branch(double rho, double eta, double lambda);
double omega_eta_k_outer(double eta, double lambda);
double omega_eta_k_middle(double rho, double eta, double lambda);
double omega_eta_k_inner(double rho, double eta, double lambda);
double omega_eta_k_value(double rho, double eta, double lambda);
// Largest relative jump between neighbouring branch formulas at |x-p| = eta and lambda/eta.
double omega_eta_k_interface_jump(double eta, double lambda);
// Throws DomainError unless 0 < lambda/eta < eta.
WeightField omega_eta_k(const Grid& grid, double eta, double lambda, const Vec4& p = {0.0, 0.0, 0.0, 0.0});

struct OmegaLimits {
  WeightField eta_inf;  // 1/eta^2 on the background grid
  WeightField hat_inf;  // stereographic weight on the bubble chart
};
OmegaLimits omega_limits(const Grid& background, const Grid& chart, double eta);

// max over chart nodes y with |y| <= 1/eta of |lambda^2 omega_{eta,k}(p + lambda y) - hat omega(y)|.
double omega_pullback_deviation(const Grid& chart, double eta, double lambda);

// ---- inequality harness

// Trial family: `centers` log-radial bump centres in the annulus, each with the
// four 1-form slots, plus `superpositions` random 5-bump combinations. Every
// trial lives on its own grid of `points`^4 nodes sized to its support, so
// small and large radii are resolved alike.
struct TrialConfig {
  int points = 20;
  int centers = 40;
  int superpositions = 50;
  double bump_fraction = 0.5;  // bump radius / centre radius
  std::uint64_t seed = kDefaultSeed;
  Vec4 p{0.0, 0.0, 0.0, 0.0};
};

// Discrete integrals of one trial a (all with the quadrature of its grid).
struct TrialQuantities {
  double l2 = 0.0;        // int |a|^2
  double hardy = 0.0;     // int |a|^2 / |x|^2
  double inv4 = 0.0;      // int |a|^2 / |x|^4
  double weighted = 0.0;  // int |a|^2 omega_{R,r}
  double gradient = 0.0;  // ||grad a||^2
  double hodge = 0.0;     // ||da||^2 + ||d^*a||^2
};

struct InequalityReport {
  std::string id;
  double R = 0.0, r = 0.0;
  TrialConfig config;
  std::vector<double> lhs, rhs;
  double max_ratio = 0.0;
  std::size_t argmax = 0;
  std::size_t trials() const { return lhs.size(); }
};

std::size_t trial_count(const TrialConfig& cfg);
// Builds trial i on its own grid. Throws DomainError if it is not Dirichlet-compatible.
OneForm make_trial(double R, double r, const TrialConfig& cfg, std::size_t i);
TrialQuantities trial_quantities(const OneForm& a, double R, double r, const Vec4& p);
std::vector<TrialQuantities> evaluate_trials(double R, double r, const TrialConfig& cfg);

// int |a|^2/|x|^2 <= C ||grad a||^2
InequalityReport hardy_ratio(double R, double r, const TrialConfig& cfg = {});
// int |a|^2 <= C R^2 ||grad a||^2  and  int |a|^2/|x|^4 <= C r^-2 ||grad a||^2
std::pair<InequalityReport, InequalityReport> poincare_ratios(double R, double r, const TrialConfig& cfg = {});
// ||grad a||^2 <= C (||da||^2 + ||d^*a||^2); only p = 2 is implemented.
InequalityReport gaffney_ratio(double R, double r, const TrialConfig& cfg = {}, int p = 2);
// int |a|^2 omega_{R,r} <= C (||da||^2 + ||d^*a||^2)
InequalityReport combined_ratio(double R, double r, const TrialConfig& cfg = {});
// Reports from already evaluated trials (no recomputation).
InequalityReport make_report(const std::string& id, double R, double r, const TrialConfig& cfg,
                             const std::vector<TrialQuantities>& q);

// ---- scaling family a_eps = phi_eps^* a, phi_eps(x) = x / eps

struct ScalingRow {
  double eps = 0.0;
  double dirichlet = 0.0;  // ||da||^2 + ||d^*a||^2
  double l2 = 0.0;         // int |a|^2
  double weighted = 0.0;   // int |a|^2 / |x|^2
  double cells_across = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double dirichlet_spread = 0.0;  // max relative deviation from the first row
  double l2_scaling_error = 0.0;  // max |l2(eps) / (eps^2 l2(1)) - 1|, relative to the first row
  double weighted_spread = 0.0;
  double tol = 0.02;
  bool dirichlet_constant = false, l2_quadratic = false, weighted_constant = false;
};

// `a` is a 1-form supported in B_support(centre); eps = 1 is the reference row.
// Each eps runs on a grid of `points`^4 nodes scaled by eps (matched
// resolution). Throws DomainError when the support spans fewer than 8 cells.
ScalingReport scaling_noncompactness_demo(const ConnectionSampler& a, const Vec4& centre, double support,
                                          const std::vector<double>& eps, int points = 20, double tol = 0.02);
// Default demonstration form: a bump in slot 1 centred at (0.5, 0, 0, 0), radius 0.4.
ConnectionSampler default_scaling_form();

// ---- neck coercivity

struct CoercivityConfig {
  int centers = 40;
  int superpositions = 50;
  int refinements = 50;       // shift-invert Lanczos steps on the (QQ, omega_{R,r}) pencil
  double refine_tol = 1e-10;  // relative change of the Ritz value
  double energy_budget = 1.0; // small-energy threshold on (1/2) int_{annulus} |F|^2
  double bump_fraction = 0.5;
  std::uint64_t seed = kDefaultSeed;
  Vec4 p{0.0, 0.0, 0.0, 0.0};
};

struct CoercivityReport {
  double c0 = 0.0;         // min(trial_min, refined)
  double trial_min = 0.0;  // min over trials of QQ(a) / int |a|^2 omega
  double refined = 0.0;    // Rayleigh quotient of the Lanczos Ritz vector
  std::size_t trials = 0;
  std::size_t argmin = 0;
  int refinement_steps = 0;
  bool refinement_converged = false;
  double annulus_energy = 0.0;
  bool within_energy_budget = false;
  double ym_residual = 0.0;
  std::size_t dofs = 0;
  std::vector<double> ratios;
  Eigen::VectorXd violating;  // dof vector of the minimiser when c0 <= 0, else empty
};

// Dofs are the free nodes of A's grid with r <= |x-p| <= R.
CoercivityReport neck_coercivity(const Connection& A, double R, double r, const CoercivityConfig& cfg = {});

// ---- sharp decay

using CurvatureSampler = std::function<std::array<AlgebraElement, 6>(const Vec4&)>;

struct DecayReport {
  double R = 0.0, r = 0.0;
  double energy_norm = 0.0;  // E = ||F||_{L2(B_2R \ B_{r/2})}
  double C = 0.0;            // max |F| / (E omega_{R,r}) over the annulus
  double C_plain = 0.0;      // max |F| |x|^2 / E
  double argmax_radius = 0.0;
  double midpoint_radius = 0.0;  // sqrt(r R)
  double envelope_mid = 0.0;     // C E omega_{R,r} at the midpoint
  double plain_mid = 0.0;        // C_plain E / |x|^2 at the midpoint
  bool tighter_at_midpoint = false;
};

// Curvature given pointwise; E by dyadic-shell quadrature with `points`^4 nodes per shell,
// the maxima over `radii` log-spaced radii x `directions` directions.
DecayReport sharp_decay_check(const CurvatureSampler& F, double R, double r, const Vec4& p = {0.0, 0.0, 0.0, 0.0},
                              int points = 16, int radii = 256, int directions = 64);
// Discrete curvature of A; throws OutOfGrid when B_2R(p) leaves the grid.
DecayReport sharp_decay_check(const Connection& A, double R, double r, const Vec4& p = {0.0, 0.0, 0.0, 0.0});

}  // namespace ymindex
