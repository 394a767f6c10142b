#include "ymindex/neck.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ymindex/instanton.hpp"
#include "ymindex/parallel.hpp"

namespace ymindex {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::string tag(const std::string& kind, std::initializer_list<double> v) {
  std::ostringstream os;
  os << kind << ':';
  bool first = true;
  for (double x : v) {
    if (!first) os << ',';
    os << x;
    first = false;
  }
  return os.str();
}

Vec4 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec4 d;
  double s = 0.0;
  do {
    s = 0.0;
    for (auto& c : d) {
      c = nd(rng);
      s += c * c;
    }
  } while (s < 1e-12);
  for (auto& c : d) c /= std::sqrt(s);
  return d;
}

AlgebraElement random_algebra(std::mt19937_64& rng) {
  const Vec4 d = random_direction(rng);
  return {{d[0], d[1], d[2]}};
}

Vec4 offset(const Vec4& p, const Vec4& dir, double t) {
  Vec4 x;
  for (std::size_t i = 0; i < 4; ++i) x[i] = p[i] + t * dir[i];
  return x;
}

WeightField radial_weight(const Grid& g, const Vec4& p, const std::function<double(double)>& f, std::string prov) {
  WeightField w{g, std::vector<double>(g.node_count()), std::move(prov)};
  for (std::size_t n = 0; n < g.node_count(); ++n) w.values[n] = f(distance(g.coord(n), p));
  return w;
}

struct Bump {
  Vec4 c;
  double radius;
  int axis;
  AlgebraElement dir;
};

// Bumps of trial i and the centre / radius of the ball holding them.
struct TrialSpec {
  std::vector<Bump> bumps;
  Vec4 centre;
  double support;
};

TrialSpec trial_spec(double R, double r, double kappa, int centers, const Vec4& p, std::uint64_t seed,
                     std::size_t i, const std::function<double(double)>& clamp_radius = nullptr) {
  const double lo = r / (1.0 - kappa), hi = R / (1.0 + kappa);
  if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("bump fraction must lie in (0, 1)");
  if (!(lo < hi)) throw DomainError("annulus too thin for the trial bumps");
  TrialSpec t;
  const auto nc = static_cast<std::size_t>(centers);
  if (i < 4 * nc) {
    const std::size_t c = i / 4;
    std::mt19937_64 crng(seed + kGolden * (c + 1));
    const double s = centers > 1 ? static_cast<double>(c) / (centers - 1) : 0.5;
    double rho = lo * std::pow(hi / lo, s);
    if (clamp_radius) rho = clamp_radius(rho);
    t.centre = offset(p, random_direction(crng), rho);
    t.support = kappa * rho;
    std::mt19937_64 trng(seed ^ (kGolden * (i + 7)));
    t.bumps.push_back({t.centre, t.support, static_cast<int>(i % 4), random_algebra(trng)});
  } else {
    std::mt19937_64 rng(seed + kGolden * (1000003 + i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> nd;
    double rho = lo * std::pow(hi / lo, u(rng));
    if (clamp_radius) rho = clamp_radius(rho);
    t.centre = offset(p, random_direction(rng), rho);
    t.support = kappa * rho;
    for (int k = 0; k < 5; ++k) {
      const double off = 0.5 * t.support * std::pow(u(rng), 0.25);
      const Vec4 c = offset(t.centre, random_direction(rng), off);
      const int axis = static_cast<int>(u(rng) * 4.0) % 4;
      t.bumps.push_back({c, 0.5 * t.support, axis, nd(rng) * random_algebra(rng)});
    }
  }
  return t;
}

void add_bumps(OneForm& a, const std::vector<Bump>& bumps) {
  const Grid& g = a.grid();
  parallel_for(g.node_count(), [&](std::size_t n) {
    const Vec4 x = g.coord(n);
    for (const Bump& b : bumps) {
      const double v = bump_profile(distance(x, b.c), b.radius);
      if (v != 0.0) a.set(n, b.axis, a.get(n, b.axis) + v * b.dir);
    }
  });
}

// Grid of `points` nodes whose free region holds B_support(centre) two nodes clear of the faces.
Grid local_grid(const Vec4& centre, double support, int points) {
  if (points < 12) throw DomainError("trial grids need at least 12 points per axis");
  const double H = support / (1.0 - 6.0 / (points - 1));
  return Grid(H, points, centre);
}

double relative_spread(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x / v.front() - 1.0));
  return m;
}
}  // namespace

// ---- weights

double omega_Rr_value(double rho, double R, double r) {
  const double r2 = rho * rho;
  return 1.0 / (R * R) + r * r / (r2 * r2);
}

WeightField omega_Rr(const Grid& grid, double R, double r, const Vec4& p) {
  if (!(r > 0.0) || !(r < R)) throw DomainError("omega_{R,r} needs 0 < r < R");
  return radial_weight(grid, p, [=](double rho) { return omega_Rr_value(rho, R, r); }, tag("rr", {R, r}));
}

EtaBranch omega_eta_k_branch(double rho, double eta, double lambda) {
  if (rho > eta) return EtaBranch::outer;
  if (rho < lambda / eta) return EtaBranch::inner;
  return EtaBranch::middle;
}

double omega_eta_k_outer(double eta, double lambda) {
  const double t = lambda / (eta * eta);
  return (1.0 + t * t) / (eta * eta);
}

double omega_eta_k_middle(double rho, double eta, double lambda) {
  const double a = rho / eta, b = lambda / (eta * rho);
  return (a * a + b * b) / (rho * rho);
}

double omega_eta_k_inner(double rho, double eta, double lambda) {
  const double s = 1.0 + 1.0 / (eta * eta);
  const double q = 1.0 + (rho / lambda) * (rho / lambda);
  const double t = lambda / (eta * eta);
  return (eta / lambda) * (eta / lambda) * (s * s / (q * q) + t * t);
}

double omega_eta_k_value(double rho, double eta, double lambda) {
  switch (omega_eta_k_branch(rho, eta, lambda)) {
    case EtaBranch::outer: return omega_eta_k_outer(eta, lambda);
    case EtaBranch::middle: return omega_eta_k_middle(rho, eta, lambda);
    case EtaBranch::inner: return omega_eta_k_inner(rho, eta, lambda);
  }
  return 0.0;
}

double omega_eta_k_interface_jump(double eta, double lambda) {
  const double o = omega_eta_k_outer(eta, lambda), m1 = omega_eta_k_middle(eta, eta, lambda);
  const double ri = lambda / eta;
  const double m2 = omega_eta_k_middle(ri, eta, lambda), in = omega_eta_k_inner(ri, eta, lambda);
  return std::max(std::abs(o - m1) / std::abs(o), std::abs(m2 - in) / std::abs(m2));
}

WeightField omega_eta_k(const Grid& grid, double eta, double lambda, const Vec4& p) {
  if (!(eta > 0.0) || !(lambda > 0.0) || !(lambda / eta < eta))
    throw DomainError("omega_{eta,k} needs 0 < lambda/eta < eta");
  return radial_weight(grid, p, [=](double rho) { return omega_eta_k_value(rho, eta, lambda); },
                       tag("etak", {eta, lambda, p[0], p[1], p[2], p[3]}));
}

OmegaLimits omega_limits(const Grid& background, const Grid& chart, double eta) {
  if (!(eta > 0.0)) throw DomainError("omega limits need eta > 0");
  WeightField inf = WeightField::constant(background, 1.0 / (eta * eta));
  inf.provenance = tag("etainf", {eta});
  return {std::move(inf), stereographic_weight(chart, eta)};
}

double omega_pullback_deviation(const Grid& chart, double eta, double lambda) {
  if (!(lambda / eta < eta)) throw DomainError("omega_{eta,k} needs 0 < lambda/eta < eta");
  return deterministic_max(chart.node_count(), [&](std::size_t n) {
    const double y = distance(chart.coord(n), {0.0, 0.0, 0.0, 0.0});
    if (y > 1.0 / eta || y == 0.0) return 0.0;
    return std::abs(lambda * lambda * omega_eta_k_value(lambda * y, eta, lambda) - stereographic_weight_value(y, eta));
  });
}

// ---- inequality harness

std::size_t trial_count(const TrialConfig& cfg) {
  return 4 * static_cast<std::size_t>(std::max(cfg.centers, 0)) + static_cast<std::size_t>(std::max(cfg.superpositions, 0));
}

OneForm make_trial(double R, double r, const TrialConfig& cfg, std::size_t i) {
  if (i >= trial_count(cfg)) throw DomainError("trial index out of range");
  const TrialSpec t = trial_spec(R, r, cfg.bump_fraction, cfg.centers, cfg.p, cfg.seed, i);
  OneForm a(local_grid(t.centre, t.support, cfg.points));
  add_bumps(a, t.bumps);
  if (!is_dirichlet_compatible(a)) throw DomainError("trial form is not Dirichlet-compatible");
  return a;
}

TrialQuantities trial_quantities(const OneForm& a, double R, double r, const Vec4& p) {
  const Grid& g = a.grid();
  const auto inv = [](double rho, int k) { return rho > 0.0 ? std::pow(rho, -k) : 0.0; };
  const WeightField w2 = radial_weight(g, p, [&](double rho) { return inv(rho, 2); }, "inv2");
  const WeightField w4 = radial_weight(g, p, [&](double rho) { return inv(rho, 4); }, "inv4");
  const WeightField wr = radial_weight(g, p, [&](double rho) { return rho > 0.0 ? omega_Rr_value(rho, R, r) : 0.0; }, "rr");
  TrialQuantities q;
  q.l2 = l2_norm_sq(a);
  q.hardy = l2_norm_sq(a, &w2);
  q.inv4 = l2_norm_sq(a, &w4);
  q.weighted = l2_norm_sq(a, &wr);
  q.gradient = gradient_norm_sq(a);
  q.hodge = l2_norm_sq(d(a)) + l2_norm_sq(dstar(a));
  return q;
}

std::vector<TrialQuantities> evaluate_trials(double R, double r, const TrialConfig& cfg) {
  if (!(r > 0.0) || !(r < R)) throw DomainError("inequality harness needs 0 < r < R");
  std::vector<TrialQuantities> out(trial_count(cfg));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = trial_quantities(make_trial(R, r, cfg, i), R, r, cfg.p);
  return out;
}

InequalityReport make_report(const std::string& id, double R, double r, const TrialConfig& cfg,
                             const std::vector<TrialQuantities>& q) {
  InequalityReport rep;
  rep.id = id;
  rep.R = R;
  rep.r = r;
  rep.config = cfg;
  for (const auto& t : q) {
    double l = 0.0, h = 0.0;
    if (id == "hardy") {
      l = t.hardy;
      h = t.gradient;
    } else if (id == "poincare-outer") {
      l = t.l2;
      h = R * R * t.gradient;
    } else if (id == "poincare-inner") {
      l = t.inv4;
      h = t.gradient / (r * r);
    } else if (id == "gaffney") {
      l = t.gradient;
      h = t.hodge;
    } else if (id == "combined") {
      l = t.weighted;
      h = t.hodge;
    } else {
      throw DomainError("unknown inequality '" + id + "'");
    }
    rep.lhs.push_back(l);
    rep.rhs.push_back(h);
  }
  rep.max_ratio = 0.0;
  for (std::size_t i = 0; i < rep.lhs.size(); ++i) {
    const double ratio = rep.lhs[i] / rep.rhs[i];
    if (i == 0 || ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.argmax = i;
    }
  }
  return rep;
}

InequalityReport hardy_ratio(double R, double r, const TrialConfig& cfg) {
  return make_report("hardy", R, r, cfg, evaluate_trials(R, r, cfg));
}

std::pair<InequalityReport, InequalityReport> poincare_ratios(double R, double r, const TrialConfig& cfg) {
  const auto q = evaluate_trials(R, r, cfg);
  return {make_report("poincare-outer", R, r, cfg, q), make_report("poincare-inner", R, r, cfg, q)};
}

InequalityReport gaffney_ratio(double R, double r, const TrialConfig& cfg, int p) {
  if (p != 2) throw DomainError("only the p = 2 Gaffney inequality is implemented");
  return make_report("gaffney", R, r, cfg, evaluate_trials(R, r, cfg));
}

InequalityReport combined_ratio(double R, double r, const TrialConfig& cfg) {
  return make_report("combined", R, r, cfg, evaluate_trials(R, r, cfg));
}

// ---- scaling family

ConnectionSampler default_scaling_form() {
  return [](const Vec4& x) {
    std::array<AlgebraElement, 4> a;
    const double b = bump_profile(distance(x, {0.5, 0.0, 0.0, 0.0}), 0.4);
    a[1] = b * AlgebraElement{{1.0, 0.5, -0.25}};
    a[0] = (b * x[1]) * AlgebraElement{{0.0, 1.0, 0.0}};
    return a;
  };
}

ScalingReport scaling_noncompactness_demo(const ConnectionSampler& a, const Vec4& centre, double support,
                                          const std::vector<double>& eps, int points, double tol) {
  if (eps.empty()) throw DomainError("scaling demo needs at least one eps");
  ScalingReport rep;
  rep.tol = tol;
  for (double e : eps) {
    if (!(e > 0.0)) throw DomainError("eps must be positive");
    Vec4 c;
    for (std::size_t i = 0; i < 4; ++i) c[i] = e * centre[i];
    const Grid g = local_grid(c, e * support, points);
    ScalingRow row;
    row.eps = e;
    row.cells_across = 2.0 * e * support / g.spacing();
    if (row.cells_across < 8.0) throw DomainError("scaled form spans fewer than 8 cells");
    OneForm ae(g);
    parallel_for(g.node_count(), [&](std::size_t n) {
      Vec4 y = g.coord(n);
      for (auto& v : y) v /= e;
      const auto val = a(y);
      for (int mu = 0; mu < 4; ++mu) ae.set(n, mu, (1.0 / e) * val[static_cast<std::size_t>(mu)]);
    });
    if (!is_dirichlet_compatible(ae)) throw DomainError("scaled form is not Dirichlet-compatible");
    const WeightField w2 = radial_weight(g, {0.0, 0.0, 0.0, 0.0},
                                         [](double rho) { return rho > 0.0 ? 1.0 / (rho * rho) : 0.0; }, "inv2");
    row.dirichlet = l2_norm_sq(d(ae)) + l2_norm_sq(dstar(ae));
    row.l2 = l2_norm_sq(ae);
    row.weighted = l2_norm_sq(ae, &w2);
    rep.rows.push_back(row);
  }
  std::vector<double> dir, l2s, wts;
  const ScalingRow& ref = rep.rows.front();
  for (const auto& row : rep.rows) {
    dir.push_back(row.dirichlet);
    wts.push_back(row.weighted);
    const double s = row.eps / ref.eps;
    l2s.push_back(row.l2 / (s * s));
  }
  rep.dirichlet_spread = relative_spread(dir);
  rep.l2_scaling_error = relative_spread(l2s);
  rep.weighted_spread = relative_spread(wts);
  rep.dirichlet_constant = rep.dirichlet_spread <= tol;
  rep.l2_quadratic = rep.l2_scaling_error <= tol;
  rep.weighted_constant = rep.weighted_spread <= tol;
  return rep;
}

// ---- neck coercivity

CoercivityReport neck_coercivity(const Connection& A, double R, double r, const CoercivityConfig& cfg) {
  if (!(r > 0.0) || !(r < R)) throw DomainError("neck coercivity needs 0 < r < R");
  const Grid& g = A.grid();
  const NodeMask region = annulus_mask(g, r, R, cfg.p);
  const AssembledForm form(A, omega_Rr(g, R, r, cfg.p), &region);
  const DofSpace& dofs = form.dofs();
  const Eigen::VectorXd& W = form.mass();
  const double h = g.spacing();

  CoercivityReport rep;
  rep.dofs = static_cast<std::size_t>(form.dim());
  rep.annulus_energy = ym_energy(A, &region);
  rep.within_energy_budget = rep.annulus_energy <= cfg.energy_budget;
  rep.ym_residual = ym_residual(A);

  // Trials on A's grid: bump radius at least 1.5 cells, support inside the annulus.
  const double kappa = cfg.bump_fraction;
  auto clamp = [&](double rho) { return std::max(rho, r + 1.5 * h); };
  const std::size_t n_trials = 4 * static_cast<std::size_t>(cfg.centers) + static_cast<std::size_t>(cfg.superpositions);
  Eigen::VectorXd best;
  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialSpec t = trial_spec(R, r, kappa, cfg.centers, cfg.p, cfg.seed, i, clamp);
    const double rho = distance(t.centre, cfg.p);
    const double b = std::max(kappa * rho, 1.5 * h);
    if (rho - b < r * (1 - 1e-12) || rho + b > R * (1 + 1e-12)) throw DomainError("annulus too thin for resolved trial bumps on this grid");
    const double scale = b / t.support;
    for (Bump& bp : t.bumps) {
      for (std::size_t k = 0; k < 4; ++k) bp.c[k] = t.centre[k] + scale * (bp.c[k] - t.centre[k]);
      bp.radius *= scale;
    }
    OneForm a(g);
    add_bumps(a, t.bumps);
    const Eigen::VectorXd x = dofs.restrict(a);  // throws if the trial leaves the annulus dofs
    const double den = x.dot(W.cwiseProduct(x));
    if (!(den > 0.0)) continue;
    const double ratio = form.energy(x) / den;
    rep.ratios.push_back(ratio);
    if (rep.ratios.size() == 1 || ratio < rep.trial_min) {
      rep.trial_min = ratio;
      rep.argmin = i;
      best = x;
    }
  }
  rep.trials = rep.ratios.size();
  if (rep.trials == 0) throw DomainError("no usable trial forms in the annulus");

  // shift-invert Lanczos on K^-1 W (self-adjoint in the W inner product),
  // started from the best trial; CG for the inner solves
  const SparseMatrix K = form.stiffness();
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.compute(K);
  cg.setTolerance(1e-12);
  auto wdot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return u.dot(W.cwiseProduct(v)); };
  Eigen::VectorXd x = best / std::sqrt(wdot(best, best));
  double rq = form.energy(x);
  std::vector<Eigen::VectorXd> V{x};
  std::vector<double> alpha, beta;
  double theta_prev = 0.0;
  for (int it = 0; it < cfg.refinements; ++it) {
    Eigen::VectorXd w = cg.solve(W.cwiseProduct(V.back()));
    if (cg.info() != Eigen::Success || !w.allFinite()) break;
    alpha.push_back(wdot(V.back(), w));
    for (int pass = 0; pass < 2; ++pass)
      for (const Eigen::VectorXd& v : V) w -= wdot(v, w) * v;
    const double b = std::sqrt(wdot(w, w));
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      T(j, j) = alpha[static_cast<std::size_t>(j)];
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double theta = es.eigenvalues()[m - 1];
    if (!(theta > 0.0)) break;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
    for (Eigen::Index j = 0; j < m; ++j) y += es.eigenvectors()(j, m - 1) * V[static_cast<std::size_t>(j)];
    y /= std::sqrt(wdot(y, y));
    x = y;
    rq = form.energy(x);
    rep.refinement_steps = it + 1;
    if (it > 0 && std::abs(theta - theta_prev) <= cfg.refine_tol * theta) {
      rep.refinement_converged = true;
      break;
    }
    theta_prev = theta;
    if (!(b > 1e-14 * theta)) {  // invariant subspace
      rep.refinement_converged = true;
      break;
    }
    beta.push_back(b);
    V.push_back(w / b);
  }
  rep.refined = rq;
  rep.c0 = std::min(rep.trial_min, rep.refined);
  if (!(rep.c0 > 0.0)) rep.violating = rep.refined < rep.trial_min ? x : best;
  return rep;
}

// ---- sharp decay

namespace {
void finish_decay(DecayReport& rep) {
  rep.midpoint_radius = std::sqrt(rep.r * rep.R);
  const double m = rep.midpoint_radius;
  rep.envelope_mid = rep.C * rep.energy_norm * omega_Rr_value(m, rep.R, rep.r);
  rep.plain_mid = rep.C_plain * rep.energy_norm / (m * m);
  rep.tighter_at_midpoint = rep.envelope_mid < rep.plain_mid;
}
}  // namespace

DecayReport sharp_decay_check(const CurvatureSampler& F, double R, double r, const Vec4& p, int points, int radii,
                              int directions) {
  if (!(r > 0.0) || !(r < R)) throw DomainError("sharp decay needs 0 < r < R");
  DecayReport rep;
  rep.R = R;
  rep.r = r;
  const double e2 = shell_sum(p, 0.25 * r, 2.0 * R, points, [&](const Vec4& x, double) {
    const double rho = distance(x, p);
    if (rho < 0.5 * r || rho > 2.0 * R) return 0.0;
    return curvature_norm_sq(F(x));
  });
  rep.energy_norm = std::sqrt(std::max(e2, 0.0));
  if (rep.energy_norm == 0.0) {
    finish_decay(rep);
    return rep;
  }
  std::mt19937_64 rng(kDefaultSeed);
  std::vector<Vec4> dirs;
  for (int k = 0; k < directions; ++k) dirs.push_back(random_direction(rng));
  for (int j = 0; j < radii; ++j) {
    const double s = radii > 1 ? static_cast<double>(j) / (radii - 1) : 0.5;
    const double rho = r * std::pow(R / r, s);
    for (const Vec4& dir : dirs) {
      const double f = std::sqrt(curvature_norm_sq(F(offset(p, dir, rho))));
      const double c = f / (rep.energy_norm * omega_Rr_value(rho, R, r));
      if (c > rep.C) {
        rep.C = c;
        rep.argmax_radius = rho;
      }
      rep.C_plain = std::max(rep.C_plain, f * rho * rho / rep.energy_norm);
    }
  }
  finish_decay(rep);
  return rep;
}

DecayReport sharp_decay_check(const Connection& A, double R, double r, const Vec4& p) {
  if (!(r > 0.0) || !(r < R)) throw DomainError("sharp decay needs 0 < r < R");
  const Grid& g = A.grid();
  for (std::size_t a = 0; a < 4; ++a)
    if (std::abs(p[a] - g.center()[a]) + 2.0 * R > g.half_width()) throw OutOfGrid("B_2R(p) leaves the grid");
  DecayReport rep;
  rep.R = R;
  rep.r = r;
  const TwoForm F = curvature(A);
  const NodeMask shell = annulus_mask(g, 0.5 * r, 2.0 * R, p);
  rep.energy_norm = std::sqrt(l2_norm_sq(F, nullptr, &shell));
  if (rep.energy_norm > 0.0) {
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const double rho = distance(g.coord(n), p);
      if (rho < r || rho > R) continue;
      double s = 0.0;
      for (int k = 0; k < 6; ++k) s += inner(F.get(n, k), F.get(n, k));
      const double f = std::sqrt(s);
      const double c = f / (rep.energy_norm * omega_Rr_value(rho, R, r));
      if (c > rep.C) {
        rep.C = c;
        rep.argmax_radius = rho;
      }
      rep.C_plain = std::max(rep.C_plain, f * rho * rho / rep.energy_norm);
    }
  }
  finish_decay(rep);
  return rep;
}

}  // namespace ymindex
