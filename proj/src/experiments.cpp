#include "ymindex/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "ymindex/instanton.hpp"
#include "ymindex/neck.hpp"
#include "ymindex/secondvar.hpp"

namespace ymindex {

// ---- schedule

ConnectionSampler BackgroundSpec::sampler() const {
  if (kind == "zero") return [](const Vec4&) { return std::array<AlgebraElement, 4>{}; };
  if (kind == "bpst") return bpst_sampler(lambda, center);
  throw DomainError("unknown background kind '" + kind + "'");
}

Connection BackgroundSpec::on(const Grid& g) const {
  if (kind == "zero") return Connection::zero(g);
  if (kind == "bpst") return bpst(g, lambda, center);
  throw DomainError("unknown background kind '" + kind + "'");
}

void BubbleSchedule::validate() const {
  if (lambdas.empty()) throw DomainError("schedule has no bubble scales");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0)) throw DomainError("bubble scales must be positive");
    if (k > 0 && !(lambdas[k] < lambdas[k - 1])) throw DomainError("bubble scales must decrease");
  }
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  if (!(domain_radius > eta)) throw DomainError("domain radius must exceed eta");
  if (background.kind != "zero" && background.kind != "bpst")
    throw DomainError("unknown background kind '" + background.kind + "'");
}

void BubbleSchedule::validate_neck() const {
  validate();
  for (double l : lambdas)
    if (!(l / eta < eta)) throw DomainError("lambda/eta < eta violated: the neck is empty");
}

int BubbleSchedule::points_for(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("bubble scale must be positive");
  int n = static_cast<int>(std::ceil(2.0 * half_width * cells_per_lambda / lambda - 1e-9)) + 1;
  if (n % 2 == 0) ++n;
  n = std::max(n, 5);
  if (n > max_points)
    throw DomainError("under-resolved bubble: lambda = " + std::to_string(lambda) + " needs " + std::to_string(n) +
                      " points per axis (max " + std::to_string(max_points) + ")");
  return n;
}

Grid BubbleSchedule::grid_for(double lambda) const { return Grid(half_width, points_for(lambda), p); }

namespace {
nlohmann::json vec_json(const Vec4& v) { return nlohmann::json::array({v[0], v[1], v[2], v[3]}); }
Vec4 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("expected a 4-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}
}  // namespace

nlohmann::json BubbleSchedule::to_json() const {
  return {{"schema", 1},
          {"background", {{"kind", background.kind}, {"lambda", background.lambda}, {"center", vec_json(background.center)}}},
          {"lambdas", lambdas},
          {"p", vec_json(p)},
          {"eta", eta},
          {"domain_radius", domain_radius},
          {"angular_points", angular_points},
          {"radial_panels", radial_panels},
          {"half_width", half_width},
          {"cells_per_lambda", cells_per_lambda},
          {"max_points", max_points},
          {"region_radius", region_radius},
          {"eigs", eigs},
          {"tau_rel", tau_rel}};
}

BubbleSchedule BubbleSchedule::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw FormatError("schedule must be a JSON object");
    if (j.value("schema", 0) != 1) throw FormatError("unsupported schedule schema (expected 1)");
    BubbleSchedule s;
    if (j.contains("background")) {
      const auto& b = j.at("background");
      s.background.kind = b.value("kind", std::string("zero"));
      s.background.lambda = b.value("lambda", 1.0);
      if (b.contains("center")) s.background.center = json_vec(b.at("center"));
    }
    s.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("p")) s.p = json_vec(j.at("p"));
    s.eta = j.value("eta", s.eta);
    s.domain_radius = j.value("domain_radius", s.domain_radius);
    s.angular_points = j.value("angular_points", s.angular_points);
    s.radial_panels = j.value("radial_panels", s.radial_panels);
    s.half_width = j.value("half_width", s.half_width);
    s.cells_per_lambda = j.value("cells_per_lambda", s.cells_per_lambda);
    s.max_points = j.value("max_points", s.max_points);
    s.region_radius = j.value("region_radius", s.region_radius);
    s.eigs = j.value("eigs", s.eigs);
    s.tau_rel = j.value("tau_rel", s.tau_rel);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad schedule: ") + e.what());
  }
}

// ---- glue

AlgebraElement twist(const AlgebraElement& X, const Vec4& x, const Vec4& p) {
  Quaternion u{x[0] - p[0], x[1] - p[1], x[2] - p[2], x[3] - p[3]};
  const double n = std::sqrt(u.norm2());
  if (n == 0.0) return X;
  u = (1.0 / n) * u;
  // iota is linear, so conjugating the coefficient vector as an imaginary quaternion is enough
  const Quaternion q = u.conj() * Quaternion{0.0, X[0], X[1], X[2]} * u;
  return {{q.x, q.y, q.z}};
}

double glue_cutoff(double rho, double lambda, double eta) {
  const double s = std::sqrt(lambda);
  if (rho <= s) return 1.0;
  if (rho >= eta) return 0.0;
  return cutoff_profile(1.0 + std::log(rho / s) / std::log(eta / s));
}

namespace {
void check_glue(double lambda, double eta) {
  if (!(lambda > 0.0) || !(eta > 0.0)) throw DomainError("glue needs lambda, eta > 0");
  if (!(lambda / eta < eta)) throw DomainError("overlapping transition regions: lambda/eta must be below eta");
}
}  // namespace

ConnectionSampler glue_bubble(const ConnectionSampler& background, double lambda, const Vec4& p, double eta) {
  check_glue(lambda, eta);
  const ConnectionSampler bubble = bpst_sampler(lambda, p);
  return [=](const Vec4& x) {
    auto A = bubble(x);
    const double c = 1.0 - glue_cutoff(distance(x, p), lambda, eta);
    if (c != 0.0) {
      const auto B = background(x);
      for (int mu = 0; mu < 4; ++mu) A[mu] = A[mu] + c * twist(B[mu], x, p);
    }
    return A;
  };
}

Connection glue_bubble(const Connection& background, double lambda, const Vec4& p, double eta) {
  check_glue(lambda, eta);
  const Grid& g = background.grid();
  Connection A = bpst(g, lambda, p);
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Vec4 x = g.coord(n);
    const double c = 1.0 - glue_cutoff(distance(x, p), lambda, eta);
    if (c == 0.0) continue;
    for (int mu = 0; mu < 4; ++mu) A.form.set(n, mu, A.form.get(n, mu) + c * twist(background.form.get(n, mu), x, p));
  }
  return A;
}

// ---- quantization

namespace {
// (1/2)|F|^2 of a sampler with a finite-difference step tied to the local scale
double energy_density(const ConnectionSampler& A, const Vec4& x, double rho, double scale) {
  const double hf = 0.005 * (rho + scale);
  return 0.5 * curvature_norm_sq(discrete_curvature_at(A, x, hf));
}

constexpr std::array<double, 5> kGaussX{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                        0.9061798459386640};
constexpr std::array<double, 5> kGaussW{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                        0.2369268850561891, 0.2369268850561891};

struct SphereRule {
  std::vector<Vec4> dirs;
  std::vector<double> w;  // sums to 2 pi^2
};

// x = (cos xi cos a, cos xi sin a, sin xi cos b, sin xi sin b): dS = (1/2) d(sin^2 xi) da db
SphereRule sphere_rule(int n) {
  const Eigen::Index m = std::max(2, n / 2);
  // Gauss-Legendre in u = sin^2 xi on [0, 1] via Golub-Welsch
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 1; i < m; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  SphereRule r;
  const double da = 2.0 * M_PI / n;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = 0.5 * (1.0 + es.eigenvalues()(i));
    const double wu = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);  // sums to 1 on [0, 1]
    const double c = std::sqrt(1.0 - u), s = std::sqrt(u);
    for (int ia = 0; ia < n; ++ia)
      for (int ib = 0; ib < n; ++ib) {
        const double a = (ia + 0.5) * da, b = ib * da;
        r.dirs.push_back({c * std::cos(a), c * std::sin(a), s * std::cos(b), s * std::sin(b)});
        r.w.push_back(0.5 * wu * da * da);
      }
  }
  return r;
}

// (1/2) int_{a <= |x-p| <= b} |F|^2; a = 0 gives the ball, with a linear panel on [0, min(b, scale)]
double region_energy(const ConnectionSampler& A, const Vec4& p, double a, double b, double scale,
                     const BubbleSchedule& s) {
  if (!(b > a)) return 0.0;
  const SphereRule S = sphere_rule(s.angular_points);
  // radial nodes and weights for int rho^3 d rho
  std::vector<double> rho, wr;
  auto linear = [&](double r0, double r1) {
    for (int k = 0; k < 5; ++k) {
      const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * kGaussX[k];
      rho.push_back(r);
      wr.push_back(0.5 * (r1 - r0) * kGaussW[k] * r * r * r);
    }
  };
  double lo = a;
  if (a == 0.0) {
    lo = std::min(b, scale);
    for (int i = 0; i < 4; ++i) linear(lo * i / 4.0, lo * (i + 1) / 4.0);
  }
  if (b > lo) {
    const double L = std::log(b / lo);
    const int panels = std::max(1, static_cast<int>(std::ceil(L * s.radial_panels)));
    for (int i = 0; i < panels; ++i) {
      const double t0 = std::log(lo) + L * i / panels, t1 = std::log(lo) + L * (i + 1) / panels;
      for (int k = 0; k < 5; ++k) {
        const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * kGaussX[k];
        const double r = std::exp(t);
        rho.push_back(r);
        wr.push_back(0.5 * (t1 - t0) * kGaussW[k] * std::pow(r, 4));
      }
    }
  }
  const std::size_t nd = S.dirs.size();
  std::vector<double> part(rho.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double acc = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
      Vec4 x;
      for (std::size_t c = 0; c < 4; ++c) x[c] = p[c] + rho[i] * S.dirs[d][c];
      acc += S.w[d] * energy_density(A, x, rho[i], scale);
    }
    part[i] = wr[i] * acc;
  }
  double e = 0.0;
  for (double v : part) e += v;
  return e;
}
}  // namespace

QuantizationReport quantization_run(const BubbleSchedule& s) {
  s.validate();
  const bool zero = s.background.is_zero();
  if (!zero) s.validate_neck();
  const ConnectionSampler bg = s.background.sampler();
  const double bg_energy = zero ? 0.0 : region_energy(bg, s.p, 0.0, s.domain_radius, 1.0, s);

  QuantizationReport rep;
  rep.unit_energy = kInstantonEnergy;
  for (double lam : s.lambdas) {
    const ConnectionSampler A = zero ? bpst_sampler(lam, s.p) : glue_bubble(bg, lam, s.p, s.eta);
    QuantizationRow row;
    row.lambda = lam;
    const double a = lam / s.eta, b = s.eta;
    row.neck_empty = !(a < b);
    row.total = region_energy(A, s.p, 0.0, s.domain_radius, lam, s);
    row.core = region_energy(A, s.p, 0.0, std::min(a, s.domain_radius), lam, s);
    row.neck = row.neck_empty ? 0.0 : region_energy(A, s.p, a, b, lam, s);
    row.outer = region_energy(A, s.p, std::max(a, b), s.domain_radius, lam, s);
    // the bubble seen in its own chart, y = (x - p) / lambda
    const ConnectionSampler chart = pullback_dilation(A, lam, s.p);
    row.bubble = region_energy(chart, {0, 0, 0, 0}, 0.0, s.eta / lam, 1.0, s);
    row.background = bg_energy;
    row.deficit = std::abs(row.total - row.background - row.bubble);
    rep.rows.push_back(row);
  }
  rep.neck_decreasing = rep.deficit_decreasing = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto &prev = rep.rows[k - 1], &cur = rep.rows[k];
    if (cur.neck > prev.neck + 1e-3 * std::max(prev.neck, cur.neck)) rep.neck_decreasing = false;
    if (!(cur.deficit < prev.deficit)) rep.deficit_decreasing = false;
  }
  rep.bubble_error = std::abs(rep.rows.back().bubble - rep.unit_energy) / rep.unit_energy;
  rep.bubble_within_3pct = rep.bubble_error <= 0.03;
  return rep;
}

// ---- semicontinuity

void evaluate_semicontinuity(SemicontinuityRow& row) {
  const auto& k = row.sequence;
  const auto& inf = row.background;
  const auto& hat = row.bubble;
  row.index_margin = k.morse_index - inf.morse_index - hat.morse_index;
  row.signature_margin = inf.signature + hat.signature - k.signature;
  row.index_ok = row.index_margin >= 0;
  row.signature_ok = row.signature_margin >= 0;
  // dim W_{eta,k} <= dim W_{eta,inf} + dim hat W_{eta,inf}: the spaces are spanned by the
  // eigenvectors with eigenvalue <= 0, so the dimensions are the signatures
  row.dimension_ok = row.signature_ok;
  row.conclusive = k.valid && inf.valid && hat.valid && k.complete && inf.complete && hat.complete;
  row.min_eigenvalue = k.eigenvalues.empty() ? std::numeric_limits<double>::quiet_NaN() : k.eigenvalues.front();
}

void finish_semicontinuity(SemicontinuityReport& rep) {
  rep.mu0 = 0.0;
  rep.conclusive = !rep.rows.empty();
  rep.index_inequality = rep.signature_inequality = rep.dimension_inequality = true;
  for (const auto& r : rep.rows) {
    rep.conclusive = rep.conclusive && r.conclusive;
    rep.index_inequality = rep.index_inequality && r.index_ok;
    rep.signature_inequality = rep.signature_inequality && r.signature_ok;
    rep.dimension_inequality = rep.dimension_inequality && r.dimension_ok;
    if (std::isfinite(r.min_eigenvalue)) rep.mu0 = std::max(rep.mu0, -r.min_eigenvalue);
  }
  // an inconclusive run never passes
  if (!rep.conclusive) rep.index_inequality = rep.signature_inequality = rep.dimension_inequality = false;
}

namespace {
SpectralReport solve_pencil(const AssembledForm& form, const BubbleSchedule& s) {
  const Pencil P = Pencil::from_form(form);
  const int k = static_cast<int>(std::min<Eigen::Index>(s.eigs, P.dim));
  const double tau = s.tau_rel * largest_eig(P);
  SpectralReport r = smallest_eigs(P, k, tau, s.solver);
  r.vectors.resize(0, 0);
  return r;
}
}  // namespace

SemicontinuityReport semicontinuity_run(const BubbleSchedule& s) {
  s.validate_neck();
  SemicontinuityReport rep;
  for (double lam : s.lambdas) {
    SemicontinuityRow row;
    row.lambda = lam;
    const Grid g = s.grid_for(lam);
    row.points = g.points();
    const Connection bg = s.background.on(g);
    const Connection A = glue_bubble(bg, lam, s.p, s.eta);
    row.ym_residual = ym_residual(A);
    // the bubble chart is the pullback of the grid of k: same nodes, spacing / lambda
    const Grid chart(g.half_width() / lam, g.points(), {0, 0, 0, 0});
    NodeMask region, chart_region;
    if (s.region_radius > 0.0) {
      region = ball_mask(g, s.p, s.region_radius);
      chart_region = ball_mask(chart, {0, 0, 0, 0}, s.region_radius / lam);
    }
    const NodeMask* reg = s.region_radius > 0.0 ? &region : nullptr;
    const NodeMask* creg = s.region_radius > 0.0 ? &chart_region : nullptr;
    const OmegaLimits lim = omega_limits(g, chart, s.eta);
    row.sequence = solve_pencil(AssembledForm(A, omega_eta_k(g, s.eta, lam, s.p), reg), s);
    row.background = solve_pencil(AssembledForm(bg, lim.eta_inf, reg), s);
    row.bubble = solve_pencil(AssembledForm(bpst(chart, 1.0), lim.hat_inf, creg), s);
    evaluate_semicontinuity(row);
    rep.rows.push_back(std::move(row));
  }
  finish_semicontinuity(rep);
  const CurvatureWeightReport cw = curvature_weight_bound_run(s);
  rep.mu0_curvature = cw.mu0;
  rep.mu0_bound = bracket_constant() * cw.mu0;
  rep.floor_consistent = rep.mu0 <= rep.mu0_bound;
  return rep;
}

// ---- curvature against the weight

CurvatureWeightReport curvature_weight_bound_run(const BubbleSchedule& s, int radii, int directions) {
  s.validate_neck();
  if (radii < 2 || directions < 1) throw DomainError("need at least 2 radii and 1 direction");
  const ConnectionSampler bg = s.background.sampler();
  CurvatureWeightReport rep;
  rep.eta = s.eta;
  rep.core_limit = std::sqrt(48.0) * s.eta * s.eta / std::pow(1.0 + s.eta * s.eta, 2);
  std::mt19937_64 rng(kDefaultSeed);
  std::normal_distribution<double> nd;
  std::vector<Vec4> dirs(static_cast<std::size_t>(directions));
  for (auto& d : dirs) {
    double n2 = 0.0;
    for (auto& c : d) {
      c = nd(rng);
      n2 += c * c;
    }
    for (auto& c : d) c /= std::sqrt(n2);
  }
  for (double lam : s.lambdas) {
    const ConnectionSampler A = glue_bubble(bg, lam, s.p, s.eta);
    CurvatureWeightRow row;
    row.lambda = lam;
    const double r0 = lam / (8.0 * s.eta), r1 = s.domain_radius;
    for (int i = 0; i < radii; ++i) {
      const double rho = r0 * std::pow(r1 / r0, static_cast<double>(i) / (radii - 1));
      for (const Vec4& d : dirs) {
        Vec4 x;
        for (std::size_t c = 0; c < 4; ++c) x[c] = s.p[c] + rho * d[c];
        const double f = std::sqrt(curvature_norm_sq(discrete_curvature_at(A, x, 0.005 * (rho + lam))));
        const double ratio = f / omega_eta_k_value(rho, s.eta, lam);
        row.max_ratio = std::max(row.max_ratio, ratio);
        switch (omega_eta_k_branch(rho, s.eta, lam)) {
          case EtaBranch::outer: row.outer = std::max(row.outer, ratio); break;
          case EtaBranch::middle: row.neck = std::max(row.neck, ratio); break;
          case EtaBranch::inner: row.core = std::max(row.core, ratio); break;
        }
      }
    }
    rep.mu0 = std::max(rep.mu0, row.max_ratio);
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<EtaSweepRow> eta_sweep(const BubbleSchedule& s, const std::vector<double>& etas) {
  std::vector<EtaSweepRow> out;
  for (double eta : etas) {
    BubbleSchedule t = s;
    t.eta = eta;
    EtaSweepRow row;
    row.eta = eta;
    try {
      t.validate_neck();
      row.valid = true;
    } catch (const DomainError&) {
      row.valid = false;
    }
    if (row.valid) row.mu0 = curvature_weight_bound_run(t).mu0;
    out.push_back(row);
  }
  return out;
}

WeightField weight_from_spec(const Grid& grid, const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw DomainError("weight spec '" + spec + "' has no ':'");
  const std::string kind = spec.substr(0, colon);
  std::vector<double> v;
  std::size_t pos = colon + 1;
  while (pos <= spec.size()) {
    const auto comma = std::min(spec.find(',', pos), spec.size());
    const std::string tok = spec.substr(pos, comma - pos);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != tok.size() || tok.empty()) throw DomainError("weight spec '" + spec + "': bad number '" + tok + "'");
    v.push_back(x);
    pos = comma + 1;
  }
  auto need = [&](std::size_t n) {
    if (v.size() != n) throw DomainError("weight spec '" + spec + "': " + kind + " takes " + std::to_string(n) + " numbers");
  };
  if (kind == "const") {
    need(1);
    if (!(v[0] > 0.0)) throw DomainError("constant weight must be positive");
    return WeightField::constant(grid, v[0]);
  }
  if (kind == "rr") {
    need(2);
    return omega_Rr(grid, v[0], v[1]);
  }
  if (kind == "etak") {
    need(6);
    return omega_eta_k(grid, v[0], v[1], {v[2], v[3], v[4], v[5]});
  }
  if (kind == "etainf") {
    need(1);
    if (!(v[0] > 0.0)) throw DomainError("eta must be positive");
    return WeightField::constant(grid, 1.0 / (v[0] * v[0]));
  }
  if (kind == "hatinf") {
    need(1);
    if (!(v[0] > 0.0)) throw DomainError("eta must be positive");
    return stereographic_weight(grid, v[0]);
  }
  throw DomainError("unknown weight kind '" + kind + "'");
}

// With <X,Y> = -tr(XY) = (1/2) x.y and [e_a, e_b] = eps_abc e_c, |[X,Y]| <= sqrt(2)|X||Y|;
// the potential term pairs F_{mu nu} with [a_mu, a_nu] - [a_nu, a_mu], and
// sum_{mu<nu} |a_mu|^2 |a_nu|^2 <= |a|^4 / 2, so |<F, [a, a]>| <= 2 |F| |a|^2.
double bracket_constant() { return 2.0; }

}  // namespace ymindex
