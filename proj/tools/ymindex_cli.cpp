// ymindex: command-line front end.
// Exit codes: 0 success, 1 a check failed (or the computation did), 2 usage / input error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ymindex/acceptance.hpp"
#include "ymindex/errors.hpp"
#include "ymindex/experiments.hpp"
#include "ymindex/instanton.hpp"
#include "ymindex/neck.hpp"
#include "ymindex/store.hpp"

using namespace ymindex;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  bool no_meta = false;
  std::string out;
  std::string csv;
  std::string svg;
  std::string command_line;
};

std::vector<double> numbers(const std::string& s, std::size_t n, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    try {
      v.push_back(std::stod(tok, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != tok.size()) throw UsageError(std::string(what) + ": bad number '" + tok + "'");
  }
  if (n && v.size() != n) throw UsageError(std::string(what) + " takes " + std::to_string(n) + " comma-separated numbers");
  return v;
}

Vec4 vec4(const std::string& s, const char* what) {
  const auto v = numbers(s, 4, what);
  return {v[0], v[1], v[2], v[3]};
}

// ball:R | annulus:r,R, around `center`
NodeMask parse_mask(const Grid& g, const std::string& spec, const Vec4& center) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "ball") return ball_mask(g, center, numbers(rest, 1, "--mask ball")[0]);
  if (kind == "annulus") {
    const auto v = numbers(rest, 2, "--mask annulus");
    return annulus_mask(g, v[0], v[1], center);
  }
  throw UsageError("--mask must be ball:R or annulus:r,R");
}

void emit(const Globals& G, json report) {
  if (!G.no_meta) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    report["meta"] = {{"tool", "ymindex"}, {"seed", G.seed}, {"command", G.command_line}, {"timestamp", ts}};
  }
  if (G.out.empty())
    std::cout << report.dump(2) << "\n";
  else
    write_report(G.out, report);
}

// minimal bar / point chart
void write_svg(const std::string& path, const std::string& title, const std::vector<double>& ys, double ref) {
  if (path.empty() || ys.empty()) return;
  const double W = 640, H = 360, pad = 40;
  double lo = std::min(ref, *std::min_element(ys.begin(), ys.end()));
  double hi = std::max(ref, *std::max_element(ys.begin(), ys.end()));
  if (hi == lo) hi = lo + 1;
  auto Y = [&](double v) { return H - pad - (v - lo) / (hi - lo) * (H - 2 * pad); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << pad << "\" x2=\"" << W - pad << "\" y1=\"" << Y(ref) << "\" y2=\"" << Y(ref)
    << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double x = pad + (ys.size() == 1 ? 0.5 : double(i) / double(ys.size() - 1)) * (W - 2 * pad);
    s << "<circle cx=\"" << x << "\" cy=\"" << Y(ys[i]) << "\" r=\"3\" fill=\"" << (ys[i] < ref ? "crimson" : "steelblue")
      << "\"/>\n";
  }
  s << "<text x=\"" << pad << "\" y=\"" << H - 10 << "\" font-size=\"11\">min " << lo << "  max " << hi
    << "</text>\n</svg>\n";
  write_text_atomic(path, s.str());
}

Connection load_connection(const std::string& path) { return Connection(read_oneform(path)); }

SolverKind solver_kind(const std::string& s) {
  if (s == "auto") return SolverKind::automatic;
  if (s == "dense") return SolverKind::dense;
  if (s == "lanczos") return SolverKind::lanczos;
  throw UsageError("--solver must be auto, dense or lanczos");
}

}  // namespace

int main(int argc, char** argv) {
  Globals G;
  for (int i = 0; i < argc; ++i) G.command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Discrete Yang-Mills second variation, index and bubbling experiments"};
  app.require_subcommand(1);
  app.add_option("--seed", G.seed, "seed for every random choice");
  app.add_flag("--no-meta", G.no_meta, "omit the meta block (timestamp, command) from JSON output");
  app.add_option("--out", G.out, "write the JSON report here instead of stdout");

  // energy
  std::string field, mask, center_s = "0,0,0,0";
  auto* energy = app.add_subcommand("energy", "Yang-Mills energy of a connection file");
  energy->add_option("--field", field, "connection (oneform field file)")->required();
  energy->add_option("--mask", mask, "ball:R or annulus:r,R");
  energy->add_option("--center", center_s, "mask centre px,py,pz,pw");

  // instanton
  double lambda = 1.0;
  std::string grid_s = "2,16";
  auto* inst = app.add_subcommand("instanton", "write a BPST instanton field file");
  inst->add_option("--lambda", lambda, "scale");
  inst->add_option("--center", center_s, "centre px,py,pz,pw");
  inst->add_option("--grid", grid_s, "L,N: [-L,L]^4 with N points per axis");
  std::string field_out;
  bool flat = false;
  inst->add_option("--out", field_out, "field file")->required();
  inst->add_flag("--flat", flat, "write the zero connection on the grid instead");

  // spectrum / signature
  std::string weight = "const:1", region, solver = "auto";
  int k = 8;
  double tau = 0.0, tau_rel = 0.0;
  auto add_spectral = [&](CLI::App* c) {
    c->add_option("--field", field, "connection file")->required();
    c->add_option("--weight", weight, "const:c | rr:R,r | etak:eta,lambda,px,py,pz,pw | etainf:eta | hatinf:eta");
    c->add_option("--k", k, "eigenpairs");
    c->add_option("--tau", tau, "zero threshold (0 = default)");
    c->add_option("--tau-rel", tau_rel, "zero threshold relative to the largest eigenvalue");
    c->add_option("--region", region, "restrict dofs: ball:R or annulus:r,R around --center");
    c->add_option("--center", center_s, "region centre");
    c->add_option("--solver", solver, "auto | dense | lanczos");
    c->add_option("--csv", G.csv, "eigenvalue table");
    c->add_option("--svg", G.svg, "eigenvalue chart");
  };
  auto* spectrum = app.add_subcommand("spectrum", "smallest eigenpairs of the (QQ, omega) pencil");
  add_spectral(spectrum);
  auto* signature = app.add_subcommand("signature", "extended signature (index, nullity) of QQ");
  add_spectral(signature);

  // inequalities
  std::string which = "combined";
  double R = 1.0, r = 0.1;
  int trials = 0, points = 20;
  auto* ineq = app.add_subcommand("inequalities", "neck inequality harness");
  ineq->add_option("--which", which, "hardy | poincare | gaffney | combined | scaling");
  ineq->add_option("--R", R, "outer radius");
  ineq->add_option("--r", r, "inner radius");
  ineq->add_option("--grid", points, "points per axis of each trial grid");
  ineq->add_option("--trials", trials, "bump centres and superpositions each (0 = defaults 40 / 50)");
  ineq->add_option("--svg", G.svg, "ratio chart");

  // neck
  std::string annulus = "0.1,0.5", check;
  auto* neck = app.add_subcommand("neck", "neck checks on a connection file");
  neck->add_option("--field", field, "connection file")->required();
  neck->add_option("--annulus", annulus, "r,R");
  neck->add_option("--center", center_s, "annulus centre");
  neck->add_option("--check", check, "coercivity | decay | cutoff")->required();

  // bubble-run
  std::string config;
  auto* bubble = app.add_subcommand("bubble-run", "bubbling-sequence experiments");
  bubble->add_option("--config", config, "schedule JSON (schema 1)")->required();
  bubble->add_option("--check", check, "quantization | semicontinuity | floor")->required();

  // verify-all
  std::string level = "smoke";
  std::vector<int> only;
  auto* verify = app.add_subcommand("verify-all", "run the acceptance suite");
  verify->add_option("--level", level, "smoke | full");
  verify->add_option("--only", only, "criterion numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const Vec4 center = vec4(center_s, "--center");

    if (*energy) {
      const Connection A = load_connection(field);
      NodeMask m;
      if (!mask.empty()) m = parse_mask(A.grid(), mask, center);
      json rep = {{"schema", "energy/1"},
                  {"grid", to_json(A.grid())},
                  {"mask", mask.empty() ? json(nullptr) : json(mask)},
                  {"energy", ym_energy(A, mask.empty() ? nullptr : &m)},
                  {"ym_residual", ym_residual(A)}};
      emit(G, rep);
      return 0;
    }

    if (*inst) {
      const auto gv = numbers(grid_s, 2, "--grid");
      const Grid g(gv[0], static_cast<int>(gv[1]));
      if (flat)
        write_field(field_out, OneForm(g), {{"source", "flat"}});
      else
        write_field(field_out, bpst(g, lambda, center).form,
                    {{"source", "bpst"}, {"lambda", lambda}, {"center", {center[0], center[1], center[2], center[3]}}});
      json rep = {{"schema", "instanton/1"}, {"file", field_out}, {"grid", to_json(g)},
                  {"lambda", flat ? json(nullptr) : json(lambda)}};
      emit(G, rep);
      return 0;
    }

    if (*spectrum || *signature) {
      const Connection A = load_connection(field);
      const Grid& g = A.grid();
      const WeightField w = weight_from_spec(g, weight);
      NodeMask m;
      if (!region.empty()) m = parse_mask(g, region, center);
      const NodeMask* reg = region.empty() ? nullptr : &m;
      SolverOptions opt;
      opt.kind = solver_kind(solver);
      opt.seed = G.seed;
      const AssembledForm form(A, w, reg);
      const Pencil P = Pencil::from_form(form);
      double t = tau;
      if (tau_rel > 0.0) t = tau_rel * largest_eig(P, 60, G.seed);
      const SpectralReport rep = *signature ? extended_signature(A, w, k, t, reg, opt) : smallest_eigs(P, k, t, opt);
      json j = to_json(rep);
      j["weight"] = weight;
      j["dofs"] = form.dim();
      if (!G.csv.empty()) write_text_atomic(G.csv, eigenvalue_csv(rep));
      write_svg(G.svg, "smallest eigenvalues", rep.eigenvalues, 0.0);
      emit(G, j);
      return rep.valid ? 0 : 1;
    }

    if (*ineq) {
      TrialConfig cfg;
      cfg.seed = G.seed;
      cfg.points = points;
      if (trials > 0) cfg.centers = cfg.superpositions = trials;
      if (which == "scaling") {
        const ScalingReport s = scaling_noncompactness_demo(default_scaling_form(), {0.5, 0, 0, 0}, 0.4,
                                                            {1.0, 0.5, 0.25}, points, 0.03);
        emit(G, to_json(s));
        return 0;
      }
      const auto q = evaluate_trials(R, r, cfg);
      std::vector<std::string> ids;
      if (which == "poincare")
        ids = {"poincare-outer", "poincare-inner"};
      else if (which == "hardy" || which == "gaffney" || which == "combined")
        ids = {which};
      else
        throw UsageError("--which must be hardy, poincare, gaffney, combined or scaling");
      json out = json::array();
      std::vector<double> ratios;
      for (const auto& id : ids) {
        const InequalityReport rep = make_report(id, R, r, cfg, q);
        out.push_back(to_json(rep));
        for (std::size_t i = 0; i < rep.lhs.size(); ++i) ratios.push_back(rep.lhs[i] / rep.rhs[i]);
      }
      write_svg(G.svg, which + " ratios", ratios, 0.0);
      emit(G, out.size() == 1 ? out[0] : json{{"schema", "inequality-set/1"}, {"reports", out}});
      return 0;
    }

    if (*neck) {
      const Connection A = load_connection(field);
      const auto a = numbers(annulus, 2, "--annulus");
      const double rin = a[0], Rout = a[1];
      if (check == "coercivity") {
        CoercivityConfig cfg;
        cfg.seed = G.seed;
        cfg.p = center;
        const CoercivityReport rep = neck_coercivity(A, Rout, rin, cfg);
        emit(G, to_json(rep));
        return rep.c0 > 0.0 ? 0 : 1;
      }
      if (check == "decay") {
        emit(G, to_json(sharp_decay_check(A, Rout, rin, center)));
        return 0;
      }
      if (check == "cutoff") {
        const CutoffReport c = cutoff_connection(A, rin, Rout, center);
        emit(G, {{"schema", "cutoff/1"},
                 {"lhs", c.lhs},
                 {"curvature_term", c.curvature_term},
                 {"sobolev_term", c.sobolev_term},
                 {"ratio", c.ratio},
                 {"max_dchi", c.max_dchi}});
        return 0;
      }
      throw UsageError("--check must be coercivity, decay or cutoff");
    }

    if (*bubble) {
      const BubbleSchedule s = BubbleSchedule::from_json(read_report(config));
      if (check == "quantization") {
        const QuantizationReport q = quantization_run(s);
        emit(G, to_json(q));
        return q.neck_decreasing && q.deficit_decreasing && q.bubble_within_3pct ? 0 : 1;
      }
      if (check == "semicontinuity") {
        const SemicontinuityReport q = semicontinuity_run(s);
        emit(G, to_json(q));
        return q.conclusive && q.index_inequality && q.signature_inequality ? 0 : 1;
      }
      if (check == "floor") {
        json j = to_json(curvature_weight_bound_run(s));
        json sweep = json::array();
        for (const auto& e : eta_sweep(s))
          sweep.push_back({{"eta", e.eta}, {"valid", e.valid}, {"mu0", e.valid ? json(e.mu0) : json(nullptr)}});
        j["eta_sweep"] = sweep;
        j["bracket_constant"] = bracket_constant();
        emit(G, j);
        return 0;
      }
      throw UsageError("--check must be quantization, semicontinuity or floor");
    }

    if (*verify) {
      AcceptanceLevel lv;
      if (level == "smoke")
        lv = AcceptanceLevel::smoke;
      else if (level == "full")
        lv = AcceptanceLevel::full;
      else
        throw UsageError("--level must be smoke or full");
      int failed = 0;
      const auto results = run_acceptance(lv, only, [&](const CriterionResult& res) {
        std::cout << format_result(res) << std::endl;
        failed += res.pass ? 0 : 1;
      });
      std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " passed" << std::endl;
      if (!G.out.empty()) {
        json j = json::array();
        for (const auto& res : results)
          j.push_back({{"id", res.id}, {"title", res.title}, {"pass", res.pass}, {"detail", res.detail},
                       {"seconds", res.seconds}, {"budget", res.budget}});
        write_report(G.out, {{"schema", "acceptance/1"}, {"level", level}, {"results", j}});
      }
      return failed == 0 ? 0 : 1;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
