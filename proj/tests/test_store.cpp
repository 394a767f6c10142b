#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>

#include "ymindex/errors.hpp"
#include "ymindex/instanton.hpp"
#include "ymindex/store.hpp"

using namespace ymindex;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "ymindex_store_test";
  fs::create_directories(d);
  return d / name;
}

template <class F>
F random_form(const Grid& g, unsigned seed) {
  F f(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (double& v : f.raw()) v = nd(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
  return f;
}

template <class F>
bool bitwise_equal(const F& a, const F& b) {
  return a.grid() == b.grid() && a.raw().size() == b.raw().size() &&
         std::memcmp(a.raw().data(), b.raw().data(), 8 * a.raw().size()) == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}
void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}
}  // namespace

TEST_CASE("zero field round trip") {
  const Grid g(1.0, 5);
  const auto p = scratch("zero.ymf");
  write_field(p, OneForm(g));
  CHECK(bitwise_equal(read_oneform(p), OneForm(g)));
}

TEST_CASE("bitwise round trip of every kind") {
  const Grid g(0.7, 6, {0.1, -0.2, 0.3, 1.0 / 3.0}, 2);
  const auto p0 = scratch("s.ymf"), p1 = scratch("a.ymf"), p2 = scratch("f.ymf");
  const auto s = random_form<ScalarGField>(g, 1);
  const auto a = random_form<OneForm>(g, 2);
  const auto f = random_form<TwoForm>(g, 3);
  write_field(p0, s, {{"note", "scalar"}});
  write_field(p1, a);
  write_field(p2, f);
  CHECK(bitwise_equal(read_scalar_field(p0), s));
  CHECK(bitwise_equal(read_oneform(p1), a));
  CHECK(bitwise_equal(read_twoform(p2), f));
  const auto h = read_field_header(p0);
  CHECK(h.kind == FieldKind::scalar);
  CHECK(h.grid == g);
  CHECK(h.meta["note"] == "scalar");
  // payload length = N^4 x components x 3 doubles after the header line
  const auto bytes = slurp(p2);
  CHECK(bytes.size() - (bytes.find('\n') + 1) == 8u * 1296u * 6u * 3u);
  // no temporaries left behind
  for (const auto& e : fs::directory_iterator(p0.parent_path()))
    CHECK(e.path().string().find(".tmp.") == std::string::npos);
}

TEST_CASE("format errors") {
  const Grid g(1.0, 5);
  const auto p = scratch("bad.ymf");
  write_field(p, bpst(g, 0.5).form);
  const auto good = slurp(p);

  std::string s = good;
  s.replace(s.find("YMF1"), 4, "YMF2");
  spit(p, s);
  CHECK_THROWS_AS(read_oneform(p), FormatError);

  spit(p, "garbage\n" + good);
  CHECK_THROWS_AS(read_oneform(p), FormatError);

  spit(p, good.substr(0, good.size() - 8));
  CHECK_THROWS_AS(read_oneform(p), FormatError);

  spit(p, good + "x");
  CHECK_THROWS_AS(read_oneform(p), FormatError);

  spit(p, good);
  CHECK_THROWS_AS(read_twoform(p), FormatError);  // kind mismatch
  CHECK_NOTHROW(read_oneform(p));

  s = good;
  s.replace(s.find("\"doubles\":"), 10, "\"doubles\":1");
  spit(p, s);
  CHECK_THROWS_AS(read_oneform(p), FormatError);
}

TEST_CASE("non-finite payloads are rejected on write") {
  const Grid g(1.0, 5);
  const auto p = scratch("nan.ymf");
  std::error_code ec;
  fs::remove(p, ec);
  for (double bad : {std::nan(""), HUGE_VAL, -HUGE_VAL}) {
    OneForm a(g);
    a.raw()[17] = bad;
    CHECK_THROWS_AS(write_field(p, a), FormatError);
    CHECK_FALSE(fs::exists(p));
  }
}

TEST_CASE("matrix export round trip") {
  const Grid g(1.0, 6);
  const AssembledForm form(bpst(g, 0.8), WeightField::constant(g, 1.0));
  const SparseMatrix K = form.stiffness();
  const auto pt = scratch("K.txt"), pb = scratch("K.bin");
  export_matrix(pt, K);
  export_matrix_binary(pb, K);
  const SparseMatrix Kt = import_matrix(pt), Kb = import_matrix(pb);
  CHECK(Kt.nonZeros() == K.nonZeros());
  CHECK((SparseMatrix(Kt - K)).norm() == 0.0);
  CHECK((SparseMatrix(Kb - K)).norm() == 0.0);
  const auto text = slurp(pt);
  CHECK(text.rfind("# " + std::to_string(K.rows()) + " " + std::to_string(K.cols()) + " " +
                       std::to_string(K.nonZeros()) + "\n", 0) == 0);

  spit(pt, "# 3 3 2\n0 0 1\n");
  CHECK_THROWS_AS(import_matrix(pt), FormatError);
  spit(pt, "# 3 3 1\n5 0 1\n");
  CHECK_THROWS_AS(import_matrix(pt), FormatError);
}

TEST_CASE("exported pencil reproduces the spectrum in a dense solve") {
  // smallest grid the lattice allows (N = 5, 81 free nodes)
  const Grid g(1.0, 5);
  const AssembledForm form(bpst(g, 0.6), stereographic_weight(g, 0.5));
  const auto prefix = scratch("pencil");
  export_pencil(prefix, form);
  const Eigen::MatrixXd K = Eigen::MatrixXd(import_matrix(prefix.string() + ".K.txt"));
  const Eigen::MatrixXd W = Eigen::MatrixXd(import_matrix(prefix.string() + ".W.txt"));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()), W);
  const auto P = Pencil::from_form(form);
  SolverOptions opt;
  opt.kind = SolverKind::dense;
  const auto r = smallest_eigs(P, 10, 0.0, opt);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  for (int i = 0; i < 10; ++i) CHECK(std::abs(r.eigenvalues[i] - es.eigenvalues()(i)) <= 1e-12 * scale);
}

TEST_CASE("report json") {
  SpectralReport r;
  r.eigenvalues = {-1.5, 0.0, 2.25};
  r.residuals = {1e-12, 2e-12, 3e-12};
  r.morse_index = 1;
  r.nullity = 1;
  r.signature = 2;
  r.gap_below = std::nan("");
  r.solver = "dense";
  const auto p = scratch("report.json");
  write_report(p, to_json(r));
  const auto j = read_report(p);
  CHECK(j["schema"] == "spectral/1");
  CHECK(j["eigenvalues"][2].get<double>() == 2.25);
  CHECK(j["gap_below"].is_null());
  CHECK(j["morse_index"] == 1);
  CHECK(eigenvalue_csv(r).rfind("index,eigenvalue,residual\n0,-1.5,", 0) == 0);
  spit(p, "{not json");
  CHECK_THROWS_AS(read_report(p), FormatError);
}
