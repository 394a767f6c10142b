#include "ymindex/store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ymindex/errors.hpp"

namespace ymindex {

namespace {

constexpr const char* kFieldMagic = "YMF1";
constexpr char kMatrixMagic[4] = {'Y', 'M', 'M', '1'};

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}
template <class T>
T from_le(T v) { return to_le(v); }

template <class T>
void put(std::string& out, T v) {
  v = to_le(v);
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& in, const fs::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(path.string() + ": truncated");
  return from_le(v);
}

int components(FieldKind k) {
  switch (k) {
    case FieldKind::scalar: return 1;
    case FieldKind::oneform: return 4;
    case FieldKind::twoform: return 6;
  }
  return 0;
}

FieldKind kind_from(const std::string& s) {
  if (s == "scalar") return FieldKind::scalar;
  if (s == "oneform") return FieldKind::oneform;
  if (s == "twoform") return FieldKind::twoform;
  throw FormatError("unknown field kind '" + s + "'");
}

Grid grid_from(const nlohmann::json& j) {
  const auto c = j.at("center").get<std::vector<double>>();
  if (c.size() != 4) throw FormatError("grid center must have 4 entries");
  try {
    return Grid(j.at("L").get<double>(), j.at("N").get<int>(), {c[0], c[1], c[2], c[3]}, j.value("depth", 1));
  } catch (const DomainError& e) {
    throw FormatError(std::string("bad grid in header: ") + e.what());
  }
}

template <int C>
void write_form(const fs::path& path, const Form<C>& f, FieldKind kind, const nlohmann::json& meta) {
  const auto& d = f.raw();
  for (double v : d)
    if (!std::isfinite(v)) throw FormatError(path.string() + ": refusing to write a non-finite payload");
  nlohmann::json h = {{"magic", kFieldMagic},
                      {"kind", to_string(kind)},
                      {"grid", to_json(f.grid())},
                      {"algebra", "su2"},
                      {"endianness", "LE"},
                      {"doubles", d.size()},
                      {"meta", meta}};
  std::string out = h.dump() + "\n";
  out.reserve(out.size() + 8 * d.size());
  for (double v : d) put(out, v);
  write_text_atomic(path, out);
}

// Header parsed; the stream is left at the first payload byte.
FieldHeader parse_header(std::istream& in, const fs::path& path, std::size_t& doubles) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw FormatError(path.string() + ": header is not a JSON line (bad magic?)");
  }
  if (!h.is_object() || h.value("magic", std::string()) != kFieldMagic)
    throw FormatError(path.string() + ": magic mismatch (expected YMF1)");
  try {
    if (h.at("algebra") != "su2") throw FormatError(path.string() + ": unsupported algebra");
    if (h.at("endianness") != "LE") throw FormatError(path.string() + ": unsupported endianness");
    FieldHeader fh;
    fh.kind = kind_from(h.at("kind").get<std::string>());
    fh.grid = grid_from(h.at("grid"));
    fh.meta = h.value("meta", nlohmann::json::object());
    doubles = h.at("doubles").get<std::size_t>();
    const std::size_t expect = fh.grid.node_count() * static_cast<std::size_t>(components(fh.kind)) * 3;
    if (doubles != expect) throw FormatError(path.string() + ": header length does not match the grid");
    return fh;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header: " + e.what());
  }
}

template <int C>
Form<C> read_form(const fs::path& path, FieldKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::size_t n = 0;
  const FieldHeader h = parse_header(in, path, n);
  if (h.kind != kind)
    throw FormatError(path.string() + ": holds a " + to_string(h.kind) + ", expected " + to_string(kind));
  Form<C> f(h.grid);
  auto& d = f.raw();
  if (!in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(8 * n)))
    throw FormatError(path.string() + ": payload length mismatch (short)");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": payload length mismatch (long)");
  for (double& v : d) v = from_le(v);
  return f;
}

}  // namespace

const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::oneform: return "oneform";
    case FieldKind::twoform: return "twoform";
  }
  return "?";
}

void write_field(const fs::path& path, const ScalarGField& f, const nlohmann::json& meta) {
  write_form(path, f, FieldKind::scalar, meta);
}
void write_field(const fs::path& path, const OneForm& f, const nlohmann::json& meta) {
  write_form(path, f, FieldKind::oneform, meta);
}
void write_field(const fs::path& path, const TwoForm& f, const nlohmann::json& meta) {
  write_form(path, f, FieldKind::twoform, meta);
}

FieldHeader read_field_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  std::size_t n = 0;
  return parse_header(in, path, n);
}

ScalarGField read_scalar_field(const fs::path& path) { return read_form<1>(path, FieldKind::scalar); }
OneForm read_oneform(const fs::path& path) { return read_form<4>(path, FieldKind::oneform); }
TwoForm read_twoform(const fs::path& path) { return read_form<6>(path, FieldKind::twoform); }

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(tmp.string() + ": cannot open for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw FormatError(tmp.string() + ": write failed");
    }
  }
  fs::rename(tmp, path);
}

void write_report(const fs::path& path, const nlohmann::json& report) { write_text_atomic(path, report.dump(2) + "\n"); }

nlohmann::json read_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---- matrices

void export_matrix(const fs::path& path, const SparseMatrix& M) {
  std::string out = "# " + std::to_string(M.rows()) + " " + std::to_string(M.cols()) + " " + std::to_string(M.nonZeros()) + "\n";
  char buf[96];
  for (Eigen::Index r = 0; r < M.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(M, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      out += buf;
    }
  write_text_atomic(path, out);
}

void export_matrix_binary(const fs::path& path, const SparseMatrix& M) {
  std::string out(kMatrixMagic, 4);
  put<std::int64_t>(out, M.rows());
  put<std::int64_t>(out, M.cols());
  put<std::int64_t>(out, M.nonZeros());
  for (Eigen::Index r = 0; r < M.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(M, r); it; ++it) {
      put<std::int64_t>(out, it.row());
      put<std::int64_t>(out, it.col());
      put<double>(out, it.value());
    }
  write_text_atomic(path, out);
}

SparseMatrix import_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  char magic[4] = {};
  in.read(magic, 4);
  std::vector<Eigen::Triplet<double>> t;
  std::int64_t rows = 0, cols = 0, nnz = 0;
  if (in && std::memcmp(magic, kMatrixMagic, 4) == 0) {
    rows = take<std::int64_t>(in, path);
    cols = take<std::int64_t>(in, path);
    nnz = take<std::int64_t>(in, path);
    if (rows < 0 || cols < 0 || nnz < 0) throw FormatError(path.string() + ": bad matrix header");
    t.reserve(static_cast<std::size_t>(nnz));
    for (std::int64_t k = 0; k < nnz; ++k) {
      const auto r = take<std::int64_t>(in, path);
      const auto c = take<std::int64_t>(in, path);
      t.emplace_back(r, c, take<double>(in, path));
    }
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    std::getline(in, line);
    std::istringstream hs(line);
    std::string hash;
    if (!(hs >> hash >> rows >> cols >> nnz) || hash != "#") throw FormatError(path.string() + ": not a matrix file");
    long long r, c;
    double v;
    while (in >> r >> c >> v) t.emplace_back(r, c, v);
    if (static_cast<std::int64_t>(t.size()) != nnz) throw FormatError(path.string() + ": entry count mismatch");
  }
  for (const auto& e : t)
    if (e.row() < 0 || e.row() >= rows || e.col() < 0 || e.col() >= cols)
      throw FormatError(path.string() + ": entry out of range");
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

void export_pencil(const fs::path& prefix, const AssembledForm& form) {
  export_matrix(fs::path(prefix.string() + ".K.txt"), form.stiffness());
  SparseMatrix W(form.dim(), form.dim());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < form.dim(); ++i) t.emplace_back(i, i, form.mass()(i));
  W.setFromTriplets(t.begin(), t.end());
  export_matrix(fs::path(prefix.string() + ".W.txt"), W);
}

// ---- reports

nlohmann::json to_json(const Grid& g) {
  const auto& c = g.center();
  return {{"L", g.half_width()}, {"N", g.points()}, {"center", {c[0], c[1], c[2], c[3]}}, {"depth", g.boundary_depth()}};
}

namespace {
// JSON has no nan; keep the key and write null
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
}  // namespace

nlohmann::json to_json(const SpectralReport& r) {
  nlohmann::json ev = nlohmann::json::array(), res = nlohmann::json::array();
  for (double v : r.eigenvalues) ev.push_back(num(v));
  for (double v : r.residuals) res.push_back(num(v));
  return {{"schema", "spectral/1"},
          {"eigenvalues", ev},
          {"residuals", res},
          {"morse_index", r.morse_index},
          {"nullity", r.nullity},
          {"signature", r.signature},
          {"tau", num(r.tau)},
          {"gap_below", num(r.gap_below)},
          {"gap_above", num(r.gap_above)},
          {"complete", r.complete},
          {"valid", r.valid},
          {"solver", r.solver},
          {"iterations", r.iterations},
          {"matvecs", r.matvecs}};
}

nlohmann::json to_json(const InequalityReport& r) {
  return {{"schema", "inequality/1"},
          {"id", r.id},
          {"R", r.R},
          {"r", r.r},
          {"trials", r.trials()},
          {"max_ratio", num(r.max_ratio)},
          {"argmax", r.argmax},
          {"config",
           {{"points", r.config.points},
            {"centers", r.config.centers},
            {"superpositions", r.config.superpositions},
            {"bump_fraction", r.config.bump_fraction},
            {"seed", r.config.seed}}}};
}

nlohmann::json to_json(const CoercivityReport& r) {
  return {{"schema", "coercivity/1"},
          {"c0", num(r.c0)},
          {"trial_min", num(r.trial_min)},
          {"refined", num(r.refined)},
          {"trials", r.trials},
          {"argmin", r.argmin},
          {"refinement_steps", r.refinement_steps},
          {"refinement_converged", r.refinement_converged},
          {"annulus_energy", num(r.annulus_energy)},
          {"within_energy_budget", r.within_energy_budget},
          {"ym_residual", num(r.ym_residual)},
          {"dofs", r.dofs},
          {"has_violating_vector", r.violating.size() > 0}};
}

nlohmann::json to_json(const DecayReport& r) {
  return {{"schema", "decay/1"},
          {"R", r.R},
          {"r", r.r},
          {"energy_norm", num(r.energy_norm)},
          {"C", num(r.C)},
          {"C_plain", num(r.C_plain)},
          {"argmax_radius", num(r.argmax_radius)},
          {"midpoint_radius", num(r.midpoint_radius)},
          {"envelope_mid", num(r.envelope_mid)},
          {"plain_mid", num(r.plain_mid)},
          {"tighter_at_midpoint", r.tighter_at_midpoint}};
}

nlohmann::json to_json(const ScalingReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"eps", x.eps}, {"dirichlet", num(x.dirichlet)}, {"l2", num(x.l2)}, {"weighted", num(x.weighted)},
                    {"cells_across", x.cells_across}});
  return {{"schema", "scaling/1"},
          {"rows", rows},
          {"dirichlet_spread", num(r.dirichlet_spread)},
          {"l2_scaling_error", num(r.l2_scaling_error)},
          {"weighted_spread", num(r.weighted_spread)},
          {"tol", r.tol},
          {"dirichlet_constant", r.dirichlet_constant},
          {"l2_quadratic", r.l2_quadratic},
          {"weighted_constant", r.weighted_constant}};
}

nlohmann::json to_json(const QuantizationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"lambda", x.lambda}, {"total", num(x.total)}, {"core", num(x.core)}, {"neck", num(x.neck)},
                    {"outer", num(x.outer)}, {"bubble", num(x.bubble)}, {"background", num(x.background)},
                    {"deficit", num(x.deficit)}, {"neck_empty", x.neck_empty}});
  return {{"schema", "quantization/1"},
          {"rows", rows},
          {"unit_energy", r.unit_energy},
          {"neck_decreasing", r.neck_decreasing},
          {"deficit_decreasing", r.deficit_decreasing},
          {"bubble_error", num(r.bubble_error)},
          {"bubble_within_3pct", r.bubble_within_3pct}};
}

nlohmann::json to_json(const SemicontinuityReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"lambda", x.lambda},
                    {"points", x.points},
                    {"ym_residual", num(x.ym_residual)},
                    {"sequence", to_json(x.sequence)},
                    {"background", to_json(x.background)},
                    {"bubble", to_json(x.bubble)},
                    {"index_margin", x.index_margin},
                    {"signature_margin", x.signature_margin},
                    {"index_ok", x.index_ok},
                    {"signature_ok", x.signature_ok},
                    {"dimension_ok", x.dimension_ok},
                    {"conclusive", x.conclusive},
                    {"min_eigenvalue", num(x.min_eigenvalue)}});
  return {{"schema", "semicontinuity/1"},
          {"rows", rows},
          {"mu0", num(r.mu0)},
          {"mu0_curvature", num(r.mu0_curvature)},
          {"mu0_bound", num(r.mu0_bound)},
          {"floor_consistent", r.floor_consistent},
          {"index_inequality", r.index_inequality},
          {"signature_inequality", r.signature_inequality},
          {"dimension_inequality", r.dimension_inequality},
          {"conclusive", r.conclusive}};
}

nlohmann::json to_json(const CurvatureWeightReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"lambda", x.lambda}, {"max_ratio", num(x.max_ratio)}, {"outer", num(x.outer)},
                    {"neck", num(x.neck)}, {"core", num(x.core)}});
  return {{"schema", "curvature_weight/1"}, {"eta", r.eta}, {"rows", rows}, {"mu0", num(r.mu0)},
          {"core_limit", num(r.core_limit)}};
}

std::string eigenvalue_csv(const SpectralReport& r) {
  std::string out = "index,eigenvalue,residual\n";
  char buf[96];
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    const double res = i < r.residuals.size() ? r.residuals[i] : std::nan("");
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.6g\n", i, r.eigenvalues[i], res);
    out += buf;
  }
  return out;
}

}  // namespace ymindex
