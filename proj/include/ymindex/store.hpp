#pragma once

// Persistence. Field files are one JSON header line followed by the raw
// payload:
//
//   {"magic":"YMF1","kind":"oneform","grid":{"L":..,"N":..,"center":[..],"depth":..},
//    "algebra":"su2","endianness":"LE","doubles":n,"meta":{..}}\n
//   n little-endian float64, node-major, then component, then algebra coefficient
//
// Matrices: text coordinate lines "%d %d %.17g" after a "# rows cols nnz"
// header, or the binary variant "YMM1" + int64 rows, cols, nnz + (int64 row,
// int64 col, float64 value) per entry, all little-endian.
//
// Every write goes to a temporary next to the target and is renamed over it.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ymindex/experiments.hpp"
#include "ymindex/lattice.hpp"
#include "ymindex/neck.hpp"
#include "ymindex/secondvar.hpp"
#include "ymindex/spectral.hpp"

namespace ymindex {

namespace fs = std::filesystem;

enum class FieldKind { scalar, oneform, twoform };
const char* to_string(FieldKind k);

struct FieldHeader {
  FieldKind kind = FieldKind::oneform;
  Grid grid;
  nlohmann::json meta = nlohmann::json::object();
};

// Throws FormatError on NaN/Inf payload (nothing is written).
void write_field(const fs::path& path, const ScalarGField& f, const nlohmann::json& meta = nlohmann::json::object());
void write_field(const fs::path& path, const OneForm& f, const nlohmann::json& meta = nlohmann::json::object());
void write_field(const fs::path& path, const TwoForm& f, const nlohmann::json& meta = nlohmann::json::object());

// Throws FormatError on a bad magic, header, kind mismatch or payload length.
FieldHeader read_field_header(const fs::path& path);
ScalarGField read_scalar_field(const fs::path& path);
OneForm read_oneform(const fs::path& path);
TwoForm read_twoform(const fs::path& path);

void write_text_atomic(const fs::path& path, const std::string& text);
void write_report(const fs::path& path, const nlohmann::json& report);  // pretty JSON, atomic
nlohmann::json read_report(const fs::path& path);

void export_matrix(const fs::path& path, const SparseMatrix& M);
void export_matrix_binary(const fs::path& path, const SparseMatrix& M);
SparseMatrix import_matrix(const fs::path& path);  // either variant, by magic
// K as prefix.K.txt and diag W as prefix.W.txt.
void export_pencil(const fs::path& prefix, const AssembledForm& form);

// ---- report schemas

nlohmann::json to_json(const Grid& g);
nlohmann::json to_json(const SpectralReport& r);
nlohmann::json to_json(const InequalityReport& r);
nlohmann::json to_json(const CoercivityReport& r);
nlohmann::json to_json(const DecayReport& r);
nlohmann::json to_json(const ScalingReport& r);
nlohmann::json to_json(const QuantizationReport& r);
nlohmann::json to_json(const SemicontinuityReport& r);
nlohmann::json to_json(const CurvatureWeightReport& r);
// "index,eigenvalue,residual" lines.
std::string eigenvalue_csv(const SpectralReport& r);

}  // namespace ymindex
