#pragma once

// Artifact formats. Binary symbols and operators are little-endian: a header
// of 64-bit values, then complex entries as interleaved 64-bit floats. Every
// binary file has a JSON sidecar (same name + ".json") describing it.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "folix/quantization.hpp"
#include "folix/symbol.hpp"

namespace folix {

namespace fs = std::filesystem;

// Header: degree, n_u, n_v, n_tau (int64), T_max (float64); entries in
// (i, j, sign slice, τ node, row, col) order, row-major.
void write_symbol(const fs::path& path, const HomogeneousSymbol& k, const nlohmann::json& extra = {});
HomogeneousSymbol read_symbol(const fs::path& path);

// Header: half_u, half_v, dim (int64); dense dim×dim entries, row-major.
void write_operator(const fs::path& path, const KernelOperator& K, const nlohmann::json& extra = {});
KernelOperator read_operator(const fs::path& path);

// Writes a JSON file with a fixed layout (2-space indent, trailing newline).
void write_json(const fs::path& path, const nlohmann::json& j);

// Shortest round-trip decimal form of a double.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_csv(const fs::path& path, const CsvTable& t);
// Numeric CSV with a header row.
CsvTable read_csv(const fs::path& path);

enum class PlotKind { Trajectory, FieldSlice, ResidualCurve };
PlotKind plot_kind(const std::string& name);  // "trajectory" | "field-slice" | "residual-curve"

// Whitespace-separated columns with a "# name name ..." header, written next
// to the artifact with extension ".dat". Trajectory: t u v p_v h;
// field-slice: u v value; residual-curve: band_center relative_residual.
// UnknownArtifact if the CSV is missing or lacks the expected columns.
fs::path emit_plotdata(const fs::path& artifact, PlotKind kind);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

// manifest.json in `dir`: resolved config, one entry per artifact (relative
// path, bytes, sha256), a content hash over the sorted entries, and the wall
// clock timestamp in its own field.
nlohmann::json write_manifest(const fs::path& dir, const std::string& command,
                              const nlohmann::json& config, const std::vector<fs::path>& artifacts);

}  // namespace folix
