#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "dgtopo/harness.hpp"

namespace dgtopo {

/// Everything a CLI run depends on. Serialized canonically (without the
/// output directory) for the hash that every output file records.
struct RunConfig {
  std::string preset = "double-pipe";  // empty: all physical parameters given explicitly
  BenchmarkSpec spec;
  OptimizerOptions optimizer;
  std::vector<std::string> seeds{"uniform", "band"};
  bool deflate = true;
  int mms_base_n = 4;
  std::string out_dir = "out";

  /// Throws ConfigError naming the offending key.
  void validate(const std::string& origin = "config") const;
  /// Canonical JSON text (sorted keys, shortest round-trip numbers).
  std::string canonical() const;
  /// FNV-1a of canonical().
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

/// Preset "double-pipe" (the only one).
RunConfig double_pipe_config();

/// Parses JSON text. Unknown keys are rejected with their path; physical
/// parameters may be omitted only under a preset. Throws ConfigError.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

using CsvCell = std::variant<double, long long, std::string>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;
};

/// Writes "# key value" comment lines, the header row and the rows; doubles
/// with 17 significant digits. Throws std::runtime_error on I/O failure.
void write_csv(const CsvTable& table, const std::filesystem::path& path,
               const std::vector<std::string>& comments);

/// Comment lines recording the config hash, nu and the canonical config.
std::vector<std::string> provenance_comments(const RunConfig& config);

CsvTable div_table(const std::vector<DivRow>& rows);
CsvTable convergence_table(const ConvergenceTable& table);
CsvTable mms_table(const MmsReport& report);
CsvTable registry_table(const MultiStartReport& report, const BenchmarkSpec& spec);

/// Legacy ASCII unstructured grid with cell data rho, p (scalars) and u
/// (3-vector at the cell centroid, z = 0).
void write_vtk(const Mesh& mesh, const CellField& rho, const CellField& p, const VelocityField& u,
               const std::filesystem::path& path, const std::string& title);

std::string format_double(double v);

}  // namespace dgtopo
