#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dgtopo/cli_io.hpp"

namespace dgtopo {

namespace {

std::ofstream open_for_writing(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::string cell_text(const CsvCell& cell) {
  if (const double* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const long long* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const CsvTable& table, const std::filesystem::path& path, const std::vector<std::string>& comments) {
  std::ofstream out = open_for_writing(path);
  for (const std::string& c : comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::invalid_argument("write_csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
    out << '\n';
  }
  finish(out, path);
}

std::vector<std::string> provenance_comments(const RunConfig& config) {
  return {"config_hash " + config.hash_hex(), "nu " + format_double(config.spec.nu), "config " + config.canonical()};
}

CsvTable div_table(const std::vector<DivRow>& rows) {
  CsvTable t;
  t.columns = {"h", "branch", "div_norm"};
  for (const DivRow& r : rows) t.rows.push_back({r.h, r.branch, r.div_norm});
  return t;
}

CsvTable convergence_table(const ConvergenceTable& table) {
  CsvTable t;
  t.columns = {"h", "err_u_H1g", "err_rho_L2", "err_p_L2", "order_u", "order_rho", "order_p"};
  for (const ConvergenceRow& r : table.rows)
    t.rows.push_back({r.h, r.err_u, r.err_rho, r.err_p, r.order_u, r.order_rho, r.order_p});
  return t;
}

CsvTable mms_table(const MmsReport& report) {
  CsvTable t;
  t.columns = {"n", "h", "err_u_L2", "err_u_H1", "err_p_L2", "div_norm", "order_u_H1", "order_u_L2", "order_p_L2"};
  const double nan = std::nan("");
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const MmsLevel& l = report.levels[i];
    double ou = nan, ol = nan, op = nan;
    if (i > 0) {
      const MmsLevel& k = report.levels[i - 1];
      const double lh = std::log(k.h / l.h);
      ou = std::log(k.err_u_h1 / l.err_u_h1) / lh;
      ol = std::log(k.err_u_l2 / l.err_u_l2) / lh;
      op = std::log(k.err_p_l2 / l.err_p_l2) / lh;
    }
    t.rows.push_back({static_cast<long long>(l.n), l.h, l.err_u_l2, l.err_u_h1, l.err_p_l2, l.div_norm, ou, ol, op});
  }
  return t;
}

CsvTable registry_table(const MultiStartReport& report, const BenchmarkSpec& spec) {
  CsvTable t;
  t.columns = {"seed", "topology", "J", "iterations", "foc_momentum", "foc_divergence", "foc_vi", "div_norm", "volume"};
  for (const RegistryEntry& e : report.registry) {
    const OptimizeResult& r = e.result;
    t.rows.push_back({e.seed, classify_topology(r.state.rho, spec).label(), r.report.J,
                      static_cast<long long>(r.report.iterations), r.report.foc.momentum, r.report.foc.divergence,
                      r.report.foc.vi, divergence_norm(r.u), r.state.rho.integral()});
  }
  return t;
}

void write_vtk(const Mesh& mesh, const CellField& rho, const CellField& p, const VelocityField& u,
               const std::filesystem::path& path, const std::string& title) {
  const int nc = mesh.num_cells();
  if (rho.values.size() != nc || p.values.size() != nc || u.mesh().num_cells() != nc)
    throw std::invalid_argument("write_vtk: fields do not match the mesh");
  std::ofstream out = open_for_writing(path);
  std::string head = title.substr(0, 255);
  for (char& c : head)
    if (c == '\n') c = ' ';
  out << "# vtk DataFile Version 3.0\n" << head << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices()) out << format_double(v.x()) << ' ' << format_double(v.y()) << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c) out << "5\n";
  out << "CELL_DATA " << nc << '\n';
  out << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) out << format_double(rho.values[c]) << '\n';
  out << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) out << format_double(p.values[c]) << '\n';
  out << "VECTORS u double\n";
  for (int c = 0; c < nc; ++c) {
    const Vec2 v = u.value(c, mesh.centroid(c));
    out << format_double(v.x()) << ' ' << format_double(v.y()) << " 0\n";
  }
  finish(out, path);
}

}  // namespace dgtopo
