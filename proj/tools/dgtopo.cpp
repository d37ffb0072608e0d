#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dgtopo/cli_io.hpp"

namespace fs = std::filesystem;
using namespace dgtopo;

namespace {

// OpenBLAS picks its SkylakeX kernels on AVX-512 machines, and those corrupt
// the supernodal Cholesky factors on some versions. The core type is read when
// the library loads, so it has to be set before the process starts.
void pin_openblas_core(char** argv) {
#if defined(__x86_64__)
  if (std::getenv("OPENBLAS_CORETYPE") || !__builtin_cpu_supports("avx512f")) return;
  if (setenv("OPENBLAS_CORETYPE", "Haswell", 1) != 0) return;
  execv("/proc/self/exe", argv);
#else
  (void)argv;
#endif
}

struct Overrides {
  std::string config;
  std::optional<int> levels;
  std::optional<double> sigma;
  std::optional<double> nu;
  std::vector<std::string> seeds;
  std::optional<bool> deflate;
  std::optional<std::string> out;
};

RunConfig load(const Overrides& o) {
  RunConfig c = o.config.empty() ? double_pipe_config() : parse_config(o.config);
  if (o.levels) c.spec.levels = *o.levels;
  if (o.sigma) c.spec.sigma = *o.sigma;
  if (o.nu) c.spec.nu = *o.nu;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  if (o.deflate) c.deflate = *o.deflate;
  if (o.out) c.out_dir = *o.out;
  c.validate("command line");
  return c;
}

std::string vtk_title(const RunConfig& c, const std::string& what) {
  return "dgtopo " + what + " config_hash " + c.hash_hex() + " nu " + format_double(c.spec.nu) +
         " (u sampled at cell centroids)";
}

void print_rows(const CsvTable& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) std::printf("%s%s", i ? "  " : "", t.columns[i].c_str());
  std::printf("\n");
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string s;
      if (const double* d = std::get_if<double>(&row[i])) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", *d);
        s = buf;
      } else if (const long long* n = std::get_if<long long>(&row[i])) {
        s = std::to_string(*n);
      } else {
        s = std::get<std::string>(row[i]);
      }
      std::printf("%s%s", i ? "  " : "", s.c_str());
    }
    std::printf("\n");
  }
}

int cmd_solve(const RunConfig& c) {
  const auto meshes = mesh_hierarchy(c.spec, c.spec.levels);
  const auto mesh = meshes.back();
  auto problem = make_problem(c.spec, mesh);
  std::vector<Seed> seeds;
  for (const std::string& s : c.seeds) seeds.push_back(make_seed(s, mesh, c.spec));
  const MultiStartReport rep = multi_start(*problem, seeds, c.deflate, c.optimizer);
  const fs::path out(c.out_dir);
  std::vector<std::string> comments = provenance_comments(c);
  comments.push_back("h " + format_double(mesh->mesh_size()));
  for (const std::string& r : rep.rejected) comments.push_back("rejected " + r);
  for (int i = 0; i < rep.distances.rows(); ++i)
    for (int j = i + 1; j < rep.distances.cols(); ++j)
      comments.push_back("distance " + std::to_string(i) + " " + std::to_string(j) + " " +
                         format_double(rep.distances(i, j)));
  const CsvTable table = registry_table(rep, c.spec);
  write_csv(table, out / "registry.csv", comments);
  for (const RegistryEntry& e : rep.registry) {
    const std::string name = classify_topology(e.result.state.rho, c.spec).label() + "_" + e.seed;
    write_vtk(*mesh, e.result.state.rho, e.result.p, e.result.u, out / ("solve_" + name + ".vtk"),
              vtk_title(c, "solve " + name));
  }
  std::printf("h = %.6g, %zu distinct solution(s)\n", mesh->mesh_size(), rep.registry.size());
  print_rows(table);
  for (const std::string& r : rep.rejected) std::printf("rejected %s\n", r.c_str());
  if (rep.failed > 0 || rep.empty()) {
    std::fprintf(stderr, "dgtopo solve: %d seed(s) did not converge\n", rep.failed);
    return 1;
  }
  return 0;
}

int cmd_converge(const RunConfig& c) {
  if (c.spec.levels < 2) throw ConfigError("converge needs --levels >= 2");
  const fs::path out(c.out_dir);
  bool flagged = false;
  for (const std::string branch : {"channels", "wrench"}) {
    const ConvergenceTable t = run_convergence(c.spec, branch, c.optimizer);
    std::vector<std::string> comments = provenance_comments(c);
    comments.push_back("branch " + branch);
    comments.push_back("h_reference " + format_double(t.h_reference));
    for (const LevelSolve& l : t.chain) {
      comments.push_back("level " + std::to_string(l.nx) + "x" + std::to_string(l.ny) + " J " +
                         format_double(l.result.report.J) + " converged " + (l.converged ? "1" : "0") +
                         (l.message.empty() ? "" : " " + l.message));
      if (l.solved)
        write_vtk(l.space->mesh(), l.result.state.rho, l.result.p, l.result.u,
                  out / ("converge_" + branch + "_" + std::to_string(l.nx) + "x" + std::to_string(l.ny) + ".vtk"),
                  vtk_title(c, "converge " + branch));
    }
    const CsvTable table = convergence_table(t);
    write_csv(table, out / ("converge_" + branch + ".csv"), comments);
    std::printf("%s (reference h = %.6g)\n", branch.c_str(), t.h_reference);
    print_rows(table);
    if (t.flagged()) {
      std::fprintf(stderr, "dgtopo converge: %s has flagged levels\n", branch.c_str());
      flagged = true;
    }
  }
  return flagged ? 1 : 0;
}

int cmd_divtable(const RunConfig& c) {
  const std::vector<DivRow> rows = run_div_table(c.spec, c.optimizer);
  const CsvTable table = div_table(rows);
  write_csv(table, fs::path(c.out_dir) / "divtable.csv", provenance_comments(c));
  print_rows(table);
  for (const DivRow& r : rows) {
    if (!r.converged) {
      std::fprintf(stderr, "dgtopo divtable: %s at h = %.6g did not converge\n", r.branch.c_str(), r.h);
      return 1;
    }
  }
  return 0;
}

int cmd_mms(const RunConfig& c) {
  MmsOptions o;
  o.base_n = c.mms_base_n;
  o.params = c.spec.params();
  const MmsReport rep = check_mms(c.spec.levels, o);
  const CsvTable table = mms_table(rep);
  write_csv(table, fs::path(c.out_dir) / "mms.csv", provenance_comments(c));
  print_rows(table);
  std::printf("fitted orders: u_H1 %.4f  u_L2 %.4f  p_L2 %.4f\n", rep.order_u_h1, rep.order_u_l2, rep.order_p_l2);
  return 0;
}

int cmd_meshcheck(const RunConfig& c) {
  CsvTable table;
  table.columns = {"nx", "ny", "h", "shape", "contact", "boundary", "flagged"};
  bool flagged = false;
  const auto meshes = mesh_hierarchy(c.spec, c.spec.levels);
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const RegularityReport r = check_mesh_regularity(*meshes[l]);
    flagged = flagged || r.flagged;
    table.rows.push_back({static_cast<long long>(c.spec.nx << l), static_cast<long long>(c.spec.ny << l),
                          meshes[l]->mesh_size(), r.shape, r.contact, r.boundary,
                          static_cast<long long>(r.flagged)});
  }
  write_csv(table, fs::path(c.out_dir) / "meshcheck.csv", provenance_comments(c));
  print_rows(table);
  return flagged ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  pin_openblas_core(argv);

  CLI::App app{"Divergence-free DG topology optimization of Stokes flow"};
  app.require_subcommand(1);
  Overrides o;
  int levels = 0;
  double sigma = 0.0, nu = 0.0;
  bool deflate = true;
  std::string out;
  auto* opt_levels = app.add_option("--levels", levels, "Number of nested mesh levels")->check(CLI::Range(1, 8));
  auto* opt_sigma = app.add_option("--sigma", sigma, "Interior penalty parameter");
  auto* opt_nu = app.add_option("--nu", nu, "Viscosity");
  auto* opt_deflate = app.add_option("--deflate", deflate, "Deflate previously found solutions (true/false)");
  auto* opt_out = app.add_option("--out", out, "Output directory");
  app.add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seeds", o.seeds, "Comma-separated seeds (uniform, band)")->delimiter(',');

  app.add_subcommand("solve", "Multi-start solve, VTK per distinct solution and registry.csv")->fallthrough();
  app.add_subcommand("converge", "Convergence against the finest level for both branches")->fallthrough();
  app.add_subcommand("divtable", "Divergence norms of both branches on every level")->fallthrough();
  app.add_subcommand("forward-mms", "Manufactured-solution rates of the forward solver")->fallthrough();
  app.add_subcommand("meshcheck", "Mesh regularity of every level")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*opt_levels) o.levels = levels;
  if (*opt_sigma) o.sigma = sigma;
  if (*opt_nu) o.nu = nu;
  if (*opt_deflate) o.deflate = deflate;
  if (*opt_out) o.out = out;

  RunConfig config;
  try {
    config = load(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "dgtopo: %s\n", e.what());
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "solve") return cmd_solve(config);
    if (cmd == "converge") return cmd_converge(config);
    if (cmd == "divtable") return cmd_divtable(config);
    if (cmd == "forward-mms") return cmd_mms(config);
    return cmd_meshcheck(config);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "dgtopo %s: %s\n", cmd.c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dgtopo %s: %s\n", cmd.c_str(), e.what());
    return 1;
  }
}
