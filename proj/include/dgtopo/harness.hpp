#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dgtopo/topopt.hpp"

namespace dgtopo {

/// Geometry, material and discretization parameters of a benchmark run.
struct BenchmarkSpec {
  double Lx = 1.5;
  double Ly = 1.0;
  double gamma = 1.0 / 3.0;
  double alpha_bar = 2.5e4;
  double q = 0.1;
  double nu = 1.0;
  double sigma = 10.0;
  int nx = 48;  // coarsest mesh
  int ny = 32;
  int levels = 1;

  AlphaModel model() const { return {alpha_bar, q}; }
  DgParams params() const { return {nu, sigma}; }
};

/// The double-pipe preset.
BenchmarkSpec double_pipe_spec();

/// Inflow/outflow profile: parabolic-like bumps on x = 0 and x = Lx centred at
/// y = 1/4 and y = 3/4, zero elsewhere on the boundary. Throws DomainError
/// for points off the boundary.
Vec2 double_pipe_g(double x, double y, double Lx = 1.5, double Ly = 1.0);
VectorFunction double_pipe_boundary(const BenchmarkSpec& spec);

/// Builds mesh, space, boundary data and solver for one refinement level.
std::unique_ptr<TopOptProblem> make_problem(const BenchmarkSpec& spec, std::shared_ptr<const Mesh> mesh);

/// Meshes nx*2^l x ny*2^l for l = 0..levels-1, each the uniform refinement of the previous.
std::vector<std::shared_ptr<const Mesh>> mesh_hierarchy(const BenchmarkSpec& spec, int levels);

/// rho = gamma everywhere.
CellField uniform_seed(std::shared_ptr<const Mesh> mesh, double gamma);
/// rho = 1 on the central band |y - Ly/2| < gamma Ly / 2, projected onto the volume bound.
CellField band_seed(std::shared_ptr<const Mesh> mesh, const BenchmarkSpec& spec);
/// Named seeds "uniform" and "band".
Seed make_seed(const std::string& name, std::shared_ptr<const Mesh> mesh, const BenchmarkSpec& spec);

/// Qualitative classification of a double-pipe design.
struct TopologyCheck {
  double min_on_pipes = 0.0;    // min rho over cells crossed by the lines y = 1/4 and y = 3/4
  double center = 0.0;          // rho at the domain centre
  double min_on_midline = 0.0;  // min rho along y = 1/2 for x in [Lx/4, 3Lx/4]
  bool channels = false;        // two straight bands, empty centre
  bool wrench = false;          // one connected central channel

  std::string label() const { return channels ? "channels" : (wrench ? "wrench" : "other"); }
};
TopologyCheck classify_topology(const CellField& rho, const BenchmarkSpec& spec);

/// Seed that leads to a branch: "channels" -> "uniform", "wrench" -> "band".
std::string seed_for_branch(const std::string& branch);

/// One converged (or flagged) level of a warm-started refinement chain.
struct LevelSolve {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  std::shared_ptr<const BdmSpace> space;
  OptimizeResult result;
  TopologyCheck topology;
  double div_norm = 0.0;
  bool solved = false;     // false if the optimizer threw
  bool converged = false;  // optimizer converged and the topology matches the branch
  std::string message;
};

/// Solves `branch` on spec.levels nested meshes starting at spec.nx x spec.ny,
/// each level warm-started from the transferred coarser material field.
/// Failures are recorded per level; later levels restart from the seed.
std::vector<LevelSolve> solve_chain(const BenchmarkSpec& spec, const std::string& branch,
                                    const OptimizerOptions& options = {});

struct ConvergenceRow {
  double h = 0.0;
  double err_u = 0.0;    // broken H1_g norm of u_l - u_L
  double err_rho = 0.0;  // L2
  double err_p = 0.0;    // L2
  double order_u = 0.0;  // against the previous row; NaN on the first
  double order_rho = 0.0;
  double order_p = 0.0;
  bool flagged = false;  // level not converged or on the wrong branch
};

struct ConvergenceTable {
  std::string branch;
  double h_reference = 0.0;
  std::vector<ConvergenceRow> rows;
  std::vector<LevelSolve> chain;

  bool monotone() const;  // all three errors strictly decreasing
  bool flagged() const;
  /// Least-squares order over all rows.
  double fitted_order_u() const;
};

/// Errors of `coarse` against the finer `reference` on the reference mesh.
/// Throws DomainError when both are the same level.
ConvergenceRow level_error(const std::vector<LevelSolve>& chain, int level, int reference);

/// Needs spec.levels >= 2; the finest level is the reference.
ConvergenceTable run_convergence(const BenchmarkSpec& spec, const std::string& branch,
                                 const OptimizerOptions& options = {});

struct DivRow {
  double h = 0.0;
  std::string branch;
  double div_norm = 0.0;
  double velocity_norm = 0.0;  // L2 norm of u_h
  bool converged = false;
};

/// Divergence norms for both branches on every level of spec.
std::vector<DivRow> div_rows(const std::vector<LevelSolve>& chain, const std::string& branch);
std::vector<DivRow> run_div_table(const BenchmarkSpec& spec, const OptimizerOptions& options = {});

}  // namespace dgtopo
