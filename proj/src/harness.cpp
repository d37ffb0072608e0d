#include "dgtopo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dgtopo {

namespace {

double bump(double t) {
  if (!(std::abs(t) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

}  // namespace

BenchmarkSpec double_pipe_spec() { return BenchmarkSpec{}; }

Vec2 double_pipe_g(double x, double y, double Lx, double Ly) {
  constexpr double tol = 1e-12;
  const bool inside = x >= -tol && x <= Lx + tol && y >= -tol && y <= Ly + tol;
  const bool side = std::abs(x) <= tol || std::abs(x - Lx) <= tol;
  const bool cap = std::abs(y) <= tol || std::abs(y - Ly) <= tol;
  if (!inside || !(side || cap)) throw DomainError("double_pipe_g: point is not on the boundary");
  if (!side) return Vec2::Zero();
  const double s = y / Ly;
  double v = 0.0;
  if (s >= 2.0 / 3.0 && s <= 5.0 / 6.0) v = bump(12.0 * s - 9.0);
  if (s >= 1.0 / 6.0 && s <= 1.0 / 3.0) v = bump(12.0 * s - 3.0);
  return {v, 0.0};
}

VectorFunction double_pipe_boundary(const BenchmarkSpec& spec) {
  const double Lx = spec.Lx;
  const double Ly = spec.Ly;
  return [Lx, Ly](const Vec2& p) { return double_pipe_g(p.x(), p.y(), Lx, Ly); };
}

std::unique_ptr<TopOptProblem> make_problem(const BenchmarkSpec& spec, std::shared_ptr<const Mesh> mesh) {
  auto space = std::make_shared<const BdmSpace>(std::move(mesh));
  ProblemData data;
  data.boundary = project_boundary_data(*space, double_pipe_boundary(spec));
  data.space = std::move(space);
  data.params = spec.params();
  data.model = spec.model();
  data.gamma = spec.gamma;
  return std::make_unique<TopOptProblem>(std::move(data));
}

std::vector<std::shared_ptr<const Mesh>> mesh_hierarchy(const BenchmarkSpec& spec, int levels) {
  if (levels < 1) throw DomainError("mesh_hierarchy: need at least one level");
  std::vector<std::shared_ptr<const Mesh>> meshes;
  meshes.push_back(std::make_shared<const Mesh>(generate_rect_mesh(spec.nx, spec.ny, spec.Lx, spec.Ly)));
  for (int l = 1; l < levels; ++l) meshes.push_back(std::make_shared<const Mesh>(refine_uniform(*meshes.back())));
  return meshes;
}

CellField uniform_seed(std::shared_ptr<const Mesh> mesh, double gamma) { return CellField(std::move(mesh), gamma); }

CellField band_seed(std::shared_ptr<const Mesh> mesh, const BenchmarkSpec& spec) {
  CellField rho(mesh, 0.0);
  const double half_width = 0.5 * spec.gamma * spec.Ly;
  for (int c = 0; c < mesh->num_cells(); ++c) {
    if (std::abs(mesh->centroid(c).y() - 0.5 * spec.Ly) < half_width) rho.values[c] = 1.0;
  }
  return project_admissible(rho, spec.gamma);
}

Seed make_seed(const std::string& name, std::shared_ptr<const Mesh> mesh, const BenchmarkSpec& spec) {
  if (name == "uniform") return {name, uniform_seed(std::move(mesh), spec.gamma)};
  if (name == "band") return {name, band_seed(std::move(mesh), spec)};
  throw DomainError("unknown seed '" + name + "' (expected uniform or band)");
}

TopologyCheck classify_topology(const CellField& rho, const BenchmarkSpec& spec) {
  const Mesh& mesh = *rho.mesh;
  auto value_at = [&](double x, double y) {
    const auto c = mesh.locate({x, y});
    if (!c) throw DomainError("classify_topology: sample point outside the mesh");
    return rho.values[*c];
  };
  constexpr int samples = 96;
  TopologyCheck t;
  t.min_on_pipes = 1.0;
  t.min_on_midline = 1.0;
  for (int i = 0; i < samples; ++i) {
    const double x = (i + 0.5) / samples * spec.Lx;
    t.min_on_pipes = std::min({t.min_on_pipes, value_at(x, 0.25 * spec.Ly), value_at(x, 0.75 * spec.Ly)});
    if (x >= 0.25 * spec.Lx && x <= 0.75 * spec.Lx) t.min_on_midline = std::min(t.min_on_midline, value_at(x, 0.5 * spec.Ly));
  }
  t.center = value_at(0.5 * spec.Lx, 0.5 * spec.Ly);
  t.channels = t.min_on_pipes > 0.9 && t.center < 0.1;
  t.wrench = t.center > 0.9 && t.min_on_midline > 0.9;
  return t;
}

std::string seed_for_branch(const std::string& branch) {
  if (branch == "channels") return "uniform";
  if (branch == "wrench") return "band";
  throw DomainError("unknown branch '" + branch + "' (expected channels or wrench)");
}

std::vector<LevelSolve> solve_chain(const BenchmarkSpec& spec, const std::string& branch,
                                    const OptimizerOptions& options) {
  const std::string seed = seed_for_branch(branch);
  const auto meshes = mesh_hierarchy(spec, spec.levels);
  std::vector<LevelSolve> chain;
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const auto& mesh = meshes[l];
    LevelSolve ls;
    ls.nx = spec.nx << l;
    ls.ny = spec.ny << l;
    ls.h = mesh->mesh_size();
    auto problem = make_problem(spec, mesh);
    ls.space = problem->data().space;
    const bool warm = l > 0 && chain.back().solved;
    const CellField init = warm ? transfer_to_fine(chain.back().result.state.rho, mesh)
                                : make_seed(seed, mesh, spec).rho;
    try {
      ls.result = alternating_solve(*problem, init, options);
      ls.solved = true;
      ls.topology = classify_topology(ls.result.state.rho, spec);
      ls.div_norm = divergence_norm(ls.result.u);
      ls.converged = ls.result.report.converged && ls.topology.label() == branch;
      if (!ls.result.report.converged)
        ls.message = ls.result.report.message;
      else if (!ls.converged)
        ls.message = "converged to the " + ls.topology.label() + " design";
    } catch (const SolverError& e) {
      ls.message = e.what();
    }
    chain.push_back(std::move(ls));
  }
  return chain;
}

ConvergenceRow level_error(const std::vector<LevelSolve>& chain, int level, int reference) {
  if (level == reference) throw DomainError("level_error: a level cannot be compared with itself");
  if (level < 0 || reference >= static_cast<int>(chain.size()) || level > reference)
    throw DomainError("level_error: reference must be a finer level of the chain");
  const LevelSolve& ref = chain[reference];
  const LevelSolve& lev = chain[level];
  if (!lev.solved || !ref.solved) throw DomainError("level_error: level has no solution");
  VelocityField u = lev.result.u;
  CellField rho = lev.result.state.rho;
  CellField p = lev.result.p;
  for (int l = level + 1; l <= reference; ++l) {
    u = transfer_to_fine(u, chain[l].space);
    rho = transfer_to_fine(rho, chain[l].space->mesh_ptr());
    p = transfer_to_fine(p, chain[l].space->mesh_ptr());
  }
  ConvergenceRow row;
  row.h = lev.h;
  const Eigen::VectorXd du = u.coeffs - ref.result.u.coeffs;
  const SparseMatrix G = assemble_broken_h1_gram(*ref.space, true);
  row.err_u = std::sqrt(std::max(0.0, du.dot(G * du)));
  row.err_rho = l2_distance(rho, ref.result.state.rho);
  row.err_p = l2_distance(p, ref.result.p);
  row.flagged = !lev.converged;
  return row;
}

bool ConvergenceTable::monotone() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const ConvergenceRow& a = rows[i - 1];
    const ConvergenceRow& b = rows[i];
    if (!(b.err_u < a.err_u && b.err_rho < a.err_rho && b.err_p < a.err_p)) return false;
  }
  return true;
}

bool ConvergenceTable::flagged() const {
  for (const LevelSolve& l : chain)
    if (!l.converged) return true;
  return false;
}

double ConvergenceTable::fitted_order_u() const {
  std::vector<double> h, e;
  for (const ConvergenceRow& r : rows) {
    h.push_back(r.h);
    e.push_back(r.err_u);
  }
  return observed_order(h, e);
}

ConvergenceTable run_convergence(const BenchmarkSpec& spec, const std::string& branch,
                                 const OptimizerOptions& options) {
  if (spec.levels < 2) throw DomainError("run_convergence: need at least two levels");
  ConvergenceTable table;
  table.branch = branch;
  table.chain = solve_chain(spec, branch, options);
  const int L = static_cast<int>(table.chain.size()) - 1;
  table.h_reference = table.chain[L].h;
  if (!table.chain[L].solved) return table;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int l = 0; l < L; ++l) {
    ConvergenceRow row;
    if (table.chain[l].solved) {
      row = level_error(table.chain, l, L);
      row.flagged = row.flagged || !table.chain[L].converged;
    } else {
      row.h = table.chain[l].h;
      row.err_u = row.err_rho = row.err_p = nan;
      row.flagged = true;
    }
    row.order_u = row.order_rho = row.order_p = nan;
    if (!table.rows.empty()) {
      const ConvergenceRow& prev = table.rows.back();
      const double lh = std::log(prev.h / row.h);
      row.order_u = std::log(prev.err_u / row.err_u) / lh;
      row.order_rho = std::log(prev.err_rho / row.err_rho) / lh;
      row.order_p = std::log(prev.err_p / row.err_p) / lh;
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<DivRow> div_rows(const std::vector<LevelSolve>& chain, const std::string& branch) {
  std::vector<DivRow> rows;
  for (const LevelSolve& l : chain) {
    DivRow r;
    r.h = l.h;
    r.branch = branch;
    r.converged = l.converged;
    if (l.solved) {
      r.div_norm = l.div_norm;
      r.velocity_norm = std::sqrt(cell_energy_density(l.result.u).sum());
    } else {
      r.div_norm = r.velocity_norm = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<DivRow> run_div_table(const BenchmarkSpec& spec, const OptimizerOptions& options) {
  std::vector<DivRow> rows;
  for (const std::string branch : {"channels", "wrench"}) {
    auto part = div_rows(solve_chain(spec, branch, options), branch);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace dgtopo
