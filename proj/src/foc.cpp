#include <algorithm>
#include <cmath>

#include "dgtopo/topopt.hpp"

namespace dgtopo {

double FocResiduals::max_scaled(double velocity_scale) const {
  return std::max({momentum, divergence / std::max(1.0, velocity_scale), vi});
}

double vi_residual(const CellField& rho, const Eigen::VectorXd& energy, double lambda, const AlphaModel& model) {
  const Mesh& mesh = *rho.mesh;
  const int nc = mesh.num_cells();
  // g_K = dJ/drho_K / |K| + lambda; scaled by the largest |alpha'(rho_K) m_K| / (2 |K|).
  Eigen::VectorXd g(nc);
  double scale = lambda;
  for (int c = 0; c < nc; ++c) {
    const double d = 0.5 * alpha_prime(rho.values[c], model) * energy[c] / mesh.area(c);
    g[c] = d + lambda;
    scale = std::max(scale, std::abs(d));
  }
  if (!(scale > 0.0)) return 0.0;
  double r = 0.0;
  for (int c = 0; c < nc; ++c) {
    const double x = rho.values[c];
    r = std::max(r, std::abs(x - std::clamp(x - g[c] / scale, 0.0, 1.0)));
  }
  return r;
}

FocResiduals foc_residuals(const TopOptProblem& problem, const VelocityField& u, const CellField& p,
                           const MaterialState& state) {
  const ProblemData& d = problem.data();
  const StokesBrinkmanSolver& solver = problem.solver();
  const Eigen::VectorXd alpha_cell = alpha_per_cell(state.rho, d.model);

  FocResiduals r;
  const Eigen::VectorXd res = solver.momentum_residual(u, p, alpha_cell);
  const SparseMatrix A = solver.brinkman().evaluate(alpha_cell);
  const Eigen::VectorXd Au = A * u.coeffs;
  double scale = 0.0;
  for (int dof : solver.free_dofs()) scale += Au[dof] * Au[dof] + solver.load()[dof] * solver.load()[dof];
  scale = std::sqrt(scale);
  r.momentum = scale > 0.0 ? res.norm() / scale : res.norm();
  r.divergence = divergence_norm(u);
  r.vi = vi_residual(state.rho, cell_energy_density(u), state.lambda_vol, d.model);
  return r;
}

TopOptProblem::TopOptProblem(ProblemData data) : data_(std::move(data)) {
  if (!data_.space) throw DomainError("TopOptProblem: missing velocity space");
  if (!(data_.gamma > 0.0 && data_.gamma < 1.0)) throw DomainError("TopOptProblem: gamma must lie in (0, 1)");
  validate(data_.model);
  solver_ = std::make_unique<StokesBrinkmanSolver>(data_.space, data_.params, data_.boundary, data_.forcing);
}

SaddleSolve TopOptProblem::solve_velocity(const CellField& rho, const AlphaModel& model) const {
  return solver_->solve(rho, model);
}

double TopOptProblem::viscous_part(const VelocityField& u) const {
  // alpha_bar = 0 switches the Brinkman term off.
  const AlphaModel none{0.0, data_.model.q};
  const CellField zero(data_.space->mesh_ptr(), 0.0);
  return evaluate_J_h(u, zero, data_.boundary, none, data_.params, data_.forcing);
}

double TopOptProblem::objective(const VelocityField& u, const CellField& rho, const AlphaModel& model) const {
  const Eigen::VectorXd m = cell_energy_density(u);
  const Eigen::VectorXd a = alpha_per_cell(rho, model);
  return 0.5 * a.dot(m) + viscous_part(u);
}

double Deflation::factor(const CellField& rho) const {
  double M = 1.0;
  for (const CellField& s : solutions) M *= std::pow(l2_distance(rho, s), -power) + shift;
  return M;
}

Eigen::VectorXd Deflation::gradient(const CellField& rho) const {
  const Mesh& mesh = *rho.mesh;
  const int nc = mesh.num_cells();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(nc);
  const double M = factor(rho);
  for (const CellField& s : solutions) {
    const double dist = l2_distance(rho, s);
    const double mi = std::pow(dist, -power) + shift;
    // d/drho_K ||rho - s||^-p = -p ||rho - s||^(-p-2) (rho_K - s_K) |K|
    const double coef = -power * std::pow(dist, -power - 2.0) * (M / mi);
    for (int c = 0; c < nc; ++c) grad[c] += coef * (rho.values[c] - s.values[c]) * mesh.area(c);
  }
  return grad;
}

}  // namespace dgtopo
