#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <optional>
#include <string>

#include <Eigen/QR>

#include "dgtopo/topopt.hpp"

namespace dgtopo {

namespace {

double half_alpha_energy(const CellField& rho, const Eigen::VectorXd& m, const AlphaModel& model) {
  return 0.5 * alpha_per_cell(rho, model).dot(m);
}

// Type-II Anderson mixing on the fixed-point map rho -> rho*(u(rho)), in the
// area-weighted L2 inner product.
class Anderson {
 public:
  Anderson(int depth, Eigen::VectorXd sqrt_area) : depth_(depth), w_(std::move(sqrt_area)) {}

  void reset() {
    x_.clear();
    f_.clear();
  }

  // Records the iterate x and residual f = G(x) - x; returns the mixed iterate
  // when enough history is available.
  std::optional<Eigen::VectorXd> push(const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
    if (depth_ <= 0) return std::nullopt;
    x_.push_back(x);
    f_.push_back(f);
    if (static_cast<int>(x_.size()) > depth_ + 1) {
      x_.pop_front();
      f_.pop_front();
    }
    const int m = static_cast<int>(x_.size()) - 1;
    if (m < 1) return std::nullopt;
    const Eigen::Index n = x.size();
    Eigen::MatrixXd dF(n, m), dX(n, m);
    for (int j = 0; j < m; ++j) {
      dF.col(j) = f_[j + 1] - f_[j];
      dX.col(j) = x_[j + 1] - x_[j];
    }
    const Eigen::MatrixXd W = w_.asDiagonal() * dF;
    const Eigen::VectorXd rhs = w_.cwiseProduct(f);
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(W);
    if (qr.rank() < m) {
      reset();
      return std::nullopt;
    }
    const Eigen::VectorXd g = qr.solve(rhs);
    if (!g.allFinite()) {
      reset();
      return std::nullopt;
    }
    return Eigen::VectorXd(x + f - (dX + dF) * g);
  }

 private:
  int depth_;
  Eigen::VectorXd w_;
  std::deque<Eigen::VectorXd> x_, f_;
};

}  // namespace

double OptimizeReport::worst_ascent() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const IterationRecord& a = history[i - 1];
    const IterationRecord& b = history[i];
    if (a.stage != b.stage || a.deflated || b.deflated) continue;
    worst = std::max(worst, (b.J - a.J) / std::max(1.0, std::abs(a.J)));
  }
  return worst;
}

OptimizeResult alternating_solve(const TopOptProblem& problem, const CellField& init_rho,
                                 const OptimizerOptions& options, const Deflation* deflation) {
  const ProblemData& d = problem.data();
  const auto& mesh_ptr = problem.mesh_ptr();
  const Mesh& mesh = *mesh_ptr;
  const int nc = mesh.num_cells();
  if (init_rho.values.size() != nc) throw DomainError("alternating_solve: initial rho does not match the mesh");
  std::vector<double> schedule = options.continuation;
  if (schedule.empty()) schedule.push_back(d.model.alpha_bar);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] >= 0.0) || (i > 0 && !(schedule[i] > schedule[i - 1])))
      throw DomainError("alternating_solve: continuation must be an increasing sequence of alpha_bar values");
  }
  if (schedule.back() != d.model.alpha_bar)
    throw DomainError("alternating_solve: continuation must end at the problem's alpha_bar");
  {
    const double vol = init_rho.integral();
    if (init_rho.values.minCoeff() < 0.0 || init_rho.values.maxCoeff() > 1.0 ||
        vol > d.gamma * mesh.total_area() + 1e-10)
      throw DomainError("alternating_solve: initial rho is not admissible");
  }

  std::vector<double> area(nc);
  Eigen::VectorXd sqrt_area(nc);
  for (int c = 0; c < nc; ++c) {
    area[c] = mesh.area(c);
    sqrt_area[c] = std::sqrt(area[c]);
  }
  const double volume_bound = d.gamma * mesh.total_area();

  OptimizeResult out;
  OptimizeReport& rep = out.report;
  CellField rho = init_rho;
  const bool deflating = deflation && !deflation->empty();
  int deflated_left = 0;
  bool all_converged = true;

  const int stages = static_cast<int>(schedule.size());
  for (int s = 0; s < stages; ++s) {
    const AlphaModel model{schedule[s], d.model.q};
    const bool final_stage = s + 1 == stages;
    const double tol = final_stage ? options.tol : options.stage_tol;
    if (final_stage && deflating) deflated_left = options.deflation_iterations;

    SaddleSolve sol = problem.solve_velocity(rho, model);
    Eigen::VectorXd m = cell_energy_density(sol.u);
    double viscous = problem.viscous_part(sol.u);
    double J = half_alpha_energy(rho, m, model) + viscous;
    double omega = 1.0;
    Anderson anderson(options.anderson_depth, sqrt_area);
    bool stage_converged = false;
    int it = 0;
    double lambda = 0.0;
    double step_norm = 0.0;

    for (; it < options.max_iterations; ++it) {
      const bool deflated = deflated_left > 0;
      RhoStepInput in;
      in.energy = std::span<const double>(m.data(), nc);
      in.area = area;
      in.volume_bound = volume_bound;
      Eigen::VectorXd linear;
      if (deflated) {
        // Linearized deflation: minimize M(rho^k) phi(rho) + phi(rho^k) grad M(rho^k) . rho.
        const double phi = half_alpha_energy(rho, m, model);
        linear = phi * deflation->gradient(rho);
        in.scale = deflation->factor(rho);
        in.linear = std::span<const double>(linear.data(), nc);
      }
      const RhoStep step = solve_rho_step(in, model);
      const Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(step.rho.data(), nc);
      const Eigen::VectorXd residual = target - rho.values;
      step_norm = std::sqrt(residual.cwiseProduct(residual).dot(Eigen::Map<const Eigen::VectorXd>(area.data(), nc)));
      lambda = step.lambda;

      if (!deflated) {
        const double vi = vi_residual(rho, m, lambda, model);
        if (vi <= tol && step_norm <= tol) {
          stage_converged = true;
          break;
        }
      }

      // Anderson-mixed candidate, kept only if the reduced objective
      // J_h(u(rho), rho) does not increase; otherwise the relaxed exact step.
      const double allowed = options.descent_tol * std::max(1.0, std::abs(J));
      CellField next(mesh_ptr);
      bool accelerated = false;
      SaddleSolve next_sol;
      double next_viscous = 0.0;
      Eigen::VectorXd next_m;
      double J_new = 0.0;
      if (!deflated) {
        if (auto mixed = anderson.push(rho.values, residual)) {
          CellField cand = project_admissible(CellField(mesh_ptr, *mixed), d.gamma);
          SaddleSolve cs = problem.solve_velocity(cand, model);
          Eigen::VectorXd cm = cell_energy_density(cs.u);
          const double cv = problem.viscous_part(cs.u);
          const double cj = half_alpha_energy(cand, cm, model) + cv;
          if (cj <= J + allowed) {
            next = std::move(cand);
            next_sol = std::move(cs);
            next_m = std::move(cm);
            next_viscous = cv;
            J_new = cj;
            accelerated = true;
          } else {
            anderson.reset();
            ++rep.rejected_accelerations;
          }
        }
      }
      if (!accelerated) {
        const double phi_old = half_alpha_energy(rho, m, model);
        for (;;) {
          next.values = (1.0 - omega) * rho.values + omega * target;
          next.values = next.values.cwiseMax(0.0).cwiseMin(1.0);
          if (deflated || half_alpha_energy(next, m, model) <= phi_old + allowed) break;
          if (omega <= options.omega_floor)
            throw SolverError("alternating_solve: rho-step increases J_h at the smallest relaxation factor");
          omega = std::max(0.5 * omega, options.omega_floor);
        }
        const double J_mid = half_alpha_energy(next, m, model) + viscous;
        next_sol = problem.solve_velocity(next, model);
        next_m = cell_energy_density(next_sol.u);
        next_viscous = problem.viscous_part(next_sol.u);
        J_new = half_alpha_energy(next, next_m, model) + next_viscous;
        if (!deflated && J_new > J_mid + options.descent_tol * std::max(1.0, std::abs(J_mid)))
          throw SolverError("alternating_solve: velocity solve increased J_h (descent invariant violated)");
      }
      sol = std::move(next_sol);
      m = std::move(next_m);
      viscous = next_viscous;

      const double moved = std::sqrt((next.values - rho.values).cwiseAbs2().dot(
          Eigen::Map<const Eigen::VectorXd>(area.data(), nc)));
      rho = std::move(next);
      J = J_new;
      rep.history.push_back({s, model.alpha_bar, J, moved, omega, accelerated, deflated});
      if (deflated && --deflated_left == 0) anderson.reset();
      if (options.verbose && (it % 25 == 0))
        std::fprintf(stderr, "  stage %d alpha_bar %.3g it %d J %.12g step %.3e%s\n", s, model.alpha_bar, it, J,
                     step_norm, accelerated ? " (AA)" : "");
    }
    rep.stage_iterations.push_back(it);
    rep.iterations += it;
    if (!stage_converged) all_converged = false;

    if (final_stage) {
      out.u = sol.u;
      out.p = sol.p;
      out.state.rho = rho;
      out.state.lambda_vol = lambda;
      out.state.bounds = classify_bounds(rho);
      rep.J = J;
      rep.final_step = step_norm;
      rep.foc = foc_residuals(problem, out.u, out.p, out.state);
    }
    if (options.verbose)
      std::fprintf(stderr, "stage %d alpha_bar %.3g: %d iterations, J %.12g, step %.3e%s\n", s, model.alpha_bar,
                   it, J, step_norm, stage_converged ? "" : " (not converged)");
  }

  const double u_scale = std::sqrt(cell_energy_density(out.u).sum());
  rep.converged = all_converged && rep.foc.max_scaled(u_scale) <= std::max(options.tol, 1e-14);
  if (!rep.converged)
    rep.message = all_converged ? "FOC residuals above tolerance" : "iteration limit reached before convergence";
  return out;
}

MultiStartReport multi_start(const TopOptProblem& problem, const std::vector<Seed>& seeds, bool deflate,
                             const OptimizerOptions& options, std::optional<double> distinct) {
  const Mesh& mesh = problem.data().space->mesh();
  const double threshold = distinct.value_or(0.05 * std::sqrt(mesh.total_area()));
  MultiStartReport rep;
  Deflation deflation;
  // A seed is first solved plainly; deflation is only brought in when it lands on
  // a stored solution, so seeds that reach distinct minimizers do so
  // independently of their order.
  auto attempt = [&](const Seed& seed, const Deflation* d) -> std::optional<OptimizeResult> {
    try {
      OptimizeResult res = alternating_solve(problem, seed.rho, options, d);
      if (res.report.converged) return res;
      rep.rejected.push_back(seed.name + ": " + res.report.message);
    } catch (const SolverError& e) {
      rep.rejected.push_back(seed.name + ": " + e.what());
    }
    ++rep.failed;
    return std::nullopt;
  };
  auto stored = [&](const OptimizeResult& res) -> const RegistryEntry* {
    for (const RegistryEntry& e : rep.registry)
      if (l2_distance(e.result.state.rho, res.state.rho) <= threshold) return &e;
    return nullptr;
  };
  for (const Seed& seed : seeds) {
    std::optional<OptimizeResult> res = attempt(seed, nullptr);
    if (!res) continue;
    if (const RegistryEntry* e = stored(*res)) {
      if (!deflate) {
        rep.rejected.push_back(seed.name + ": same solution as seed " + e->seed);
        continue;
      }
      res = attempt(seed, &deflation);
      if (!res) continue;
      if (const RegistryEntry* again = stored(*res)) {
        rep.rejected.push_back(seed.name + ": same solution as seed " + again->seed + " after deflation");
        continue;
      }
    }
    deflation.solutions.push_back(res->state.rho);
    rep.registry.push_back({seed.name, std::move(*res)});
  }
  const int n = static_cast<int>(rep.registry.size());
  rep.distances = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      rep.distances(i, j) = rep.distances(j, i) =
          l2_distance(rep.registry[i].result.state.rho, rep.registry[j].result.state.rho);
  return rep;
}

}  // namespace dgtopo
