#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgtopo/forward.hpp"

namespace dgtopo {

enum class CellBound : std::uint8_t { lower, interior, upper };

/// A feasible material distribution with its volume multiplier.
struct MaterialState {
  CellField rho;
  double lambda_vol = 0.0;
  std::vector<CellBound> bounds;

  int count(CellBound b) const;
  double volume() const { return rho.integral(); }
};

/// Minimizer of  sum_K s * alpha(rho_K) m_K / 2 + l_K rho_K  subject to
/// 0 <= rho_K <= 1 and sum_K rho_K |K| <= volume_bound.
struct RhoStep {
  std::vector<double> rho;
  double lambda = 0.0;
  double volume = 0.0;
};

/// Cellwise problem data for the exact rho-step. `linear` (optional) and
/// `scale` carry the linearized deflation term; plain steps leave them unset.
struct RhoStepInput {
  std::span<const double> energy;  // m_K = int_K |u|^2
  std::span<const double> area;
  double volume_bound = 0.0;
  std::span<const double> linear{};
  double scale = 1.0;
};

RhoStep solve_rho_step(const RhoStepInput& in, const AlphaModel& model);

/// Exact minimizer of rho -> 1/2 int alpha(rho)|u|^2 over the discrete admissible set.
MaterialState rho_update(const VelocityField& u, const AlphaModel& model, double gamma);
MaterialState rho_update(const Eigen::VectorXd& energy, std::shared_ptr<const Mesh> mesh, const AlphaModel& model,
                         double gamma);

/// Classifies cells against the box bounds (exact comparisons).
std::vector<CellBound> classify_bounds(const CellField& rho);

/// Feasible projection of an arbitrary cell field onto {0 <= rho <= 1, int rho <= gamma |Omega|}.
CellField project_admissible(const CellField& rho, double gamma);

struct FocResiduals {
  double momentum = 0.0;  // relative residual of the momentum equation on the free dofs
  double divergence = 0.0;  // ||div u||_{L2}
  double vi = 0.0;  // scaled max KKT residual of the variational inequality

  double max_scaled(double velocity_scale) const;
};

/// Per-cell KKT residual of the variational inequality for the volume multiplier `lambda`.
double vi_residual(const CellField& rho, const Eigen::VectorXd& energy, double lambda, const AlphaModel& model);

class TopOptProblem;

FocResiduals foc_residuals(const TopOptProblem& problem, const VelocityField& u, const CellField& p,
                           const MaterialState& state);

/// Everything that defines one discrete fluid topology optimization problem on a mesh.
struct ProblemData {
  std::shared_ptr<const BdmSpace> space;
  BoundaryData boundary;
  DgParams params{};
  AlphaModel model{};  // target alpha_bar and q
  double gamma = 1.0 / 3.0;
  CellVectorFunction forcing{};
};

/// Holds the saddle solver for the problem's mesh so that the symbolic
/// factorization is shared by every solve on that mesh.
class TopOptProblem {
 public:
  explicit TopOptProblem(ProblemData data);

  const ProblemData& data() const { return data_; }
  const BdmSpace& space() const { return *data_.space; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return data_.space->mesh_ptr(); }
  StokesBrinkmanSolver& solver() const { return *solver_; }

  SaddleSolve solve_velocity(const CellField& rho, const AlphaModel& model) const;
  /// J_h(u, rho) split as 1/2 sum alpha(rho_K) m_K + (everything independent of rho).
  double viscous_part(const VelocityField& u) const;
  double objective(const VelocityField& u, const CellField& rho, const AlphaModel& model) const;

 private:
  ProblemData data_;
  std::unique_ptr<StokesBrinkmanSolver> solver_;
};

/// Shifted inverse deflation M(rho) = prod_i (||rho - rho_i||^-2 + 1) over stored solutions.
struct Deflation {
  std::vector<CellField> solutions;
  double power = 2.0;
  double shift = 1.0;

  bool empty() const { return solutions.empty(); }
  double factor(const CellField& rho) const;
  /// dM/drho_K (cellwise, including the |K| weight of the L2 inner product).
  Eigen::VectorXd gradient(const CellField& rho) const;
};

struct OptimizerOptions {
  // Increasing alpha_bar stages ending at the problem's alpha_bar; empty means
  // a single stage at the target.
  std::vector<double> continuation;
  double tol = 1e-8;              // final stage: scaled FOC residuals and ||rho^{k+1} - rho^k||
  double stage_tol = 1e-6;        // intermediate stages
  int max_iterations = 3000;      // per stage
  double omega_floor = 1.0 / 64.0;
  double descent_tol = 1e-12;     // relative
  int anderson_depth = 6;         // 0 disables acceleration
  int deflation_iterations = 40;  // deflated rho-steps before the undeflated polish
  bool verbose = false;
};

struct IterationRecord {
  int stage = 0;
  double alpha_bar = 0.0;
  double J = 0.0;           // J_h(u^{k+1}, rho^{k+1}) at the stage's alpha_bar
  double step = 0.0;        // ||rho^{k+1} - rho^k||_{L2}
  double omega = 1.0;
  bool accelerated = false;
  bool deflated = false;
};

struct OptimizeReport {
  int iterations = 0;
  int rejected_accelerations = 0;
  std::vector<IterationRecord> history;
  std::vector<int> stage_iterations;
  FocResiduals foc;
  double J = 0.0;
  double final_step = 0.0;
  bool converged = false;
  std::string message;

  /// Largest relative increase of J_h between consecutive undeflated iterations of one stage.
  double worst_ascent() const;
};

struct OptimizeResult {
  VelocityField u;
  CellField p;
  MaterialState state;
  OptimizeReport report;
};

/// Alternating minimization: exact u-solve, exact rho-step, relaxation
/// rho <- (1 - omega) rho + omega rho*, with safeguarded Anderson acceleration
/// and alpha_bar continuation. Throws SolverError if descent cannot be restored.
OptimizeResult alternating_solve(const TopOptProblem& problem, const CellField& init_rho,
                                 const OptimizerOptions& options = {}, const Deflation* deflation = nullptr);

struct RegistryEntry {
  std::string seed;
  OptimizeResult result;
};

struct MultiStartReport {
  std::vector<RegistryEntry> registry;
  std::vector<std::string> rejected;  // seed name and reason
  int failed = 0;                     // seeds that did not converge
  Eigen::MatrixXd distances;          // pairwise L2 distances between registry entries

  bool empty() const { return registry.empty(); }
};

struct Seed {
  std::string name;
  CellField rho;
};

/// Solutions closer than `distinct` (default 0.05 sqrt|Omega|) in L2 count as the same.
/// With `deflate`, a seed that reaches a stored solution is solved again with the
/// stored solutions deflated.
MultiStartReport multi_start(const TopOptProblem& problem, const std::vector<Seed>& seeds, bool deflate,
                             const OptimizerOptions& options = {}, std::optional<double> distinct = {});

double l2_distance(const CellField& a, const CellField& b);

/// Transfers from a mesh to its uniform refinement (fine.parent() must point
/// into `coarse`); both are exact because the meshes are nested. Throws
/// StructuralError for meshes that are not parent and child.
CellField transfer_to_fine(const CellField& coarse, std::shared_ptr<const Mesh> fine);
VelocityField transfer_to_fine(const VelocityField& coarse, std::shared_ptr<const BdmSpace> fine);

}  // namespace dgtopo
