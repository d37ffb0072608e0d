#pragma once

#include <memory>
#include <vector>

#include "dgtopo/forms.hpp"

namespace dgtopo {

/// Solution of the Stokes-Brinkman saddle point problem for a fixed material field.
struct SaddleSolve {
  VelocityField u;
  CellField p;                     // zero mean
  double residual = 0.0;           // relative algebraic residual of the full system
  double flux_defect = 0.0;        // sum_K (B u)_K = -int_{boundary} g_h . n
  int refinement_steps = 0;        // augmented-Lagrangian corrections
  int system_size = 0;             // free velocity dofs + cells
};

/// Solves  a_h(u, v; rho) + b(v, p) = l_h(v; g_h)  for v in X_{h,0},
///         b(u, q) = 0                          for q in M_h,
/// with the boundary normal dofs eliminated (u in X_{h,g_h}) and int p = 0.
/// The saddle system is solved by residual corrections with the augmented
/// operator A + r B^T M^-1 B (M the DG0 mass, r = max diag A), which is SPD and
/// factorized once per solve by a sparse Cholesky; the pressure constants are
/// removed afterwards. The symbolic factorization is reused across solves.
class StokesBrinkmanSolver {
 public:
  StokesBrinkmanSolver(std::shared_ptr<const BdmSpace> space, DgParams params, BoundaryData bdata,
                       CellVectorFunction forcing = {});
  ~StokesBrinkmanSolver();
  StokesBrinkmanSolver(const StokesBrinkmanSolver&) = delete;
  StokesBrinkmanSolver& operator=(const StokesBrinkmanSolver&) = delete;

  SaddleSolve solve(const CellField& rho, const AlphaModel& model);
  SaddleSolve solve_alpha(const Eigen::VectorXd& alpha_per_cell);

  /// A(alpha) u + B^T p - L restricted to the free (non-boundary) dofs.
  Eigen::VectorXd momentum_residual(const VelocityField& u, const CellField& p,
                                    const Eigen::VectorXd& alpha_per_cell) const;

  const std::shared_ptr<const BdmSpace>& space() const { return space_; }
  const BrinkmanOperator& brinkman() const { return op_; }
  const SparseMatrix& b_matrix() const { return B_; }
  const Eigen::VectorXd& load() const { return load_; }
  const BoundaryData& boundary() const { return bdata_; }
  const CellVectorFunction& forcing() const { return forcing_; }
  DgParams params() const { return params_; }
  const std::vector<int>& free_dofs() const { return free_; }
  int factorizations() const { return factorizations_; }
  /// "cholmod" or "simplicial". CHOLMOD is abandoned for the BLAS-free
  /// simplicial factorization when it fails or its corrections stall.
  const char* backend() const;

 private:
  struct Factorization;

  std::shared_ptr<const BdmSpace> space_;
  DgParams params_;
  BoundaryData bdata_;
  CellVectorFunction forcing_;
  BrinkmanOperator op_;
  SparseMatrix B_;
  SparseMatrix Bf_;              // B restricted to the free dofs
  Eigen::VectorXd load_;
  Eigen::VectorXd inv_area_;
  std::vector<int> free_;        // free dof list
  std::vector<int> free_index_;  // dof -> position in free_, or -1
  SparseMatrix Aff_;             // free-free block of A
  SparseMatrix K_;               // augmented operator
  std::vector<double> grad_div_;  // B^T M^-1 B on K's pattern
  std::vector<std::pair<int, int>> a_to_f_;  // (A value index, Aff value index)
  std::vector<std::pair<int, int>> a_to_k_;  // (A value index, K value index)
  SparseMatrix A_work_;
  std::unique_ptr<Factorization> chol_;
  int factorizations_ = 0;
};

/// One-shot convenience wrapper.
SaddleSolve solve_stokes_brinkman(std::shared_ptr<const BdmSpace> space, const CellField& rho,
                                  const AlphaModel& model, DgParams params, const BoundaryData& bdata,
                                  const CellVectorFunction& forcing = {});

/// Manufactured-solution study on the unit square.
struct MmsLevel {
  int n = 0;
  double h = 0.0;
  double err_u_l2 = 0.0;
  double err_u_h1 = 0.0;  // broken H1 norm of the error, boundary term included
  double err_p_l2 = 0.0;
  double div_norm = 0.0;
  double consistency = 0.0;  // max |a_h(u_I, v) + b(v, p_I) - l_h(v)| scaled by h^-1
};

struct MmsReport {
  std::vector<MmsLevel> levels;
  double order_u_h1 = 0.0;
  double order_u_l2 = 0.0;
  double order_p_l2 = 0.0;
};

struct MmsOptions {
  int base_n = 4;
  double alpha_bar = 10.0;
  double q = 0.1;
  DgParams params{};
};

MmsReport check_mms(int levels, const MmsOptions& options = {});

/// Least-squares slope of log(err) against log(h).
double observed_order(const std::vector<double>& h, const std::vector<double>& err);

/// Discrete inf-sup constant of (X_{h,0}, M_h) with the broken H1 velocity norm
/// and the L2 pressure norm, from a dense eigen-solve. With zero_mean = false
/// the pressure space keeps the constants and the result is 0.
double estimate_inf_sup(const BdmSpace& space, bool zero_mean = true, int max_dofs = 6000);

}  // namespace dgtopo
