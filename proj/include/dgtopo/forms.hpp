#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "dgtopo/alpha.hpp"
#include "dgtopo/boundary.hpp"
#include "dgtopo/fields.hpp"

namespace dgtopo {

using SparseMatrix = Eigen::SparseMatrix<double>;
/// Body force that may depend on the cell (piecewise-smooth forcing).
using CellVectorFunction = std::function<Vec2(int cell, const Vec2& x)>;

/// Interior-penalty parameters shared by a_h, l_h and J_h.
struct DgParams {
  double nu = 1.0;
  double sigma = 10.0;
};

/// The symmetric interior penalty form
///   a_h(u, v; rho) = sum_K int alpha(rho) u.v + nu grad u : grad v
///                  + nu sum_F [ sigma/h_F int [[u]]:[[v]] - int {{grad u}}:[[v]] - int [[u]]:{{grad v}} ]
/// over all facets (boundary facets one-sided). The rho-independent part is
/// assembled once; evaluate() only rescales the cell mass blocks.
class BrinkmanOperator {
 public:
  BrinkmanOperator(std::shared_ptr<const BdmSpace> space, DgParams params);

  /// A(alpha) for per-cell Brinkman coefficients alpha_K.
  SparseMatrix evaluate(const Eigen::VectorXd& alpha_per_cell) const;
  /// Overwrites the values of `A`, which must share pattern().
  void evaluate_into(const Eigen::VectorXd& alpha_per_cell, SparseMatrix& A) const;

  const SparseMatrix& pattern() const { return viscous_; }
  const BdmSpace& space() const { return *space_; }
  const DgParams& params() const { return params_; }

 private:
  std::shared_ptr<const BdmSpace> space_;
  DgParams params_;
  SparseMatrix viscous_;               // includes explicit zeros on every mass entry
  std::vector<int> mass_index_;        // 36 value indices per cell
  std::vector<double> mass_values_;    // 36 local mass entries per cell
};

/// Per-cell alpha(rho_K).
Eigen::VectorXd alpha_per_cell(const CellField& rho, const AlphaModel& model);

SparseMatrix assemble_a_h(const BdmSpace& space, const CellField& rho, const AlphaModel& model, DgParams params);

/// B(K, j) = b(phi_j, 1_K) = -int_K div phi_j dx.
SparseMatrix assemble_b(const BdmSpace& space);

/// l_h(v; g_h) = int f.v + nu sum_{F boundary} [ sigma/h_F int g_h.v - int g_h.(grad v n) ].
Eigen::VectorXd assemble_l_h(const BdmSpace& space, const CellVectorFunction& f, const BoundaryData& g,
                             DgParams params);

/// The discrete power dissipation J_h, evaluated term by term from its definition.
double evaluate_J_h(const VelocityField& u, const CellField& rho, const BoundaryData& g, const AlphaModel& model,
                    DgParams params, const CellVectorFunction& f = {});

/// ||div u||_{L2}, exact for BDM1 (div is cellwise constant).
double divergence_norm(const VelocityField& u);

/// Gram matrix of the broken H1 norm: L2 mass + cellwise gradients + interior
/// jumps weighted by h_F^-1; with include_boundary also boundary traces weighted by h_F^-1.
SparseMatrix assemble_broken_h1_gram(const BdmSpace& space, bool include_boundary);

/// Value and gradient of a (possibly discontinuous) field on a given cell.
using PiecewiseEval = std::function<void(int cell, const Vec2& x, Vec2& value, Mat2& grad)>;

struct BrokenNorms {
  double l2 = 0.0;
  double h1_seminorm = 0.0;
  double h1 = 0.0;
  double h1_g = 0.0;
};

/// L2, broken H1 seminorm/norm and broken H1_g norm (boundary term
/// sum_F h_F^-1 int |v - g|^2). A null g means g = 0.
BrokenNorms broken_norms(const Mesh& mesh, const PiecewiseEval& v, const VectorFunction& g = {},
                         int cell_degree = 6, int edge_degree = 8);

PiecewiseEval as_piecewise(const VelocityField& u);

/// Jump seminorm (sum_F h_F^-1 int |[[v]]|^2 over interior facets)^(1/2) and the
/// facet pairing sum_F int |{{Phi}} : [[v]]| with Phi = grad w.
struct TracePairing {
  double pairing = 0.0;
  double jump_seminorm = 0.0;
  double grad_l2 = 0.0;
};
TracePairing trace_pairing(const VelocityField& v, const VelocityField& w);

}  // namespace dgtopo
