#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>
#if defined(DGTOPO_HAVE_CHOLMOD)
#include <Eigen/CholmodSupport>
#endif

#include "dgtopo/forward.hpp"

namespace dgtopo {

struct StokesBrinkmanSolver::Factorization {
#if defined(DGTOPO_HAVE_CHOLMOD)
  Eigen::CholmodSupernodalLLT<SparseMatrix> cholmod;
  bool use_cholmod = true;
#else
  static constexpr bool use_cholmod = false;
#endif
  Eigen::SimplicialLLT<SparseMatrix> simplicial;
  bool analyzed = false;

  bool factorize(const SparseMatrix& K) {
#if defined(DGTOPO_HAVE_CHOLMOD)
    if (use_cholmod) {
      if (!analyzed) cholmod.analyzePattern(K);
      analyzed = true;
      cholmod.factorize(K);
      if (cholmod.info() == Eigen::Success) return true;
      if (!fall_back()) return false;
    }
#endif
    if (!analyzed) simplicial.analyzePattern(K);
    analyzed = true;
    simplicial.factorize(K);
    return simplicial.info() == Eigen::Success;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
#if defined(DGTOPO_HAVE_CHOLMOD)
    if (use_cholmod) return cholmod.solve(b);
#endif
    return simplicial.solve(b);
  }

  bool fall_back() {
    if (!use_cholmod) return false;
#if defined(DGTOPO_HAVE_CHOLMOD)
    use_cholmod = false;
    analyzed = false;
#endif
    return true;
  }
};

namespace {

using Triplet = Eigen::Triplet<double>;

int find_entry(const SparseMatrix& M, int row, int col) {
  const int* inner = M.innerIndexPtr();
  const int* begin = inner + M.outerIndexPtr()[col];
  const int* end = inner + M.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) throw SolverError("saddle system: entry missing from pattern");
  return static_cast<int>(it - inner);
}

constexpr int kMaxCorrections = 40;
constexpr double kTarget = 1e-10;

}  // namespace

StokesBrinkmanSolver::StokesBrinkmanSolver(std::shared_ptr<const BdmSpace> space, DgParams params,
                                           BoundaryData bdata, CellVectorFunction forcing)
    : space_(std::move(space)),
      params_(params),
      bdata_(std::move(bdata)),
      forcing_(std::move(forcing)),
      op_(space_, params_),
      chol_(std::make_unique<Factorization>()) {
  const BdmSpace& V = *space_;
  const Mesh& mesh = V.mesh();
  const int nu_dofs = V.num_dofs();
  const int nc = mesh.num_cells();
  B_ = assemble_b(V);
  load_ = assemble_l_h(V, forcing_, bdata_, params_);
  inv_area_.resize(nc);
  for (int c = 0; c < nc; ++c) inv_area_[c] = 1.0 / mesh.area(c);

  free_index_.assign(nu_dofs, -1);
  for (int d = 0; d < nu_dofs; ++d) {
    if (!V.is_boundary_dof()[d]) {
      free_index_[d] = static_cast<int>(free_.size());
      free_.push_back(d);
    }
  }
  const int nf = static_cast<int>(free_.size());

  std::vector<Triplet> trips;
  for (int col = 0; col < B_.outerSize(); ++col) {
    if (free_index_[col] < 0) continue;
    for (SparseMatrix::InnerIterator it(B_, col); it; ++it) trips.emplace_back(it.row(), free_index_[col], it.value());
  }
  Bf_.resize(nc, nf);
  Bf_.setFromTriplets(trips.begin(), trips.end());
  Bf_.makeCompressed();
  SparseMatrix grad_div = Bf_.transpose() * inv_area_.asDiagonal() * Bf_;
  grad_div.makeCompressed();

  const SparseMatrix& P = op_.pattern();
  trips.clear();
  for (int col = 0; col < P.outerSize(); ++col) {
    if (free_index_[col] < 0) continue;
    for (SparseMatrix::InnerIterator it(P, col); it; ++it) {
      if (free_index_[it.row()] < 0) continue;
      trips.emplace_back(free_index_[it.row()], free_index_[col], 1.0);
    }
  }
  Aff_.resize(nf, nf);
  Aff_.setFromTriplets(trips.begin(), trips.end());
  Aff_.makeCompressed();
  for (int col = 0; col < grad_div.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(grad_div, col); it; ++it) trips.emplace_back(it.row(), it.col(), 1.0);
  K_.resize(nf, nf);
  K_.setFromTriplets(trips.begin(), trips.end());
  K_.makeCompressed();

  grad_div_.assign(K_.nonZeros(), 0.0);
  for (int col = 0; col < grad_div.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(grad_div, col); it; ++it)
      grad_div_[find_entry(K_, static_cast<int>(it.row()), col)] = it.value();
  for (int col = 0; col < P.outerSize(); ++col) {
    if (free_index_[col] < 0) continue;
    for (int k = P.outerIndexPtr()[col]; k < P.outerIndexPtr()[col + 1]; ++k) {
      const int row = P.innerIndexPtr()[k];
      if (free_index_[row] < 0) continue;
      a_to_f_.emplace_back(k, find_entry(Aff_, free_index_[row], free_index_[col]));
      a_to_k_.emplace_back(k, find_entry(K_, free_index_[row], free_index_[col]));
    }
  }
  A_work_ = P;
}

StokesBrinkmanSolver::~StokesBrinkmanSolver() = default;

const char* StokesBrinkmanSolver::backend() const { return chol_->use_cholmod ? "cholmod" : "simplicial"; }

SaddleSolve StokesBrinkmanSolver::solve(const CellField& rho, const AlphaModel& model) {
  return solve_alpha(alpha_per_cell(rho, model));
}

SaddleSolve StokesBrinkmanSolver::solve_alpha(const Eigen::VectorXd& alpha_cell) {
  const BdmSpace& V = *space_;
  const Mesh& mesh = V.mesh();
  const int nc = mesh.num_cells();
  const int nf = static_cast<int>(free_.size());

  op_.evaluate_into(alpha_cell, A_work_);
  const double* av = A_work_.valuePtr();
  double* fv = Aff_.valuePtr();
  for (const auto& [ai, fi] : a_to_f_) fv[fi] = av[ai];
  const double r = Aff_.diagonal().maxCoeff();
  double* kv = K_.valuePtr();
  for (std::size_t i = 0; i < grad_div_.size(); ++i) kv[i] = r * grad_div_[i];
  for (const auto& [ai, ki] : a_to_k_) kv[ki] += av[ai];

  // Right-hand sides with the boundary dofs moved over. The constant mode of
  // the divergence rows is not in the range of B on the free dofs; it is the
  // net boundary flux and is reported instead of enforced.
  const Eigen::VectorXd& uc = bdata_.dof_values;
  const Eigen::VectorXd Auc = A_work_ * uc;
  Eigen::VectorXd f(nf);
  for (int i = 0; i < nf; ++i) f[i] = load_[free_[i]] - Auc[free_[i]];
  Eigen::VectorXd gdiv = -(B_ * uc);
  gdiv.array() -= gdiv.mean();
  const Eigen::VectorXd inv_sqrt_area = inv_area_.cwiseSqrt();
  const SparseMatrix Bf_abs = Bf_.cwiseAbs();

  // Each block is measured against the size of the terms that cancel in it,
  // so the divergence rows are resolved to roundoff even when the momentum
  // load is large.
  auto residual = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& p, Eigen::VectorXd& ru,
                      Eigen::VectorXd& rp) {
    const Eigen::VectorXd Au = Aff_ * u;
    const Eigen::VectorXd Btp = Bf_.transpose() * p;
    ru = f - Au - Btp;
    rp = gdiv - Bf_ * u;
    rp.array() -= rp.mean();
    const double su = f.norm() + Au.norm() + Btp.norm();
    const double sp = gdiv.cwiseProduct(inv_sqrt_area).norm() +
                      (Bf_abs * u.cwiseAbs()).cwiseProduct(inv_sqrt_area).norm();
    const double eu = su > 0.0 ? ru.norm() / su : 0.0;
    const double ep = sp > 0.0 ? rp.cwiseProduct(inv_sqrt_area).norm() / sp : 0.0;
    return std::max(eu, ep);
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(nc);
  double res = 0.0;
  int steps = 0;
  if (f.norm() + gdiv.norm() > 0.0) {
    for (;;) {
      const bool ok = chol_->factorize(K_);
      ++factorizations_;
      u.setZero();
      p.setZero();
      res = 1.0;
      double best = res;
      int stalled = 0;
      Eigen::VectorXd ru, rp;
      for (steps = 0; ok && steps < kMaxCorrections; ++steps) {
        res = steps == 0 ? 1.0 : residual(u, p, ru, rp);
        if (steps == 0) {
          ru = f;
          rp = gdiv;
        }
        if (!std::isfinite(res) || res <= 1e-16) break;
        if (res > 0.5 * best) {
          if (++stalled >= 3) break;
        } else {
          stalled = 0;
        }
        best = std::min(best, res);
        const Eigen::VectorXd du = chol_->solve(ru + r * (Bf_.transpose() * inv_area_.cwiseProduct(rp)));
        p -= r * inv_area_.cwiseProduct(rp - Bf_ * du);
        u += du;
      }
      if ((ok && res <= kTarget) || !chol_->fall_back()) break;
    }
    if (!(res <= kTarget))
      throw SolverError("saddle system: relative residual " + std::to_string(res) + " above 1e-10");
  }

  SaddleSolve out;
  out.u = VelocityField(space_, uc);
  for (int i = 0; i < nf; ++i) out.u.coeffs[free_[i]] = u[i];
  double mean = 0.0;
  for (int c = 0; c < nc; ++c) mean += mesh.area(c) * p[c];
  p.array() -= mean / mesh.total_area();
  out.p = CellField(V.mesh_ptr(), p);
  out.flux_defect = (B_ * out.u.coeffs).sum();
  out.residual = res;
  out.refinement_steps = steps;
  out.system_size = nf + nc;
  return out;
}

Eigen::VectorXd StokesBrinkmanSolver::momentum_residual(const VelocityField& u, const CellField& p,
                                                        const Eigen::VectorXd& alpha_cell) const {
  const SparseMatrix A = op_.evaluate(alpha_cell);
  const Eigen::VectorXd full = A * u.coeffs + B_.transpose() * p.values - load_;
  Eigen::VectorXd r(free_.size());
  for (std::size_t i = 0; i < free_.size(); ++i) r[static_cast<int>(i)] = full[free_[i]];
  return r;
}

SaddleSolve solve_stokes_brinkman(std::shared_ptr<const BdmSpace> space, const CellField& rho,
                                  const AlphaModel& model, DgParams params, const BoundaryData& bdata,
                                  const CellVectorFunction& forcing) {
  StokesBrinkmanSolver solver(std::move(space), params, bdata, forcing);
  return solver.solve(rho, model);
}

}  // namespace dgtopo
