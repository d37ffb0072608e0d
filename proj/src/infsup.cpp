#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "dgtopo/forward.hpp"

namespace dgtopo {

double estimate_inf_sup(const BdmSpace& space, bool zero_mean, int max_dofs) {
  const Mesh& mesh = space.mesh();
  std::vector<int> free;
  for (int d = 0; d < space.num_dofs(); ++d)
    if (!space.is_boundary_dof()[d]) free.push_back(d);
  const int nf = static_cast<int>(free.size());
  const int nc = mesh.num_cells();
  if (nf > max_dofs)
    throw DomainError("estimate_inf_sup: " + std::to_string(nf) + " velocity dofs exceed the dense cap " +
                      std::to_string(max_dofs));

  const Eigen::MatrixXd G_full = Eigen::MatrixXd(assemble_broken_h1_gram(space, false));
  const Eigen::MatrixXd B_full = Eigen::MatrixXd(assemble_b(space));
  Eigen::MatrixXd G(nf, nf), B(nc, nf);
  for (int j = 0; j < nf; ++j) {
    for (int i = 0; i < nf; ++i) G(i, j) = G_full(free[i], free[j]);
    B.col(j) = B_full.col(free[j]);
  }
  // Normalize pressures by the L2 mass: q = M^{-1/2} y.
  Eigen::VectorXd inv_sqrt_area(nc);
  for (int c = 0; c < nc; ++c) inv_sqrt_area[c] = 1.0 / std::sqrt(mesh.area(c));
  const Eigen::MatrixXd Bs = inv_sqrt_area.asDiagonal() * B;
  const Eigen::LLT<Eigen::MatrixXd> chol(G);
  if (chol.info() != Eigen::Success) throw SolverError("estimate_inf_sup: Gram matrix is not positive definite");
  // S = Bs G^{-1} Bs^T = (L^{-1} Bs^T)^T (L^{-1} Bs^T).
  const Eigen::MatrixXd W = chol.matrixL().solve(Bs.transpose());
  Eigen::MatrixXd S = W.transpose() * W;

  if (zero_mean) {
    Eigen::VectorXd w(nc);
    for (int c = 0; c < nc; ++c) w[c] = std::sqrt(mesh.area(c));
    w.normalize();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
    const Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd Qc = Q.rightCols(nc - 1);
    S = Qc.transpose() * S * Qc;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  return std::sqrt(std::max(0.0, lmin));
}

}  // namespace dgtopo
