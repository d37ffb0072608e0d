#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "dgtopo/boundary.hpp"
#include "dgtopo/forms.hpp"
#include "dgtopo/forward.hpp"
#include "dgtopo/quadrature.hpp"
#include "oracles.hpp"

using namespace dgtopo;

namespace {

std::shared_ptr<const BdmSpace> rect_space(int nx, int ny, double Lx = 1.0, double Ly = 1.0) {
  return std::make_shared<const BdmSpace>(std::make_shared<const Mesh>(generate_rect_mesh(nx, ny, Lx, Ly)));
}

Eigen::MatrixXd free_block(const SparseMatrix& A, const BdmSpace& V) {
  std::vector<int> free;
  for (int d = 0; d < V.num_dofs(); ++d)
    if (!V.is_boundary_dof()[d]) free.push_back(d);
  const Eigen::MatrixXd D(A);
  Eigen::MatrixXd out(free.size(), free.size());
  for (std::size_t i = 0; i < free.size(); ++i)
    for (std::size_t j = 0; j < free.size(); ++j) out(i, j) = D(free[i], free[j]);
  return out;
}

// Smallest eigenvalue of A x = mu G x on the homogeneous subspace.
double coercivity(int n, double sigma) {
  auto V = rect_space(n, n);
  const BrinkmanOperator op(V, DgParams{1.0, sigma});
  const Eigen::MatrixXd A = free_block(op.evaluate(Eigen::VectorXd::Zero(V->mesh().num_cells())), *V);
  const Eigen::MatrixXd G = free_block(assemble_broken_h1_gram(*V, true), *V);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(Forms, BrinkmanOperatorIsSymmetric) {
  auto V = rect_space(6, 4, 1.5, 1.0);
  const BrinkmanOperator op(V, DgParams{1.0, 10.0});
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 2.5e4);
  Eigen::VectorXd a(V->mesh().num_cells());
  for (int c = 0; c < a.size(); ++c) a[c] = U(gen);
  const SparseMatrix A = op.evaluate(a);
  const SparseMatrix At = A.transpose();
  EXPECT_LE((A - At).norm(), 1e-12 * A.norm());
}

TEST(Forms, CoercivityIsPositiveAndLevelStable) {
  const double c4 = coercivity(4, 10.0);
  const double c8 = coercivity(8, 10.0);
  const double c16 = coercivity(16, 10.0);
  EXPECT_GT(c4, 0.0);
  EXPECT_GT(c8, 0.0);
  EXPECT_GT(c16, 0.0);
  EXPECT_GT(c8 / c4, 0.5);
  EXPECT_LT(c8 / c4, 2.0);
  EXPECT_GT(c16 / c8, 0.5);
  EXPECT_LT(c16 / c8, 2.0);
}

TEST(Forms, TooSmallPenaltyLosesCoercivity) { EXPECT_LT(coercivity(4, 0.1), 0.0); }

TEST(Forms, DiscreteObjectiveEqualsContinuousOnLinearFields) {
  auto V = rect_space(5, 4, 1.5, 1.0);
  const Mesh& mesh = V->mesh();
  const VectorFunction lin = [](const Vec2& x) { return Vec2(0.3 + x.x() - 2.0 * x.y(), 1.0 + 0.5 * x.x() - x.y()); };
  const VelocityField u(V, interpolate_bdm1(*V, lin));
  const BoundaryData g = project_boundary_data(*V, lin);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  CellField rho(V->mesh_ptr());
  for (int c = 0; c < mesh.num_cells(); ++c) rho.values[c] = U(gen);
  const AlphaModel model{2.5e4, 0.1};
  const DgParams params{1.7, 10.0};

  const Mat2 grad = (Mat2() << 1.0, -2.0, 0.5, -1.0).finished();
  const QuadratureRule& rule = cached_quadrature(QuadDomain::triangle, 6);
  double J = 0.5 * params.nu * grad.squaredNorm() * mesh.total_area();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Mat2 Jac = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * lin(x0 + Jac * rule.points[q]).squaredNorm();
    J += 0.5 * oracle::alpha(rho.values[c], model.alpha_bar, model.q) * std::abs(Jac.determinant()) * s;
  }
  EXPECT_NEAR(evaluate_J_h(u, rho, g, model, params), J, 1e-12 * std::abs(J));
}

TEST(Forms, BrokenNormsOfAConstant) {
  auto V = rect_space(3, 2, 1.5, 1.0);
  const Mesh& mesh = V->mesh();
  const Vec2 c(2.0, -1.0);
  const PiecewiseEval constant = [&](int, const Vec2&, Vec2& v, Mat2& g) {
    v = c;
    g.setZero();
  };
  const BrokenNorms n = broken_norms(mesh, constant);
  double boundary = 0.0;
  for (const Facet& F : mesh.facets())
    if (F.is_boundary()) boundary += c.squaredNorm() * F.length / F.length;
  EXPECT_NEAR(n.l2 * n.l2, mesh.total_area() * c.squaredNorm(), 1e-12);
  EXPECT_NEAR(n.h1_seminorm, 0.0, 1e-12);
  EXPECT_NEAR(n.h1_g * n.h1_g, mesh.total_area() * c.squaredNorm() + boundary, 1e-11);
}

TEST(Forms, BrokenH1gOfALinearFieldWithItsTraceIsTheH1Norm) {
  auto V = rect_space(4, 4);
  const VectorFunction lin = [](const Vec2& x) { return Vec2(x.x() - x.y(), 2.0 * x.y()); };
  const VelocityField u(V, interpolate_bdm1(*V, lin));
  const BrokenNorms n = broken_norms(V->mesh(), as_piecewise(u), lin);
  // ||u||_L2^2 over the unit square plus |grad u|^2 = 1 + 1 + 4.
  const double l2 = 1.0 / 3.0 - 2.0 * 0.25 + 1.0 / 3.0 + 4.0 / 3.0;
  EXPECT_NEAR(n.h1_g * n.h1_g, l2 + 6.0, 1e-12);
  EXPECT_NEAR(n.h1_g, n.h1, 1e-12);
}

TEST(Forms, GramMatrixMatchesQuadratureNorm) {
  auto V = rect_space(4, 3, 1.5, 1.0);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> N;
  VelocityField u(V);
  for (int d = 0; d < V->num_dofs(); ++d) u.coeffs[d] = N(gen);
  const SparseMatrix G = assemble_broken_h1_gram(*V, true);
  const SparseMatrix G0 = assemble_broken_h1_gram(*V, false);
  const BrokenNorms n = broken_norms(V->mesh(), as_piecewise(u));
  EXPECT_NEAR(u.coeffs.dot(G * u.coeffs), n.h1_g * n.h1_g, 1e-11 * n.h1_g * n.h1_g);
  EXPECT_NEAR(u.coeffs.dot(G0 * u.coeffs), n.h1 * n.h1, 1e-11 * n.h1 * n.h1);
}

TEST(Forms, DivergenceMatrixIsMinusCellIntegralOfDivergence) {
  auto V = rect_space(3, 3);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> N;
  VelocityField u(V);
  for (int d = 0; d < V->num_dofs(); ++d) u.coeffs[d] = N(gen);
  const Eigen::VectorXd Bu = assemble_b(*V) * u.coeffs;
  double div2 = 0.0;
  for (int c = 0; c < V->mesh().num_cells(); ++c) {
    EXPECT_NEAR(Bu[c], -u.divergence(c) * V->mesh().area(c), 1e-12);
    div2 += std::pow(u.divergence(c), 2) * V->mesh().area(c);
  }
  EXPECT_NEAR(divergence_norm(u), std::sqrt(div2), 1e-12);
}

TEST(Forms, InfSupIsPositiveAndLevelStable) {
  const double b4 = estimate_inf_sup(*rect_space(4, 4));
  const double b8 = estimate_inf_sup(*rect_space(8, 8));
  const double b16 = estimate_inf_sup(*rect_space(16, 16));
  EXPECT_GT(b4, 0.0);
  EXPECT_GT(b8 / b4, 0.5);
  EXPECT_LT(b8 / b4, 2.0);
  EXPECT_GT(b16 / b8, 0.5);
  EXPECT_LT(b16 / b8, 2.0);
  // The constant pressure is in the kernel of B^T; the estimate is the square
  // root of a rounding-level eigenvalue.
  EXPECT_LT(estimate_inf_sup(*rect_space(4, 4), false), 1e-6 * b4);
}
