#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "dgtopo/alpha.hpp"
#include "dgtopo/boundary.hpp"
#include "dgtopo/fields.hpp"
#include "dgtopo/forms.hpp"
#include "dgtopo/kernels.hpp"
#include "dgtopo/quadrature.hpp"
#include "oracles.hpp"

using namespace dgtopo;

namespace {

std::shared_ptr<const BdmSpace> unit_space(int n) {
  return std::make_shared<const BdmSpace>(std::make_shared<const Mesh>(generate_rect_mesh(n, n, 1.0, 1.0)));
}

Vec2 smooth(const Vec2& x) { return {std::sin(2.0 * x.x()) * std::cos(x.y()), std::exp(x.x() * x.y())}; }

double interpolation_error(int n) {
  auto V = unit_space(n);
  const VelocityField u(V, interpolate_bdm1(*V, smooth));
  const PiecewiseEval uh = as_piecewise(u);
  const PiecewiseEval diff = [&](int c, const Vec2& x, Vec2& v, Mat2& g) {
    uh(c, x, v, g);
    v -= smooth(x);
  };
  return broken_norms(V->mesh(), diff).l2;
}

}  // namespace

TEST(Quadrature, MonomialOnReferenceTriangle) {
  // int x^a y^b over the reference triangle = a! b! / (a + b + 2)!
  const QuadratureRule& r = cached_quadrature(QuadDomain::triangle, 4);
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q].x() * r.points[q].y(), 2);
  EXPECT_NEAR(s, 1.0 / 180.0, 1e-16);
  for (int deg = 1; deg <= 12; ++deg) {
    const QuadratureRule& rule = cached_quadrature(QuadDomain::triangle, deg);
    for (int a = 0; a <= deg; ++a) {
      const int b = deg - a;
      double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
      double sum = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        sum += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
      EXPECT_NEAR(sum, exact, 1e-14) << "degree " << deg << " a " << a;
    }
  }
}

TEST(Quadrature, EdgeRuleIntegratesPolynomials) {
  for (int deg = 1; deg <= 15; ++deg) {
    const QuadratureRule& rule = cached_quadrature(QuadDomain::edge, deg);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * std::pow(rule.points[q].x(), deg);
    EXPECT_NEAR(sum, 1.0 / (deg + 1), 1e-14);
  }
  EXPECT_THROW(quadrature(QuadDomain::triangle, 0), DomainError);
}

TEST(Bdm1, ReferenceBasisIsDualToEdgeMoments) {
  const auto& basis = reference_bdm1_basis();
  for (int i = 0; i < kBdm1LocalDofs; ++i)
    for (int j = 0; j < kBdm1LocalDofs; ++j) {
      const double m = reference_edge_moment(i, [&](const Vec2& x) { return basis[j].at(x, Vec2::Zero()); });
      EXPECT_NEAR(m, i == j ? 1.0 : 0.0, 1e-14) << i << " " << j;
    }
}

TEST(Bdm1, NormalComponentIsContinuous) {
  auto V = unit_space(5);
  std::mt19937_64 gen(7);
  std::normal_distribution<double> N;
  VelocityField u(V);
  for (int d = 0; d < V->num_dofs(); ++d) u.coeffs[d] = N(gen);
  const Mesh& m = V->mesh();
  for (const Facet& F : m.facets()) {
    if (F.is_boundary()) continue;
    for (double t : {0.1, 0.5, 0.8}) {
      const Vec2 x = (1 - t) * m.vertex(F.vertices[0]) + t * m.vertex(F.vertices[1]);
      EXPECT_NEAR(u.value(F.plus_cell, x).dot(F.normal), u.value(F.minus_cell, x).dot(F.normal), 1e-12);
    }
  }
}

TEST(Bdm1, InterpolantReproducesLinearFields) {
  auto V = unit_space(4);
  const VectorFunction lin = [](const Vec2& x) { return Vec2(1.0 + 2.0 * x.x() - x.y(), 0.5 - 3.0 * x.x() + x.y()); };
  const VelocityField u(V, interpolate_bdm1(*V, lin));
  for (int c = 0; c < V->mesh().num_cells(); ++c) {
    const Vec2 x = V->mesh().centroid(c) + Vec2(0.01, -0.02);
    EXPECT_LT((u.value(c, x) - lin(x)).norm(), 1e-13);
    EXPECT_NEAR(u.divergence(c), 3.0, 1e-12);
  }
}

TEST(Bdm1, InterpolationErrorIsSecondOrder) {
  const double e1 = interpolation_error(8);
  const double e2 = interpolation_error(16);
  const double e3 = interpolation_error(32);
  EXPECT_NEAR(e1 / e2, 4.0, 0.3);
  EXPECT_NEAR(e2 / e3, 4.0, 0.3);
}

TEST(Bdm1, DivergenceTheoremPerCell) {
  auto V = unit_space(3);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> N;
  VelocityField u(V);
  for (int d = 0; d < V->num_dofs(); ++d) u.coeffs[d] = N(gen);
  const Mesh& m = V->mesh();
  for (int c = 0; c < m.num_cells(); ++c) {
    double flux = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Facet& F = m.facet(m.cell_facets(c)[i]);
      const double sign = F.plus_cell == c ? 1.0 : -1.0;
      flux += sign * u.coeffs[BdmSpace::facet_dof(m.cell_facets(c)[i], 0)];
    }
    EXPECT_NEAR(u.divergence(c) * m.area(c), flux, 1e-12);
  }
}

TEST(Alpha, MatchesClosedFormAndDerivatives) {
  const AlphaModel model{2.5e4, 0.1};
  EXPECT_DOUBLE_EQ(alpha(0.0, model), 2.5e4);
  EXPECT_DOUBLE_EQ(alpha(1.0, model), 0.0);
  for (double r : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    EXPECT_NEAR(alpha(r, model), oracle::alpha(r, model.alpha_bar, model.q), 1e-10);
    const double h = 1e-6;
    const double lo = std::max(0.0, r - h), hi = std::min(1.0, r + h);
    EXPECT_NEAR(alpha_prime(r, model), (alpha(hi, model) - alpha(lo, model)) / (hi - lo),
                1e-5 * std::abs(alpha_prime(r, model)) + 1e-3);
    EXPECT_NEAR(alpha_second(r, model), (alpha_prime(hi, model) - alpha_prime(lo, model)) / (hi - lo),
                1e-4 * alpha_second(r, model));
    EXPECT_LT(alpha_prime(r, model), 0.0);
    EXPECT_GT(alpha_second(r, model), 0.0);
  }
  EXPECT_THROW(alpha(1.1, model), DomainError);
  EXPECT_THROW(alpha(0.5, AlphaModel{-1.0, 0.1}), DomainError);
}

TEST(Boundary, ProjectionErrorIsSecondOrder) {
  std::vector<double> err;
  for (int n : {8, 16, 32}) err.push_back(project_boundary_data(*unit_space(n), smooth).projection_error);
  EXPECT_GE(err[0] / err[1], 3.5);
  EXPECT_LE(err[0] / err[1], 4.5);
  EXPECT_GE(err[1] / err[2], 3.5);
  EXPECT_LE(err[1] / err[2], 4.5);
}

TEST(Boundary, LinearDatumIsReproduced) {
  auto V = unit_space(4);
  const VectorFunction lin = [](const Vec2& x) { return Vec2(x.x() + 2.0 * x.y(), 1.0 - x.x()); };
  const BoundaryData g = project_boundary_data(*V, lin);
  EXPECT_LT(g.projection_error, 1e-13);
  const Eigen::VectorXd full = interpolate_bdm1(*V, lin);
  for (int d : V->boundary_dofs()) EXPECT_NEAR(g.dof_values[d], full[d], 1e-13);
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!kernels::available(kernels::Isa::avx2)) GTEST_SKIP() << "AVX2 kernels not available on this CPU";
  }
};

TEST_F(KernelEquivalence, AllKernelsAgreeWithScalar) {
  const auto& s = kernels::table(kernels::Isa::scalar);
  const auto& v = kernels::table(kernels::Isa::avx2);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 33u, 1001u}) {
    kernels::AffineCellBatch batch(n);
    std::vector<double> coef(n), area(n), rho(n), w(n), x(n);
    for (std::size_t c = 0; c < n; ++c) {
      const double a = 0.1 + std::abs(U(gen));
      batch.set(c, Vec2(U(gen), U(gen)), Mat2::Random(), a, 0.1 * a, 0.01 * U(gen) * a, 0.1 * a);
      coef[c] = std::abs(U(gen)) * 10.0;
      area[c] = a;
      rho[c] = 0.5 * (U(gen) + 1.0);
      w[c] = a;
      x[c] = U(gen);
    }
    std::vector<double> e1(n), e2(n);
    s.cell_energy(batch.view(), e1.data());
    v.cell_energy(batch.view(), e2.data());
    for (std::size_t c = 0; c < n; ++c) EXPECT_NEAR(e1[c], e2[c], 1e-14 * (1.0 + std::abs(e1[c])));

    std::vector<double> r1(n), r2(n);
    const double v1 = s.volume_at_multiplier(coef.data(), area.data(), n, 0.7, 0.1, r1.data());
    const double v2 = v.volume_at_multiplier(coef.data(), area.data(), n, 0.7, 0.1, r2.data());
    EXPECT_NEAR(v1, v2, 1e-13 * (1.0 + v1));
    for (std::size_t c = 0; c < n; ++c) EXPECT_NEAR(r1[c], r2[c], 1e-15);

    EXPECT_NEAR(s.weighted_sum_squares(w.data(), x.data(), n), v.weighted_sum_squares(w.data(), x.data(), n),
                1e-13);
    std::vector<double> a1(n), a2(n);
    s.alpha_values(rho.data(), n, 2.5e4, 0.1, a1.data());
    v.alpha_values(rho.data(), n, 2.5e4, 0.1, a2.data());
    for (std::size_t c = 0; c < n; ++c) EXPECT_NEAR(a1[c], a2[c], 1e-15 * 2.5e4);
  }
}

TEST(Fields, CellEnergyIsExactForAffineFields) {
  auto V = unit_space(3);
  const VectorFunction lin = [](const Vec2& x) { return Vec2(1.0 + x.x(), x.y() - 2.0 * x.x()); };
  const VelocityField u(V, interpolate_bdm1(*V, lin));
  const Eigen::VectorXd m = cell_energy_density(u);
  const Mesh& mesh = V->mesh();
  const QuadratureRule& rule = cached_quadrature(QuadDomain::triangle, 6);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Mat2 J = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * lin(x0 + J * rule.points[q]).squaredNorm();
    EXPECT_NEAR(m[c], std::abs(J.determinant()) * s, 1e-14);
  }
}
