#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dgtopo/harness.hpp"
#include "oracles.hpp"

using namespace dgtopo;

namespace {

RhoStep solve_instance(const oracle::RhoInstance& in) {
  RhoStepInput step;
  step.energy = in.energy;
  step.area = in.area;
  step.volume_bound = in.volume;
  return solve_rho_step(step, AlphaModel{in.alpha_bar, in.q});
}

std::shared_ptr<const Mesh> rect(int nx, int ny) {
  return std::make_shared<const Mesh>(generate_rect_mesh(nx, ny, 1.5, 1.0));
}

}  // namespace

TEST(RhoUpdate, MatchesIndependentMinimizerOnRandomInstances) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::RhoInstance in = oracle::random_instance(gen);
    const RhoStep step = solve_instance(in);
    const std::vector<double> ref = oracle::constrained_minimizer(in);
    for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(step.rho[k], ref[k], 1e-6) << "trial " << trial;
    EXPECT_LE(in.objective(step.rho), in.objective(ref) + 1e-12 * std::abs(in.objective(ref)));
    EXPECT_TRUE(in.feasible(step.rho));
    EXPECT_LE(step.lambda * std::abs(in.volume - step.volume), 1e-8);
  }
}

TEST(RhoUpdate, CellsWithoutFlowAreVoid) {
  oracle::RhoInstance in;
  in.energy = {0.0, 2.0, 0.0, 1.0};
  in.area = {1.0, 1.0, 1.0, 1.0};
  in.volume = 3.5;
  in.alpha_bar = 100.0;
  in.q = 0.1;
  const RhoStep step = solve_instance(in);
  EXPECT_EQ(step.rho[0], 0.0);
  EXPECT_EQ(step.rho[2], 0.0);
  EXPECT_EQ(step.rho[1], 1.0);
  EXPECT_EQ(step.rho[3], 1.0);
  EXPECT_EQ(step.lambda, 0.0);
}

TEST(RhoUpdate, InactiveVolumeBoundFillsEverything) {
  oracle::RhoInstance in;
  in.energy = {0.5, 2.0};
  in.area = {1.0, 2.0};
  in.volume = 3.0;
  in.alpha_bar = 10.0;
  in.q = 0.3;
  const RhoStep step = solve_instance(in);
  EXPECT_EQ(step.rho[0], 1.0);
  EXPECT_EQ(step.rho[1], 1.0);
  EXPECT_EQ(step.lambda, 0.0);
}

TEST(RhoUpdate, SatisfiesTheVariationalInequality) {
  auto mesh = rect(6, 4);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Eigen::VectorXd m(mesh->num_cells());
  for (int c = 0; c < m.size(); ++c) m[c] = std::pow(10.0, -4.0 + 4.0 * U(gen)) * mesh->area(c);
  const AlphaModel model{2.5e4, 0.1};
  const MaterialState s = rho_update(m, mesh, model, 1.0 / 3.0);
  EXPECT_LE(s.volume(), mesh->total_area() / 3.0 * (1.0 + 1e-12));
  EXPECT_GT(s.lambda_vol, 0.0);
  EXPECT_LE(vi_residual(s.rho, m, s.lambda_vol, model), 1e-10);
  EXPECT_NEAR(vi_residual(s.rho, 7.0 * m, 7.0 * s.lambda_vol, model), vi_residual(s.rho, m, s.lambda_vol, model),
              1e-14);
  CellField moved = s.rho;
  for (int c = 0; c < moved.values.size(); ++c)
    if (s.bounds[c] == CellBound::interior) {
      moved.values[c] = std::min(1.0, moved.values[c] + 0.05);
      break;
    }
  EXPECT_GT(vi_residual(moved, m, s.lambda_vol, model), 1e-3);
  EXPECT_EQ(s.count(CellBound::lower) + s.count(CellBound::interior) + s.count(CellBound::upper),
            mesh->num_cells());
}

TEST(RhoUpdate, ProjectionOntoTheAdmissibleSet) {
  auto mesh = rect(5, 3);
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> U(-0.5, 1.5);
  CellField rho(mesh);
  for (int c = 0; c < rho.values.size(); ++c) rho.values[c] = U(gen);
  const CellField p = project_admissible(rho, 0.3);
  EXPECT_GE(p.values.minCoeff(), 0.0);
  EXPECT_LE(p.values.maxCoeff(), 1.0);
  EXPECT_NEAR(p.integral(), 0.3 * mesh->total_area(), 1e-12);
  const CellField again = project_admissible(p, 0.3);
  EXPECT_LE((again.values - p.values).lpNorm<Eigen::Infinity>(), 1e-12);
  const CellField inside(mesh, 0.2);
  EXPECT_EQ(project_admissible(inside, 0.3).values, inside.values);
}

TEST(Deflation, GradientMatchesFiniteDifferences) {
  auto mesh = rect(3, 2);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Deflation d;
  for (int s = 0; s < 2; ++s) {
    CellField r(mesh);
    for (int c = 0; c < r.values.size(); ++c) r.values[c] = U(gen);
    d.solutions.push_back(r);
  }
  CellField rho(mesh);
  for (int c = 0; c < rho.values.size(); ++c) rho.values[c] = U(gen);
  const Eigen::VectorXd g = d.gradient(rho);
  for (int c = 0; c < rho.values.size(); ++c) {
    CellField a = rho, b = rho;
    a.values[c] += 1e-6;
    b.values[c] -= 1e-6;
    EXPECT_NEAR(g[c], (d.factor(a) - d.factor(b)) / 2e-6, 1e-6 * (1.0 + std::abs(g[c])));
  }
  EXPECT_GT(d.factor(rho), 1.0);
}

TEST(Transfer, CellFieldsAreInherited) {
  auto coarse = rect(3, 2);
  auto fine = std::make_shared<const Mesh>(refine_uniform(*coarse));
  CellField rho(coarse);
  for (int c = 0; c < rho.values.size(); ++c) rho.values[c] = 0.1 * c;
  const CellField f = transfer_to_fine(rho, fine);
  EXPECT_NEAR(f.integral(), rho.integral(), 1e-14);
  EXPECT_NEAR(l2_distance(transfer_to_fine(rho, fine), f), 0.0, 0.0);
  EXPECT_THROW(transfer_to_fine(rho, rect(6, 4)), StructuralError);
}

TEST(Transfer, VelocityFieldsAreReproducedPointwise) {
  auto coarse = std::make_shared<const BdmSpace>(rect(3, 2));
  auto fine = std::make_shared<const BdmSpace>(std::make_shared<const Mesh>(refine_uniform(coarse->mesh())));
  std::mt19937_64 gen(6);
  std::normal_distribution<double> N;
  VelocityField u(coarse);
  for (int d = 0; d < u.coeffs.size(); ++d) u.coeffs[d] = N(gen);
  const VelocityField v = transfer_to_fine(u, fine);
  const Mesh& fm = fine->mesh();
  for (int c = 0; c < fm.num_cells(); ++c) {
    const Vec2 x = fm.centroid(c);
    const int p = fm.parent()[c];
    EXPECT_LE((v.value(c, x) - u.value(p, x)).norm(), 1e-12);
    EXPECT_NEAR(v.divergence(c), u.divergence(p), 1e-10);
  }
}

TEST(Transfer, L2DistanceIsAreaWeighted) {
  auto mesh = rect(2, 2);
  const CellField a(mesh, 1.0), b(mesh, 0.0);
  EXPECT_NEAR(l2_distance(a, b), std::sqrt(1.5), 1e-14);
}

class SmallDoublePipe : public ::testing::Test {
 protected:
  void SetUp() override {
    spec = double_pipe_spec();
    spec.nx = 24;
    spec.ny = 16;
    mesh = rect(spec.nx, spec.ny);
    problem = make_problem(spec, mesh);
  }
  BenchmarkSpec spec;
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<TopOptProblem> problem;
};

TEST_F(SmallDoublePipe, RejectsInvalidInput) {
  EXPECT_THROW(alternating_solve(*problem, CellField(mesh, 0.5)), DomainError);
  OptimizerOptions o;
  o.continuation = {250.0, 2500.0};
  EXPECT_THROW(alternating_solve(*problem, uniform_seed(mesh, spec.gamma), o), DomainError);
}

TEST_F(SmallDoublePipe, ContinuationKeepsDescentWithinEachStage) {
  OptimizerOptions o;
  o.continuation = {250.0, 2500.0, 25000.0};
  const OptimizeResult r = alternating_solve(*problem, uniform_seed(mesh, spec.gamma), o);
  EXPECT_TRUE(r.report.converged) << r.report.message;
  EXPECT_EQ(r.report.stage_iterations.size(), 3u);
  EXPECT_LE(r.report.worst_ascent(), 1e-12);
  EXPECT_LE(r.report.foc.vi, 1e-8);
}

TEST_F(SmallDoublePipe, MultiStartFindsTwoDistinctMinimizersInAnyOrder) {
  const std::vector<Seed> seeds{make_seed("uniform", mesh, spec), make_seed("band", mesh, spec)};
  const MultiStartReport a = multi_start(*problem, seeds, true);
  const MultiStartReport b = multi_start(*problem, {seeds[1], seeds[0]}, true);
  ASSERT_EQ(a.registry.size(), 2u);
  ASSERT_EQ(b.registry.size(), 2u);
  EXPECT_GT(a.distances(0, 1), 0.05 * std::sqrt(mesh->total_area()));
  for (const RegistryEntry& e : a.registry) {
    const RegistryEntry* match = nullptr;
    for (const RegistryEntry& f : b.registry)
      if (f.seed == e.seed) match = &f;
    ASSERT_NE(match, nullptr);
    EXPECT_LE(l2_distance(e.result.state.rho, match->result.state.rho), 1e-6);
    EXPECT_LE(e.result.report.worst_ascent(), 1e-12);
  }
  EXPECT_EQ(classify_topology(a.registry[0].result.state.rho, spec).label(), "channels");
  EXPECT_EQ(classify_topology(a.registry[1].result.state.rho, spec).label(), "wrench");
}

TEST_F(SmallDoublePipe, DuplicateSeedsCollapseToOneEntry) {
  const Seed s = make_seed("uniform", mesh, spec);
  const MultiStartReport r = multi_start(*problem, {s, s}, false);
  EXPECT_EQ(r.registry.size(), 1u);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.failed, 0);
}

TEST_F(SmallDoublePipe, DeflationReachesTheSecondMinimizerFromARepeatedSeed) {
  const Seed s = make_seed("uniform", mesh, spec);
  const MultiStartReport r = multi_start(*problem, {s, s}, true);
  ASSERT_EQ(r.registry.size(), 2u);
  EXPECT_TRUE(r.registry[1].result.report.history.front().deflated);
  EXPECT_FALSE(r.registry[0].result.report.history.front().deflated);
  EXPECT_GT(r.distances(0, 1), 0.05 * std::sqrt(mesh->total_area()));
  EXPECT_EQ(classify_topology(r.registry[0].result.state.rho, spec).label(), "channels");
  EXPECT_EQ(classify_topology(r.registry[1].result.state.rho, spec).label(), "wrench");
}
