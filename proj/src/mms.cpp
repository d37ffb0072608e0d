#include <cmath>
#include <numbers>

#include "dgtopo/forward.hpp"
#include "dgtopo/quadrature.hpp"

namespace dgtopo {

namespace {

constexpr double kPi = std::numbers::pi;

// Divergence-free velocity u = curl(e^x sin(pi y) / pi) and a zero-mean pressure.
Vec2 exact_u(const Vec2& x) {
  const double ex = std::exp(x.x());
  return {ex * std::cos(kPi * x.y()), -ex * std::sin(kPi * x.y()) / kPi};
}

Mat2 exact_grad_u(const Vec2& x) {
  const double ex = std::exp(x.x());
  const double c = std::cos(kPi * x.y()), s = std::sin(kPi * x.y());
  Mat2 g;
  g << ex * c, -kPi * ex * s, -ex * s / kPi, -ex * c;
  return g;
}

Vec2 exact_laplacian_u(const Vec2& x) {
  const double ex = std::exp(x.x());
  const double k = 1.0 - kPi * kPi;
  return {ex * std::cos(kPi * x.y()) * k, -ex * std::sin(kPi * x.y()) / kPi * k};
}

double exact_p(const Vec2& x) { return std::sin(2.0 * kPi * x.x()) * std::cos(kPi * x.y()); }

Vec2 exact_grad_p(const Vec2& x) {
  return {2.0 * kPi * std::cos(2.0 * kPi * x.x()) * std::cos(kPi * x.y()),
          -kPi * std::sin(2.0 * kPi * x.x()) * std::sin(kPi * x.y())};
}

double material(const Vec2& x) { return 0.5 + 0.4 * std::sin(kPi * x.x()) * std::sin(kPi * x.y()); }

// max_i |a_h(u, phi_i) + b(phi_i, p) - l_h(phi_i; u|boundary)| over free test functions,
// for the exact smooth solution (jumps of u vanish, boundary jump is u - g = 0 in l_h form).
double consistency_residual(const BdmSpace& V, const Eigen::VectorXd& alpha_cell, const CellVectorFunction& f,
                            DgParams prm) {
  const Mesh& mesh = V.mesh();
  const QuadratureRule& cr = cached_quadrature(QuadDomain::triangle, 12);
  const QuadratureRule& er = cached_quadrature(QuadDomain::edge, 14);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(V.num_dofs());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& basis = V.cell_basis(c);
    const auto& dofs = V.cell_dofs(c);
    const Mat2 J = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    for (std::size_t q = 0; q < cr.size(); ++q) {
      const Vec2 x = x0 + J * cr.points[q];
      const double w = 2.0 * mesh.area(c) * cr.weights[q];
      const Vec2 u = exact_u(x);
      const Mat2 gu = exact_grad_u(x);
      const double p = exact_p(x);
      const Vec2 fx = f(c, x);
      for (int j = 0; j < kBdm1LocalDofs; ++j) {
        const Vec2 phi = basis[j].at(x, V.cell_origin(c));
        r[dofs[j]] += w * (alpha_cell[c] * u.dot(phi) + prm.nu * (gu.array() * basis[j].grad.array()).sum() -
                           p * basis[j].divergence() - fx.dot(phi));
      }
    }
  }
  for (const Facet& F : mesh.facets()) {
    const Vec2& a = mesh.vertex(F.vertices[0]);
    const Vec2& b = mesh.vertex(F.vertices[1]);
    for (std::size_t q = 0; q < er.size(); ++q) {
      const Vec2 x = a + er.points[q].x() * (b - a);
      const double w = er.weights[q] * F.length;
      const Vec2 flux = exact_grad_u(x) * F.normal;
      // -nu {{grad u}} : [[phi]]; on the boundary the penalty and the symmetric
      // term of a_h cancel against the g terms of l_h because u = g there.
      auto side = [&](int cell, double sign) {
        const auto& basis = V.cell_basis(cell);
        const auto& dofs = V.cell_dofs(cell);
        for (int j = 0; j < kBdm1LocalDofs; ++j)
          r[dofs[j]] -= w * prm.nu * sign * basis[j].at(x, V.cell_origin(cell)).dot(flux);
      };
      side(F.plus_cell, 1.0);
      if (!F.is_boundary()) side(F.minus_cell, -1.0);
    }
  }
  double worst = 0.0;
  for (int d = 0; d < V.num_dofs(); ++d)
    if (!V.is_boundary_dof()[d]) worst = std::max(worst, std::abs(r[d]));
  return worst;
}

}  // namespace

double observed_order(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = std::min(h.size(), err.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MmsReport check_mms(int levels, const MmsOptions& opt) {
  if (levels < 1) throw DomainError("check_mms: levels must be >= 1");
  const AlphaModel model{opt.alpha_bar, opt.q};
  MmsReport report;
  for (int l = 0; l < levels; ++l) {
    const int n = opt.base_n << l;
    auto mesh = std::make_shared<const Mesh>(generate_rect_mesh(n, n, 1.0, 1.0));
    auto V = std::make_shared<const BdmSpace>(mesh);
    CellField rho(mesh);
    for (int c = 0; c < mesh->num_cells(); ++c) rho.values[c] = material(mesh->centroid(c));
    const Eigen::VectorXd alpha_cell = alpha_per_cell(rho, model);
    const double nu = opt.params.nu;
    CellVectorFunction f = [alpha_cell, nu](int c, const Vec2& x) -> Vec2 {
      return alpha_cell[c] * exact_u(x) - nu * exact_laplacian_u(x) + exact_grad_p(x);
    };
    BoundaryData g = project_boundary_data(*V, exact_u);
    StokesBrinkmanSolver solver(V, opt.params, g, f);
    const SaddleSolve sol = solver.solve_alpha(alpha_cell);

    const PiecewiseEval uh = as_piecewise(sol.u);
    const PiecewiseEval diff = [&uh](int c, const Vec2& x, Vec2& v, Mat2& gr) {
      uh(c, x, v, gr);
      v -= exact_u(x);
      gr -= exact_grad_u(x);
    };
    const BrokenNorms e = broken_norms(*mesh, diff, {}, 8, 10);

    const QuadratureRule& cr = cached_quadrature(QuadDomain::triangle, 8);
    double ep2 = 0.0;
    for (int c = 0; c < mesh->num_cells(); ++c) {
      const Mat2 J = mesh->jacobian(c);
      const Vec2 x0 = mesh->vertex(mesh->cell(c)[0]);
      for (std::size_t q = 0; q < cr.size(); ++q) {
        const double d = sol.p.values[c] - exact_p(x0 + J * cr.points[q]);
        ep2 += 2.0 * mesh->area(c) * cr.weights[q] * d * d;
      }
    }

    MmsLevel lv;
    lv.n = n;
    lv.h = mesh->mesh_size();
    lv.err_u_l2 = e.l2;
    lv.err_u_h1 = e.h1_g;
    lv.err_p_l2 = std::sqrt(ep2);
    lv.div_norm = divergence_norm(sol.u);
    lv.consistency = consistency_residual(*V, alpha_cell, f, opt.params);
    report.levels.push_back(lv);
  }
  std::vector<double> h, eu1, eu0, ep;
  for (const auto& lv : report.levels) {
    h.push_back(lv.h);
    eu1.push_back(lv.err_u_h1);
    eu0.push_back(lv.err_u_l2);
    ep.push_back(lv.err_p_l2);
  }
  report.order_u_h1 = observed_order(h, eu1);
  report.order_u_l2 = observed_order(h, eu0);
  report.order_p_l2 = observed_order(h, ep);
  return report;
}

}  // namespace dgtopo
