#include "dgtopo/boundary.hpp"

#include <cmath>

#include "dgtopo/quadrature.hpp"

namespace dgtopo {

namespace {

// Parameter s in [-1, 1] of point x on facet F (low -> high vertex).
double facet_parameter(const Mesh& mesh, const Facet& F, const Vec2& x) {
  const Vec2& a = mesh.vertex(F.vertices[0]);
  const Vec2& b = mesh.vertex(F.vertices[1]);
  const double t = (x - a).dot(b - a) / (b - a).squaredNorm();
  return 2.0 * t - 1.0;
}

}  // namespace

Vec2 BoundaryData::g_h_at(const Mesh& mesh, int facet, const Vec2& x) const {
  return g_h(facet, facet_parameter(mesh, mesh.facet(facet), x));
}

BoundaryData zero_boundary_data(const BdmSpace& space) {
  BoundaryData d;
  const int nf = space.mesh().num_facets();
  d.c0.assign(nf, Vec2::Zero());
  d.c1.assign(nf, Vec2::Zero());
  d.dof_values = Eigen::VectorXd::Zero(space.num_dofs());
  return d;
}

BoundaryData project_boundary_data(const BdmSpace& space, const VectorFunction& g, int edge_degree) {
  BoundaryData d = zero_boundary_data(space);
  d.g = g;
  if (!g) return d;
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = cached_quadrature(QuadDomain::edge, edge_degree);
  constexpr int kSegments = 4;  // composite rule for the error measurement
  double err2 = 0.0;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    if (!F.is_boundary()) continue;
    const Vec2& a = mesh.vertex(F.vertices[0]);
    const Vec2& b = mesh.vertex(F.vertices[1]);
    Vec2 m0 = Vec2::Zero(), m1 = Vec2::Zero();
    for (int seg = 0; seg < kSegments; ++seg) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = (seg + rule.points[q].x()) / kSegments;
        const double w = rule.weights[q] * F.length / kSegments;
        const Vec2 gv = g(a + t * (b - a));
        m0 += w * gv;
        m1 += w * (2.0 * t - 1.0) * gv;
      }
    }
    d.c0[f] = m0 / F.length;
    d.c1[f] = 3.0 * m1 / F.length;
    d.dof_values[BdmSpace::facet_dof(f, 0)] = m0.dot(F.normal);
    d.dof_values[BdmSpace::facet_dof(f, 1)] = m1.dot(F.normal);
    for (int seg = 0; seg < kSegments; ++seg) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = (seg + rule.points[q].x()) / kSegments;
        const double w = rule.weights[q] * F.length / kSegments;
        err2 += w * (g(a + t * (b - a)) - d.g_h(f, 2.0 * t - 1.0)).squaredNorm();
      }
    }
  }
  d.projection_error = std::sqrt(err2);
  return d;
}

double boundary_flux(const Mesh& mesh, const VectorFunction& g, int edge_degree) {
  const QuadratureRule& rule = cached_quadrature(QuadDomain::edge, edge_degree);
  double flux = 0.0;
  for (const Facet& F : mesh.facets()) {
    if (!F.is_boundary()) continue;
    const Vec2& a = mesh.vertex(F.vertices[0]);
    const Vec2& b = mesh.vertex(F.vertices[1]);
    for (std::size_t q = 0; q < rule.size(); ++q)
      flux += rule.weights[q] * F.length * g(a + rule.points[q].x() * (b - a)).dot(F.normal);
  }
  return flux;
}

}  // namespace dgtopo
