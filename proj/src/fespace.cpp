#include "dgtopo/fespace.hpp"

#include "dgtopo/quadrature.hpp"

namespace dgtopo {

BdmSpace::BdmSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  const int nc = m.num_cells();
  dofs_.resize(nc);
  signs_.resize(nc);
  basis_.resize(nc);
  origin_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& t = m.cell(c);
    const auto local = piola_basis(m, c);
    origin_[c] = m.centroid(c);
    for (int i = 0; i < 3; ++i) {
      const int f = m.cell_facets(c)[i];
      const double normal_sign = (m.facet(f).plus_cell == c) ? 1.0 : -1.0;
      const double direction_sign = (t[(i + 1) % 3] < t[(i + 2) % 3]) ? 1.0 : -1.0;
      for (int k = 0; k < 2; ++k) {
        const int j = 2 * i + k;
        dofs_[c][j] = facet_dof(f, k);
        signs_[c][j] = normal_sign * (k == 0 ? 1.0 : direction_sign);
        basis_[c][j].value = signs_[c][j] * local[j].value;
        basis_[c][j].grad = signs_[c][j] * local[j].grad;
      }
    }
  }
  is_boundary_dof_.assign(num_dofs(), 0);
  for (int f = 0; f < m.num_facets(); ++f) {
    if (!m.facet(f).is_boundary()) continue;
    for (int k = 0; k < 2; ++k) {
      boundary_dofs_.push_back(facet_dof(f, k));
      is_boundary_dof_[facet_dof(f, k)] = 1;
    }
  }
}

std::array<double, 2> facet_moments(const Mesh& mesh, int facet, const VectorFunction& v, int edge_degree) {
  const Facet& F = mesh.facet(facet);
  const Vec2& a = mesh.vertex(F.vertices[0]);
  const Vec2& b = mesh.vertex(F.vertices[1]);
  const QuadratureRule& rule = cached_quadrature(QuadDomain::edge, edge_degree);
  std::array<double, 2> m{0.0, 0.0};
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double t = rule.points[q].x();
    const double s = 2.0 * t - 1.0;
    const double vn = v(a + t * (b - a)).dot(F.normal);
    m[0] += rule.weights[q] * F.length * vn;
    m[1] += rule.weights[q] * F.length * vn * s;
  }
  return m;
}

Eigen::VectorXd interpolate_bdm1(const BdmSpace& space, const VectorFunction& v, int edge_degree) {
  Eigen::VectorXd coeffs(space.num_dofs());
  for (int f = 0; f < space.mesh().num_facets(); ++f) {
    const auto m = facet_moments(space.mesh(), f, v, edge_degree);
    coeffs[BdmSpace::facet_dof(f, 0)] = m[0];
    coeffs[BdmSpace::facet_dof(f, 1)] = m[1];
  }
  return coeffs;
}

}  // namespace dgtopo
