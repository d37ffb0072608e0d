#pragma once

#include <vector>

#include <Eigen/Core>

#include "dgtopo/fespace.hpp"

namespace dgtopo {

/// Piecewise-linear approximation g_h of the Dirichlet datum on the boundary
/// facets, together with the prescribed values of the boundary (normal) dofs.
struct BoundaryData {
  VectorFunction g;           // analytic datum; empty means g = 0
  std::vector<Vec2> c0, c1;   // per facet: g_h = c0 + c1 s, s in [-1, 1] (zero on interior facets)
  Eigen::VectorXd dof_values; // full-length; nonzero entries only on boundary dofs
  double projection_error = 0.0;  // ||g - g_h||_{L2(boundary)}

  Vec2 g_h(int facet, double s) const { return c0[facet] + s * c1[facet]; }
  /// g_h at a physical point x on facet f.
  Vec2 g_h_at(const Mesh& mesh, int facet, const Vec2& x) const;
};

/// g_h = facetwise L2 projection of g onto P1(F)^2; the normal dofs of the
/// velocity space are fixed to the moments of g_h . n.
BoundaryData project_boundary_data(const BdmSpace& space, const VectorFunction& g, int edge_degree = 20);

BoundaryData zero_boundary_data(const BdmSpace& space);

/// int over the boundary of g . n (should vanish for a solvable div-free problem).
double boundary_flux(const Mesh& mesh, const VectorFunction& g, int edge_degree = 20);

}  // namespace dgtopo
