#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "dgtopo/bdm.hpp"
#include "dgtopo/mesh.hpp"

namespace dgtopo {

using VectorFunction = std::function<Vec2(const Vec2&)>;
using ScalarFunction = std::function<double(const Vec2&)>;

enum class SpaceKind { bdm1_vector, dg0_scalar };

/// Global BDM1 space. Facet f owns dofs 2f and 2f+1: the moments
///   int_F (v . n_F) s^k ds,   k in {0, 1},
/// where n_F is the facet normal (outward from the "+" cell) and s in [-1,1]
/// runs from the lower to the higher global vertex index.
class BdmSpace {
 public:
  explicit BdmSpace(std::shared_ptr<const Mesh> mesh);

  SpaceKind kind() const { return SpaceKind::bdm1_vector; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  int num_dofs() const { return 2 * mesh_->num_facets(); }
  static int facet_dof(int facet, int k) { return 2 * facet + k; }

  /// Global dof of local dof 2*i + k.
  const std::array<int, kBdm1LocalDofs>& cell_dofs(int c) const { return dofs_[c]; }
  /// +-1 factors mapping the local reference dual basis onto the global one.
  const std::array<double, kBdm1LocalDofs>& cell_signs(int c) const { return signs_[c]; }
  /// Physical global basis restricted to cell c, affine about the cell centroid.
  const std::array<AffineVector, kBdm1LocalDofs>& cell_basis(int c) const { return basis_[c]; }
  const Vec2& cell_origin(int c) const { return origin_[c]; }

  /// Dofs on boundary facets (ascending); these carry the normal trace.
  const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
  /// True for dofs in boundary_dofs().
  const std::vector<char>& is_boundary_dof() const { return is_boundary_dof_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<std::array<int, kBdm1LocalDofs>> dofs_;
  std::vector<std::array<double, kBdm1LocalDofs>> signs_;
  std::vector<std::array<AffineVector, kBdm1LocalDofs>> basis_;
  std::vector<Vec2> origin_;
  std::vector<int> boundary_dofs_;
  std::vector<char> is_boundary_dof_;
};

/// Piecewise constants, one dof per cell.
class Dg0Space {
 public:
  explicit Dg0Space(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {}
  SpaceKind kind() const { return SpaceKind::dg0_scalar; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int num_dofs() const { return mesh_->num_cells(); }

 private:
  std::shared_ptr<const Mesh> mesh_;
};

/// Global facet moments of a continuous field (the canonical BDM1 interpolant).
Eigen::VectorXd interpolate_bdm1(const BdmSpace& space, const VectorFunction& v, int edge_degree = 10);

/// Facet moment of `v` evaluated along facet f with the global orientation.
std::array<double, 2> facet_moments(const Mesh& mesh, int facet, const VectorFunction& v, int edge_degree = 10);

}  // namespace dgtopo
