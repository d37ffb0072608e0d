#pragma once

#include <array>
#include <optional>
#include <vector>

#include "dgtopo/types.hpp"

namespace dgtopo {

/// An edge of the triangulation. Interior facets carry two cells; the cell
/// with the smaller index is the "+" side and the normal points out of it.
struct Facet {
  std::array<int, 2> vertices{};  // ascending global vertex indices
  int plus_cell = -1;
  int minus_cell = -1;  // -1 on the boundary
  int plus_local = -1;  // local edge index inside plus_cell
  int minus_local = -1;
  Vec2 normal = Vec2::Zero();
  double length = 0.0;

  bool is_boundary() const { return minus_cell < 0; }
};

/// Immutable 2D simplicial triangulation. Local edge i of a cell is the edge
/// opposite vertex i, traversed from vertex i+1 to vertex i+2 (mod 3).
class Mesh {
 public:
  enum class Check { strict, topology_only };

  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells, int level = 0,
       std::vector<int> parent = {}, Check check = Check::strict);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<Facet>& facets() const { return facets_; }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  const Facet& facet(int f) const { return facets_[f]; }
  /// Facet index of each local edge of cell c.
  const std::array<int, 3>& cell_facets(int c) const { return cell_facets_[c]; }

  /// Signed area (positive for counterclockwise cells).
  double area(int c) const { return area_[c]; }
  /// Cell diameter h_K (longest edge).
  double diameter(int c) const { return diameter_[c]; }
  /// Global mesh size h = max h_K.
  double mesh_size() const { return mesh_size_; }
  double total_area() const;
  Vec2 centroid(int c) const;
  /// Affine map Jacobian with columns (v1 - v0, v2 - v0).
  Mat2 jacobian(int c) const;
  /// Unit outward normal of local edge i of cell c.
  Vec2 outward_normal(int c, int local_edge) const;

  int level() const { return level_; }
  bool has_parent() const { return !parent_.empty(); }
  const std::vector<int>& parent() const { return parent_; }

  /// Barycentric coordinates of x with respect to cell c.
  std::array<double, 3> barycentric(int c, const Vec2& x) const;
  bool contains(int c, const Vec2& x, double tol = 1e-12) const;
  /// First cell containing x (linear search).
  std::optional<int> locate(const Vec2& x, double tol = 1e-12) const;

 private:
  void build_facets();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> cell_facets_;
  std::vector<double> area_;
  std::vector<double> diameter_;
  double mesh_size_ = 0.0;
  int level_ = 0;
  std::vector<int> parent_;
};

/// nx-by-ny grid of rectangles over (0,Lx)x(0,Ly), each split along the
/// lower-left to upper-right diagonal.
Mesh generate_rect_mesh(int nx, int ny, double Lx, double Ly);

/// Red refinement: every triangle into four congruent children. Child cells
/// 4c..4c+3 descend from parent cell c.
Mesh refine_uniform(const Mesh& mesh);

struct FacetPartition {
  std::vector<int> interior;
  std::vector<int> boundary;
};

/// Splits facets into interior and boundary sets and checks adjacency.
FacetPartition classify_facets(const Mesh& mesh);

struct RegularityReport {
  double shape = 0.0;     // min |K| / h_K^2
  double contact = 0.0;   // min |F| / h_K over facets F of K
  double boundary = 0.0;  // min h_F / h over boundary facets
  bool flagged = false;
};

RegularityReport check_mesh_regularity(const Mesh& mesh, double floor = 1e-3);

}  // namespace dgtopo
