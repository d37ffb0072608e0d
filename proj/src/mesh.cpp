#include "dgtopo/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

namespace dgtopo {

namespace {

constexpr double kAreaTol = 1e-14;

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> cells, int level,
           std::vector<int> parent, Check check)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), level_(level), parent_(std::move(parent)) {
  if (cells_.empty()) throw StructuralError("mesh has no cells");
  if (!parent_.empty() && parent_.size() != cells_.size())
    throw StructuralError("parent map size does not match the cell count");

  area_.resize(cells_.size());
  diameter_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& t = cells_[c];
    for (int v : t) {
      if (v < 0 || v >= num_vertices())
        throw StructuralError("cell " + std::to_string(c) + " references vertex " + std::to_string(v));
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw StructuralError("cell " + std::to_string(c) + " repeats a vertex");
    const Vec2& a = vertices_[t[0]];
    const Vec2& b = vertices_[t[1]];
    const Vec2& d = vertices_[t[2]];
    area_[c] = signed_area(a, b, d);
    if (check == Check::strict && area_[c] <= kAreaTol)
      throw StructuralError("cell " + std::to_string(c) + " has non-positive signed area");
    diameter_[c] = std::max({(b - a).norm(), (d - b).norm(), (a - d).norm()});
    mesh_size_ = std::max(mesh_size_, diameter_[c]);
  }
  build_facets();
}

void Mesh::build_facets() {
  std::map<std::pair<int, int>, int> lookup;
  cell_facets_.assign(cells_.size(), {-1, -1, -1});
  for (int c = 0; c < num_cells(); ++c) {
    const auto& t = cells_[c];
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3];
      const int b = t[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, num_facets());
      if (inserted) {
        Facet f;
        f.vertices = {key.first, key.second};
        f.plus_cell = c;
        f.plus_local = i;
        f.length = (vertices_[b] - vertices_[a]).norm();
        f.normal = outward_normal(c, i);
        facets_.push_back(f);
      } else {
        Facet& f = facets_[it->second];
        if (f.minus_cell >= 0)
          throw StructuralError("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                                ") is shared by more than two cells");
        f.minus_cell = c;
        f.minus_local = i;
      }
      cell_facets_[c][i] = it->second;
    }
  }
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (double a : area_) sum += a;
  return sum;
}

Vec2 Mesh::centroid(int c) const {
  const auto& t = cells_[c];
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

Mat2 Mesh::jacobian(int c) const {
  const auto& t = cells_[c];
  Mat2 J;
  J.col(0) = vertices_[t[1]] - vertices_[t[0]];
  J.col(1) = vertices_[t[2]] - vertices_[t[0]];
  return J;
}

Vec2 Mesh::outward_normal(int c, int local_edge) const {
  const auto& t = cells_[c];
  const Vec2 tangent = vertices_[t[(local_edge + 2) % 3]] - vertices_[t[(local_edge + 1) % 3]];
  // Counterclockwise traversal: outward is the clockwise rotation of the tangent.
  return Vec2(tangent.y(), -tangent.x()) / tangent.norm();
}

std::array<double, 3> Mesh::barycentric(int c, const Vec2& x) const {
  const auto& t = cells_[c];
  const Vec2& a = vertices_[t[0]];
  const Vec2& b = vertices_[t[1]];
  const Vec2& d = vertices_[t[2]];
  const double area = signed_area(a, b, d);
  const double l0 = signed_area(x, b, d) / area;
  const double l1 = signed_area(a, x, d) / area;
  return {l0, l1, 1.0 - l0 - l1};
}

bool Mesh::contains(int c, const Vec2& x, double tol) const {
  const auto l = barycentric(c, x);
  return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

std::optional<int> Mesh::locate(const Vec2& x, double tol) const {
  for (int c = 0; c < num_cells(); ++c) {
    if (contains(c, x, tol)) return c;
  }
  return std::nullopt;
}

Mesh generate_rect_mesh(int nx, int ny, double Lx, double Ly) {
  if (nx < 1 || ny < 1) throw DomainError("generate_rect_mesh: nx and ny must be >= 1");
  if (!(Lx > 0.0) || !(Ly > 0.0)) throw DomainError("generate_rect_mesh: Lx and Ly must be positive");

  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Boundary coordinates are set exactly so facets on x = Lx, y = Ly compare equal.
      const double x = (i == nx) ? Lx : Lx * static_cast<double>(i) / nx;
      const double y = (j == ny) ? Ly : Ly * static_cast<double>(j) / ny;
      vertices.emplace_back(x, y);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> cells;
  cells.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      cells.push_back({v00, v10, v11});
      cells.push_back({v00, v11, v01});
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Vec2> vertices = mesh.vertices();
  std::vector<int> midpoint(mesh.num_facets());
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const auto& fv = mesh.facet(f).vertices;
    midpoint[f] = static_cast<int>(vertices.size());
    vertices.push_back(0.5 * (mesh.vertex(fv[0]) + mesh.vertex(fv[1])));
  }

  std::vector<std::array<int, 3>> cells;
  std::vector<int> parent;
  cells.reserve(4 * static_cast<std::size_t>(mesh.num_cells()));
  parent.reserve(cells.capacity());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.cell(c);
    const auto& cf = mesh.cell_facets(c);
    // m[i] is the midpoint of the edge opposite vertex i.
    const int m0 = midpoint[cf[0]], m1 = midpoint[cf[1]], m2 = midpoint[cf[2]];
    cells.push_back({t[0], m2, m1});
    cells.push_back({m2, t[1], m0});
    cells.push_back({m1, m0, t[2]});
    cells.push_back({m0, m1, m2});
    for (int k = 0; k < 4; ++k) parent.push_back(c);
  }
  return Mesh(std::move(vertices), std::move(cells), mesh.level() + 1, std::move(parent));
}

FacetPartition classify_facets(const Mesh& mesh) {
  FacetPartition part;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    if (F.plus_cell < 0) throw StructuralError("facet " + std::to_string(f) + " has no adjacent cell");
    if (F.is_boundary()) {
      part.boundary.push_back(f);
    } else {
      if (F.minus_cell == F.plus_cell)
        throw StructuralError("facet " + std::to_string(f) + " is adjacent to the same cell twice");
      part.interior.push_back(f);
    }
  }
  return part;
}

RegularityReport check_mesh_regularity(const Mesh& mesh, double floor) {
  RegularityReport r;
  r.shape = std::numeric_limits<double>::infinity();
  r.contact = std::numeric_limits<double>::infinity();
  r.boundary = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double hK = mesh.diameter(c);
    r.shape = std::min(r.shape, mesh.area(c) / (hK * hK));
    for (int f : mesh.cell_facets(c)) r.contact = std::min(r.contact, mesh.facet(f).length / hK);
  }
  for (const Facet& F : mesh.facets()) {
    if (F.is_boundary()) r.boundary = std::min(r.boundary, F.length / mesh.mesh_size());
  }
  r.flagged = r.shape < floor || r.contact < floor || r.boundary < floor;
  return r;
}

}  // namespace dgtopo
