#include <string>

#include "dgtopo/topopt.hpp"

namespace dgtopo {

namespace {

void check_nested(const Mesh& coarse, const Mesh& fine) {
  const auto& parent = fine.parent();
  if (static_cast<int>(parent.size()) != fine.num_cells())
    throw StructuralError("transfer_to_fine: fine mesh carries no parent map");
  for (int c = 0; c < fine.num_cells(); ++c) {
    const int pc = parent[c];
    if (pc < 0 || pc >= coarse.num_cells() || !coarse.contains(pc, fine.centroid(c), 1e-10))
      throw StructuralError("transfer_to_fine: meshes are not nested (cell " + std::to_string(c) + ")");
  }
}

}  // namespace

CellField transfer_to_fine(const CellField& coarse, std::shared_ptr<const Mesh> fine) {
  check_nested(*coarse.mesh, *fine);
  CellField out(fine);
  for (int c = 0; c < fine->num_cells(); ++c) out.values[c] = coarse.values[fine->parent()[c]];
  return out;
}

VelocityField transfer_to_fine(const VelocityField& coarse, std::shared_ptr<const BdmSpace> fine) {
  const Mesh& fm = fine->mesh();
  check_nested(coarse.mesh(), fm);
  VelocityField out(fine);
  for (int f = 0; f < fm.num_facets(); ++f) {
    // The coarse field has a continuous normal component, so either
    // neighbouring parent gives the same moments.
    const int pc = fm.parent()[fm.facet(f).plus_cell];
    const AffineVector v = coarse.on_cell(pc);
    const Vec2 origin = coarse.space->cell_origin(pc);
    const auto m = facet_moments(fm, f, [&](const Vec2& x) { return v.at(x, origin); }, 4);
    out.coeffs[BdmSpace::facet_dof(f, 0)] = m[0];
    out.coeffs[BdmSpace::facet_dof(f, 1)] = m[1];
  }
  return out;
}

}  // namespace dgtopo
