#include "dgtopo/fields.hpp"

#include <stdexcept>

#include "dgtopo/kernels.hpp"

namespace dgtopo {

AffineVector VelocityField::on_cell(int c) const {
  const auto& dofs = space->cell_dofs(c);
  const auto& basis = space->cell_basis(c);
  AffineVector v;
  for (int j = 0; j < kBdm1LocalDofs; ++j) {
    const double w = coeffs[dofs[j]];
    v.value += w * basis[j].value;
    v.grad += w * basis[j].grad;
  }
  return v;
}

Vec2 VelocityField::evaluate(const Vec2& x) const {
  const auto c = mesh().locate(x);
  if (!c) throw DomainError("VelocityField::evaluate: point outside the mesh");
  return value(*c, x);
}

double CellField::integral() const {
  double sum = 0.0;
  for (int c = 0; c < mesh->num_cells(); ++c) sum += values[c] * mesh->area(c);
  return sum;
}

Mat2 centroidal_second_moment(const Mesh& mesh, int c) {
  const Vec2 centroid = mesh.centroid(c);
  Mat2 S = Mat2::Zero();
  for (int v : mesh.cell(c)) {
    const Vec2 d = mesh.vertex(v) - centroid;
    S += d * d.transpose();
  }
  return S * (mesh.area(c) / 12.0);
}

Eigen::VectorXd cell_energy_density(const VelocityField& u) {
  const Mesh& mesh = u.mesh();
  const int nc = mesh.num_cells();
  kernels::AffineCellBatch batch(nc);
  for (int c = 0; c < nc; ++c) {
    const AffineVector v = u.on_cell(c);
    const Mat2 S = centroidal_second_moment(mesh, c);
    batch.set(c, v.value, v.grad, mesh.area(c), S(0, 0), S(0, 1), S(1, 1));
  }
  Eigen::VectorXd m(nc);
  kernels::active().cell_energy(batch.view(), m.data());
  return m;
}

}  // namespace dgtopo
