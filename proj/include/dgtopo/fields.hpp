#pragma once

#include <memory>

#include <Eigen/Core>

#include "dgtopo/fespace.hpp"

namespace dgtopo {

/// BDM1 coefficient vector bound to its space.
struct VelocityField {
  std::shared_ptr<const BdmSpace> space;
  Eigen::VectorXd coeffs;

  VelocityField() = default;
  explicit VelocityField(std::shared_ptr<const BdmSpace> s)
      : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(space->num_dofs())) {}
  VelocityField(std::shared_ptr<const BdmSpace> s, Eigen::VectorXd c) : space(std::move(s)), coeffs(std::move(c)) {}

  const Mesh& mesh() const { return space->mesh(); }
  /// The field on cell c as an affine map about the cell centroid.
  AffineVector on_cell(int c) const;
  Vec2 value(int c, const Vec2& x) const { return on_cell(c).at(x, space->cell_origin(c)); }
  Mat2 gradient(int c) const { return on_cell(c).grad; }
  double divergence(int c) const { return on_cell(c).divergence(); }
  /// Evaluates at a physical point (locates the cell by search).
  Vec2 evaluate(const Vec2& x) const;
};

/// Piecewise-constant (DG0) coefficient vector bound to its mesh.
struct CellField {
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd values;

  CellField() = default;
  explicit CellField(std::shared_ptr<const Mesh> m, double fill = 0.0)
      : mesh(std::move(m)), values(Eigen::VectorXd::Constant(mesh->num_cells(), fill)) {}
  CellField(std::shared_ptr<const Mesh> m, Eigen::VectorXd v) : mesh(std::move(m)), values(std::move(v)) {}

  /// Integral over the domain.
  double integral() const;
};

/// int_K (x - c)(x - c)^T dx about the centroid c.
Mat2 centroidal_second_moment(const Mesh& mesh, int c);

/// Cellwise integral of |u|^2 (exact for affine fields).
Eigen::VectorXd cell_energy_density(const VelocityField& u);

}  // namespace dgtopo
