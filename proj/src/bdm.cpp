#include "dgtopo/bdm.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace dgtopo {

namespace detail {

void reference_edge_geometry(int edge, Vec2& start, Vec2& end, Vec2& normal) {
  static const std::array<Vec2, 3> verts = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  start = verts[(edge + 1) % 3];
  end = verts[(edge + 2) % 3];
  const Vec2 t = end - start;
  normal = Vec2(t.y(), -t.x()) / t.norm();
}

}  // namespace detail

namespace {

// Monomial basis of P1^2: (1,0), (x,0), (y,0), (0,1), (0,x), (0,y).
AffineVector monomial(int m) {
  AffineVector v;
  const int comp = m / 3;
  const int kind = m % 3;
  if (kind == 0) {
    v.value[comp] = 1.0;
  } else {
    v.grad(comp, kind - 1) = 1.0;
  }
  return v;
}

std::array<AffineVector, kBdm1LocalDofs> build_reference_basis() {
  Eigen::Matrix<double, 6, 6> moments;
  for (int dof = 0; dof < 6; ++dof) {
    for (int m = 0; m < 6; ++m) {
      const AffineVector mono = monomial(m);
      moments(dof, m) = reference_edge_moment(dof, [&](const Vec2& x) { return mono.at(x, Vec2::Zero()); }, 4);
    }
  }
  const Eigen::Matrix<double, 6, 6> coeffs = moments.fullPivLu().inverse();
  std::array<AffineVector, kBdm1LocalDofs> basis;
  for (int j = 0; j < 6; ++j) {
    for (int m = 0; m < 6; ++m) {
      const AffineVector mono = monomial(m);
      basis[j].value += coeffs(m, j) * mono.value;
      basis[j].grad += coeffs(m, j) * mono.grad;
    }
  }
  return basis;
}

}  // namespace

const std::array<AffineVector, kBdm1LocalDofs>& reference_bdm1_basis() {
  static const std::array<AffineVector, kBdm1LocalDofs> basis = build_reference_basis();
  return basis;
}

Bdm1Tabulation tabulate_bdm1(const Vec2& p) {
  constexpr double tol = 1e-12;
  if (p.x() < -tol || p.y() < -tol || p.x() + p.y() > 1.0 + tol)
    throw DomainError("tabulate_bdm1: point outside the reference triangle");
  const auto& basis = reference_bdm1_basis();
  Bdm1Tabulation tab;
  for (int j = 0; j < kBdm1LocalDofs; ++j) {
    tab.values[j] = basis[j].at(p, Vec2::Zero());
    tab.divergence[j] = basis[j].divergence();
  }
  return tab;
}

std::array<Vec2, kBdm1LocalDofs> piola_map(const Mesh& mesh, int cell,
                                           const std::array<Vec2, kBdm1LocalDofs>& ref_values) {
  const Mat2 J = mesh.jacobian(cell);
  const double det = J.determinant();
  if (!(det > 0.0)) throw DomainError("piola_map: degenerate or inverted cell");
  std::array<Vec2, kBdm1LocalDofs> out;
  for (int j = 0; j < kBdm1LocalDofs; ++j) out[j] = J * ref_values[j] / det;
  return out;
}

std::array<double, kBdm1LocalDofs> piola_divergence(const Mesh& mesh, int cell,
                                                    const std::array<double, kBdm1LocalDofs>& ref_div) {
  const double det = mesh.jacobian(cell).determinant();
  if (!(det > 0.0)) throw DomainError("piola_divergence: degenerate or inverted cell");
  std::array<double, kBdm1LocalDofs> out;
  for (int j = 0; j < kBdm1LocalDofs; ++j) out[j] = ref_div[j] / det;
  return out;
}

std::array<AffineVector, kBdm1LocalDofs> piola_basis(const Mesh& mesh, int cell) {
  const Mat2 J = mesh.jacobian(cell);
  const double det = J.determinant();
  if (!(det > 0.0)) throw DomainError("piola_basis: degenerate or inverted cell");
  const Mat2 Jinv = J.inverse();
  const Vec2 ref_centroid(1.0 / 3.0, 1.0 / 3.0);
  const auto& ref = reference_bdm1_basis();
  std::array<AffineVector, kBdm1LocalDofs> out;
  for (int j = 0; j < kBdm1LocalDofs; ++j) {
    out[j].value = J * ref[j].at(ref_centroid, Vec2::Zero()) / det;
    out[j].grad = J * ref[j].grad * Jinv / det;
  }
  return out;
}

}  // namespace dgtopo
