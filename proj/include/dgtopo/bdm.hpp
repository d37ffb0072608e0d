#pragma once

#include <array>

#include <vector>

#include "dgtopo/mesh.hpp"
#include "dgtopo/quadrature.hpp"

namespace dgtopo {

/// Vector field that is affine on a cell: v(x) = value + grad * (x - origin).
struct AffineVector {
  Vec2 value = Vec2::Zero();
  Mat2 grad = Mat2::Zero();

  Vec2 at(const Vec2& x, const Vec2& origin) const { return value + grad * (x - origin); }
  double divergence() const { return grad.trace(); }
};

inline constexpr int kBdm1LocalDofs = 6;

/// Local dof 2*i + k of the reference BDM1 element is the edge moment
///   int_{e_i} (v . n_i) s^k ds,   k in {0, 1},
/// with e_i opposite vertex i, n_i its unit outward normal and s in [-1, 1]
/// running from vertex i+1 to vertex i+2.
struct Bdm1Tabulation {
  std::array<Vec2, kBdm1LocalDofs> values;
  std::array<double, kBdm1LocalDofs> divergence;
};

/// Reference basis as affine fields about the origin (0, 0).
const std::array<AffineVector, kBdm1LocalDofs>& reference_bdm1_basis();

/// Values and divergences of the six reference basis fields at a reference point.
Bdm1Tabulation tabulate_bdm1(const Vec2& ref_point);

/// Applies the local edge-moment functional `dof` to an arbitrary field on the
/// reference triangle (Gauss quadrature of the given degree).
template <class F>
double reference_edge_moment(int dof, F&& field, int degree = 8);

/// Contravariant Piola map on cell c: v = J v_ref / det J.
std::array<Vec2, kBdm1LocalDofs> piola_map(const Mesh& mesh, int cell,
                                           const std::array<Vec2, kBdm1LocalDofs>& ref_values);

/// Divergence transforms as div v = div_ref v_ref / det J.
std::array<double, kBdm1LocalDofs> piola_divergence(const Mesh& mesh, int cell,
                                                    const std::array<double, kBdm1LocalDofs>& ref_div);

/// Piola image of the reference basis on cell c as affine fields about the cell centroid.
std::array<AffineVector, kBdm1LocalDofs> piola_basis(const Mesh& mesh, int cell);

// --- implementation of the template ---

namespace detail {
void reference_edge_geometry(int edge, Vec2& start, Vec2& end, Vec2& normal);
}

template <class F>
double reference_edge_moment(int dof, F&& field, int degree) {
  const int edge = dof / 2;
  const int k = dof % 2;
  Vec2 a, b, n;
  detail::reference_edge_geometry(edge, a, b, n);
  const double len = (b - a).norm();
  const int npts = (degree + 2) / 2;
  std::vector<double> x, w;
  gauss_legendre(npts, x, w);
  double sum = 0.0;
  for (int q = 0; q < npts; ++q) {
    const double s = x[q];
    const Vec2 p = a + 0.5 * (s + 1.0) * (b - a);
    const Vec2 v = field(p);
    sum += w[q] * 0.5 * len * v.dot(n) * (k == 0 ? 1.0 : s);
  }
  return sum;
}

}  // namespace dgtopo
