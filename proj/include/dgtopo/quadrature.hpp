#pragma once

#include <vector>

#include "dgtopo/types.hpp"

namespace dgtopo {

enum class QuadDomain { triangle, edge };

/// Points are reference coordinates: (x, y) on the triangle with vertices
/// (0,0), (1,0), (0,1); on the edge only x is used and lives in [0,1].
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kDefaultCellDegree = 4;
inline constexpr int kDefaultEdgeDegree = 4;
inline constexpr int kMaxQuadratureDegree = 30;

/// Rule exact for polynomials up to `degree` on the reference domain.
/// Supported degrees: 1..kMaxQuadratureDegree.
QuadratureRule quadrature(QuadDomain domain, int degree);

/// Cached rule; safe for concurrent use after first call.
const QuadratureRule& cached_quadrature(QuadDomain domain, int degree);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace dgtopo
