#include "dgtopo/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace dgtopo {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

QuadratureRule edge_rule(int degree) {
  const int n = (degree + 2) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    r.points.emplace_back(0.5 * (x[i] + 1.0), 0.0);
    r.weights.push_back(0.5 * w[i]);
  }
  return r;
}

// Symmetric rules (Strang-Fix / Dunavant) for the low degrees used in assembly.
QuadratureRule symmetric_triangle_rule(int degree) {
  QuadratureRule r;
  r.degree = degree;
  auto add_orbit3 = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    r.points.emplace_back(a, a);
    r.points.emplace_back(b, a);
    r.points.emplace_back(a, b);
    for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * w);
  };
  switch (degree) {
    case 1:
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
      r.weights.push_back(0.5);
      break;
    case 2:
      add_orbit3(1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      add_orbit3(0.445948490915964886318329253883, 0.223381589678011465944827294392);
      add_orbit3(0.091576213509770743459571463402, 0.109951743655321867638506038941);
      break;
    case 5:
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
      r.weights.push_back(0.5 * 0.225);
      add_orbit3(0.470142064105115089770441209513, 0.132394152788506181118830624902);
      add_orbit3(0.101286507323456338800987361915, 0.125939180544827152595683945501);
      break;
    default:
      break;
  }
  return r;
}

// Collapsed (Duffy) tensor Gauss rule, exact to any requested degree.
QuadratureRule collapsed_triangle_rule(int degree) {
  const int n = (degree + 3) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule r;
  r.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double xi = 0.5 * (x[i] + 1.0);
    for (int j = 0; j < n; ++j) {
      const double eta = 0.5 * (x[j] + 1.0);
      r.points.emplace_back(xi * (1.0 - eta), eta);
      r.weights.push_back(0.25 * w[i] * w[j] * (1.0 - eta));
    }
  }
  return r;
}

}  // namespace

QuadratureRule quadrature(QuadDomain domain, int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree) {
    throw DomainError("quadrature: unsupported degree " + std::to_string(degree) + " (supported: 1.." +
                      std::to_string(kMaxQuadratureDegree) + ")");
  }
  if (domain == QuadDomain::edge) return edge_rule(degree);
  if (degree == 1 || degree == 2 || degree == 4 || degree == 5) return symmetric_triangle_rule(degree);
  return collapsed_triangle_rule(degree);
}

const QuadratureRule& cached_quadrature(QuadDomain domain, int degree) {
  static std::array<std::array<QuadratureRule, kMaxQuadratureDegree + 1>, 2> cache;
  static std::array<std::array<std::once_flag, kMaxQuadratureDegree + 1>, 2> once;
  const int d = static_cast<int>(domain);
  if (degree < 1 || degree > kMaxQuadratureDegree) return cache[d][0] = quadrature(domain, degree);
  std::call_once(once[d][degree], [&] { cache[d][degree] = quadrature(domain, degree); });
  return cache[d][degree];
}

}  // namespace dgtopo
