#include <algorithm>
#include <cmath>

#include "dgtopo/kernels.hpp"

namespace dgtopo::kernels::scalar {

namespace {

void cell_energy(const AffineCellView& v, double* out) {
  for (std::size_t c = 0; c < v.n; ++c) {
    const double mean = v.ax[c] * v.ax[c] + v.ay[c] * v.ay[c];
    const double gxx = v.g00[c] * v.g00[c] + v.g10[c] * v.g10[c];
    const double gxy = v.g00[c] * v.g01[c] + v.g10[c] * v.g11[c];
    const double gyy = v.g01[c] * v.g01[c] + v.g11[c] * v.g11[c];
    out[c] = v.area[c] * mean + gxx * v.sxx[c] + 2.0 * gxy * v.sxy[c] + gyy * v.syy[c];
  }
}

double volume_at_multiplier(const double* coef, const double* area, std::size_t n, double lambda, double q,
                            double* rho) {
  const double inv = 1.0 / lambda;
  double vol = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double r = std::clamp(std::sqrt(coef[c] * inv) - q, 0.0, 1.0);
    if (rho) rho[c] = r;
    vol += r * area[c];
  }
  return vol;
}

double weighted_sum_squares(const double* w, const double* x, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += w[i] * x[i] * x[i];
  return sum;
}

void alpha_values(const double* rho, std::size_t n, double alpha_bar, double q, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha_bar * q * (1.0 - rho[i]) / (rho[i] + q);
}

}  // namespace

const KernelTable kTable{Isa::scalar, "scalar", cell_energy, volume_at_multiplier, weighted_sum_squares,
                         alpha_values};

}  // namespace dgtopo::kernels::scalar
