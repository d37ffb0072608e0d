#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "dgtopo/kernels.hpp"

namespace dgtopo::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void cell_energy(const AffineCellView& v, double* out) {
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t c = 0;
  for (; c + 4 <= v.n; c += 4) {
    const __m256d ax = _mm256_loadu_pd(v.ax + c), ay = _mm256_loadu_pd(v.ay + c);
    const __m256d g00 = _mm256_loadu_pd(v.g00 + c), g01 = _mm256_loadu_pd(v.g01 + c);
    const __m256d g10 = _mm256_loadu_pd(v.g10 + c), g11 = _mm256_loadu_pd(v.g11 + c);
    const __m256d mean = _mm256_fmadd_pd(ax, ax, _mm256_mul_pd(ay, ay));
    const __m256d gxx = _mm256_fmadd_pd(g00, g00, _mm256_mul_pd(g10, g10));
    const __m256d gxy = _mm256_fmadd_pd(g00, g01, _mm256_mul_pd(g10, g11));
    const __m256d gyy = _mm256_fmadd_pd(g01, g01, _mm256_mul_pd(g11, g11));
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(v.area + c), mean);
    acc = _mm256_fmadd_pd(gxx, _mm256_loadu_pd(v.sxx + c), acc);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(two, gxy), _mm256_loadu_pd(v.sxy + c), acc);
    acc = _mm256_fmadd_pd(gyy, _mm256_loadu_pd(v.syy + c), acc);
    _mm256_storeu_pd(out + c, acc);
  }
  for (; c < v.n; ++c) {
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
  const __m256d vinv = _mm256_set1_pd(inv);
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d vol = _mm256_setzero_pd();
  std::size_t c = 0;
  for (; c + 4 <= n; c += 4) {
    __m256d r = _mm256_sub_pd(_mm256_sqrt_pd(_mm256_mul_pd(_mm256_loadu_pd(coef + c), vinv)), vq);
    r = _mm256_min_pd(_mm256_max_pd(r, zero), one);
    if (rho) _mm256_storeu_pd(rho + c, r);
    vol = _mm256_fmadd_pd(r, _mm256_loadu_pd(area + c), vol);
  }
  double total = hsum(vol);
  for (; c < n; ++c) {
    const double r = std::clamp(std::sqrt(coef[c] * inv) - q, 0.0, 1.0);
    if (rho) rho[c] = r;
    total += r * area[c];
  }
  return total;
}

double weighted_sum_squares(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), xv), xv, acc);
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += w[i] * x[i] * x[i];
  return sum;
}

void alpha_values(const double* rho, std::size_t n, double alpha_bar, double q, double* out) {
  const __m256d scale = _mm256_set1_pd(alpha_bar * q);
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(rho + i);
    const __m256d num = _mm256_mul_pd(scale, _mm256_sub_pd(one, r));
    _mm256_storeu_pd(out + i, _mm256_div_pd(num, _mm256_add_pd(r, vq)));
  }
  for (; i < n; ++i) out[i] = alpha_bar * q * (1.0 - rho[i]) / (rho[i] + q);
}

}  // namespace

const KernelTable kTable{Isa::avx2, "avx2", cell_energy, volume_at_multiplier, weighted_sum_squares, alpha_values};

}  // namespace dgtopo::kernels::avx2
