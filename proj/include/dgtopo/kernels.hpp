#pragma once

#include <cstddef>
#include <vector>

#include "dgtopo/types.hpp"

// Data-parallel inner loops. Every kernel has a portable scalar reference
// implementation and, on x86-64, an AVX2/FMA variant chosen at runtime.
// The environment variable DGTOPO_KERNELS=scalar|avx2 overrides the choice.

namespace dgtopo::kernels {

/// Structure-of-arrays view of cellwise affine vector fields
/// v = a + G (x - centroid), with the centroidal second moments
/// S = int_K (x - c)(x - c)^T dx.
struct AffineCellView {
  std::size_t n = 0;
  const double* ax = nullptr;
  const double* ay = nullptr;
  const double* g00 = nullptr;
  const double* g01 = nullptr;
  const double* g10 = nullptr;
  const double* g11 = nullptr;
  const double* area = nullptr;
  const double* sxx = nullptr;
  const double* sxy = nullptr;
  const double* syy = nullptr;
};

class AffineCellBatch {
 public:
  explicit AffineCellBatch(std::size_t n)
      : ax_(n), ay_(n), g00_(n), g01_(n), g10_(n), g11_(n), area_(n), sxx_(n), sxy_(n), syy_(n) {}

  void set(std::size_t c, const Vec2& a, const Mat2& g, double area, double sxx, double sxy, double syy) {
    ax_[c] = a.x();
    ay_[c] = a.y();
    g00_[c] = g(0, 0);
    g01_[c] = g(0, 1);
    g10_[c] = g(1, 0);
    g11_[c] = g(1, 1);
    area_[c] = area;
    sxx_[c] = sxx;
    sxy_[c] = sxy;
    syy_[c] = syy;
  }

  AffineCellView view() const {
    return {ax_.size(),   ax_.data(),  ay_.data(),  g00_.data(), g01_.data(), g10_.data(),
            g11_.data(), area_.data(), sxx_.data(), sxy_.data(), syy_.data()};
  }

 private:
  std::vector<double> ax_, ay_, g00_, g01_, g10_, g11_, area_, sxx_, sxy_, syy_;
};

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  /// out[c] = int_K |v|^2 dx.
  void (*cell_energy)(const AffineCellView& cells, double* out);
  /// rho[c] = clamp(sqrt(coef[c] / lambda) - q, 0, 1); returns sum rho[c] * area[c].
  /// `rho` may be null when only the volume is needed. Requires lambda > 0.
  double (*volume_at_multiplier)(const double* coef, const double* area, std::size_t n, double lambda, double q,
                                 double* rho);
  /// sum w[i] * x[i]^2.
  double (*weighted_sum_squares)(const double* w, const double* x, std::size_t n);
  /// out[i] = alpha_bar * q * (1 - rho[i]) / (rho[i] + q).
  void (*alpha_values)(const double* rho, std::size_t n, double alpha_bar, double q, double* out);
};

bool available(Isa isa);
const KernelTable& table(Isa isa);
/// The table in use (AVX2 when the CPU supports it unless overridden).
const KernelTable& active();
/// Forces a kernel set; throws std::runtime_error if the ISA is unavailable.
void select(Isa isa);

namespace scalar {
extern const KernelTable kTable;
}
#if defined(DGTOPO_HAVE_AVX2_KERNELS)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

}  // namespace dgtopo::kernels
