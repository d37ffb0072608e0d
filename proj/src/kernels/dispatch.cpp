#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "dgtopo/kernels.hpp"

namespace dgtopo::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(DGTOPO_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const char* env = std::getenv("DGTOPO_KERNELS");
  if (env && std::string(env) == "scalar") return &scalar::kTable;
  if (available(Isa::avx2)) return &table(Isa::avx2);
  return &scalar::kTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{initial_table()};
  return ptr;
}

}  // namespace

bool available(Isa isa) {
  if (isa == Isa::scalar) return true;
  static const bool has = cpu_has_avx2();
  return has;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw std::runtime_error("kernels: requested ISA is not available on this CPU/build");
#if defined(DGTOPO_HAVE_AVX2_KERNELS)
  if (isa == Isa::avx2) return avx2::kTable;
#endif
  return scalar::kTable;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace dgtopo::kernels
