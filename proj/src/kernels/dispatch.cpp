#include <cstdlib>
#include <cstring>

#include "catsim/kernels.hpp"

namespace catsim::kernels {

bool cpu_has_avx2_fma() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

#ifndef CATSIM_HAVE_AVX2
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

namespace {

const KernelTable& resolve() noexcept {
  if (const char* force = std::getenv("CATSIM_KERNELS"); force && std::strcmp(force, "scalar") == 0)
    return scalar_table();
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace catsim::kernels
