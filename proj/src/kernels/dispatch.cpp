#include <cstdlib>
#include <cstring>

#include "nauts/kernels.hpp"

namespace nauts::kernels {
namespace {

bool cpu_has_avx2_fma() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() noexcept {
  if (const char* env = std::getenv("NAUTS_KERNELS"); env && std::strcmp(env, "scalar") == 0) {
    return scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() noexcept {
#ifdef NAUTS_HAVE_AVX2
  static const bool ok = cpu_has_avx2_fma();
  return ok ? detail::avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace nauts::kernels
