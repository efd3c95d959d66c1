#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "seqinv/kernels.hpp"

namespace seqinv::kernels {
namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* resolve_auto() {
#if defined(__x86_64__) || defined(_M_X64)
  if (__builtin_cpu_supports("avx2")) return &avx2_ops;
#endif
  return &scalar_ops;
}

const Ops* resolve() {
  if (const char* env = std::getenv("SEQINV_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return &scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
    if (v == "avx2") {
      if (!__builtin_cpu_supports("avx2"))
        throw std::runtime_error("SEQINV_SIMD=avx2 but CPU lacks AVX2");
      return &avx2_ops;
    }
#endif
    if (v != "auto" && !v.empty())
      throw std::runtime_error("unknown SEQINV_SIMD value: " + v);
  }
  return resolve_auto();
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Ops& active() {
  const Ops* ops = g_active.load(std::memory_order_acquire);
  if (!ops) {
    ops = resolve();
    g_active.store(ops, std::memory_order_release);
  }
  return *ops;
}

void force_lane(const std::string& name) {
  if (name == "scalar") {
    g_active.store(&scalar_ops, std::memory_order_release);
    return;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (name == "avx2") {
    if (!avx2_available())
      throw std::runtime_error("CPU lacks AVX2");
    g_active.store(&avx2_ops, std::memory_order_release);
    return;
  }
#endif
  if (name == "auto") {
    g_active.store(resolve_auto(), std::memory_order_release);
    return;
  }
  throw std::runtime_error("unknown kernel lane: " + name);
}

}  // namespace seqinv::kernels
