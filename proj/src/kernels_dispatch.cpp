#include <atomic>

#include "sqphase/kernels.hpp"

namespace sqphase::kernels {

#if defined(SQPHASE_HAVE_AVX2_TU)
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#if defined(SQPHASE_HAVE_AVX2_TU)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_ops_impl() : nullptr;
#else
  return nullptr;
#endif
}

namespace {
std::atomic<const Ops*> g_active{nullptr};

const Ops* default_ops() {
  if (const Ops* v = avx2_ops()) return v;
  return &scalar_ops();
}
}  // namespace

const Ops& active() {
  const Ops* v = g_active.load(std::memory_order_acquire);
  if (!v) {
    v = default_ops();
    g_active.store(v, std::memory_order_release);
  }
  return *v;
}

Backend active_backend() {
  return &active() == &scalar_ops() ? Backend::scalar : Backend::avx2;
}

bool select_backend(Backend backend) {
  if (backend == Backend::scalar) {
    g_active.store(&scalar_ops(), std::memory_order_release);
    return true;
  }
  if (const Ops* v = avx2_ops()) {
    g_active.store(v, std::memory_order_release);
    return true;
  }
  return false;
}

bool select_backend(const std::string& name) {
  if (name == "auto") {
    g_active.store(default_ops(), std::memory_order_release);
    return true;
  }
  if (name == "scalar") return select_backend(Backend::scalar);
  if (name == "avx2") return select_backend(Backend::avx2);
  return false;
}

}  // namespace sqphase::kernels
