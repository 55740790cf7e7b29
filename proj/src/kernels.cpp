#include "brl/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace brl::kern {

const Backend* avx2_backend();
const Backend* neon_backend();

const Backend* simd() {
  if (const Backend* b = avx2_backend()) return b;
  if (const Backend* b = neon_backend()) return b;
  return nullptr;
}

const Backend& active() {
  static const Backend* chosen = [] {
    const char* env = std::getenv("BRL_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar();
    if (const Backend* b = simd()) return b;
    return &scalar();
  }();
  return *chosen;
}

std::string active_name() { return active().name; }

}  // namespace brl::kern
