#include "pepforge/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace pepforge::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") && avx2_ops() != nullptr;
#else
    return false;
#endif
}

namespace {

const Ops& select() {
    const char* pref = std::getenv("PEPFORGE_KERNELS");
    if (pref != nullptr) {
        if (std::strcmp(pref, "scalar") == 0) return scalar_ops();
        if (std::strcmp(pref, "avx2") == 0 && avx2_supported()) return *avx2_ops();
    }
    if (avx2_supported()) return *avx2_ops();
    return scalar_ops();
}

} // namespace

const Ops& ops() {
    static const Ops& chosen = select();
    return chosen;
}

} // namespace pepforge::kernels
