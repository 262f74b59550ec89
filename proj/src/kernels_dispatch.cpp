#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hut/kernels.hpp"

namespace hut::kernels {

#if defined(HUT_HAVE_AVX2_TU)
// Defined in kernels_avx2.cpp (compiled with -mavx2).
const KernelTable* avx2_table_impl();
#endif

const KernelTable* avx2_table() {
#if defined(HUT_HAVE_AVX2_TU)
    // Build support alone is not enough; the running CPU must agree.
    if (__builtin_cpu_supports("avx2")) return avx2_table_impl();
#endif
    return nullptr;
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("HUT_KERNELS");
    if (forced != nullptr && *forced != '\0') {
        const std::string want(forced);
        if (want == "scalar") return scalar_table();
        if (want == "avx2") {
            const KernelTable* t = avx2_table();
            if (t == nullptr) {
                throw std::runtime_error(
                    "HUT_KERNELS=avx2 requested but AVX2 is not available on this build/CPU");
            }
            return *t;
        }
        throw std::runtime_error("HUT_KERNELS must be 'scalar' or 'avx2', got '" + want + "'");
    }
    const KernelTable* t = avx2_table();
    return t != nullptr ? *t : scalar_table();
}

}  // namespace

const KernelTable& active() {
    // Selected once; every thread sees the same table for the process
    // lifetime, so mixed-path results are impossible within one run.
    static const KernelTable& chosen = select();
    return chosen;
}

}  // namespace hut::kernels
