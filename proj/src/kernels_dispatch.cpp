#include "gribov/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace gribov::simd {

const KernelTable& active()
{
    static const KernelTable& chosen = []() -> const KernelTable& {
        const char* env = std::getenv("GRIBOV_SIMD");
        const std::string_view request = env ? env : "auto";
        if (request == "scalar")
            return scalar_kernels();
        if (const KernelTable* fast = avx2_kernels())
            return *fast;
        return scalar_kernels();
    }();
    return chosen;
}

} // namespace gribov::simd
