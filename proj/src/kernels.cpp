#include <cstdlib>
#include <string_view>

#include "plume/kernels.hpp"

namespace plume::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const KernelTable& active() {
    static const KernelTable* table = [] {
        if (const char* env = std::getenv("PLUME_KERNELS")) {
            if (std::string_view(env) == "scalar") {
                return &scalar_kernels();
            }
        }
#if defined(__x86_64__) || defined(_M_X64)
        if (avx2_supported()) {
            return &avx2_kernels();
        }
#endif
        return &scalar_kernels();
    }();
    return *table;
}

}  // namespace plume::kernels
