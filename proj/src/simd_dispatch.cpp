#include "chain/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace chain::simd {

const Ops &active() {
    static const Ops *chosen = [] {
        const char *env = std::getenv("CHAIN_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return &scalar_ops();
        if (const Ops *v = avx2_ops()) return v;
        if (const Ops *v = neon_ops()) return v;
        return &scalar_ops();
    }();
    return *chosen;
}

} // namespace chain::simd
