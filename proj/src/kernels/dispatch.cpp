#include "circtz/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace circtz::kernels {

#if defined(CIRCTZ_WITH_AVX2)
const KernelTable& avx2_table_impl();
#endif

namespace {

std::atomic<const KernelTable*> g_forced{nullptr};

bool cpu_has_avx2() {
#if defined(CIRCTZ_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& detect() {
    if (const char* env = std::getenv("CIRCTZ_SIMD"); env != nullptr && std::string(env) == "scalar") {
        return scalar_table();
    }
    if (const KernelTable* t = avx2_table()) {
        return *t;
    }
    return scalar_table();
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(CIRCTZ_WITH_AVX2)
    static const bool ok = cpu_has_avx2();
    return ok ? &avx2_table_impl() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    if (const KernelTable* forced = g_forced.load(std::memory_order_acquire)) {
        return *forced;
    }
    static const KernelTable& detected = detect();
    return detected;
}

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return "scalar";
        case Backend::Avx2:
            return "avx2";
    }
    return "unknown";
}

void force_backend(Backend b) {
    if (b == Backend::Avx2) {
        if (const KernelTable* t = avx2_table()) {
            g_forced.store(t, std::memory_order_release);
            return;
        }
    }
    g_forced.store(&scalar_table(), std::memory_order_release);
}

void reset_backend() { g_forced.store(nullptr, std::memory_order_release); }

}  // namespace circtz::kernels
