#include <atomic>
#include <cstdlib>
#include <string_view>

#include "lvann/kernels/kernels.hpp"

namespace lvann::kernels {

const KernelTable* avx2_table() noexcept {
#if defined(LVANN_HAVE_AVX2)
    return detail::avx2_table_impl();
#else
    return nullptr;
#endif
}

bool cpu_supports_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

const KernelTable* resolve(std::string_view which) noexcept {
    if (which == "scalar") {
        return &scalar_table();
    }
    const KernelTable* simd = avx2_table();
    const bool usable = simd != nullptr && cpu_supports_avx2();
    if (which == "avx2") {
        return usable ? simd : nullptr;
    }
    if (which == "auto") {
        return usable ? simd : &scalar_table();
    }
    return nullptr;
}

const KernelTable* initial() noexcept {
    const char* env = std::getenv("LVANN_KERNELS");
    const KernelTable* t = resolve(env != nullptr ? std::string_view(env) : std::string_view("auto"));
    return t != nullptr ? t : &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> table{initial()};
    return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

bool select(std::string_view which) noexcept {
    const KernelTable* t = resolve(which);
    if (t == nullptr) {
        return false;
    }
    slot().store(t, std::memory_order_relaxed);
    return true;
}

}  // namespace lvann::kernels
