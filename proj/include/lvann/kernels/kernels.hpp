#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// when compiled in, an AVX2 variant chosen at runtime. The variants follow
// the same arithmetic order (8 interleaved accumulators, no fused multiply-add)
// so their results are bit-identical; tests/unit/kernels_test.cpp holds them
// to that.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace lvann::kernels {

struct KernelTable {
    const char* name;
    // Unnormalized in-place Walsh-Hadamard butterflies; n is a power of two.
    void (*hadamard_butterflies)(double* x, std::size_t n);
    void (*scale)(double* x, std::size_t n, double factor);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    // First i with a[i] == b[i] and a[i] >= 0; n if none.
    std::size_t (*first_shared_label)(const std::int32_t* a, const std::int32_t* b, std::size_t n);
    // True iff some word of (a & b) is nonzero.
    bool (*bitsets_intersect)(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table() noexcept;

bool cpu_supports_avx2() noexcept;

// Chosen once: LVANN_KERNELS=scalar|avx2|auto (default auto).
const KernelTable& active() noexcept;

// Test hook; pass "scalar", "avx2" or "auto". Returns false if unavailable.
bool select(std::string_view which) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline std::size_t first_shared_label(std::span<const std::int32_t> a,
                                      std::span<const std::int32_t> b) noexcept {
    return active().first_shared_label(a.data(), b.data(), a.size());
}

inline bool bitsets_intersect(std::span<const std::uint64_t> a,
                              std::span<const std::uint64_t> b) noexcept {
    return active().bitsets_intersect(a.data(), b.data(), a.size());
}

namespace detail {
const KernelTable* avx2_table_impl() noexcept;
}

}  // namespace lvann::kernels
