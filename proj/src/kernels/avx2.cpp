// Compiled with -mavx2 only (no -mfma): products and sums round exactly as in
// the scalar reference.

#include <immintrin.h>

#include "lvann/kernels/kernels.hpp"

namespace lvann::kernels {
namespace {

void hadamard_butterflies(double* x, std::size_t n) {
    if (n < 4) {
        scalar_table().hadamard_butterflies(x, n);
        return;
    }
    // Strides 1 and 2 live inside one register.
    for (std::size_t i = 0; i < n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d swap = _mm256_permute_pd(v, 0b0101);              // v1 v0 v3 v2
        v = _mm256_blend_pd(_mm256_add_pd(v, swap), _mm256_sub_pd(swap, v), 0b1010);
        swap = _mm256_permute2f128_pd(v, v, 0x01);                // v2 v3 v0 v1
        v = _mm256_blend_pd(_mm256_add_pd(v, swap), _mm256_sub_pd(swap, v), 0b1100);
        _mm256_storeu_pd(x + i, v);
    }
    for (std::size_t h = 4; h < n; h *= 2) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; j += 4) {
                const __m256d a = _mm256_loadu_pd(x + j);
                const __m256d b = _mm256_loadu_pd(x + j + h);
                _mm256_storeu_pd(x + j, _mm256_add_pd(a, b));
                _mm256_storeu_pd(x + j + h, _mm256_sub_pd(a, b));
            }
        }
    }
}

void scale(double* x, std::size_t n, double factor) {
    const __m256d f = _mm256_set1_pd(factor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), f));
    }
    for (; i < n; ++i) {
        x[i] *= factor;
    }
}

inline double fold(const double acc[8]) {
    const double v0 = acc[0] + acc[4];
    const double v1 = acc[1] + acc[5];
    const double v2 = acc[2] + acc[6];
    const double v3 = acc[3] + acc[7];
    return (v0 + v1) + (v2 + v3);
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    alignas(32) double acc[8];
    _mm256_store_pd(acc, lo);
    _mm256_store_pd(acc + 4, hi);
    for (; i < n; ++i) {
        const double p = a[i] * b[i];
        acc[i % 8] = acc[i % 8] + p;
    }
    return fold(acc);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d t0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        lo = _mm256_add_pd(lo, _mm256_mul_pd(t0, t0));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(t1, t1));
    }
    alignas(32) double acc[8];
    _mm256_store_pd(acc, lo);
    _mm256_store_pd(acc + 4, hi);
    for (; i < n; ++i) {
        const double t = a[i] - b[i];
        const double p = t * t;
        acc[i % 8] = acc[i % 8] + p;
    }
    return fold(acc);
}

std::size_t first_shared_label(const std::int32_t* a, const std::int32_t* b, std::size_t n) {
    const __m256i minus_one = _mm256_set1_epi32(-1);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const __m256i hit = _mm256_and_si256(_mm256_cmpeq_epi32(va, vb), _mm256_cmpgt_epi32(va, minus_one));
        const int mask = _mm256_movemask_ps(_mm256_castsi256_ps(hit));
        if (mask != 0) {
            return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
        }
    }
    for (; i < n; ++i) {
        if (a[i] >= 0 && a[i] == b[i]) {
            return i;
        }
    }
    return n;
}

bool bitsets_intersect(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
    std::size_t i = 0;
    for (; i + 4 <= words; i += 4) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        if (!_mm256_testz_si256(va, vb)) {
            return true;
        }
    }
    for (; i < words; ++i) {
        if ((a[i] & b[i]) != 0) {
            return true;
        }
    }
    return false;
}

constexpr KernelTable kAvx2{
    "avx2", hadamard_butterflies, scale, dot, squared_distance, first_shared_label, bitsets_intersect,
};

}  // namespace

namespace detail {
const KernelTable* avx2_table_impl() noexcept { return &kAvx2; }
}  // namespace detail

}  // namespace lvann::kernels
