#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "lvann/kernels/kernels.hpp"

namespace {

using lvann::kernels::KernelTable;

const KernelTable* simd_or_skip() {
    const KernelTable* t = lvann::kernels::avx2_table();
    if (t == nullptr || !lvann::kernels::cpu_supports_avx2()) {
        return nullptr;
    }
    return t;
}

std::vector<double> random_doubles(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> dist(0.0, 3.0);
    std::vector<double> v(n);
    for (double& x : v) {
        x = dist(gen);
    }
    return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST(Kernels, AvxMatchesScalarBitForBitOnFloatKernels) {
    const KernelTable* simd = simd_or_skip();
    if (simd == nullptr) {
        GTEST_SKIP() << "no AVX2";
    }
    const KernelTable& ref = lvann::kernels::scalar_table();
    std::mt19937_64 gen(7);
    // Lengths straddle the 4-wide and 8-accumulator boundaries.
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 64u, 127u, 1000u}) {
        const auto a = random_doubles(n, gen);
        const auto b = random_doubles(n, gen);
        EXPECT_TRUE(same_bits(ref.dot(a.data(), b.data(), n), simd->dot(a.data(), b.data(), n))) << n;
        EXPECT_TRUE(same_bits(ref.squared_distance(a.data(), b.data(), n),
                              simd->squared_distance(a.data(), b.data(), n)))
            << n;
        auto s1 = a;
        auto s2 = a;
        ref.scale(s1.data(), n, 0.37);
        simd->scale(s2.data(), n, 0.37);
        EXPECT_EQ(0, std::memcmp(s1.data(), s2.data(), n * sizeof(double))) << n;
    }
}

TEST(Kernels, AvxButterfliesMatchScalar) {
    const KernelTable* simd = simd_or_skip();
    if (simd == nullptr) {
        GTEST_SKIP() << "no AVX2";
    }
    std::mt19937_64 gen(11);
    for (std::size_t n = 1; n <= 4096; n *= 2) {
        auto a = random_doubles(n, gen);
        auto b = a;
        lvann::kernels::scalar_table().hadamard_butterflies(a.data(), n);
        simd->hadamard_butterflies(b.data(), n);
        EXPECT_EQ(0, std::memcmp(a.data(), b.data(), n * sizeof(double))) << n;
    }
}

TEST(Kernels, AvxIntegerKernelsMatchScalar) {
    const KernelTable* simd = simd_or_skip();
    if (simd == nullptr) {
        GTEST_SKIP() << "no AVX2";
    }
    const KernelTable& ref = lvann::kernels::scalar_table();
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> label(-1, 3);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = gen() % 40;
        std::vector<std::int32_t> a(n);
        std::vector<std::int32_t> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = label(gen);
            b[i] = label(gen);
        }
        EXPECT_EQ(ref.first_shared_label(a.data(), b.data(), n), simd->first_shared_label(a.data(), b.data(), n));
        std::vector<std::uint64_t> x(n);
        std::vector<std::uint64_t> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Sparse words so both outcomes occur.
            x[i] = gen() % 5 == 0 ? std::uint64_t{1} << (gen() % 64) : 0;
            y[i] = gen() % 5 == 0 ? std::uint64_t{1} << (gen() % 64) : 0;
        }
        EXPECT_EQ(ref.bitsets_intersect(x.data(), y.data(), n), simd->bitsets_intersect(x.data(), y.data(), n));
    }
}

TEST(Kernels, ScalarReferenceValues) {
    const KernelTable& ref = lvann::kernels::scalar_table();
    const double a[] = {1, 2, 3};
    const double b[] = {4, -5, 6};
    EXPECT_DOUBLE_EQ(ref.dot(a, b, 3), 12.0);
    EXPECT_DOUBLE_EQ(ref.squared_distance(a, b, 3), 9.0 + 49.0 + 9.0);
    double h[] = {1, 1, 1, 1};
    ref.hadamard_butterflies(h, 4);
    EXPECT_DOUBLE_EQ(h[0], 4.0);
    EXPECT_DOUBLE_EQ(h[1], 0.0);
    const std::int32_t la[] = {-1, 2, 5, 5};
    const std::int32_t lb[] = {-1, 3, 5, 5};
    EXPECT_EQ(ref.first_shared_label(la, lb, 4), 2u);
    EXPECT_EQ(ref.first_shared_label(la, lb, 2), 2u);  // none: returns n
}

TEST(Kernels, SelectRejectsUnknownNames) {
    EXPECT_FALSE(lvann::kernels::select("bogus"));
    EXPECT_TRUE(lvann::kernels::select("scalar"));
    EXPECT_STREQ(lvann::kernels::active().name, lvann::kernels::scalar_table().name);
    EXPECT_TRUE(lvann::kernels::select("auto"));
}

}  // namespace
