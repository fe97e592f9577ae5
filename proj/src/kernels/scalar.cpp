#include "lvann/kernels/kernels.hpp"

namespace lvann::kernels {
namespace {

void hadamard_butterflies(double* x, std::size_t n) {
    for (std::size_t h = 1; h < n; h *= 2) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = x[j];
                const double b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
        }
    }
}

void scale(double* x, std::size_t n, double factor) {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] *= factor;
    }
}

// Lane k accumulates indices i with i % 8 == k; lanes fold as
// v[j] = acc[j] + acc[j + 4], then (v0 + v1) + (v2 + v3).
inline double fold(const double acc[8]) {
    const double v0 = acc[0] + acc[4];
    const double v1 = acc[1] + acc[5];
    const double v2 = acc[2] + acc[6];
    const double v3 = acc[3] + acc[7];
    return (v0 + v1) + (v2 + v3);
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double p = a[i] * b[i];
        acc[i % 8] = acc[i % 8] + p;
    }
    return fold(acc);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = a[i] - b[i];
        const double p = t * t;
        acc[i % 8] = acc[i % 8] + p;
    }
    return fold(acc);
}

std::size_t first_shared_label(const std::int32_t* a, const std::int32_t* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] >= 0 && a[i] == b[i]) {
            return i;
        }
    }
    return n;
}

bool bitsets_intersect(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
    for (std::size_t i = 0; i < words; ++i) {
        if ((a[i] & b[i]) != 0) {
            return true;
        }
    }
    return false;
}

constexpr KernelTable kScalar{
    "scalar", hadamard_butterflies, scale, dot, squared_distance, first_shared_label, bitsets_intersect,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace lvann::kernels
