#pragma once

#include <cstddef>
#include <span>

#include "lvann/core/real_vector.hpp"

namespace lvann {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

// Smallest power of two >= n (n >= 1).
std::size_t next_power_of_two(std::size_t n);

unsigned log2_exact(std::size_t n);  // n a power of two

/// Normalized Walsh-Hadamard transform (1/sqrt(d)) H_d x, in place.
void fwht_inplace(std::span<double> x);

RealVector fwht(const RealVector& x);

}  // namespace lvann
