#include "lvann/core/hadamard.hpp"

#include <cmath>
#include <string>

#include "lvann/error.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

std::size_t next_power_of_two(std::size_t n) {
    require(n >= 1, ErrorCode::InvalidArgument, "next_power_of_two: n must be >= 1");
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

unsigned log2_exact(std::size_t n) {
    require(is_power_of_two(n), ErrorCode::InvalidArgument,
            "log2_exact: " + std::to_string(n) + " is not a power of two");
    unsigned k = 0;
    while ((std::size_t{1} << k) < n) {
        ++k;
    }
    return k;
}

void fwht_inplace(std::span<double> x) {
    require(is_power_of_two(x.size()), ErrorCode::InvalidArgument,
            "fwht: dimension " + std::to_string(x.size()) + " is not a power of two");
    const auto& k = kernels::active();
    k.hadamard_butterflies(x.data(), x.size());
    k.scale(x.data(), x.size(), 1.0 / std::sqrt(static_cast<double>(x.size())));
}

RealVector fwht(const RealVector& x) {
    std::vector<double> out(x.coords());
    fwht_inplace(out);
    return RealVector(std::move(out));
}

}  // namespace lvann
