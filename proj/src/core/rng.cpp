#include "lvann/core/rng.hpp"

#include <cmath>
#include <numbers>

namespace lvann {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

RngStream::RngStream(std::uint64_t seed, std::string label)
    : seed_(seed), label_(std::move(label)), key_(splitmix64(seed ^ splitmix64(fnv1a64(label_)))) {}

RngStream RngStream::child(std::string_view name) const {
    std::string next = label_;
    next.push_back('/');
    next.append(name);
    return RngStream(seed_, std::move(next));
}

RngStream RngStream::child(std::string_view name, std::uint64_t index) const {
    std::string next = label_;
    next.push_back('/');
    next.append(name);
    next.push_back('#');
    next.append(std::to_string(index));
    return RngStream(seed_, std::move(next));
}

std::uint64_t RngStream::next_u64() {
    // Two rounds of the splitmix finalizer over (key, counter) decorrelate
    // neighbouring counters and neighbouring keys.
    const std::uint64_t c = counter_++;
    return splitmix64(key_ ^ splitmix64(c));
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
    if (n <= 1) {
        return 0;
    }
    // Rejection on the top of the range keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x < limit) {
            return x % n;
        }
    }
}

double RngStream::normal() {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::rademacher() {
    return (next_u64() >> 63) ? -1.0 : 1.0;
}

}  // namespace lvann
