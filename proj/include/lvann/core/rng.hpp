#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lvann {

/// Counter-based random stream. A draw depends only on (seed, label, counter),
/// so the same labelled stream yields the same values on any platform and in
/// any thread schedule. Sub-streams are derived by extending the label.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string label);

    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& label() const noexcept { return label_; }
    std::uint64_t counter() const noexcept { return counter_; }

    RngStream child(std::string_view name) const;
    RngStream child(std::string_view name, std::uint64_t index) const;

    std::uint64_t next_u64();
    double uniform();                              // [0, 1)
    double uniform(double lo, double hi);          // [lo, hi)
    std::uint64_t uniform_below(std::uint64_t n);  // [0, n), unbiased
    double normal();                               // standard Gaussian
    double rademacher();                           // +1 or -1

private:
    std::uint64_t seed_;
    std::string label_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

}  // namespace lvann
