#include "lvann/core/gf2k.hpp"

#include <string>

#include "lvann/error.hpp"

namespace lvann {
namespace {

// Irreducible polynomials, bit i = coefficient of x^i, indexed by degree.
constexpr std::uint32_t kModulus[Gf2k::kMaxDegree + 1] = {
    0,       0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x83,    0x11B,
    0x211,   0x409,  0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
};

}  // namespace

Gf2k::Gf2k(unsigned k) : k_(k) {
    require(k >= 1 && k <= kMaxDegree, ErrorCode::InvalidArgument,
            "GF(2^k): k must lie in [1, 16], got " + std::to_string(k));
    poly_ = kModulus[k];
}

std::uint32_t Gf2k::mul(std::uint32_t a, std::uint32_t b) const noexcept {
    std::uint32_t acc = 0;
    const std::uint32_t top = 1u << k_;
    while (b != 0) {
        if (b & 1u) {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a & top) {
            a ^= poly_;
        }
    }
    return acc;
}

std::uint32_t Gf2k::pow(std::uint32_t a, std::uint64_t e) const noexcept {
    std::uint32_t result = 1;
    while (e != 0) {
        if (e & 1u) {
            result = mul(result, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    return result;
}

std::uint32_t Gf2k::inv(std::uint32_t a) const {
    require(a != 0 && a < size(), ErrorCode::InvalidArgument, "GF(2^k): zero has no inverse");
    return pow(a, (std::uint64_t{1} << k_) - 2);
}

PairwisePerm::PairwisePerm(unsigned k, std::uint32_t a, std::uint32_t b)
    : field_(k), a_(a), b_(b), a_inv_(0) {
    require(a != 0 && a < field_.size() && b < field_.size(), ErrorCode::InvalidArgument,
            "PairwisePerm: need 0 < a < 2^k and b < 2^k");
    a_inv_ = field_.inv(a);
}

PairwisePerm PairwisePerm::from_index(unsigned k, std::uint64_t index) {
    require(index < family_size(k), ErrorCode::InvalidArgument, "PairwisePerm: index out of range");
    const std::uint64_t q = std::uint64_t{1} << k;
    return PairwisePerm(k, static_cast<std::uint32_t>(1 + index / q),
                        static_cast<std::uint32_t>(index % q));
}

std::uint64_t PairwisePerm::family_size(unsigned k) noexcept {
    const std::uint64_t q = std::uint64_t{1} << k;
    return (q - 1) * q;
}

std::uint64_t PairwisePerm::index() const noexcept {
    return static_cast<std::uint64_t>(a_ - 1) * field_.size() + b_;
}

std::uint32_t PairwisePerm::operator()(std::uint32_t x) const noexcept {
    return field_.mul(a_, x) ^ b_;
}

std::uint32_t PairwisePerm::inverse(std::uint32_t y) const noexcept {
    return field_.mul(a_inv_, y ^ b_);
}

FourwiseSign::FourwiseSign(unsigned k, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                           std::uint32_t c3)
    : field_(k), c_{c0, c1, c2, c3} {
    for (std::uint32_t c : c_) {
        require(c < field_.size(), ErrorCode::InvalidArgument,
                "FourwiseSign: coefficient outside GF(2^k)");
    }
}

FourwiseSign FourwiseSign::from_index(unsigned k, std::uint64_t index) {
    require(k <= 15, ErrorCode::InvalidArgument, "FourwiseSign: index form needs k <= 15");
    require(index < family_size(k), ErrorCode::InvalidArgument, "FourwiseSign: index out of range");
    const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
    std::uint32_t c[4];
    for (int i = 0; i < 4; ++i) {
        c[i] = static_cast<std::uint32_t>((index >> (k * i)) & mask);
    }
    return FourwiseSign(k, c[0], c[1], c[2], c[3]);
}

std::uint64_t FourwiseSign::family_size(unsigned k) noexcept {
    return std::uint64_t{1} << (4 * k);
}

std::uint64_t FourwiseSign::index() const noexcept {
    std::uint64_t idx = 0;
    for (int i = 3; i >= 0; --i) {
        idx = (idx << k()) | c_[i];
    }
    return idx;
}

int FourwiseSign::operator()(std::uint32_t x) const noexcept {
    // Horner: ((c3 x + c2) x + c1) x + c0.
    std::uint32_t v = c_[3];
    v = field_.mul(v, x) ^ c_[2];
    v = field_.mul(v, x) ^ c_[1];
    v = field_.mul(v, x) ^ c_[0];
    return (v & 1u) ? -1 : 1;
}

}  // namespace lvann
