#pragma once

#include <cstdint>

namespace lvann {

/// Arithmetic in GF(2^k), 1 <= k <= 16, elements stored as bit polynomials.
class Gf2k {
public:
    explicit Gf2k(unsigned k);

    unsigned k() const noexcept { return k_; }
    std::uint32_t size() const noexcept { return 1u << k_; }
    std::uint32_t modulus() const noexcept { return poly_; }

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept { return a ^ b; }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept;
    std::uint32_t pow(std::uint32_t a, std::uint64_t e) const noexcept;
    std::uint32_t inv(std::uint32_t a) const;  // a != 0

    static constexpr unsigned kMaxDegree = 16;

private:
    unsigned k_;
    std::uint32_t poly_;
};

/// h(x) = a*x + b over GF(2^k), a != 0: a 2-wise independent permutation of
/// [2^k] when (a, b) is uniform.
class PairwisePerm {
public:
    PairwisePerm(unsigned k, std::uint32_t a, std::uint32_t b);

    static PairwisePerm identity(unsigned k) { return PairwisePerm(k, 1, 0); }
    // Member index i in [0, family_size(k)); a = 1 + i / 2^k, b = i % 2^k.
    static PairwisePerm from_index(unsigned k, std::uint64_t index);
    static std::uint64_t family_size(unsigned k) noexcept;

    unsigned k() const noexcept { return field_.k(); }
    std::uint32_t a() const noexcept { return a_; }
    std::uint32_t b() const noexcept { return b_; }
    std::uint64_t index() const noexcept;

    std::uint32_t operator()(std::uint32_t x) const noexcept;
    std::uint32_t inverse(std::uint32_t y) const noexcept;

    bool operator==(const PairwisePerm& o) const noexcept {
        return k() == o.k() && a_ == o.a_ && b_ == o.b_;
    }

private:
    Gf2k field_;
    std::uint32_t a_;
    std::uint32_t b_;
    std::uint32_t a_inv_;
};

/// sigma(x) = (-1)^{lowbit(c3 x^3 + c2 x^2 + c1 x + c0)} over GF(2^k): 4-wise
/// independent signs when the coefficients are uniform.
class FourwiseSign {
public:
    FourwiseSign(unsigned k, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3);

    static FourwiseSign all_plus(unsigned k) { return FourwiseSign(k, 0, 0, 0, 0); }
    // Index digits base 2^k are (c0, c1, c2, c3), c0 least significant.
    static FourwiseSign from_index(unsigned k, std::uint64_t index);
    static std::uint64_t family_size(unsigned k) noexcept;  // 2^{4k}; k <= 15

    unsigned k() const noexcept { return field_.k(); }
    std::uint32_t coeff(int i) const noexcept { return c_[i]; }
    std::uint64_t index() const noexcept;

    int operator()(std::uint32_t x) const noexcept;

    bool operator==(const FourwiseSign& o) const noexcept {
        return k() == o.k() && c_[0] == o.c_[0] && c_[1] == o.c_[1] && c_[2] == o.c_[2] &&
               c_[3] == o.c_[3];
    }

private:
    Gf2k field_;
    std::uint32_t c_[4];
};

}  // namespace lvann
