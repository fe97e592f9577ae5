#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lvann/ball/ball_lattice.hpp"
#include "lvann/core/real_vector.hpp"
#include "lvann/core/rng.hpp"
#include "lvann/splitters/splitters.hpp"

namespace lvann {

struct TensorFamilyParams {
    std::size_t m = 1;
    std::size_t b = 1;
    double eps_B = 0.2;
    BallLatticeParams ball;
    ProjCollection proj = ProjCollection::full(1, 1);
    std::size_t decode_cap = std::size_t{1} << 20;
};

void validate(const TensorFamilyParams& p);

/// True when every near pair is certified to share a tensor filter: either
/// every tree of the collection stretches no component by more than
/// 1 + eps_B (eps_B >= 2^{l/2} - 1), or the collection is fully enumerated
/// and eps_B covers its cumulative acceptance tolerance.
bool tensor_guarantee_unconditional(const TensorFamilyParams& p);

struct TensorFilterId {
    std::uint32_t tree = 0;
    std::vector<BallFilterId> parts;

    bool operator==(const TensorFilterId&) const = default;
    auto operator<=>(const TensorFilterId&) const = default;
};

// Little-endian: tree u32, then per part offset u32 and b x int32 cell.
std::string encode_key(const TensorFilterId& id);
TensorFilterId decode_key(std::string_view key, std::size_t b);

class TensorFamily {
public:
    TensorFamily() = default;
    TensorFamily(TensorFamilyParams params, std::vector<SplitterTree> trees,
                 std::vector<BallLatticeFamily> families);

    const TensorFamilyParams& params() const noexcept { return params_; }
    std::size_t num_trees() const noexcept { return trees_.size(); }
    std::size_t parts() const noexcept { return params_.m / params_.b; }
    const SplitterTree& tree(std::size_t t) const noexcept { return trees_[t]; }
    const std::vector<SplitterTree>& trees() const noexcept { return trees_; }
    const BallLatticeFamily& family(std::size_t t, std::size_t i) const noexcept {
        return families_[t * parts() + i];
    }
    const std::vector<BallLatticeFamily>& families() const noexcept { return families_; }

private:
    TensorFamilyParams params_;
    std::vector<SplitterTree> trees_;
    std::vector<BallLatticeFamily> families_;  // tree-major
};

/// One verified ball family per (tree, leaf), each from its own stream.
TensorFamily sample_tensor_family(const TensorFamilyParams& params, RngStream& rng);

struct TensorDecodeStats {
    std::uint64_t ids = 0;
    std::uint64_t empty_products = 0;  // trees whose product had an empty factor
};

/// Visits the canonical keys of decode_tensor(x) tree by tree, last part
/// varying fastest. The visitor returns false to stop early. Throws Overflow
/// when the total exceeds decode_cap.
void for_each_tensor_key(const TensorFamily& family, std::span<const double> x,
                         const std::function<bool(std::string_view)>& visit,
                         TensorDecodeStats* stats = nullptr);

std::vector<TensorFilterId> decode_tensor(const TensorFamily& family, const RealVector& x);

/// Ball radius c sqrt(m / (8 ln n)).
double set_radius(std::size_t m, std::size_t n, double c);

struct MidQueryStats {
    std::uint64_t ids = 0;
    std::uint64_t buckets = 0;          // non-empty buckets opened
    std::uint64_t candidates = 0;       // distinct points distance-checked
    std::uint64_t false_positives = 0;  // candidates failing the predicate
    std::uint64_t empty_products = 0;
};

class MidIndex {
public:
    MidIndex() = default;
    MidIndex(TensorFamily family, double c, std::size_t n, std::vector<double> points,
             std::unordered_map<std::string, std::vector<std::uint32_t>> buckets);

    const TensorFamily& family() const noexcept { return family_; }
    double c() const noexcept { return c_; }
    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return family_.params().m; }
    std::span<const double> point(std::size_t i) const noexcept {
        return {points_.data() + i * dim(), dim()};
    }
    const std::vector<double>& points() const noexcept { return points_; }
    const std::unordered_map<std::string, std::vector<std::uint32_t>>& buckets() const noexcept {
        return buckets_;
    }
    std::vector<std::string> sorted_keys() const;
    std::size_t total_entries() const noexcept;

private:
    TensorFamily family_;
    double c_ = 2.0;
    std::size_t n_ = 0;
    std::vector<double> points_;  // n x m
    std::unordered_map<std::string, std::vector<std::uint32_t>> buckets_;
};

MidIndex build_mid_index(const std::vector<RealVector>& points, TensorFamily family, double c);
MidIndex build_mid_index(const std::vector<RealVector>& points, const TensorFamilyParams& params,
                         double c, RngStream& rng);

/// Scans buckets of decode_tensor(q) and returns the first point accepted by
/// the predicate. visited (size n, zero-initialised by the caller) dedupes
/// candidates and may be shared across several indexes over the same ids.
std::optional<std::uint32_t> query_mid_index_with(const MidIndex& index, std::span<const double> q,
                                                  const std::function<bool(std::uint32_t)>& accept,
                                                  std::vector<char>& visited, MidQueryStats* stats);

/// Predicate: Euclidean distance in R^m at most c.
std::optional<std::uint32_t> query_mid_index(const MidIndex& index, const RealVector& q,
                                             MidQueryStats* stats = nullptr);

}  // namespace lvann
