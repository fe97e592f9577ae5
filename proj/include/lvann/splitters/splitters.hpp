#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lvann/core/gf2k.hpp"
#include "lvann/core/real_vector.hpp"

namespace lvann {

/// Signed, column-permuted halving matrix on R^{2^k} and its kernel
/// complement. Row r pairs coordinates i = h^{-1}(2r) and j = h^{-1}(2r+1):
///   halving:    y_r = (sigma(i) x_i + sigma(j) x_j) / sqrt(2)
///   complement: y_r = (sigma(i) x_i - sigma(j) x_j) / sqrt(2)
class HalvingSpec {
public:
    HalvingSpec(PairwisePerm h, FourwiseSign sigma);

    static HalvingSpec identity(unsigned k);

    std::size_t input_dim() const noexcept { return first_.size() * 2; }
    std::size_t output_dim() const noexcept { return first_.size(); }
    const PairwisePerm& perm() const noexcept { return h_; }
    const FourwiseSign& sign() const noexcept { return sigma_; }

    void apply(std::span<const double> x, std::span<double> out) const;
    void complement(std::span<const double> x, std::span<double> out) const;

    // (d/2) x d matrices.
    Eigen::MatrixXd halving_matrix() const;
    Eigen::MatrixXd complement_matrix() const;

    bool operator==(const HalvingSpec& o) const noexcept { return h_ == o.h_ && sigma_ == o.sigma_; }

private:
    PairwisePerm h_;
    FourwiseSign sigma_;
    std::vector<std::uint32_t> first_;
    std::vector<std::uint32_t> second_;
    std::vector<double> sfirst_;
    std::vector<double> ssecond_;
};

RealVector halving_apply(const HalvingSpec& spec, const RealVector& x);
RealVector complement_apply(const HalvingSpec& spec, const RealVector& x);

/// Binary tree of halving specs splitting R^m into 2^l copies of R^b.
/// Internal nodes are in heap order (root 0, children 2k+1 / 2k+2); the spec
/// at a node produces its "0" child and the complement its "1" child. Leaves
/// are ordered by their bit string, first level most significant.
class SplitterTree {
public:
    SplitterTree(std::size_t m, std::size_t b, std::vector<HalvingSpec> nodes);

    static SplitterTree trivial(std::size_t m);  // m == b, no internal nodes

    std::size_t m() const noexcept { return m_; }
    std::size_t b() const noexcept { return b_; }
    unsigned levels() const noexcept { return levels_; }
    std::size_t num_leaves() const noexcept { return m_ / b_; }
    const std::vector<HalvingSpec>& nodes() const noexcept { return nodes_; }

    // out has m entries; leaf s occupies [s*b, (s+1)*b).
    void apply_into(std::span<const double> x, std::span<double> out) const;

    Eigen::MatrixXd dense() const;  // stacked leaf maps, m x m

private:
    std::size_t m_;
    std::size_t b_;
    unsigned levels_;
    std::vector<HalvingSpec> nodes_;
};

std::vector<RealVector> tree_apply(const SplitterTree& tree, const RealVector& x);

/// Candidate halving specs per internal node, and the trees they assemble.
class ProjCollection {
public:
    enum class Mode { Full, Subsampled };

    static constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 24;

    // eps empty: eps_j = 4 / sqrt(m / 2^j) for levels j = 1..l.
    ProjCollection(std::size_t m, std::size_t b, Mode mode, std::size_t per_node = 0,
                   std::uint64_t seed = 0, std::vector<double> eps = {},
                   std::uint64_t cap = kDefaultCap);

    static ProjCollection full(std::size_t m, std::size_t b, std::vector<double> eps = {});
    static ProjCollection subsampled(std::size_t m, std::size_t b, std::size_t s, std::uint64_t seed,
                                     std::vector<double> eps = {});

    std::size_t m() const noexcept { return m_; }
    std::size_t b() const noexcept { return b_; }
    unsigned levels() const noexcept { return levels_; }
    Mode mode() const noexcept { return mode_; }
    std::size_t per_node() const noexcept { return per_node_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t cap() const noexcept { return cap_; }
    const std::vector<double>& eps() const noexcept { return eps_; }
    std::size_t num_nodes() const noexcept { return (std::size_t{1} << levels_) - 1; }

    static unsigned depth_of(std::size_t node) noexcept;

    // Number of candidates at a node (all nodes alike at a given depth).
    std::uint64_t candidates_at(std::size_t node) const;
    HalvingSpec candidate(std::size_t node, std::uint64_t c) const;

    // prod_j (1 + eps_j) - 1.
    double cumulative_eps() const;

    // Number of trees; throws Overflow above the cap.
    std::uint64_t tree_count() const;

    // Tree from per-node candidate choices; index = sum c_k * radix^k.
    SplitterTree tree_from_choices(std::span<const std::uint64_t> choices) const;
    SplitterTree tree_at(std::uint64_t index) const;
    std::uint64_t index_of(std::span<const std::uint64_t> choices) const;

private:
    std::size_t m_;
    std::size_t b_;
    unsigned levels_;
    Mode mode_;
    std::size_t per_node_;
    std::uint64_t seed_;
    std::vector<double> eps_;
    std::uint64_t cap_;
};

/// Yields every tree of a collection in index order.
class TreeEnumerator {
public:
    explicit TreeEnumerator(const ProjCollection& collection);

    std::uint64_t size() const noexcept { return count_; }
    std::optional<SplitterTree> next();

private:
    const ProjCollection* collection_;
    std::uint64_t count_;
    std::uint64_t position_ = 0;
};

TreeEnumerator enumerate_trees(const ProjCollection& collection);

struct SplitResult {
    SplitterTree tree;
    std::vector<std::uint64_t> choices;  // candidate chosen per node
    std::optional<std::uint64_t> index;  // position in enumeration order, when enumerable
    std::uint64_t candidates_tried = 0;
};

/// Greedy top-down search: at each node take the first candidate whose two
/// children both satisfy |sqrt(2) ||child|| / ||parent|| - 1| <= eps_level
/// for every input vector. Throws NotFound when a node runs out.
SplitResult find_splitting(const ProjCollection& collection, std::span<const RealVector> xs);
SplitResult find_splitting(const ProjCollection& collection, const RealVector& x);

// max over leaves of |sqrt(m/b) ||P_s x|| / ||x|| - 1|.
double leaf_distortion(const SplitterTree& tree, const RealVector& x);

}  // namespace lvann
