#include <cmath>
#include <sstream>
#include <string>

#include "lvann/core/hadamard.hpp"
#include "lvann/core/rng.hpp"
#include "lvann/error.hpp"
#include "lvann/splitters/splitters.hpp"

namespace lvann {

ProjCollection::ProjCollection(std::size_t m, std::size_t b, Mode mode, std::size_t per_node,
                               std::uint64_t seed, std::vector<double> eps, std::uint64_t cap)
    : m_(m), b_(b), levels_(0), mode_(mode), per_node_(per_node), seed_(seed), eps_(std::move(eps)),
      cap_(cap) {
    require(is_power_of_two(m) && is_power_of_two(b) && b <= m, ErrorCode::InvalidArgument,
            "ProjCollection: m and b must be powers of two with b <= m");
    levels_ = log2_exact(m / b);
    if (mode_ == Mode::Subsampled) {
        require(per_node_ >= 1, ErrorCode::InvalidArgument,
                "ProjCollection: subsampled mode needs s >= 1 candidates per node");
    } else {
        require(m <= 1024 || levels_ == 0, ErrorCode::InvalidArgument,
                "ProjCollection: full mode supports node dimensions up to 1024");
    }
    if (eps_.empty()) {
        for (unsigned j = 1; j <= levels_; ++j) {
            eps_.push_back(4.0 / std::sqrt(static_cast<double>(m >> j)));
        }
    }
    require(eps_.size() == levels_, ErrorCode::InvalidArgument,
            "ProjCollection: need one eps per level");
    for (double e : eps_) {
        require(e > 0.0 && std::isfinite(e), ErrorCode::InvalidArgument,
                "ProjCollection: eps must be positive");
    }
}

ProjCollection ProjCollection::full(std::size_t m, std::size_t b, std::vector<double> eps) {
    return ProjCollection(m, b, Mode::Full, 0, 0, std::move(eps));
}

ProjCollection ProjCollection::subsampled(std::size_t m, std::size_t b, std::size_t s,
                                          std::uint64_t seed, std::vector<double> eps) {
    return ProjCollection(m, b, Mode::Subsampled, s, seed, std::move(eps));
}

unsigned ProjCollection::depth_of(std::size_t node) noexcept {
    unsigned depth = 0;
    for (std::size_t v = node + 1; v > 1; v >>= 1) {
        ++depth;
    }
    return depth;
}

std::uint64_t ProjCollection::candidates_at(std::size_t node) const {
    require(node < num_nodes(), ErrorCode::InvalidArgument, "ProjCollection: node out of range");
    if (mode_ == Mode::Subsampled) {
        return per_node_;
    }
    const unsigned k = log2_exact(m_ >> depth_of(node));
    return PairwisePerm::family_size(k) * FourwiseSign::family_size(k);
}

HalvingSpec ProjCollection::candidate(std::size_t node, std::uint64_t c) const {
    require(c < candidates_at(node), ErrorCode::InvalidArgument,
            "ProjCollection: candidate index out of range");
    const unsigned k = log2_exact(m_ >> depth_of(node));
    if (mode_ == Mode::Full) {
        // Permutations vary fastest: a pairing that fails for one sign choice
        // tends to fail for all of them.
        const std::uint64_t nperm = PairwisePerm::family_size(k);
        return HalvingSpec(PairwisePerm::from_index(k, c % nperm), FourwiseSign::from_index(k, c / nperm));
    }
    RngStream rng = RngStream(seed_, "proj").child("node", node).child("candidate", c);
    const std::uint64_t q = std::uint64_t{1} << k;
    const auto a = static_cast<std::uint32_t>(1 + rng.uniform_below(q - 1));
    const auto b = static_cast<std::uint32_t>(rng.uniform_below(q));
    std::uint32_t coeff[4];
    for (auto& v : coeff) {
        v = static_cast<std::uint32_t>(rng.uniform_below(q));
    }
    return HalvingSpec(PairwisePerm(k, a, b), FourwiseSign(k, coeff[0], coeff[1], coeff[2], coeff[3]));
}

double ProjCollection::cumulative_eps() const {
    double prod = 1.0;
    for (double e : eps_) {
        prod *= 1.0 + e;
    }
    return prod - 1.0;
}

std::uint64_t ProjCollection::tree_count() const {
    unsigned __int128 count = 1;
    for (std::size_t node = 0; node < num_nodes(); ++node) {
        count *= candidates_at(node);
        if (count > cap_) {
            std::ostringstream msg;
            msg << "ProjCollection: more than " << cap_ << " trees (m=" << m_ << ", b=" << b_
                << ", levels=" << levels_ << "); use subsampled mode";
            fail(ErrorCode::Overflow, msg.str());
        }
    }
    return static_cast<std::uint64_t>(count);
}

SplitterTree ProjCollection::tree_from_choices(std::span<const std::uint64_t> choices) const {
    require(choices.size() == num_nodes(), ErrorCode::InvalidArgument,
            "ProjCollection: one choice per node required");
    std::vector<HalvingSpec> nodes;
    nodes.reserve(num_nodes());
    for (std::size_t node = 0; node < num_nodes(); ++node) {
        nodes.push_back(candidate(node, choices[node]));
    }
    return SplitterTree(m_, b_, std::move(nodes));
}

SplitterTree ProjCollection::tree_at(std::uint64_t index) const {
    require(index < tree_count(), ErrorCode::InvalidArgument, "ProjCollection: tree index out of range");
    std::vector<std::uint64_t> choices(num_nodes());
    for (std::size_t node = 0; node < num_nodes(); ++node) {
        const std::uint64_t radix = candidates_at(node);
        choices[node] = index % radix;
        index /= radix;
    }
    return tree_from_choices(choices);
}

std::uint64_t ProjCollection::index_of(std::span<const std::uint64_t> choices) const {
    tree_count();
    std::uint64_t index = 0;
    std::uint64_t weight = 1;
    for (std::size_t node = 0; node < num_nodes(); ++node) {
        index += choices[node] * weight;
        weight *= candidates_at(node);
    }
    return index;
}

TreeEnumerator::TreeEnumerator(const ProjCollection& collection)
    : collection_(&collection), count_(collection.tree_count()) {}

std::optional<SplitterTree> TreeEnumerator::next() {
    if (position_ >= count_) {
        return std::nullopt;
    }
    return collection_->tree_at(position_++);
}

TreeEnumerator enumerate_trees(const ProjCollection& collection) { return TreeEnumerator(collection); }

SplitResult find_splitting(const ProjCollection& collection, std::span<const RealVector> xs) {
    require(!xs.empty(), ErrorCode::InvalidArgument, "find_splitting: no vectors");
    const std::size_t m = collection.m();
    for (const RealVector& x : xs) {
        require(x.dim() == m, ErrorCode::DimensionMismatch, "find_splitting: vector dim != m");
    }
    const std::size_t nodes = collection.num_nodes();
    // inputs[v][node] = component of xs[v] entering the node.
    std::vector<std::vector<std::vector<double>>> inputs(xs.size(),
                                                         std::vector<std::vector<double>>(2 * nodes + 1));
    for (std::size_t v = 0; v < xs.size(); ++v) {
        inputs[v][0] = xs[v].coords();
    }
    SplitResult result{SplitterTree::trivial(collection.b()), std::vector<std::uint64_t>(nodes, 0), {}, 0};
    std::vector<HalvingSpec> chosen;
    chosen.reserve(nodes);
    for (std::size_t node = 0; node < nodes; ++node) {
        const unsigned depth = ProjCollection::depth_of(node);
        const double eps = collection.eps()[depth];
        const std::size_t half = (m >> depth) / 2;
        const std::uint64_t ncand = collection.candidates_at(node);
        std::vector<double> c0(half);
        std::vector<double> c1(half);
        bool found = false;
        for (std::uint64_t c = 0; c < ncand && !found; ++c) {
            ++result.candidates_tried;
            HalvingSpec spec = collection.candidate(node, c);
            bool ok = true;
            for (std::size_t v = 0; v < xs.size() && ok; ++v) {
                const std::vector<double>& in = inputs[v][node];
                double np = 0.0;
                for (double t : in) {
                    np += t * t;
                }
                if (np == 0.0) {
                    continue;
                }
                spec.apply(in, c0);
                spec.complement(in, c1);
                double n0 = 0.0;
                double n1 = 0.0;
                for (std::size_t i = 0; i < half; ++i) {
                    n0 += c0[i] * c0[i];
                    n1 += c1[i] * c1[i];
                }
                const double ratio = std::sqrt(2.0) / std::sqrt(np);
                ok = std::abs(ratio * std::sqrt(n0) - 1.0) <= eps &&
                     std::abs(ratio * std::sqrt(n1) - 1.0) <= eps;
            }
            if (!ok) {
                continue;
            }
            for (std::size_t v = 0; v < xs.size(); ++v) {
                const std::vector<double>& in = inputs[v][node];
                inputs[v][2 * node + 1].assign(half, 0.0);
                inputs[v][2 * node + 2].assign(half, 0.0);
                spec.apply(in, inputs[v][2 * node + 1]);
                spec.complement(in, inputs[v][2 * node + 2]);
            }
            result.choices[node] = c;
            chosen.push_back(std::move(spec));
            found = true;
        }
        if (!found) {
            std::ostringstream msg;
            msg << "find_splitting: node " << node << " (depth " << depth << ") exhausted " << ncand
                << " candidates at eps=" << eps;
            fail(ErrorCode::NotFound, msg.str());
        }
    }
    result.tree = SplitterTree(m, collection.b(), std::move(chosen));
    try {
        result.index = collection.index_of(result.choices);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Overflow) {
            throw;
        }
    }
    return result;
}

SplitResult find_splitting(const ProjCollection& collection, const RealVector& x) {
    require(x.norm() > 0.0, ErrorCode::InvalidArgument, "find_splitting: zero vector");
    return find_splitting(collection, std::span<const RealVector>(&x, 1));
}

}  // namespace lvann
