#include <cmath>
#include <numbers>
#include <string>

#include "lvann/core/hadamard.hpp"
#include "lvann/error.hpp"
#include "lvann/splitters/splitters.hpp"

namespace lvann {

HalvingSpec::HalvingSpec(PairwisePerm h, FourwiseSign sigma) : h_(h), sigma_(sigma) {
    require(h.k() == sigma.k(), ErrorCode::InvalidArgument,
            "HalvingSpec: permutation and sign families disagree on k");
    const std::uint32_t d = 1u << h.k();
    const std::size_t rows = d / 2;
    first_.resize(rows);
    second_.resize(rows);
    sfirst_.resize(rows);
    ssecond_.resize(rows);
    const double inv = 1.0 / std::numbers::sqrt2;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::uint32_t i = h.inverse(static_cast<std::uint32_t>(2 * r));
        const std::uint32_t j = h.inverse(static_cast<std::uint32_t>(2 * r + 1));
        first_[r] = i;
        second_[r] = j;
        sfirst_[r] = sigma(i) * inv;
        ssecond_[r] = sigma(j) * inv;
    }
}

HalvingSpec HalvingSpec::identity(unsigned k) {
    return HalvingSpec(PairwisePerm::identity(k), FourwiseSign::all_plus(k));
}

void HalvingSpec::apply(std::span<const double> x, std::span<double> out) const {
    require(x.size() == input_dim() && out.size() == output_dim(), ErrorCode::DimensionMismatch,
            "halving_apply: dimension mismatch");
    for (std::size_t r = 0; r < first_.size(); ++r) {
        out[r] = sfirst_[r] * x[first_[r]] + ssecond_[r] * x[second_[r]];
    }
}

void HalvingSpec::complement(std::span<const double> x, std::span<double> out) const {
    require(x.size() == input_dim() && out.size() == output_dim(), ErrorCode::DimensionMismatch,
            "complement_apply: dimension mismatch");
    for (std::size_t r = 0; r < first_.size(); ++r) {
        out[r] = sfirst_[r] * x[first_[r]] - ssecond_[r] * x[second_[r]];
    }
}

Eigen::MatrixXd HalvingSpec::halving_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(output_dim(), input_dim());
    for (std::size_t r = 0; r < first_.size(); ++r) {
        a(r, first_[r]) = sfirst_[r];
        a(r, second_[r]) = ssecond_[r];
    }
    return a;
}

Eigen::MatrixXd HalvingSpec::complement_matrix() const {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(output_dim(), input_dim());
    for (std::size_t r = 0; r < first_.size(); ++r) {
        a(r, first_[r]) = sfirst_[r];
        a(r, second_[r]) = -ssecond_[r];
    }
    return a;
}

RealVector halving_apply(const HalvingSpec& spec, const RealVector& x) {
    std::vector<double> out(spec.output_dim());
    spec.apply(x.view(), out);
    return RealVector(std::move(out));
}

RealVector complement_apply(const HalvingSpec& spec, const RealVector& x) {
    std::vector<double> out(spec.output_dim());
    spec.complement(x.view(), out);
    return RealVector(std::move(out));
}

SplitterTree::SplitterTree(std::size_t m, std::size_t b, std::vector<HalvingSpec> nodes)
    : m_(m), b_(b), levels_(0), nodes_(std::move(nodes)) {
    require(is_power_of_two(m) && is_power_of_two(b) && b <= m, ErrorCode::InvalidArgument,
            "SplitterTree: m and b must be powers of two with b <= m");
    levels_ = log2_exact(m / b);
    require(nodes_.size() == (std::size_t{1} << levels_) - 1, ErrorCode::InvalidArgument,
            "SplitterTree: need 2^l - 1 internal nodes");
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        unsigned depth = 0;
        for (std::size_t v = k + 1; v > 1; v >>= 1) {
            ++depth;
        }
        require(nodes_[k].input_dim() == (m >> depth), ErrorCode::InvalidArgument,
                "SplitterTree: node " + std::to_string(k) + " has the wrong input dimension");
    }
}

SplitterTree SplitterTree::trivial(std::size_t m) { return SplitterTree(m, m, {}); }

void SplitterTree::apply_into(std::span<const double> x, std::span<double> out) const {
    require(x.size() == m_ && out.size() == m_, ErrorCode::DimensionMismatch,
            "tree_apply: dimension mismatch");
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next(m_);
    std::size_t width = m_;
    for (unsigned t = 0; t < levels_; ++t) {
        const std::size_t count = std::size_t{1} << t;
        const std::size_t half = width / 2;
        for (std::size_t p = 0; p < count; ++p) {
            const HalvingSpec& spec = nodes_[count - 1 + p];
            std::span<const double> in(cur.data() + p * width, width);
            spec.apply(in, std::span<double>(next.data() + 2 * p * half, half));
            spec.complement(in, std::span<double>(next.data() + (2 * p + 1) * half, half));
        }
        cur.swap(next);
        width = half;
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

Eigen::MatrixXd SplitterTree::dense() const {
    Eigen::MatrixXd mat(m_, m_);
    std::vector<double> e(m_, 0.0);
    std::vector<double> col(m_);
    for (std::size_t j = 0; j < m_; ++j) {
        e[j] = 1.0;
        apply_into(e, col);
        for (std::size_t i = 0; i < m_; ++i) {
            mat(i, j) = col[i];
        }
        e[j] = 0.0;
    }
    return mat;
}

std::vector<RealVector> tree_apply(const SplitterTree& tree, const RealVector& x) {
    require(x.dim() == tree.m(), ErrorCode::DimensionMismatch,
            "tree_apply: vector dim " + std::to_string(x.dim()) + " != m=" + std::to_string(tree.m()));
    std::vector<double> out(tree.m());
    tree.apply_into(x.view(), out);
    std::vector<RealVector> leaves;
    const std::size_t b = tree.b();
    for (std::size_t s = 0; s < tree.num_leaves(); ++s) {
        leaves.emplace_back(std::vector<double>(out.begin() + s * b, out.begin() + (s + 1) * b));
    }
    return leaves;
}

double leaf_distortion(const SplitterTree& tree, const RealVector& x) {
    const double nx = x.norm();
    require(nx > 0.0, ErrorCode::InvalidArgument, "leaf_distortion: zero vector");
    std::vector<double> out(tree.m());
    tree.apply_into(x.view(), out);
    const double scale = std::sqrt(static_cast<double>(tree.num_leaves()));
    double worst = 0.0;
    for (std::size_t s = 0; s < tree.num_leaves(); ++s) {
        double e = 0.0;
        for (std::size_t i = 0; i < tree.b(); ++i) {
            e += out[s * tree.b() + i] * out[s * tree.b() + i];
        }
        worst = std::max(worst, std::abs(scale * std::sqrt(e) / nx - 1.0));
    }
    return worst;
}

}  // namespace lvann
