#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvann/core/decomp.hpp"
#include "lvann/core/real_vector.hpp"
#include "lvann/core/rng.hpp"
#include "lvann/splitters/splitters.hpp"
#include "lvann/tensor/tensor_index.hpp"

namespace lvann {

/// P H_d D with D a random sign diagonal, H_d the normalized Hadamard matrix
/// and P a uniform row permutation; blocks are consecutive rows.
class FastJLDecomp final : public OrthoDecomp {
public:
    FastJLDecomp(std::vector<double> signs, std::vector<std::uint32_t> perm, std::size_t block);

    std::size_t dim() const noexcept override { return signs_.size(); }
    std::size_t block_dim() const noexcept override { return block_; }
    void apply_stacked(std::span<const double> x, std::span<double> out) const override;

    const std::vector<double>& signs() const noexcept { return signs_; }
    const std::vector<std::uint32_t>& perm() const noexcept { return perm_; }

private:
    std::vector<double> signs_;
    std::vector<std::uint32_t> perm_;
    std::size_t block_;
};

class RotationDecomp final : public DenseDecomp {
public:
    using DenseDecomp::DenseDecomp;
};

FastJLDecomp sample_stage1(std::size_t d, std::size_t block, RngStream& rng);
RotationDecomp sample_stage2(std::size_t d, std::size_t block, RngStream& rng);

/// Subproblem datasets: entry i holds sqrt(d/d') P_i x for every point.
std::vector<std::vector<RealVector>> reduce(const std::vector<RealVector>& points,
                                            const OrthoDecomp& decomp);

// Largest |sqrt(d/d') ||P_i x|| / ||x|| - 1| over blocks.
double block_distortion(const OrthoDecomp& decomp, const RealVector& x);

struct TopConfig {
    double kappa1 = 1.0;     // stage-1 target m' = kappa1 eps_A^-2 ln^2(n d)
    double kappa2 = 0.125;   // stage-2 target m = kappa2 ln n ln ln n
    double eps_A = 0.2;      // per-stage shrink of the approximation factor
    double eps_B = 0.415;    // tensor input shrink
    std::size_t b = 1;       // ball-lattice dimension
    double w_scale = 10.0;   // multiplier on set_radius
    ProjCollection::Mode proj_mode = ProjCollection::Mode::Subsampled;
    std::size_t proj_s = 2;
    std::vector<double> proj_eps;  // empty: default schedule
    std::size_t max_resamples = 16;
    std::size_t decode_cap = std::size_t{1} << 20;
    double gamma = 0.8;  // recorded exponents of the asymptotic parameter choice
    double beta = 0.4;
    std::size_t force_m_prime = 0;  // 0: derived
    std::size_t force_m = 0;        // 0: derived
    std::uint64_t seed = 0;
};

/// Realized parameters, so every run is self-describing.
struct TopRecord {
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t d_pad = 0;
    double c = 2.0;
    std::size_t m_prime = 0;
    std::size_t m = 0;
    bool stage1 = false;
    bool stage2 = false;
    double c_prime = 0;  // after stage 1
    double c_sub = 0;    // factor used by the mid indexes
    double w = 0;
    double delta = 0;
    std::size_t N = 0;
    unsigned levels = 0;
    std::size_t trees = 0;
    std::size_t terminal_blocks = 0;
    bool strict = false;  // Las Vegas contract is unconditional

    std::string describe(const TopConfig& cfg) const;
};

class TopIndex {
public:
    TopIndex() = default;
    TopIndex(TopConfig config, TopRecord record, std::optional<FastJLDecomp> stage1,
             std::vector<RotationDecomp> stage2, std::vector<MidIndex> mids, std::vector<double> points);

    const TopConfig& config() const noexcept { return config_; }
    const TopRecord& record() const noexcept { return record_; }
    const std::optional<FastJLDecomp>& stage1() const noexcept { return stage1_; }
    const std::vector<RotationDecomp>& stage2() const noexcept { return stage2_; }
    const std::vector<MidIndex>& mids() const noexcept { return mids_; }
    const std::vector<double>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return record_.n; }
    std::size_t dim() const noexcept { return record_.d; }
    std::span<const double> point(std::size_t i) const noexcept {
        return {points_.data() + i * record_.d, record_.d};
    }

    // Terminal subproblem vectors of x (original dimension), block-major.
    std::vector<double> route(std::span<const double> x) const;

private:
    TopConfig config_;
    TopRecord record_;
    std::optional<FastJLDecomp> stage1_;
    std::vector<RotationDecomp> stage2_;  // one per stage-1 block, empty if skipped
    std::vector<MidIndex> mids_;          // (stage-1 block, stage-2 block), row-major
    std::vector<double> points_;          // n x d originals
};

TopIndex build_top_index(const std::vector<RealVector>& points, double c, const TopConfig& config);

struct TopQueryReport {
    std::optional<std::uint32_t> result;
    double distance = 0;
    std::uint64_t ids = 0;
    std::uint64_t buckets = 0;
    std::uint64_t candidates = 0;
    std::uint64_t false_positives = 0;
    std::vector<std::uint64_t> false_positives_per_block;
    std::vector<std::uint32_t> skipped;  // audit trail of false positives (ids)
    bool strict = false;
};

TopQueryReport query_top_index(const TopIndex& index, const RealVector& q);

// Binary index file; see docs/index_format.md.
std::string save_index_bytes(const TopIndex& index);
TopIndex load_index_bytes(std::string_view bytes);
void save_index(const TopIndex& index, const std::string& path);
TopIndex load_index(const std::string& path);

constexpr std::uint32_t kIndexFormatVersion = 1;

}  // namespace lvann
