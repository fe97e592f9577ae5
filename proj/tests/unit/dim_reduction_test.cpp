#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lvann/core/hadamard.hpp"
#include "lvann/error.hpp"
#include "lvann/harness/harness.hpp"
#include "lvann/reduce/dim_reduction.hpp"

namespace {

using namespace lvann;

RealVector gaussian(std::size_t d, RngStream& rng) {
    std::vector<double> v(d);
    for (double& x : v) {
        x = rng.normal();
    }
    return RealVector(v);
}

TEST(Stage1, DenseMapIsOrthogonal) {
    RngStream rng(1, "s1");
    const FastJLDecomp dec = sample_stage1(16, 4, rng);
    EXPECT_EQ(dec.num_blocks(), 4u);
    const Eigen::MatrixXd M = dec.dense();
    EXPECT_LT((M * M.transpose() - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
    const FastJLDecomp whole = sample_stage1(16, 16, rng);
    const RealVector x = gaussian(16, rng);
    const auto parts = apply_decomp(whole, x);
    ASSERT_EQ(parts.size(), 1u);
    EXPECT_NEAR(parts[0].norm(), x.norm(), 1e-12);
}

TEST(Stage1, CoordinateVectorIsFlattened) {
    RngStream rng(2, "flat");
    const FastJLDecomp dec = sample_stage1(256, 32, rng);
    for (std::size_t a : {0u, 77u, 255u}) {
        for (const RealVector& blk : apply_decomp(dec, RealVector::basis(256, a))) {
            EXPECT_NEAR(blk.squared_norm(), 32.0 / 256.0, 1e-14);
        }
        EXPECT_NEAR(block_distortion(dec, RealVector::basis(256, a)), 0.0, 1e-12);
    }
}

TEST(Stage1, DistortionTailIsSmall) {
    RngStream rng(3, "tail1");
    RngStream xr(3, "x");
    const RealVector x = gaussian(1024, xr);
    const int samples = 1000;
    int bad = 0;
    int events = 0;
    for (int s = 0; s < samples; ++s) {
        RngStream r = rng.child("sample", s);
        const FastJLDecomp dec = sample_stage1(1024, 64, r);
        for (const auto& blk : reduce({x}, dec)) {
            bad += std::abs(blk[0].norm() / x.norm() - 1.0) > 0.5 ? 1 : 0;
            ++events;
        }
    }
    EXPECT_LT(static_cast<double>(bad) / events, 0.05);
}

TEST(Stage2, EnergyAndIsometry) {
    RngStream rng(4, "s2");
    const RotationDecomp dec = sample_stage2(64, 16, rng);
    const RealVector x = gaussian(64, rng);
    double energy = 0;
    for (const RealVector& p : apply_decomp(dec, x)) {
        energy += p.squared_norm();
    }
    EXPECT_NEAR(energy, x.squared_norm(), 1e-10 * x.squared_norm());
    const RotationDecomp iso = sample_stage2(8, 8, rng);
    const RealVector y = gaussian(8, rng);
    EXPECT_NEAR(apply_decomp(iso, y)[0].norm(), y.norm(), 1e-12);
}

TEST(Reduce, PigeonholeHoldsExactly) {
    RngStream rng(5, "pigeon");
    const FastJLDecomp s1 = sample_stage1(256, 16, rng);
    const RotationDecomp s2 = sample_stage2(256, 16, rng);
    for (const OrthoDecomp* dec : std::initializer_list<const OrthoDecomp*>{&s1, &s2}) {
        for (int rep = 0; rep < 300; ++rep) {
            const RealVector x = gaussian(256, rng);
            const RealVector y = x + gaussian(256, rng).scaled(rng.uniform());
            const auto rx = reduce({x, y}, *dec);
            double best = INFINITY;
            for (const auto& blk : rx) {
                best = std::min(best, distance(blk[0], blk[1]));
            }
            EXPECT_LE(best, distance(x, y) * (1 + 1e-12));
        }
        const RealVector x = gaussian(256, rng);
        for (const auto& blk : reduce({x, x}, *dec)) {
            EXPECT_EQ(distance(blk[0], blk[1]), 0.0);
        }
    }
    const RotationDecomp one = sample_stage2(32, 32, rng);
    const RealVector x = gaussian(32, rng);
    const RealVector y = gaussian(32, rng);
    const auto r = reduce({x, y}, one);
    EXPECT_NEAR(distance(r[0][0], r[0][1]), distance(x, y), 1e-12);
}

std::vector<RealVector> spread_points(std::size_t n, std::size_t d, RngStream& rng) {
    std::vector<RealVector> pts;
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back(gaussian(d, rng).scaled(3.0));
    }
    return pts;
}

TopConfig small_config() {
    TopConfig cfg;
    cfg.seed = 9;
    return cfg;
}

TEST(TopIndex, FastPathWithoutReduction) {
    RngStream rng(6, "fast");
    TopConfig cfg = small_config();
    cfg.force_m = 4;
    const auto pts = spread_points(30, 3, rng);
    const TopIndex idx = build_top_index(pts, 2.0, cfg);
    EXPECT_FALSE(idx.record().stage1);
    EXPECT_FALSE(idx.record().stage2);
    EXPECT_EQ(idx.mids().size(), 1u);
    EXPECT_EQ(idx.record().d_pad, 4u);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const TopQueryReport rep = query_top_index(idx, pts[i]);
        ASSERT_TRUE(rep.result.has_value());
        EXPECT_LE(rep.distance, 2.0);
    }
}

TEST(TopIndex, SinglePoint) {
    TopConfig cfg = small_config();
    const RealVector p{1.0, 2.0, 3.0, 4.0, 5.0};
    const TopIndex idx = build_top_index({p}, 2.0, cfg);
    EXPECT_EQ(idx.size(), 1u);
    const TopQueryReport rep = query_top_index(idx, p + RealVector{0.5, 0.0, 0.0, 0.0, 0.0});
    ASSERT_TRUE(rep.result.has_value());
    EXPECT_EQ(*rep.result, 0u);
}

// Caps are quantities, not lengths: a small file may carry a large one.
TEST(TopIndex, SmallFileWithLargeDecodeCapLoads) {
    TopConfig cfg = small_config();
    cfg.force_m = 4;
    cfg.decode_cap = std::size_t{1} << 40;
    RngStream rng(6, "cap");
    const TopIndex idx = build_top_index(spread_points(10, 3, rng), 2.0, cfg);
    const std::string bytes = save_index_bytes(idx);
    ASSERT_LT(bytes.size(), cfg.decode_cap);
    const TopIndex back = load_index_bytes(bytes);
    EXPECT_EQ(back.config().decode_cap, cfg.decode_cap);
    EXPECT_EQ(save_index_bytes(back), bytes);
}

class SmallTop : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        RngStream rng(7, "small-top");
        points_ = new std::vector<RealVector>(spread_points(300, 20, rng));
        TopConfig cfg = small_config();
        cfg.force_m_prime = 16;
        index_ = new TopIndex(build_top_index(*points_, 2.0, cfg));
    }
    static void TearDownTestSuite() {
        delete index_;
        delete points_;
    }
    static std::vector<RealVector>* points_;
    static TopIndex* index_;
};

std::vector<RealVector>* SmallTop::points_ = nullptr;
TopIndex* SmallTop::index_ = nullptr;

TEST_F(SmallTop, RecordDescribesBothStages) {
    const TopRecord& rec = index_->record();
    EXPECT_EQ(rec.d_pad, 32u);
    EXPECT_TRUE(rec.stage1);
    EXPECT_EQ(rec.m_prime, 16u);
    EXPECT_TRUE(rec.stage2);
    EXPECT_EQ(rec.terminal_blocks, (32 / 16) * (16 / rec.m));
    EXPECT_NEAR(rec.c_sub, 2.0 * 0.8 * 0.8, 1e-12);
    EXPECT_EQ(index_->mids().size(), rec.terminal_blocks);
}

TEST_F(SmallTop, EveryNearPairIsNearInSomeTerminalBlock) {
    RngStream rng(8, "one-sided");
    const std::size_t m = index_->record().m;
    for (int rep = 0; rep < 300; ++rep) {
        const RealVector& x = (*points_)[rng.uniform_below(points_->size())];
        RealVector dir = gaussian(20, rng);
        const RealVector y = x + dir.scaled(rng.uniform() / dir.norm());
        const auto rx = index_->route(x.view());
        const auto ry = index_->route(y.view());
        double best = INFINITY;
        for (std::size_t blk = 0; blk < index_->record().terminal_blocks; ++blk) {
            best = std::min(best, distance(std::span<const double>(rx.data() + blk * m, m),
                                           std::span<const double>(ry.data() + blk * m, m)));
        }
        EXPECT_LE(best, distance(x, y) * (1 + 1e-12));
    }
}

TEST_F(SmallTop, QueriesReturnStoredPointsAndAuditFalsePositives) {
    for (std::size_t i = 0; i < 50; ++i) {
        const TopQueryReport rep = query_top_index(*index_, (*points_)[i]);
        ASSERT_TRUE(rep.result.has_value());
        EXPECT_LE(distance((*points_)[*rep.result], (*points_)[i]), 2.0);
        for (std::uint32_t skipped : rep.skipped) {
            EXPECT_GT(distance((*points_)[skipped], (*points_)[i]), 2.0);
        }
    }
    RealVector far(std::vector<double>(20, 1000.0));
    const TopQueryReport none = query_top_index(*index_, far);
    EXPECT_FALSE(none.result.has_value());
    EXPECT_EQ(none.false_positives_per_block.size(), index_->record().terminal_blocks);
    EXPECT_EQ(none.false_positives, none.candidates);
}

TEST_F(SmallTop, SerializationRoundTripIsByteIdentical) {
    const std::string bytes = save_index_bytes(*index_);
    EXPECT_EQ(bytes.substr(0, 5), "LVANN");
    const TopIndex back = load_index_bytes(bytes);
    EXPECT_EQ(save_index_bytes(back), bytes);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(query_top_index(back, (*points_)[i]).result, query_top_index(*index_, (*points_)[i]).result);
    }
}

TEST_F(SmallTop, RebuildIsByteIdentical) {
    TopConfig cfg = small_config();
    cfg.force_m_prime = 16;
    EXPECT_EQ(save_index_bytes(build_top_index(*points_, 2.0, cfg)), save_index_bytes(*index_));
}

TEST_F(SmallTop, LoaderRejectsDamagedFiles) {
    const std::string bytes = save_index_bytes(*index_);
    const auto code_of = [](const std::string& b) {
        try {
            load_index_bytes(b);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_EQ(code_of(bad_magic), ErrorCode::MalformedHeader);
    std::string version = bytes;
    version[5] = static_cast<char>(kIndexFormatVersion + 1);
    EXPECT_EQ(code_of(version), ErrorCode::VersionMismatch);
    EXPECT_EQ(code_of(bytes.substr(0, bytes.size() / 2)), ErrorCode::MalformedHeader);
    EXPECT_EQ(code_of(bytes + "x"), ErrorCode::MalformedHeader);
    EXPECT_EQ(code_of(""), ErrorCode::MalformedHeader);
}

TEST(TopIndex, PaddingKeepsDistances) {
    RngStream rng(10, "pad");
    TopConfig cfg = small_config();
    cfg.force_m_prime = 8;
    const auto pts = spread_points(40, 12, rng);
    const TopIndex idx = build_top_index(pts, 2.0, cfg);
    EXPECT_EQ(idx.record().d_pad, 16u);
    // Routing is orthogonal up to the per-stage scales, so the summed block
    // energy equals the scaled padded distance.
    const double scale2 = static_cast<double>(idx.record().terminal_blocks);
    const auto ra = idx.route(pts[0].view());
    const auto rb = idx.route(pts[1].view());
    double e = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        e += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    }
    EXPECT_NEAR(e / scale2, distance(pts[0], pts[1]) * distance(pts[0], pts[1]), 1e-9);
}

TEST(TopIndex, InfeasibleTerminalDimension) {
    TopConfig cfg = small_config();
    cfg.b = 4;
    cfg.force_m = 2;
    RngStream rng(11, "inf");
    EXPECT_THROW(build_top_index(spread_points(10, 8, rng), 2.0, cfg), Error);
}

}  // namespace
