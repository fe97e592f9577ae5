#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "lvann/error.hpp"
#include "lvann/tensor/tensor_index.hpp"

namespace {

using namespace lvann;

TensorFamilyParams small_params(std::size_t m, std::size_t b, double w, double eps_B, ProjCollection proj) {
    TensorFamilyParams p;
    p.m = m;
    p.b = b;
    p.eps_B = eps_B;
    p.ball = make_ball_params(b, w);
    p.proj = std::move(proj);
    return p;
}

std::vector<double> gaussian(std::size_t d, RngStream& rng, double scale = 1.0) {
    std::vector<double> v(d);
    for (double& x : v) {
        x = scale * rng.normal();
    }
    return v;
}

// Four trees over R^2 split into two lines, eps_B covering the worst stretch.
const TensorFamily& shared_family() {
    static const TensorFamily fam = [] {
        RngStream rng(1, "tensor-fixture");
        return sample_tensor_family(small_params(2, 1, 2.0, 0.415, ProjCollection::subsampled(2, 1, 4, 7)), rng);
    }();
    return fam;
}

std::set<TensorFilterId> brute_force(const TensorFamily& fam, const RealVector& x) {
    const auto& p = fam.params();
    std::set<TensorFilterId> out;
    const RealVector xs = x.scaled(1.0 / (1.0 + p.eps_B));
    for (std::size_t t = 0; t < fam.num_trees(); ++t) {
        const auto leaves = tree_apply(fam.tree(t), xs);
        std::vector<std::vector<BallFilterId>> sets;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            const RealVector y = leaves[i].scaled(std::sqrt(static_cast<double>(fam.parts())));
            sets.push_back(decode(fam.family(t, i), y.view()));
        }
        // Nested loops, spelled out for two parts.
        EXPECT_EQ(sets.size(), 2u);  // the fixture has two parts
        for (const auto& a : sets[0]) {
            for (const auto& b : sets[1]) {
                out.insert(TensorFilterId{static_cast<std::uint32_t>(t), {a, b}});
            }
        }
    }
    return out;
}

TEST(TensorKey, RoundTrip) {
    const TensorFilterId id{7, {BallFilterId{3, {-1, 2}}, BallFilterId{0, {5, -7}}}};
    const std::string key = encode_key(id);
    EXPECT_EQ(key.size(), 4u + 2 * 12u);
    EXPECT_EQ(decode_key(key, 2), id);
    EXPECT_EQ(static_cast<unsigned char>(key[0]), 7u);  // little-endian tree index
    EXPECT_THROW(decode_key(key.substr(0, 9), 2), Error);
}

TEST(TensorFamily, CountsAndDeterminism) {
    const auto p = small_params(2, 1, 2.0, 0.415, ProjCollection::subsampled(2, 1, 4, 7));
    RngStream rng(1, "tensor-fixture");
    const TensorFamily again = sample_tensor_family(p, rng);
    const TensorFamily& fam = shared_family();
    EXPECT_EQ(fam.num_trees(), 4u);
    EXPECT_EQ(fam.families().size(), 8u);
    for (std::size_t i = 0; i < fam.families().size(); ++i) {
        EXPECT_EQ(fam.families()[i].offsets(), again.families()[i].offsets());
        EXPECT_TRUE(fam.families()[i].verified());
    }
    EXPECT_TRUE(tensor_guarantee_unconditional(fam.params()));
}

TEST(TensorDecode, MatchesBruteForceProduct) {
    const TensorFamily& fam = shared_family();
    RngStream rng(2, "brute");
    for (int rep = 0; rep < 300; ++rep) {
        const RealVector x(gaussian(2, rng, 5.0));
        const auto got = decode_tensor(fam, x);
        EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
        EXPECT_EQ(std::set<TensorFilterId>(got.begin(), got.end()), brute_force(fam, x));
    }
}

TEST(TensorDecode, DegenerateSingleBlockIsBallDecode) {
    RngStream rng(3, "degenerate");
    const auto p = small_params(2, 2, 2.0, 0.0, ProjCollection::full(2, 2));
    const TensorFamily fam = sample_tensor_family(p, rng);
    ASSERT_EQ(fam.num_trees(), 1u);
    for (int rep = 0; rep < 100; ++rep) {
        const RealVector x(gaussian(2, rng, 4.0));
        const auto t = decode_tensor(fam, x);
        const auto b = decode(fam.family(0, 0), x.view());
        ASSERT_EQ(t.size(), b.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_EQ(t[i].parts[0], b[i]);
        }
    }
}

TEST(TensorDecode, OverflowIsAnError) {
    auto p = shared_family().params();
    p.decode_cap = 1;
    const TensorFamily fam(p, shared_family().trees(), shared_family().families());
    RngStream rng(4, "overflow");
    bool thrown = false;
    for (int rep = 0; rep < 200 && !thrown; ++rep) {
        try {
            decode_tensor(fam, RealVector(gaussian(2, rng)));
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::Overflow);
            thrown = true;
        }
    }
    EXPECT_TRUE(thrown);
}

TEST(TensorDecode, NearPairsShareAFilter) {
    const TensorFamily& fam = shared_family();
    RngStream rng(5, "near");
    for (int rep = 0; rep < 3000; ++rep) {
        const RealVector x(gaussian(2, rng, 10.0));
        RealVector dir(gaussian(2, rng));
        dir = dir.scaled(rng.uniform() / dir.norm());
        const RealVector y = x + dir;
        const auto a = decode_tensor(fam, x);
        const auto b = decode_tensor(fam, y);
        std::vector<TensorFilterId> shared;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
        ASSERT_FALSE(shared.empty()) << rep;
    }
}

TEST(TensorDecode, MeanSharedIdsDecayWithDistance) {
    const TensorFamily& fam = shared_family();
    RngStream rng(6, "decay");
    std::vector<double> means;
    for (double dist : {0.5, 2.0, 4.0, 8.0}) {
        double total = 0;
        const int pairs = 1500;
        for (int rep = 0; rep < pairs; ++rep) {
            const RealVector x(gaussian(2, rng, 10.0));
            RealVector dir(gaussian(2, rng));
            const RealVector y = x + dir.scaled(dist / dir.norm());
            const auto a = decode_tensor(fam, x);
            const auto b = decode_tensor(fam, y);
            std::vector<TensorFilterId> shared;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
            total += static_cast<double>(shared.size());
        }
        means.push_back(total / pairs);
    }
    for (std::size_t i = 1; i < means.size(); ++i) {
        EXPECT_LE(means[i], means[i - 1]) << i;
    }
}

TEST(SetRadius, Examples) {
    // m = 8 ln n gives w = c.
    EXPECT_NEAR(set_radius(72, static_cast<std::size_t>(std::round(std::exp(9.0))), 1.0), 1.0, 1e-4);
    EXPECT_NEAR(set_radius(72, 8103, 2.0), 2.0 * std::sqrt(72.0 / (8 * std::log(8103.0))), 1e-15);
    EXPECT_DOUBLE_EQ(set_radius(64, 1000, 4.0), 2 * set_radius(64, 1000, 2.0));
    EXPECT_THROW(set_radius(64, 1, 2.0), Error);
}

TEST(MidIndex, EmptySingleAndDuplicates) {
    const TensorFamily& fam = shared_family();
    const MidIndex empty = build_mid_index({}, fam, 2.0);
    EXPECT_EQ(empty.buckets().size(), 0u);

    const RealVector p{0.3, -1.2};
    const MidIndex one = build_mid_index({p}, fam, 2.0);
    for (const auto& id : decode_tensor(fam, p)) {
        const auto it = one.buckets().find(encode_key(id));
        ASSERT_NE(it, one.buckets().end());
        EXPECT_EQ(it->second, std::vector<std::uint32_t>{0});
    }
    EXPECT_EQ(one.total_entries(), decode_tensor(fam, p).size());
    EXPECT_EQ(query_mid_index(one, p), std::optional<std::uint32_t>(0));

    const MidIndex dup = build_mid_index({p, p}, fam, 2.0);
    for (const auto& kv : dup.buckets()) {
        EXPECT_EQ(kv.second, (std::vector<std::uint32_t>{0, 1}));
    }
}

TEST(MidIndex, BucketsAreConsistentAndSorted) {
    const TensorFamily& fam = shared_family();
    RngStream rng(7, "mid");
    std::vector<RealVector> pts;
    for (int i = 0; i < 200; ++i) {
        pts.emplace_back(gaussian(2, rng, 6.0));
    }
    const MidIndex idx = build_mid_index(pts, fam, 2.0);
    std::vector<std::vector<TensorFilterId>> ids_of;
    std::size_t entries = 0;
    for (const RealVector& p : pts) {
        ids_of.push_back(decode_tensor(fam, p));
        entries += ids_of.back().size();
    }
    EXPECT_EQ(idx.total_entries(), entries);
    for (const auto& [key, ids] : idx.buckets()) {
        EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
        const TensorFilterId id = decode_key(key, 1);
        for (std::uint32_t i : ids) {
            EXPECT_TRUE(std::binary_search(ids_of[i].begin(), ids_of[i].end(), id));
        }
    }
    // Rebuilding gives the same buckets.
    const MidIndex again = build_mid_index(pts, fam, 2.0);
    EXPECT_EQ(idx.sorted_keys(), again.sorted_keys());
    for (const auto& [key, ids] : idx.buckets()) {
        EXPECT_EQ(again.buckets().at(key), ids);
    }
}

TEST(MidIndex, QueryContract) {
    const TensorFamily& fam = shared_family();
    RngStream rng(8, "query");
    std::vector<RealVector> far;
    for (int i = 0; i < 50; ++i) {
        std::vector<double> v = gaussian(2, rng);
        v[0] += 100.0 + 10.0 * i;
        far.emplace_back(v);
    }
    const MidIndex idx = build_mid_index(far, fam, 2.0);
    MidQueryStats stats;
    EXPECT_FALSE(query_mid_index(idx, RealVector(2), &stats).has_value());
    // A near point is always found, and anything returned is within c.
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t target = rng.uniform_below(far.size());
        RealVector dir(gaussian(2, rng));
        const RealVector q = far[target] + dir.scaled(rng.uniform() / dir.norm());
        MidQueryStats s;
        const auto got = query_mid_index(idx, q, &s);
        ASSERT_TRUE(got.has_value());
        EXPECT_LE(distance(far[*got], q), 2.0);
        EXPECT_EQ(s.candidates, s.false_positives + 1);
    }
}

}  // namespace
