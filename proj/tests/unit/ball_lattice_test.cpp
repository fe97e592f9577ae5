#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "lvann/ball/ball_lattice.hpp"
#include "lvann/core/special.hpp"
#include "lvann/error.hpp"

namespace {

using namespace lvann;

BallLatticeParams params(std::size_t b, double w, double delta, std::size_t N) {
    BallLatticeParams p;
    p.b = b;
    p.w = w;
    p.delta = delta;
    p.N = N;
    return p;
}

TEST(BallParams, SuccessBoundOneDimensional) {
    const auto p = params(1, 2.0, 0.1, 1);
    EXPECT_NEAR(shrunk_radius(p), 1.95, 1e-15);
    // 1-D caps are intervals: I_1(u) = (1 - u) / 2.
    const double xi = 1.1 / 3.9;
    const double expect = (1.95 / 6.0) * 2.0 * 2.0 * (1 - xi) / 2.0;
    EXPECT_NEAR(success_prob_lower_bound(p), expect, 1e-12);
    EXPECT_NEAR(success_prob_lower_bound(p), 0.46667, 5e-6);
}

TEST(BallParams, SuccessBoundClampsToZero) {
    // 1 + delta > 2 w' puts xi past 1.
    EXPECT_EQ(success_prob_lower_bound(params(1, 0.6, 0.1, 1)), 0.0);
}

TEST(BallParams, SuccessBoundMatchesSampledPair) {
    const auto p = params(2, 2.0, 0.05, 1);
    const double wp = shrunk_radius(p);
    const double t = 1.0 + p.delta * std::sqrt(2.0);
    RngStream rng(1, "plb");
    const int n = 400000;
    int hits = 0;
    const double period = 3.0 * p.w;
    for (int i = 0; i < n; ++i) {
        const double ox = rng.uniform() * period;
        const double oy = rng.uniform() * period;
        // Nearest centre to the first point (0, 0) and to (t, 0).
        const auto nearest = [&](double x, double o) { return o + period * std::round((x - o) / period); };
        const double cx = nearest(0.0, ox);
        const double cy = nearest(0.0, oy);
        const bool first = cx * cx + cy * cy <= wp * wp;
        const bool second = (t - cx) * (t - cx) + cy * cy <= wp * wp;
        hits += first && second ? 1 : 0;
    }
    const double plb = success_prob_lower_bound(p);
    EXPECT_NEAR(static_cast<double>(hits) / n, plb, 3 * std::sqrt(plb * (1 - plb) / n));
}

TEST(BallParams, RequiredOffsets) {
    EXPECT_EQ(required_offsets(1, 2.0, 0.1, 0.5), 21u);
    EXPECT_EQ(required_offsets(1, std::numbers::e / 6.0, 1.0, 1.0), 3u);
    const double lead1 = 2.0 * std::log(60.0);
    EXPECT_NEAR(static_cast<double>(required_offsets(2, 1.0, 0.1, 1e-3)),
                std::ceil((2 * lead1 + std::log(2.0)) / 1e-3), 1.0);
    EXPECT_THROW(required_offsets(1, 2.0, 0.1, 0.0), Error);
}

TEST(BallParams, RejectsNonPositiveShrunkRadius) {
    EXPECT_THROW(validate(params(4, 0.5, 1.0, 1)), Error);
    EXPECT_THROW(make_ball_params(8, 0.5), Error);  // ball too small for a unit pair
}

TEST(BallParams, CollisionBound) {
    const auto p = params(2, 1.0, 0.5, 1);
    EXPECT_NEAR(collision_prob_upper_bound(p, 1.0), std::numbers::pi / 9.0 * std::exp(-0.25), 1e-15);
    // The quoted 0.271871 agrees with the closed form to four figures.
    EXPECT_NEAR(collision_prob_upper_bound(p, 1.0), 0.271871, 5e-5);
    EXPECT_NEAR(collision_prob_upper_bound(p, 0.0), unit_ball_volume(2) / 9.0, 1e-15);
}

TEST(BallParams, CollisionRateMatchesLens) {
    const double lens = (2 * std::numbers::pi / 3 - std::sqrt(3.0) / 2) / 9.0;
    EXPECT_NEAR(lens, 0.136489, 5e-6);
    const auto p = params(2, 1.0, 0.5, 1);
    RngStream rng(2, "lens");
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const std::vector<double> off{rng.uniform() * 3.0, rng.uniform() * 3.0};
        const BallLatticeFamily fam(p, off);
        const double a[2] = {0.0, 0.0};
        const double b[2] = {1.0, 0.0};
        const auto da = decode(fam, a);
        const auto db = decode(fam, b);
        hits += (!da.empty() && !db.empty() && da[0] == db[0]) ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(hits) / n, lens, 3 * std::sqrt(lens * (1 - lens) / n));
    EXPECT_LE(lens, collision_prob_upper_bound(p, 1.0));
}

TEST(BallDecode, OneDimensionalExamples) {
    const BallLatticeFamily fam(params(1, 1.0, 0.5, 1), {0.5});
    const double in[1] = {1.2};
    const auto ids = decode(fam, in);
    ASSERT_EQ(ids.size(), 1u);
    EXPECT_EQ(ids[0].offset, 0u);
    EXPECT_EQ(ids[0].cell, std::vector<std::int32_t>{0});
    const double out[1] = {1.8};
    EXPECT_TRUE(decode(fam, out).empty());
    const double next[1] = {3.6};
    ASSERT_EQ(decode(fam, next).size(), 1u);
    EXPECT_EQ(decode(fam, next)[0].cell, std::vector<std::int32_t>{1});
}

TEST(BallDecode, MatchesBruteForceOverNearbyCentres) {
    const auto p = make_ball_params(3, 2.0);
    RngStream rng(3, "decode");
    const BallLatticeFamily fam = sample_unverified_family(p, rng);
    const double period = 3.0 * p.w;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(3);
        for (double& v : x) {
            v = rng.uniform(-40, 40);
        }
        std::set<BallFilterId> expect;
        for (std::size_t j = 0; j < fam.size(); ++j) {
            const auto off = fam.offset(j);
            std::int32_t base[3];
            for (int a = 0; a < 3; ++a) {
                base[a] = static_cast<std::int32_t>(std::floor((x[a] - off[a]) / period));
            }
            for (int i0 = -2; i0 <= 2; ++i0) {
                for (int i1 = -2; i1 <= 2; ++i1) {
                    for (int i2 = -2; i2 <= 2; ++i2) {
                        const std::int32_t cell[3] = {base[0] + i0, base[1] + i1, base[2] + i2};
                        double s = 0;
                        for (int a = 0; a < 3; ++a) {
                            const double dv = x[a] - (off[a] + period * cell[a]);
                            s += dv * dv;
                        }
                        if (s <= p.w * p.w) {
                            expect.insert(BallFilterId{static_cast<std::uint32_t>(j), {cell[0], cell[1], cell[2]}});
                        }
                    }
                }
            }
        }
        const auto got = decode(fam, x);
        EXPECT_EQ(std::set<BallFilterId>(got.begin(), got.end()), expect);
        EXPECT_EQ(got.size(), expect.size());
    }
}

TEST(BallDecode, TranslationByPeriodShiftsCells) {
    const auto p = make_ball_params(2, 2.0);
    RngStream rng(4, "shift");
    const BallLatticeFamily fam = sample_unverified_family(p, rng);
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> x{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        std::vector<double> y = x;
        y[1] += 3.0 * p.w;
        auto a = decode(fam, x);
        const auto b = decode(fam, y);
        for (auto& id : a) {
            id.cell[1] += 1;
        }
        EXPECT_EQ(a, b);
    }
}

TEST(BallDecode, BallsOfOneOffsetAreDisjoint) {
    const auto p = make_ball_params(2, 2.0);
    RngStream rng(5, "disjoint");
    const BallLatticeFamily fam = sample_unverified_family(p, rng);
    for (int rep = 0; rep < 2000; ++rep) {
        const std::vector<double> x{rng.uniform(-10, 10), rng.uniform(-10, 10)};
        std::set<std::uint32_t> offsets;
        for (const auto& id : decode(fam, x)) {
            EXPECT_TRUE(offsets.insert(id.offset).second);
        }
    }
}

TEST(BallVerify, SingleOffsetFailsOnStraddlingPair) {
    const BallLatticeFamily fam(params(1, 10.0, 1.0, 1), {0.0});
    const VerifyReport rep = verify_family_report(fam);
    EXPECT_FALSE(rep.ok);
    ASSERT_TRUE(rep.failing.has_value());
}

TEST(BallVerify, EmptyFamilyFails) {
    const BallLatticeFamily fam(params(1, 2.0, 1.0, 0), {});
    EXPECT_FALSE(verify_family(fam));
}

TEST(BallVerify, FineGridOfShiftsPasses) {
    std::vector<double> offsets;
    for (int i = 0; i < 60; ++i) {
        offsets.push_back(0.1 * i);
    }
    const BallLatticeFamily fam(params(1, 2.0, 1.0, offsets.size()), offsets);
    EXPECT_TRUE(verify_family(fam));
}

TEST(BallSample, VerifiedAndDeterministic) {
    const auto p = make_ball_params(2, 2.0);
    RngStream r1(6, "sample");
    RngStream r2(6, "sample");
    const BallLatticeFamily a = sample_family(p, r1);
    const BallLatticeFamily b = sample_family(p, r2);
    EXPECT_TRUE(a.verified());
    EXPECT_EQ(a.offsets(), b.offsets());
    EXPECT_TRUE(verify_family(a));
    for (double v : a.offsets()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 3.0 * p.w);
    }
}

TEST(BallSample, ContinuumPairsShareABall) {
    const auto p = make_ball_params(2, 2.0);
    RngStream rng(7, "continuum");
    const BallLatticeFamily fam = sample_family(p, rng);
    for (int rep = 0; rep < 20000; ++rep) {
        const std::vector<double> x{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        const double ang = rng.uniform(0, 2 * std::numbers::pi);
        const double len = std::sqrt(rng.uniform());
        const std::vector<double> y{x[0] + len * std::cos(ang), x[1] + len * std::sin(ang)};
        const auto dx = decode(fam, x);
        const auto dy = decode(fam, y);
        std::vector<BallFilterId> shared;
        std::set_intersection(dx.begin(), dx.end(), dy.begin(), dy.end(), std::back_inserter(shared));
        ASSERT_FALSE(shared.empty()) << rep;
    }
}

TEST(BallSample, MostFirstDrawsVerify) {
    const auto p = make_ball_params(2, 2.0);
    int first = 0;
    for (int s = 0; s < 40; ++s) {
        RngStream rng(static_cast<std::uint64_t>(s), "first");
        first += sample_family(p, rng).attempts() == 1 ? 1 : 0;
    }
    // Success probability per draw is at least 1/2.
    EXPECT_GE(first, 11);
}

}  // namespace
