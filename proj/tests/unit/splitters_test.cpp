#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lvann/core/rng.hpp"
#include "lvann/error.hpp"
#include "lvann/splitters/splitters.hpp"

namespace {

using namespace lvann;

RealVector random_unit(std::size_t d, RngStream& rng) {
    std::vector<double> v(d);
    for (double& x : v) {
        x = rng.normal();
    }
    const RealVector r(v);
    return r.scaled(1.0 / r.norm());
}

TEST(Halving, IdentitySpecExamples) {
    const HalvingSpec id = HalvingSpec::identity(2);
    const RealVector e1{1.0, 0.0, 0.0, 0.0};
    const RealVector h = halving_apply(id, e1);
    EXPECT_NEAR(h[0], 1 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(h[1], 0.0);
    const RealVector x{1.0, 1.0, 0.0, 0.0};
    const RealVector hx = halving_apply(id, x);
    EXPECT_NEAR(hx[0], std::sqrt(2.0), 1e-15);
    EXPECT_EQ(hx[1], 0.0);
    const RealVector cx = complement_apply(id, x);
    EXPECT_EQ(cx[0], 0.0);
    EXPECT_EQ(cx[1], 0.0);
}

TEST(Halving, EveryFullSpecIsAnOrthogonalSplit) {
    const unsigned k = 3;
    RngStream rng(1, "halving");
    const RealVector x = random_unit(8, rng);
    const std::uint64_t perms = PairwisePerm::family_size(k);
    const std::uint64_t signs = FourwiseSign::family_size(k);
    for (std::uint64_t i = 0; i < perms; ++i) {
        for (std::uint64_t j = 0; j < signs; j += 97) {
            const HalvingSpec spec(PairwisePerm::from_index(k, i), FourwiseSign::from_index(k, j));
            Eigen::MatrixXd full(8, 8);
            full << spec.halving_matrix(), spec.complement_matrix();
            ASSERT_LT((full * full.transpose() - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
            const Eigen::MatrixXd h = spec.halving_matrix();
            for (int r = 0; r < 4; ++r) {
                int nz = 0;
                for (int c = 0; c < 8; ++c) {
                    if (h(r, c) != 0) {
                        ++nz;
                        EXPECT_NEAR(std::abs(h(r, c)), 1 / std::sqrt(2.0), 1e-15);
                    }
                }
                EXPECT_EQ(nz, 2);
            }
            for (int c = 0; c < 8; ++c) {
                EXPECT_EQ((h.col(c).array() != 0).count(), 1);
            }
            const double energy = halving_apply(spec, x).squared_norm() + complement_apply(spec, x).squared_norm();
            EXPECT_NEAR(energy, 1.0, 1e-12);
            const RealVector e = RealVector::basis(8, i % 8);
            const RealVector c = complement_apply(spec, e);
            EXPECT_NEAR(c.norm(), 1 / std::sqrt(2.0), 1e-15);
        }
    }
}

Eigen::MatrixXd node_matrix(const HalvingSpec& spec, bool complement) {
    return complement ? spec.complement_matrix() : spec.halving_matrix();
}

TEST(Tree, LeavesMatchDenseProducts) {
    RngStream rng(2, "tree");
    const ProjCollection col = ProjCollection::subsampled(64, 8, 5, 9);
    ASSERT_EQ(col.levels(), 3u);
    for (std::uint64_t t = 0; t < 20; ++t) {
        const SplitterTree tree = col.tree_at(rng.uniform_below(col.tree_count()));
        const RealVector x = random_unit(64, rng);
        const auto leaves = tree_apply(tree, x);
        ASSERT_EQ(leaves.size(), 8u);
        Eigen::VectorXd ex = Eigen::Map<const Eigen::VectorXd>(x.coords().data(), 64);
        for (std::size_t s = 0; s < 8; ++s) {
            Eigen::MatrixXd path = Eigen::MatrixXd::Identity(64, 64);
            for (unsigned depth = 0; depth < 3; ++depth) {
                const std::size_t p = s >> (3 - depth);
                const bool bit = ((s >> (2 - depth)) & 1) != 0;
                const HalvingSpec& spec = tree.nodes()[(std::size_t{1} << depth) - 1 + p];
                path = node_matrix(spec, bit) * path;
            }
            const Eigen::VectorXd expect = path * ex;
            for (std::size_t i = 0; i < 8; ++i) {
                EXPECT_NEAR(leaves[s][i], expect(i), 1e-12);
            }
        }
        const Eigen::MatrixXd D = tree.dense();
        EXPECT_LT((D * D.transpose() - Eigen::MatrixXd::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Tree, CoordinateVectorHalvesExactly) {
    const ProjCollection col = ProjCollection::subsampled(64, 4, 3, 2);
    for (std::uint64_t t = 0; t < 10; ++t) {
        const SplitterTree tree = col.tree_at(t * 101 % col.tree_count());
        for (std::size_t a : {0u, 17u, 63u}) {
            for (const RealVector& leaf : tree_apply(tree, RealVector::basis(64, a))) {
                EXPECT_NEAR(leaf.squared_norm(), 1.0 / 16.0, 1e-15);
            }
        }
        for (const RealVector& leaf : tree_apply(tree, RealVector(64))) {
            EXPECT_EQ(leaf.norm(), 0.0);
        }
    }
}

TEST(Collection, EnumerationCounts) {
    EXPECT_EQ(ProjCollection::subsampled(8, 4, 4, 1).tree_count(), 4u);
    EXPECT_EQ(ProjCollection::subsampled(16, 4, 3, 1).tree_count(), 27u);
    EXPECT_EQ(ProjCollection::full(8, 4).tree_count(), 229376u);
    EXPECT_THROW(ProjCollection::full(64, 4).tree_count(), Error);
    const ProjCollection col = ProjCollection::subsampled(16, 4, 3, 1);
    auto it = enumerate_trees(col);  // holds a reference to col
    std::uint64_t n = 0;
    while (it.next()) {
        ++n;
    }
    EXPECT_EQ(n, 27u);
}

TEST(Collection, IndexRoundTrip) {
    const ProjCollection col = ProjCollection::subsampled(32, 4, 3, 4);
    for (std::uint64_t i = 0; i < col.tree_count(); i += 13) {
        const SplitterTree t = col.tree_at(i);
        std::vector<std::uint64_t> choices;
        for (std::size_t node = 0; node < col.num_nodes(); ++node) {
            for (std::uint64_t c = 0; c < col.candidates_at(node); ++c) {
                if (col.candidate(node, c) == t.nodes()[node]) {
                    choices.push_back(c);
                    break;
                }
            }
        }
        ASSERT_EQ(choices.size(), col.num_nodes());
        EXPECT_EQ(col.index_of(choices), i);
    }
}

TEST(FindSplitting, CoordinateVectorHasZeroDistortion) {
    const ProjCollection col = ProjCollection::subsampled(256, 64, 8, 3);
    const SplitResult r = find_splitting(col, RealVector::basis(256, 5));
    EXPECT_EQ(r.candidates_tried, col.num_nodes());  // first candidate everywhere
    EXPECT_NEAR(leaf_distortion(r.tree, RealVector::basis(256, 5)), 0.0, 1e-14);
}

TEST(FindSplitting, FullModeSeparatesAdjacentMass) {
    // A tolerance of zero forces a spec that puts e_1 and e_2 in different rows.
    const ProjCollection col = ProjCollection::full(8, 4, {1e-12});
    const RealVector x = (RealVector::basis(8, 0) + RealVector::basis(8, 1)).scaled(1 / std::sqrt(2.0));
    const SplitResult r = find_splitting(col, x);
    EXPECT_NEAR(leaf_distortion(r.tree, x), 0.0, 1e-12);
    const HalvingSpec& spec = r.tree.nodes()[0];
    EXPECT_NE(spec.perm()(0) / 2, spec.perm()(1) / 2);
    // Exhaustive oracle: the returned index is the first zero-distortion tree.
    ASSERT_TRUE(r.index.has_value());
    std::uint64_t first = col.tree_count();
    for (std::uint64_t i = 0; i < col.tree_count(); ++i) {
        if (leaf_distortion(col.tree_at(i), x) <= 1e-12) {
            first = i;
            break;
        }
    }
    EXPECT_EQ(*r.index, first);
}

TEST(FindSplitting, SubsampledMayReportNotFound) {
    // A near-zero tolerance is unreachable for a generic vector.
    const ProjCollection col = ProjCollection::subsampled(16, 8, 1, 0, {1e-12});
    RngStream rng(3, "nf");
    EXPECT_THROW(
        {
            try {
                find_splitting(col, random_unit(16, rng));
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::NotFound);
                throw;
            }
        },
        Error);
}

TEST(FindSplitting, CertificateHoldsOnEveryReturnedTree) {
    RngStream rng(4, "cert");
    const ProjCollection sub = ProjCollection::subsampled(256, 64, 8, 11);
    const ProjCollection full = ProjCollection::full(256, 128);
    for (int rep = 0; rep < 200; ++rep) {
        const RealVector x = random_unit(256, rng);
        for (const ProjCollection* col : {&sub, &full}) {
            const SplitResult r = find_splitting(*col, x);
            EXPECT_LE(leaf_distortion(r.tree, x), col->cumulative_eps() + 1e-12);
        }
    }
}

TEST(CountSketch, FailureFractionIsSmall) {
    const unsigned k = 6;  // d = 64, d' = 32
    const double eps = 4.0 / std::sqrt(32.0);
    const RealVector x = (RealVector::basis(64, 0) + RealVector::basis(64, 1)).scaled(1 / std::sqrt(2.0));
    RngStream rng(5, "countsketch");
    const int draws = 4000;
    int failures = 0;
    for (int i = 0; i < draws; ++i) {
        const HalvingSpec spec(PairwisePerm::from_index(k, rng.uniform_below(PairwisePerm::family_size(k))),
                               FourwiseSign::from_index(k, rng.uniform_below(FourwiseSign::family_size(k))));
        const double h = std::sqrt(2.0) * halving_apply(spec, x).norm();
        const double c = std::sqrt(2.0) * complement_apply(spec, x).norm();
        failures += (std::abs(h - 1) > eps || std::abs(c - 1) > eps) ? 1 : 0;
    }
    EXPECT_LT(static_cast<double>(failures) / draws, 0.25);
}

}  // namespace
