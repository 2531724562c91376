#include <nsqstab/core.hpp>
#include <nsqstab/documents.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace nsqstab;

namespace {

Matrix identity_blocks()
{
    Matrix A(2, 4);
    A << 1, 1, 0, 0,
         0, 0, 1, 1;
    return A;
}

}  // namespace

TEST(Core, LoadGainWellFormed)
{
    const PartitionedGain g = load_gain(R"({"m":2,"n":4,"partition":[2,2],"A":[1,1,0,0,0,0,1,1]})");
    EXPECT_EQ(g.rows(), 2);
    EXPECT_EQ(g.cols(), 4);
    EXPECT_EQ(g.entries(), identity_blocks());
}

TEST(Core, LoadGainThreeBlocks)
{
    std::string a = "[";
    for (int i = 0; i < 24; ++i) a += std::to_string(i) + (i < 23 ? "," : "]");
    const PartitionedGain g = load_gain(R"({"m":3,"n":8,"partition":[3,2,3],"A":)" + a + "}");
    EXPECT_EQ(g.rows(), 3);
    EXPECT_EQ(g.cols(), 8);
    EXPECT_EQ(g.partition().sizes(), (std::vector<int>{3, 2, 3}));
    EXPECT_EQ(g.entries()(1, 0), 8.0);
}

TEST(Core, LoadGainRejectsPartitionSumMismatch)
{
    try {
        load_gain(R"({"m":2,"n":4,"partition":[2,3],"A":[1,1,0,0,0,0,1,1]})");
        FAIL() << "expected dimension mismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(Core, LoadGainErrorKinds)
{
    auto kind_of = [](const std::string& text) {
        try {
            load_gain(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Precondition;
    };
    EXPECT_EQ(kind_of("{not json"), ErrorKind::Malformed);
    EXPECT_EQ(kind_of(R"({"m":2,"n":4,"A":[1,1,0,0,0,0,1,1]})"), ErrorKind::Malformed);
    EXPECT_EQ(kind_of(R"({"m":2,"n":4,"partition":[4,0],"A":[1,1,0,0,0,0,1,1]})"), ErrorKind::NonPositivePartition);
    EXPECT_EQ(kind_of(R"({"m":2,"n":4,"partition":[2,2],"A":[1,1,0]})"), ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of(R"({"m":2,"n":4,"partition":[2,2],"A":[1,1,0,0,0,0,1,"x"]})"), ErrorKind::Malformed);
}

TEST(Core, FlatIndexExamples)
{
    const Partition p({3, 2, 3});
    // one-based (2,1) -> 4, (1,1) -> 1, (3,3) -> 8
    EXPECT_EQ(p.flat_index(1, 0) + 1, 4);
    EXPECT_EQ(p.flat_index(0, 0) + 1, 1);
    EXPECT_EQ(p.flat_index(2, 2) + 1, 8);
    EXPECT_THROW(p.flat_index(3, 0), Error);
    EXPECT_THROW(p.flat_index(1, 2), Error);
    EXPECT_THROW(p.block_offset(8), Error);
}

TEST(Core, FlatIndexInverseIsIdentity)
{
    oracle::Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> sizes(static_cast<std::size_t>(rng.integer(1, 5)));
        for (int& s : sizes) s = rng.integer(1, 4);
        const Partition p(sizes);
        for (int i = 0; i < p.blocks(); ++i)
            for (int j = 0; j < p.size(i); ++j) EXPECT_EQ(p.block_offset(p.flat_index(i, j)), std::make_pair(i, j));
        for (int c = 0; c < p.columns(); ++c) {
            const auto [i, j] = p.block_offset(c);
            EXPECT_EQ(p.flat_index(i, j), c);
        }
    }
}

TEST(Core, ApplyScalingExamples)
{
    const PartitionedGain A(identity_blocks(), Partition({2, 2}));
    const MixingMatrix K = MixingMatrix::ones(A.partition());

    const ScaledProduct full = apply_scaling(A, ScalingDiagonal::identity(A.partition()), K);
    EXPECT_EQ(full.matrix, (Matrix(2, 2) << 2, 0, 0, 2).finished());
    EXPECT_TRUE(full.active.all_active(A.partition()));

    const ScaledProduct one_off = apply_scaling(A, ScalingDiagonal(A.partition(), {{1, 0}, {1, 1}}), K);
    EXPECT_EQ(one_off.matrix, (Matrix(2, 2) << 1, 0, 0, 2).finished());
    EXPECT_EQ(one_off.active.blocks, (std::vector<int>{0, 1}));
    EXPECT_EQ(one_off.active.columns[0], (std::vector<int>{0}));

    const ScaledProduct reduced = apply_scaling(A, ScalingDiagonal(A.partition(), {{0, 0}, {1, 1}}), K);
    ASSERT_EQ(reduced.matrix.rows(), 1);
    EXPECT_EQ(reduced.matrix(0, 0), 2.0);
    EXPECT_EQ(reduced.active.blocks, (std::vector<int>{1}));
}

TEST(Core, InactivityFollowsProductNotEpsilon)
{
    const PartitionedGain A(identity_blocks(), Partition({2, 2}));
    // eps nonzero but k zero on block 0 -> block 0 inactive
    const MixingMatrix K(A.partition(), {{0, 0}, {1, 1}});
    const ScaledProduct r = apply_scaling(A, ScalingDiagonal::identity(A.partition()), K);
    EXPECT_EQ(r.active.blocks, (std::vector<int>{1}));
    // round-off sized products count as zero
    const ScaledProduct tiny = apply_scaling(A, ScalingDiagonal(A.partition(), {{1e-16, 1e-16}, {1, 1}}), MixingMatrix::ones(A.partition()));
    EXPECT_EQ(tiny.active.blocks, (std::vector<int>{1}));
}

TEST(Core, ApplyScalingRejectsPartitionMismatch)
{
    const PartitionedGain A(identity_blocks(), Partition({2, 2}));
    const Partition other({1, 3});
    EXPECT_THROW(apply_scaling(A, ScalingDiagonal::identity(other), MixingMatrix::ones(A.partition())), Error);
}

TEST(Core, NegativeGainsRejected)
{
    const Partition p({2, 1});
    EXPECT_THROW(MixingMatrix(p, {{1, -1}, {1}}), Error);
    EXPECT_THROW(ScalingDiagonal(p, {{1, 1}}), Error);
}

TEST(Core, IdentityScalingEqualsBlockColumnSums)
{
    oracle::Rng rng(11);
    const Partition p({3, 1, 2});
    const PartitionedGain A(rng.normal_matrix(3, 6), p);
    const Matrix got = apply_scaling(A, ScalingDiagonal::identity(p), MixingMatrix::ones(p)).matrix;
    // naive triple product with materialized E and K
    const Matrix E = Matrix::Identity(6, 6);
    Matrix K = Matrix::Zero(6, 3);
    K(0, 0) = K(1, 0) = K(2, 0) = 1;
    K(3, 1) = 1;
    K(4, 2) = K(5, 2) = 1;
    EXPECT_LT((got - A.entries() * E * K).norm(), 1e-14);
}

TEST(Core, PositiveScalingMatchesDenseProduct)
{
    oracle::Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const Partition p({rng.integer(1, 3), rng.integer(1, 3), rng.integer(1, 3)});
        const PartitionedGain A(rng.normal_matrix(3, p.columns()), p);
        Vector eps(p.columns()), gains(p.columns());
        for (int c = 0; c < p.columns(); ++c) {
            eps(c) = rng.log_uniform(1e-3, 1e3);
            gains(c) = rng.uniform(0.1, 5.0);
        }
        const ScalingDiagonal E = ScalingDiagonal::from_flat(p, eps);
        const MixingMatrix K(p, BlockValues::from_flat(p, gains).values());
        const Matrix got = apply_scaling(A, E, K).matrix;
        const Matrix dense = A.entries() * E.dense() * K.dense();
        for (Eigen::Index r = 0; r < 3; ++r)
            for (Eigen::Index c = 0; c < 3; ++c)
                EXPECT_NEAR(got(r, c), dense(r, c), 1e-12 * std::max(1.0, std::abs(dense(r, c))));
    }
}
