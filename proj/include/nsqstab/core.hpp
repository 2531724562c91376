#pragma once

#include <nsqstab/error.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace nsqstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered column partition p_1..p_m of n = sum(p_i) columns.
///
/// Blocks and offsets are zero-based throughout the library.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<int> sizes);

    int blocks() const { return static_cast<int>(sizes_.size()); }
    int columns() const { return total_; }
    int size(int block) const { return sizes_.at(static_cast<std::size_t>(block)); }
    const std::vector<int>& sizes() const { return sizes_; }

    /// Flat column index of (block, offset).
    int flat_index(int block, int offset) const;
    /// Inverse of flat_index: (block, offset) of a flat column.
    std::pair<int, int> block_offset(int column) const;
    /// First flat column of a block.
    int start(int block) const { return starts_.at(static_cast<std::size_t>(block)); }

    bool operator==(const Partition& other) const { return sizes_ == other.sizes_; }

private:
    std::vector<int> sizes_;
    std::vector<int> starts_;
    int total_ = 0;
};

/// Real m x n matrix whose columns are grouped into m contiguous blocks.
class PartitionedGain {
public:
    PartitionedGain(Matrix entries, Partition partition);

    const Matrix& entries() const { return entries_; }
    const Partition& partition() const { return partition_; }
    int rows() const { return static_cast<int>(entries_.rows()); }
    int cols() const { return static_cast<int>(entries_.cols()); }

    /// Column a_{block,offset}.
    auto column(int block, int offset) const { return entries_.col(partition_.flat_index(block, offset)); }

private:
    Matrix entries_;
    Partition partition_;
};

/// Ragged per-block values sharing a partition's shape (gains k_{i,j} or scalings eps_{i,j}).
class BlockValues {
public:
    BlockValues() = default;
    BlockValues(const Partition& partition, std::vector<std::vector<double>> values);

    /// Every entry equal to `value`.
    static BlockValues constant(const Partition& partition, double value);
    /// Build from a flat vector of n entries in column order.
    static BlockValues from_flat(const Partition& partition, const Vector& flat);

    const Partition& partition() const { return partition_; }
    const std::vector<std::vector<double>>& values() const { return values_; }
    double operator()(int block, int offset) const { return values_.at(static_cast<std::size_t>(block)).at(static_cast<std::size_t>(offset)); }
    Vector flat() const;
    bool strictly_positive() const;

private:
    Partition partition_;
    std::vector<std::vector<double>> values_;
};

/// Block mixing matrix K: block i carries the nonnegative row k_i = [k_{i,1}..k_{i,p_i}].
class MixingMatrix : public BlockValues {
public:
    MixingMatrix() = default;
    MixingMatrix(const Partition& partition, std::vector<std::vector<double>> gains);
    static MixingMatrix ones(const Partition& partition);

    /// Dense n x m realization (column i holds k_i on block i's rows).
    Matrix dense() const;
};

/// Nonnegative scaling diagonal E = diag(eps_{1,1}, ..., eps_{m,p_m}).
class ScalingDiagonal : public BlockValues {
public:
    ScalingDiagonal() = default;
    ScalingDiagonal(const Partition& partition, std::vector<std::vector<double>> epsilons);
    static ScalingDiagonal identity(const Partition& partition);
    static ScalingDiagonal from_flat(const Partition& partition, const Vector& flat);

    Matrix dense() const;
};

/// Blocks and columns that survive the inactive-column reduction.
struct ActiveSet {
    std::vector<int> blocks;                 // ascending active block indices
    std::vector<std::vector<int>> columns;   // per active block: active offsets

    bool all_active(const Partition& partition) const;
};

struct ScaledProduct {
    Matrix matrix;  // k x k, k = |active blocks|
    ActiveSet active;
};

/// AEK with inactive columns and blocks removed.
///
/// A column (i,j) is inactive when |eps_{i,j} k_{i,j}| <= 1e-14 * max|eps k|;
/// a block with no active column is deleted together with its output row.
ScaledProduct apply_scaling(const PartitionedGain& A, const ScalingDiagonal& E, const MixingMatrix& K);

/// Square submatrix of `m` keeping the listed rows and columns.
Matrix principal_submatrix(const Matrix& m, const std::vector<int>& indices);

void require_finite(const Matrix& m, const char* what);

}  // namespace nsqstab
