#include <nsqstab/core.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace nsqstab {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Malformed: return "malformed";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonPositivePartition: return "nonpositive-partition";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::NegativeEntry: return "negative-entry";
    case ErrorKind::NonPositiveEntry: return "nonpositive-entry";
    case ErrorKind::NonSquare: return "non-square";
    case ErrorKind::NotFinite: return "not-finite";
    case ErrorKind::NotHurwitz: return "not-hurwitz";
    case ErrorKind::MissingCertificate: return "missing-certificate";
    case ErrorKind::InactiveBlock: return "inactive-block";
    case ErrorKind::Precondition: return "precondition";
    }
    return "unknown";
}

Partition::Partition(std::vector<int> sizes) : sizes_(std::move(sizes))
{
    if (sizes_.empty()) throw Error(ErrorKind::NonPositivePartition, "partition has no blocks");
    starts_.reserve(sizes_.size());
    for (int p : sizes_) {
        if (p < 1) throw Error(ErrorKind::NonPositivePartition, "partition entry " + std::to_string(p) + " < 1");
        starts_.push_back(total_);
        total_ += p;
    }
}

int Partition::flat_index(int block, int offset) const
{
    if (block < 0 || block >= blocks()) throw Error(ErrorKind::OutOfRange, "block " + std::to_string(block));
    if (offset < 0 || offset >= size(block)) throw Error(ErrorKind::OutOfRange, "offset " + std::to_string(offset));
    return starts_[static_cast<std::size_t>(block)] + offset;
}

std::pair<int, int> Partition::block_offset(int column) const
{
    if (column < 0 || column >= total_) throw Error(ErrorKind::OutOfRange, "column " + std::to_string(column));
    auto it = std::upper_bound(starts_.begin(), starts_.end(), column);
    const int block = static_cast<int>(it - starts_.begin()) - 1;
    return {block, column - starts_[static_cast<std::size_t>(block)]};
}

void require_finite(const Matrix& m, const char* what)
{
    if (!m.allFinite()) throw Error(ErrorKind::NotFinite, std::string(what) + " has non-finite entries");
}

PartitionedGain::PartitionedGain(Matrix entries, Partition partition)
    : entries_(std::move(entries)), partition_(std::move(partition))
{
    if (partition_.blocks() == 0) throw Error(ErrorKind::NonPositivePartition, "empty partition");
    if (entries_.rows() != partition_.blocks())
        throw Error(ErrorKind::DimensionMismatch,
                    "matrix has " + std::to_string(entries_.rows()) + " rows, partition has " +
                        std::to_string(partition_.blocks()) + " blocks");
    if (entries_.cols() != partition_.columns())
        throw Error(ErrorKind::DimensionMismatch,
                    "matrix has " + std::to_string(entries_.cols()) + " columns, partition sums to " +
                        std::to_string(partition_.columns()));
    require_finite(entries_, "gain matrix");
}

BlockValues::BlockValues(const Partition& partition, std::vector<std::vector<double>> values)
    : partition_(partition), values_(std::move(values))
{
    if (static_cast<int>(values_.size()) != partition_.blocks())
        throw Error(ErrorKind::DimensionMismatch, "block count does not match partition");
    for (int i = 0; i < partition_.blocks(); ++i) {
        const auto& row = values_[static_cast<std::size_t>(i)];
        if (static_cast<int>(row.size()) != partition_.size(i))
            throw Error(ErrorKind::DimensionMismatch, "block " + std::to_string(i) + " length does not match partition");
        for (double v : row) {
            if (!std::isfinite(v)) throw Error(ErrorKind::NotFinite, "block value is not finite");
            if (v < 0.0) throw Error(ErrorKind::NegativeEntry, "block value " + std::to_string(v) + " < 0");
        }
    }
}

BlockValues BlockValues::constant(const Partition& partition, double value)
{
    std::vector<std::vector<double>> values;
    for (int p : partition.sizes()) values.emplace_back(static_cast<std::size_t>(p), value);
    return BlockValues(partition, std::move(values));
}

BlockValues BlockValues::from_flat(const Partition& partition, const Vector& flat)
{
    if (flat.size() != partition.columns()) throw Error(ErrorKind::DimensionMismatch, "flat vector length");
    std::vector<std::vector<double>> values;
    for (int i = 0; i < partition.blocks(); ++i) {
        const int start = partition.start(i);
        values.emplace_back(flat.data() + start, flat.data() + start + partition.size(i));
    }
    return BlockValues(partition, std::move(values));
}

Vector BlockValues::flat() const
{
    Vector out(partition_.columns());
    int c = 0;
    for (const auto& row : values_)
        for (double v : row) out(c++) = v;
    return out;
}

bool BlockValues::strictly_positive() const
{
    for (const auto& row : values_)
        for (double v : row)
            if (!(v > 0.0)) return false;
    return true;
}

MixingMatrix::MixingMatrix(const Partition& partition, std::vector<std::vector<double>> gains)
    : BlockValues(partition, std::move(gains))
{
}

MixingMatrix MixingMatrix::ones(const Partition& partition)
{
    return MixingMatrix(partition, BlockValues::constant(partition, 1.0).values());
}

Matrix MixingMatrix::dense() const
{
    const Partition& part = partition();
    Matrix k = Matrix::Zero(part.columns(), part.blocks());
    for (int i = 0; i < part.blocks(); ++i)
        for (int j = 0; j < part.size(i); ++j) k(part.flat_index(i, j), i) = (*this)(i, j);
    return k;
}

ScalingDiagonal::ScalingDiagonal(const Partition& partition, std::vector<std::vector<double>> epsilons)
    : BlockValues(partition, std::move(epsilons))
{
}

ScalingDiagonal ScalingDiagonal::identity(const Partition& partition)
{
    return ScalingDiagonal(partition, BlockValues::constant(partition, 1.0).values());
}

ScalingDiagonal ScalingDiagonal::from_flat(const Partition& partition, const Vector& flat)
{
    return ScalingDiagonal(partition, BlockValues::from_flat(partition, flat).values());
}

Matrix ScalingDiagonal::dense() const
{
    return flat().asDiagonal();
}

bool ActiveSet::all_active(const Partition& partition) const
{
    if (static_cast<int>(blocks.size()) != partition.blocks()) return false;
    for (std::size_t b = 0; b < blocks.size(); ++b)
        if (static_cast<int>(columns[b].size()) != partition.size(blocks[b])) return false;
    return true;
}

Matrix principal_submatrix(const Matrix& m, const std::vector<int>& indices)
{
    const auto k = static_cast<Eigen::Index>(indices.size());
    Matrix out(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c) out(r, c) = m(indices[static_cast<std::size_t>(r)], indices[static_cast<std::size_t>(c)]);
    return out;
}

ScaledProduct apply_scaling(const PartitionedGain& A, const ScalingDiagonal& E, const MixingMatrix& K)
{
    const Partition& part = A.partition();
    if (!(E.partition() == part) || !(K.partition() == part))
        throw Error(ErrorKind::DimensionMismatch, "scaling or mixing partition differs from gain partition");

    double largest = 0.0;
    for (int i = 0; i < part.blocks(); ++i)
        for (int j = 0; j < part.size(i); ++j) largest = std::max(largest, std::abs(E(i, j) * K(i, j)));
    const double cutoff = 1e-14 * largest;

    ScaledProduct out;
    Matrix full = Matrix::Zero(A.rows(), part.blocks());
    for (int i = 0; i < part.blocks(); ++i) {
        std::vector<int> cols;
        for (int j = 0; j < part.size(i); ++j) {
            const double w = E(i, j) * K(i, j);
            if (largest > 0.0 && std::abs(w) > cutoff) {
                cols.push_back(j);
                full.col(i) += w * A.column(i, j);
            }
        }
        if (!cols.empty()) {
            out.active.blocks.push_back(i);
            out.active.columns.push_back(std::move(cols));
        }
    }
    out.matrix = principal_submatrix(full, out.active.blocks);
    return out;
}

}  // namespace nsqstab
