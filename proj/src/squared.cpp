#include <nsqstab/squared.hpp>

#include <numeric>
#include <string>

namespace nsqstab {

namespace {

void check_blocks(const Partition& partition, const std::vector<int>& blocks)
{
    int prev = -1;
    for (int b : blocks) {
        if (b <= prev || b >= partition.blocks())
            throw Error(ErrorKind::OutOfRange, "active blocks must be ascending and inside the partition");
        prev = b;
    }
}

}  // namespace

std::vector<int> all_blocks(const Partition& partition)
{
    std::vector<int> blocks(static_cast<std::size_t>(partition.blocks()));
    std::iota(blocks.begin(), blocks.end(), 0);
    return blocks;
}

std::uint64_t count_selections(const Partition& partition, const std::vector<int>& blocks)
{
    check_blocks(partition, blocks);
    std::uint64_t n = 1;
    for (int b : blocks) n *= static_cast<std::uint64_t>(partition.size(b));
    return n;
}

SelectionEnumerator::SelectionEnumerator(const Partition& partition, std::vector<int> blocks)
{
    check_blocks(partition, blocks);
    for (int b : blocks) limits_.push_back(partition.size(b));
    current_.blocks = std::move(blocks);
    current_.kappa.assign(limits_.size(), 0);
}

std::optional<SquaredSelection> SelectionEnumerator::next()
{
    if (done_) return std::nullopt;
    SquaredSelection out = current_;
    // odometer increment, last position fastest
    std::size_t pos = limits_.size();
    while (pos > 0) {
        --pos;
        if (++current_.kappa[pos] < limits_[pos]) return out;
        current_.kappa[pos] = 0;
    }
    done_ = true;
    return out;
}

void for_each_selection(const Partition& partition, const std::vector<int>& blocks,
                        const std::function<void(std::uint64_t, const SquaredSelection&)>& fn)
{
    SelectionEnumerator it(partition, blocks);
    std::uint64_t rank = 0;
    while (auto s = it.next()) fn(rank++, *s);
}

std::uint64_t selection_rank(const Partition& partition, const SquaredSelection& s)
{
    check_blocks(partition, s.blocks);
    if (s.kappa.size() != s.blocks.size()) throw Error(ErrorKind::DimensionMismatch, "selection length");
    std::uint64_t rank = 0;
    for (std::size_t b = 0; b < s.blocks.size(); ++b) {
        const int p = partition.size(s.blocks[b]);
        if (s.kappa[b] < 0 || s.kappa[b] >= p) throw Error(ErrorKind::OutOfRange, "selection offset");
        rank = rank * static_cast<std::uint64_t>(p) + static_cast<std::uint64_t>(s.kappa[b]);
    }
    return rank;
}

SquaredSelection selection_at(const Partition& partition, const std::vector<int>& blocks, std::uint64_t rank)
{
    const std::uint64_t total = count_selections(partition, blocks);
    if (rank >= total) throw Error(ErrorKind::OutOfRange, "selection rank " + std::to_string(rank));
    SquaredSelection s{blocks, std::vector<int>(blocks.size(), 0)};
    for (std::size_t b = blocks.size(); b-- > 0;) {
        const auto p = static_cast<std::uint64_t>(partition.size(blocks[b]));
        s.kappa[b] = static_cast<int>(rank % p);
        rank /= p;
    }
    return s;
}

Matrix extract_squared(const PartitionedGain& A, const SquaredSelection& s)
{
    const Partition& part = A.partition();
    check_blocks(part, s.blocks);
    if (s.kappa.size() != s.blocks.size()) throw Error(ErrorKind::DimensionMismatch, "selection length");
    const auto k = static_cast<Eigen::Index>(s.blocks.size());
    Matrix out(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const int col = part.flat_index(s.blocks[static_cast<std::size_t>(c)], s.kappa[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < k; ++r) out(r, c) = A.entries()(s.blocks[static_cast<std::size_t>(r)], col);
    }
    return out;
}

}  // namespace nsqstab
