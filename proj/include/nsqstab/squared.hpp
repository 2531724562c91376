#pragma once

#include <nsqstab/core.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace nsqstab {

/// One column offset per active block: kappa[b] selects column (blocks[b], kappa[b]).
struct SquaredSelection {
    std::vector<int> blocks;
    std::vector<int> kappa;

    auto operator<=>(const SquaredSelection&) const = default;
};

std::vector<int> all_blocks(const Partition& partition);

/// Product of p_i over the listed blocks.
std::uint64_t count_selections(const Partition& partition, const std::vector<int>& blocks);

/// Lexicographic generator over selections (last block varies fastest).
class SelectionEnumerator {
public:
    SelectionEnumerator(const Partition& partition, std::vector<int> blocks);

    /// Current selection and advance; nullopt once exhausted.
    std::optional<SquaredSelection> next();

private:
    std::vector<int> limits_;
    SquaredSelection current_;
    bool done_ = false;
};

/// Calls fn(rank, selection) for every selection in lexicographic order.
void for_each_selection(const Partition& partition, const std::vector<int>& blocks,
                        const std::function<void(std::uint64_t, const SquaredSelection&)>& fn);

/// Lexicographic rank of a selection among all selections over its blocks.
std::uint64_t selection_rank(const Partition& partition, const SquaredSelection& s);
/// Inverse of selection_rank over the given blocks.
SquaredSelection selection_at(const Partition& partition, const std::vector<int>& blocks, std::uint64_t rank);

/// Squared matrix [a_{b1,kappa1}, ..., a_{bk,kappak}] restricted to the active rows.
Matrix extract_squared(const PartitionedGain& A, const SquaredSelection& s);

}  // namespace nsqstab
