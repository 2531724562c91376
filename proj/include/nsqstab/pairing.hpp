#pragma once

#include <nsqstab/core.hpp>
#include <nsqstab/vl.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace nsqstab {

/// Surjective map from inputs (columns) to outputs (rows).
struct PairingAssignment {
    std::vector<int> output_of_input;

    int outputs() const;
    Partition partition(int m) const;
    /// Original column indices in block order; within a block, original order.
    std::vector<int> column_order(int m) const;
    /// A with columns regrouped into contiguous blocks.
    PartitionedGain apply(const Matrix& A) const;

    auto operator<=>(const PairingAssignment&) const = default;
};

/// Number of surjections from n inputs onto m outputs by inclusion-exclusion.
/// nullopt if the count does not fit in 64 bits.
std::optional<std::uint64_t> surjection_count(int m, int n);

struct AssignmentStream {
    std::uint64_t emitted = 0;
    bool truncated = false;
    std::optional<std::uint64_t> total;
};

/// Streams surjective assignments in lexicographic order of output_of_input, at most `cap`.
/// fn returns false to stop early.
AssignmentStream enumerate_assignments(int m, int n, std::uint64_t cap, const std::function<bool(const PairingAssignment&)>& fn);

enum class PairingVerdict { CertifiedSufficient, DominanceOnly, InfeasibleSufficient, Refuted };
const char* to_string(PairingVerdict verdict);

struct PairingReport {
    PairingAssignment assignment;
    PairingVerdict verdict = PairingVerdict::InfeasibleSufficient;
    /// Min VL margin (certified), min dominance slack (dominance-only), else min(best VL margin, 0).
    double margin = 0.0;
    double vl_margin = 0.0;
    double dominance_slack = 0.0;
    std::size_t squared_count = 0;
    std::size_t vl_failures = 0;
    std::size_t dominance_failures = 0;
    bool heuristic = false;
};

/// Regroups A per the assignment and runs the VL and column-dominance checks on every squared matrix.
///
/// Refuted: some squared matrix has a diagonal entry <= 0, so zeroing every other column
/// leaves a 1 x 1 reduction with a nonpositive eigenvalue.
PairingReport evaluate_pairing(const Matrix& A, const PairingAssignment& pa, const VlOptions& options = {});

/// Ordering used by rank_pairings: verdict class, then margin descending, then assignment.
bool ranks_before(const PairingReport& a, const PairingReport& b);

struct PairingRanking {
    std::vector<PairingReport> reports;  // ranked
    AssignmentStream stream;
    /// Greedy search result, offered only when the enumeration was truncated.
    std::optional<PairingReport> heuristic;
};

PairingRanking rank_pairings(const Matrix& A, std::uint64_t cap = 100000, const VlOptions& options = {});

/// Greedy assignment by largest |entry| per input, surjectivity repair, then single-input moves.
PairingReport greedy_pairing(const Matrix& A, const VlOptions& options = {}, int max_rounds = 20);

}  // namespace nsqstab
