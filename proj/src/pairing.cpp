#include <nsqstab/pairing.hpp>
#include <nsqstab/parallel.hpp>
#include <nsqstab/squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsqstab {

const char* to_string(PairingVerdict verdict)
{
    switch (verdict) {
    case PairingVerdict::CertifiedSufficient: return "certified-sufficient";
    case PairingVerdict::DominanceOnly: return "dominance-only";
    case PairingVerdict::InfeasibleSufficient: return "infeasible-sufficient";
    case PairingVerdict::Refuted: return "refuted";
    }
    return "unknown";
}

int PairingAssignment::outputs() const
{
    int m = 0;
    for (int o : output_of_input) m = std::max(m, o + 1);
    return m;
}

Partition PairingAssignment::partition(int m) const
{
    std::vector<int> sizes(static_cast<std::size_t>(m), 0);
    for (int o : output_of_input) {
        if (o < 0 || o >= m) throw Error(ErrorKind::OutOfRange, "assignment output out of range");
        ++sizes[static_cast<std::size_t>(o)];
    }
    return Partition(std::move(sizes));  // rejects outputs without inputs
}

std::vector<int> PairingAssignment::column_order(int m) const
{
    std::vector<int> order;
    order.reserve(output_of_input.size());
    for (int o = 0; o < m; ++o)
        for (std::size_t c = 0; c < output_of_input.size(); ++c)
            if (output_of_input[c] == o) order.push_back(static_cast<int>(c));
    return order;
}

PartitionedGain PairingAssignment::apply(const Matrix& A) const
{
    const auto m = static_cast<int>(A.rows());
    if (static_cast<Eigen::Index>(output_of_input.size()) != A.cols())
        throw Error(ErrorKind::DimensionMismatch, "assignment length differs from input count");
    Partition part = partition(m);
    const std::vector<int> order = column_order(m);
    Matrix permuted(A.rows(), A.cols());
    for (std::size_t c = 0; c < order.size(); ++c) permuted.col(static_cast<Eigen::Index>(c)) = A.col(order[c]);
    return PartitionedGain(std::move(permuted), std::move(part));
}

std::optional<std::uint64_t> surjection_count(int m, int n)
{
    if (m < 1 || n < m) return std::uint64_t{0};
    // sum_i (-1)^i C(m,i) (m-i)^n
    unsigned __int128 positive = 0;
    unsigned __int128 negative = 0;
    const unsigned __int128 limit = ~static_cast<unsigned __int128>(0) >> 8;
    unsigned __int128 binom = 1;
    for (int i = 0; i <= m; ++i) {
        unsigned __int128 power = 1;
        for (int e = 0; e < n; ++e) {
            power *= static_cast<unsigned>(m - i);
            if (power > limit) return std::nullopt;
        }
        const unsigned __int128 term = binom * power;
        if (power != 0 && term / power != binom) return std::nullopt;
        (i % 2 == 0 ? positive : negative) += term;
        binom = binom * static_cast<unsigned>(m - i) / static_cast<unsigned>(i + 1);
    }
    const unsigned __int128 total = positive - negative;
    if (total > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
    return static_cast<std::uint64_t>(total);
}

AssignmentStream enumerate_assignments(int m, int n, std::uint64_t cap, const std::function<bool(const PairingAssignment&)>& fn)
{
    if (m < 1) throw Error(ErrorKind::Precondition, "need at least one output");
    if (n < m) throw Error(ErrorKind::DimensionMismatch, "fewer inputs than outputs");
    if (cap < 1) throw Error(ErrorKind::Precondition, "cap must be positive");

    AssignmentStream stream;
    stream.total = surjection_count(m, n);
    PairingAssignment pa{std::vector<int>(static_cast<std::size_t>(n), 0)};
    std::vector<int> hits(static_cast<std::size_t>(m), 0);
    hits[0] = n;
    while (true) {
        if (std::all_of(hits.begin(), hits.end(), [](int h) { return h > 0; })) {
            if (stream.emitted == cap) {
                stream.truncated = true;
                return stream;
            }
            ++stream.emitted;
            if (!fn(pa)) {
                stream.truncated = stream.total && stream.emitted < *stream.total;
                return stream;
            }
        }
        int pos = n - 1;
        while (pos >= 0) {
            auto& digit = pa.output_of_input[static_cast<std::size_t>(pos)];
            --hits[static_cast<std::size_t>(digit)];
            if (++digit < m) {
                ++hits[static_cast<std::size_t>(digit)];
                break;
            }
            digit = 0;
            ++hits[0];
            --pos;
        }
        if (pos < 0) return stream;
    }
}

PairingReport evaluate_pairing(const Matrix& A, const PairingAssignment& pa, const VlOptions& options)
{
    const PartitionedGain gain = pa.apply(A);
    const IndividualVlResult vl = certify_individual_vl(gain, options);

    PairingReport report;
    report.assignment = pa;
    report.squared_count = vl.selections.size();
    report.vl_failures = vl.failing.size();
    report.vl_margin = vl.min_margin;
    report.dominance_slack = std::numeric_limits<double>::infinity();

    bool nonpositive_diagonal = false;
    for (const SquaredSelection& s : vl.selections) {
        const Matrix sq = extract_squared(gain, s);
        if ((sq.diagonal().array() <= 0.0).any()) nonpositive_diagonal = true;
        const DominanceResult dom = check_column_dominance(sq);
        if (!dom.dominant) ++report.dominance_failures;
        report.dominance_slack = std::min(report.dominance_slack, dom.slack.minCoeff());
    }

    if (vl.overall == VlStatus::Certified) {
        report.verdict = PairingVerdict::CertifiedSufficient;
        report.margin = vl.min_margin;
    } else if (report.dominance_failures == 0) {
        report.verdict = PairingVerdict::DominanceOnly;
        report.margin = report.dominance_slack;
    } else {
        report.verdict = nonpositive_diagonal ? PairingVerdict::Refuted : PairingVerdict::InfeasibleSufficient;
        report.margin = std::min(vl.min_margin, 0.0);
    }
    return report;
}

bool ranks_before(const PairingReport& a, const PairingReport& b)
{
    if (a.verdict != b.verdict) return static_cast<int>(a.verdict) < static_cast<int>(b.verdict);
    if (a.margin != b.margin) return a.margin > b.margin;
    return a.assignment < b.assignment;
}

PairingRanking rank_pairings(const Matrix& A, std::uint64_t cap, const VlOptions& options)
{
    require_finite(A, "gain matrix");
    const auto m = static_cast<int>(A.rows());
    const auto n = static_cast<int>(A.cols());
    std::vector<PairingAssignment> assignments;
    PairingRanking ranking;
    ranking.stream = enumerate_assignments(m, n, cap, [&](const PairingAssignment& pa) {
        assignments.push_back(pa);
        return true;
    });
    ranking.reports.resize(assignments.size());
    parallel_for(assignments.size(), [&](std::size_t i) { ranking.reports[i] = evaluate_pairing(A, assignments[i], options); });
    std::sort(ranking.reports.begin(), ranking.reports.end(), ranks_before);
    if (ranking.stream.truncated) ranking.heuristic = greedy_pairing(A, options);
    return ranking;
}

PairingReport greedy_pairing(const Matrix& A, const VlOptions& options, int max_rounds)
{
    const auto m = static_cast<int>(A.rows());
    const auto n = static_cast<int>(A.cols());
    if (n < m) throw Error(ErrorKind::DimensionMismatch, "fewer inputs than outputs");

    PairingAssignment pa{std::vector<int>(static_cast<std::size_t>(n))};
    for (int c = 0; c < n; ++c) {
        Eigen::Index row = 0;
        A.col(c).cwiseAbs().maxCoeff(&row);
        pa.output_of_input[static_cast<std::size_t>(c)] = static_cast<int>(row);
    }
    // repair: give each empty output the strongest input from an output that can spare one
    for (int o = 0; o < m; ++o) {
        std::vector<int> counts(static_cast<std::size_t>(m), 0);
        for (int x : pa.output_of_input) ++counts[static_cast<std::size_t>(x)];
        if (counts[static_cast<std::size_t>(o)] > 0) continue;
        int pick = -1;
        for (int c = 0; c < n; ++c) {
            if (counts[static_cast<std::size_t>(pa.output_of_input[static_cast<std::size_t>(c)])] < 2) continue;
            if (pick < 0 || std::abs(A(o, c)) > std::abs(A(o, pick))) pick = c;
        }
        pa.output_of_input[static_cast<std::size_t>(pick)] = o;
    }

    PairingReport best = evaluate_pairing(A, pa, options);
    for (int round = 0; round < max_rounds; ++round) {
        bool improved = false;
        for (int c = 0; c < n; ++c) {
            for (int o = 0; o < m; ++o) {
                PairingAssignment cand = best.assignment;
                if (cand.output_of_input[static_cast<std::size_t>(c)] == o) continue;
                cand.output_of_input[static_cast<std::size_t>(c)] = o;
                const int src = best.assignment.output_of_input[static_cast<std::size_t>(c)];
                if (std::count(cand.output_of_input.begin(), cand.output_of_input.end(), src) == 0) continue;
                PairingReport rep = evaluate_pairing(A, cand, options);
                if (ranks_before(rep, best)) {
                    best = std::move(rep);
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }
    best.heuristic = true;
    return best;
}

}  // namespace nsqstab
