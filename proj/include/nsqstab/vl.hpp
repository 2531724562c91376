#pragma once

#include <nsqstab/core.hpp>
#include <nsqstab/squared.hpp>

#include <optional>
#include <string>
#include <vector>

namespace nsqstab {

/// Positive diagonal D with margin = lambda_min(M D + D M^T).
struct VlCertificate {
    Vector diagonal;
    double margin = 0.0;
};

enum class VlStatus { Certified, Refuted, Undecided };

const char* to_string(VlStatus status);

struct VlVerdict {
    VlStatus status = VlStatus::Undecided;
    std::optional<VlCertificate> certificate;
    /// Best lambda_min(M D + D M^T) found over the unit-trace diagonal simplex.
    double best_margin = 0.0;
    /// Upper bound on the simplex optimum, max_i 2 (W M)_ii for the witness W below.
    double upper_bound = 0.0;
    /// Unit-trace PSD matrix W; when max_i (W M)_ii <= 0 no positive diagonal works.
    Matrix dual_witness;
    int iterations = 0;
};

struct VlOptions {
    double tol = 1e-9;
    int budget = 3000;
    double floor = 1e-12;
    /// Fine simplex grid for k <= 3 when the ascent ends undecided.
    bool grid_fallback = true;
};

/// Searches for a positive diagonal D with M D + D M^T positive definite.
///
/// Maximizes the concave function f(d) = lambda_min(M diag(d) + diag(d) M^T) over
/// {d_i >= floor, sum d_i = 1} by projected ascent along entropy-smoothed supergradients
/// with a decreasing smoothing level. Every smoothed supergradient is 2 diag(W M) for a
/// unit-trace PSD W, and max_i 2 (W M)_ii bounds the optimum from above (weak duality),
/// so the result carries both a primal certificate and a dual bound.
///
/// certified: a diagonal with margin > tol was found.
/// refuted: the dual bound is <= 0 (up to rounding), so no diagonal can reach margin > 0.
/// undecided: neither, within the iteration budget.
VlVerdict check_vl(const Matrix& M, const VlOptions& options = {});

/// lambda_min(M D + D M^T) for D = diag(d).
double verify_certificate(const Matrix& M, const Vector& d);

struct DominanceResult {
    bool dominant = false;
    /// slack_j = m_jj - sum_{i != j} |m_ij|
    Vector slack;
};

/// Column strict diagonal dominance with positive diagonal.
DominanceResult check_column_dominance(const Matrix& M);

struct IndividualVlResult {
    std::vector<SquaredSelection> selections;  // lexicographic
    std::vector<VlVerdict> verdicts;           // parallel to selections
    VlStatus overall = VlStatus::Undecided;
    std::vector<std::size_t> failing;          // indices of non-certified selections
    double min_margin = 0.0;                   // min best_margin over selections

    /// Certificate diagonals in selection order; throws if any selection is not certified.
    std::vector<Vector> certificates() const;
};

/// check_vl on every full-dimension squared matrix of A.
IndividualVlResult certify_individual_vl(const PartitionedGain& A, const VlOptions& options = {});

}  // namespace nsqstab
