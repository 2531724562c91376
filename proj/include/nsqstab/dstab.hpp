#pragma once

#include <nsqstab/core.hpp>
#include <nsqstab/vl.hpp>
#include <nsqstab/weights.hpp>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nsqstab {

using ComplexVector = Eigen::VectorXcd;

/// Eigenvalues of a square real matrix (empty for 0 x 0).
ComplexVector spectrum(const Matrix& M);
/// Smallest real part over the spectrum (+inf for 0 x 0).
double min_real_part(const Matrix& M);

/// D_sum = sum_l gamma_l [A]_l D_l and its symmetric Lyapunov aggregate.
struct AggregateWitness {
    Matrix d_sum;
    Matrix lyapunov_sum;       // sum_l gamma_l ([A]_l D_l + D_l [A]_l^T)
    double lyapunov_margin = 0.0;
    ComplexVector spectrum;    // eigenvalues of d_sum
    double min_real = 0.0;

    bool stable() const { return lyapunov_margin > 0.0 && min_real > 0.0; }
};

/// `certificates[l]` is the diagonal D_l of the l-th squared matrix in lexicographic order.
AggregateWitness assemble_witness(const PartitionedGain& A, const std::vector<Vector>& certificates, const WeightSystem& gammas);

struct MatchResult {
    WeightProblem problem;
    WeightSystem weights;
    AggregateWitness witness;
    Matrix scaled;           // AEK
    Vector column_scales;    // D_sum = AEK * diag(column_scales)
    double parallel_residual = 0.0;  // max_j ||D_sum[:,j] - c_j AEK[:,j]|| / ||D_sum[:,j]||
};

/// Chooses gamma so that D_sum is a positive column scaling of AEK.
///
/// Target ratios are k_r^j = (eps_{j,r+1} k_{j,r+1}) / (eps_{j,1} k_{j,1}) and the
/// lambdas are the certificate diagonals, lambda^j_l = (D_l)_jj.
MatchResult match_ek(const PartitionedGain& A, const std::vector<Vector>& certificates, const ScalingDiagonal& E,
                     const MixingMatrix& K);

struct SamplerOptions {
    std::uint64_t count = 10000;
    double zero_probability = 0.15;
    double min_magnitude = 1e-3;
    double max_magnitude = 1e3;
    std::uint64_t seed = 42;
    /// A sample is a counterexample when min Re sigma([AEK]) <= tol * max(1, ||[AEK]||_F).
    double tol = 1e-9;
};

enum class CounterexampleKind { Unstable, Marginal };
const char* to_string(CounterexampleKind kind);

struct Counterexample {
    ScalingDiagonal E;
    ActiveSet active;
    Matrix reduced;                     // active AEK
    std::complex<double> eigenvalue;    // offending eigenvalue
    std::uint64_t sample_index = 0;
    /// Marginal: |Re| <= 1e-9 * scale, so Re > 0 fails only at the numerical boundary.
    CounterexampleKind kind = CounterexampleKind::Unstable;
};

struct FalsifyResult {
    std::optional<Counterexample> counterexample;
    std::uint64_t samples = 0;            // samples evaluated before stopping
    std::uint64_t marginal_samples = 0;   // samples with |min Re| <= 1e-9 * scale
    std::uint64_t empty_samples = 0;      // every column inactive
    double min_scaled_real = 0.0;         // min over samples of min Re / max(1, ||AEK||)
};

/// Draws one scaling diagonal of the sampler's stream; pure function of (seed, index).
ScalingDiagonal sample_scaling(const Partition& partition, const SamplerOptions& sampler, std::uint64_t index);

/// Randomized search for a scaling E violating Re sigma([AEK]) > 0.
/// Returns the violation with the smallest sample index.
FalsifyResult falsify(const PartitionedGain& A, const MixingMatrix& K, const SamplerOptions& sampler = {});

enum class CertifyVerdict { CertifiedSufficient, RefutedByCounterexample, Inconclusive };
const char* to_string(CertifyVerdict verdict);

struct WitnessCheck {
    ScalingDiagonal E;
    double lyapunov_margin = 0.0;
    double witness_min_real = 0.0;
    double scaled_min_real = 0.0;    // min Re sigma(AEK), checked directly
    double parallel_residual = 0.0;
};

struct CertifyOptions {
    VlOptions vl;
    SamplerOptions sampler;
    int witness_samples = 8;
};

struct CertifyReport {
    CertifyVerdict verdict = CertifyVerdict::Inconclusive;
    IndividualVlResult vl;
    std::vector<WitnessCheck> witnesses;
    FalsifyResult falsification;
    /// Observations that contradict expectations (e.g. stable D_sum but unstable AEK).
    std::vector<std::string> findings;
};

/// Individual VL certification, witness assembly on sampled positive E, then falsification.
CertifyReport full_certify(const PartitionedGain& A, const std::optional<MixingMatrix>& K, const CertifyOptions& options = {});

}  // namespace nsqstab
