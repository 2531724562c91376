#include <nsqstab/dstab.hpp>
#include <nsqstab/parallel.hpp>
#include <nsqstab/squared.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace nsqstab {

const char* to_string(CounterexampleKind kind)
{
    return kind == CounterexampleKind::Unstable ? "unstable" : "marginal";
}

const char* to_string(CertifyVerdict verdict)
{
    switch (verdict) {
    case CertifyVerdict::CertifiedSufficient: return "certified-sufficient";
    case CertifyVerdict::RefutedByCounterexample: return "refuted-by-counterexample";
    case CertifyVerdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

ComplexVector spectrum(const Matrix& M)
{
    if (M.rows() != M.cols()) throw Error(ErrorKind::NonSquare, "spectrum of non-square matrix");
    if (M.rows() == 0) return ComplexVector(0);
    if (M.rows() == 1) return ComplexVector::Constant(1, std::complex<double>(M(0, 0), 0.0));
    Eigen::EigenSolver<Matrix> es(M, false);
    return es.eigenvalues();
}

double min_real_part(const Matrix& M)
{
    const ComplexVector ev = spectrum(M);
    if (ev.size() == 0) return std::numeric_limits<double>::infinity();
    return ev.real().minCoeff();
}

AggregateWitness assemble_witness(const PartitionedGain& A, const std::vector<Vector>& certificates, const WeightSystem& gammas)
{
    const Partition& part = A.partition();
    const std::vector<int> blocks = all_blocks(part);
    const std::uint64_t n = count_selections(part, blocks);
    if (certificates.size() != n) throw Error(ErrorKind::MissingCertificate, "need one certificate per squared matrix");
    if (gammas.gammas.size() != n) throw Error(ErrorKind::DimensionMismatch, "need one weight per squared matrix");

    const int m = part.blocks();
    AggregateWitness w;
    w.d_sum = Matrix::Zero(m, m);
    w.lyapunov_sum = Matrix::Zero(m, m);
    for_each_selection(part, blocks, [&](std::uint64_t rank, const SquaredSelection& s) {
        const double g = gammas.gammas[rank];
        const Vector& d = certificates[rank];
        if (!(g > 0.0)) throw Error(ErrorKind::NonPositiveEntry, "weights must be positive");
        if (d.size() != m || !(d.minCoeff() > 0.0)) throw Error(ErrorKind::NonPositiveEntry, "certificate diagonals must be positive");
        const Matrix term = extract_squared(A, s) * d.asDiagonal();
        w.d_sum += g * term;
        w.lyapunov_sum += g * (term + term.transpose());
    });
    Eigen::SelfAdjointEigenSolver<Matrix> es(w.lyapunov_sum, Eigen::EigenvaluesOnly);
    w.lyapunov_margin = es.eigenvalues()(0);
    w.spectrum = spectrum(w.d_sum);
    w.min_real = w.spectrum.real().minCoeff();
    return w;
}

MatchResult match_ek(const PartitionedGain& A, const std::vector<Vector>& certificates, const ScalingDiagonal& E,
                     const MixingMatrix& K)
{
    const Partition& part = A.partition();
    if (!(E.partition() == part) || !(K.partition() == part)) throw Error(ErrorKind::DimensionMismatch, "partition mismatch");
    const int m = part.blocks();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < part.size(i); ++j)
            if (!(E(i, j) * K(i, j) > 0.0))
                throw Error(ErrorKind::InactiveBlock, "eps*k must be positive on every column; reduce inactive columns first");

    const std::uint64_t n = count_selections(part, all_blocks(part));
    if (certificates.size() != n) throw Error(ErrorKind::MissingCertificate, "need one certificate per squared matrix");

    MatchResult out;
    out.problem.groups = part;
    out.problem.lambdas.assign(static_cast<std::size_t>(m), std::vector<double>(n));
    for (std::uint64_t l = 0; l < n; ++l) {
        if (certificates[l].size() != m) throw Error(ErrorKind::DimensionMismatch, "certificate length");
        for (int j = 0; j < m; ++j) out.problem.lambdas[static_cast<std::size_t>(j)][l] = certificates[l](j);
    }
    out.problem.ratios.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double first = E(j, 0) * K(j, 0);
        for (int r = 1; r < part.size(j); ++r) out.problem.ratios[static_cast<std::size_t>(j)].push_back(E(j, r) * K(j, r) / first);
    }

    out.weights = construct_weights(out.problem);
    out.witness = assemble_witness(A, certificates, out.weights);
    out.scaled = apply_scaling(A, E, K).matrix;

    out.column_scales.resize(m);
    for (int j = 0; j < m; ++j) {
        out.column_scales(j) = payoff(out.weights, out.problem, j, 0) / (E(j, 0) * K(j, 0));
        const double denom = out.witness.d_sum.col(j).norm();
        const double resid = (out.witness.d_sum.col(j) - out.column_scales(j) * out.scaled.col(j)).norm();
        out.parallel_residual = std::max(out.parallel_residual, denom > 0.0 ? resid / denom : resid);
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double unit(std::mt19937_64& eng)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

struct SampleOutcome {
    bool empty = false;
    double scaled_real = std::numeric_limits<double>::infinity();
    bool marginal = false;
    std::optional<Counterexample> violation;
};

SampleOutcome evaluate_sample(const PartitionedGain& A, const MixingMatrix& K, const SamplerOptions& sampler, std::uint64_t index)
{
    SampleOutcome out;
    ScalingDiagonal E = sample_scaling(A.partition(), sampler, index);
    ScaledProduct prod = apply_scaling(A, E, K);
    if (prod.matrix.rows() == 0) {
        out.empty = true;
        return out;
    }
    const ComplexVector ev = spectrum(prod.matrix);
    Eigen::Index worst = 0;
    ev.real().minCoeff(&worst);
    const double scale = std::max(1.0, prod.matrix.norm());
    const double re = ev(worst).real();
    out.scaled_real = re / scale;
    out.marginal = std::abs(re) <= 1e-9 * scale;
    if (re <= sampler.tol * scale) {
        Counterexample cx;
        cx.E = std::move(E);
        cx.active = std::move(prod.active);
        cx.reduced = std::move(prod.matrix);
        cx.eigenvalue = ev(worst);
        cx.sample_index = index;
        cx.kind = re < -1e-9 * scale ? CounterexampleKind::Unstable : CounterexampleKind::Marginal;
        out.violation = std::move(cx);
    }
    return out;
}

}  // namespace

ScalingDiagonal sample_scaling(const Partition& partition, const SamplerOptions& sampler, std::uint64_t index)
{
    std::mt19937_64 eng(splitmix64(sampler.seed ^ splitmix64(index + 0x5eedULL)));
    const double lo = std::log(sampler.min_magnitude);
    const double hi = std::log(sampler.max_magnitude);
    Vector flat(partition.columns());
    for (Eigen::Index c = 0; c < flat.size(); ++c) {
        const double gate = unit(eng);
        const double mag = std::exp(lo + (hi - lo) * unit(eng));
        flat(c) = gate < sampler.zero_probability ? 0.0 : mag;
    }
    return ScalingDiagonal::from_flat(partition, flat);
}

FalsifyResult falsify(const PartitionedGain& A, const MixingMatrix& K, const SamplerOptions& sampler)
{
    if (!(K.partition() == A.partition())) throw Error(ErrorKind::DimensionMismatch, "mixing partition differs from gain partition");
    if (!(sampler.min_magnitude > 0.0) || sampler.max_magnitude < sampler.min_magnitude)
        throw Error(ErrorKind::Precondition, "sampler magnitude range must be positive and ordered");

    FalsifyResult result;
    result.min_scaled_real = std::numeric_limits<double>::infinity();
    const std::uint64_t chunk = 1024;
    std::vector<SampleOutcome> outcomes;
    for (std::uint64_t begin = 0; begin < sampler.count; begin += chunk) {
        const std::uint64_t len = std::min(chunk, sampler.count - begin);
        outcomes.assign(len, SampleOutcome{});
        parallel_for(len, [&](std::size_t i) { outcomes[i] = evaluate_sample(A, K, sampler, begin + i); });
        for (std::uint64_t i = 0; i < len; ++i) {
            SampleOutcome& o = outcomes[i];
            ++result.samples;
            if (o.empty) {
                ++result.empty_samples;
                continue;
            }
            if (o.marginal) ++result.marginal_samples;
            result.min_scaled_real = std::min(result.min_scaled_real, o.scaled_real);
            if (o.violation) {
                result.counterexample = std::move(o.violation);
                return result;
            }
        }
    }
    return result;
}

CertifyReport full_certify(const PartitionedGain& A, const std::optional<MixingMatrix>& K, const CertifyOptions& options)
{
    const Partition& part = A.partition();
    const MixingMatrix mixing = K ? *K : MixingMatrix::ones(part);
    if (!(mixing.partition() == part)) throw Error(ErrorKind::DimensionMismatch, "mixing partition differs from gain partition");

    CertifyReport report;
    report.vl = certify_individual_vl(A, options.vl);

    if (report.vl.overall == VlStatus::Certified) {
        if (!mixing.strictly_positive()) {
            report.findings.push_back("mixing matrix has zero gains; witness assembly skipped");
        } else {
            const std::vector<Vector> certs = report.vl.certificates();
            SamplerOptions positive = options.sampler;
            positive.zero_probability = 0.0;
            positive.seed = splitmix64(options.sampler.seed ^ 0x77697473ULL);
            for (int w = 0; w < options.witness_samples; ++w) {
                WitnessCheck check;
                check.E = sample_scaling(part, positive, static_cast<std::uint64_t>(w));
                const MatchResult match = match_ek(A, certs, check.E, mixing);
                check.lyapunov_margin = match.witness.lyapunov_margin;
                check.witness_min_real = match.witness.min_real;
                check.scaled_min_real = min_real_part(match.scaled);
                check.parallel_residual = match.parallel_residual;
                if (match.witness.stable() && !(check.scaled_min_real > 0.0))
                    report.findings.push_back("witness " + std::to_string(w) + ": D_sum stable but AEK has Re <= 0");
                if (!match.witness.stable())
                    report.findings.push_back("witness " + std::to_string(w) + ": aggregate not positive definite despite certificates");
                if (match.parallel_residual > 1e-9)
                    report.findings.push_back("witness " + std::to_string(w) + ": column parallelism residual above 1e-9");
                report.witnesses.push_back(std::move(check));
            }
        }
    }

    report.falsification = falsify(A, mixing, options.sampler);

    if (report.falsification.counterexample) {
        report.verdict = CertifyVerdict::RefutedByCounterexample;
        if (report.vl.overall == VlStatus::Certified)
            report.findings.push_back("counterexample found although every squared matrix is certified");
    } else if (report.vl.overall == VlStatus::Certified) {
        report.verdict = CertifyVerdict::CertifiedSufficient;
    } else {
        report.verdict = CertifyVerdict::Inconclusive;
    }
    return report;
}

}  // namespace nsqstab
