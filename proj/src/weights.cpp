#include <nsqstab/weights.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nsqstab {

std::uint64_t WeightProblem::combinations() const
{
    std::uint64_t n = 1;
    for (int p : groups.sizes()) n *= static_cast<std::uint64_t>(p);
    return n;
}

void WeightProblem::validate() const
{
    const auto m = static_cast<std::size_t>(groups.blocks());
    if (m == 0) throw Error(ErrorKind::NonPositivePartition, "no groups");
    const std::uint64_t n = combinations();
    if (lambdas.size() != m) throw Error(ErrorKind::DimensionMismatch, "lambda table needs one row per group");
    if (ratios.size() != m) throw Error(ErrorKind::DimensionMismatch, "ratio table needs one row per group");
    for (std::size_t g = 0; g < m; ++g) {
        if (lambdas[g].size() != n)
            throw Error(ErrorKind::DimensionMismatch, "lambda row " + std::to_string(g) + " must have " + std::to_string(n) + " entries");
        for (double v : lambdas[g])
            if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::NonPositiveEntry, "lambda entries must be positive and finite");
        if (ratios[g].size() != static_cast<std::size_t>(groups.size(static_cast<int>(g)) - 1))
            throw Error(ErrorKind::DimensionMismatch, "ratio row " + std::to_string(g) + " must have p-1 entries");
        for (double v : ratios[g])
            if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::NonPositiveEntry, "ratio entries must be positive and finite");
    }
}

WeightProblem WeightProblem::uniform_lambdas(const Partition& groups, std::vector<std::vector<double>> ratios)
{
    WeightProblem wp;
    wp.groups = groups;
    std::uint64_t n = 1;
    for (int p : groups.sizes()) n *= static_cast<std::uint64_t>(p);
    wp.lambdas.assign(static_cast<std::size_t>(groups.blocks()), std::vector<double>(n, 1.0));
    wp.ratios = std::move(ratios);
    return wp;
}

namespace {

struct Layout {
    std::size_t stride;  // combinations per step of kappa_g
    std::size_t size;    // p_g
};

Layout layout(const Partition& groups, int g)
{
    std::size_t stride = 1;
    for (int i = g + 1; i < groups.blocks(); ++i) stride *= static_cast<std::size_t>(groups.size(i));
    return {stride, static_cast<std::size_t>(groups.size(g))};
}

bool wants_log_space(const WeightProblem& wp)
{
    if (wp.combinations() > 10000) return true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& row : wp.lambdas)
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return hi / lo > 1e6;
}

// coefficient C_kappa with gamma_kappa = C_kappa * beta_tail after each group
std::vector<double> coefficients_linear(const WeightProblem& wp)
{
    const std::size_t n = wp.combinations();
    std::vector<double> coef(n, 1.0);
    for (int g = 0; g < wp.groups.blocks(); ++g) {
        const auto [stride, p] = layout(wp.groups, g);
        const auto& lam = wp.lambdas[static_cast<std::size_t>(g)];
        std::vector<double> acc(p * stride, 0.0);  // acc[j * stride + tail] = A_{j,tail}
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t j = (r / stride) % p;
            acc[j * stride + r % stride] += coef[r] * lam[r];
        }
        std::vector<double> factor(p * stride, 1.0);
        for (std::size_t j = 1; j < p; ++j)
            for (std::size_t t = 0; t < stride; ++t)
                factor[j * stride + t] = wp.ratios[static_cast<std::size_t>(g)][j - 1] * acc[t] / acc[j * stride + t];
        for (std::size_t r = 0; r < n; ++r) coef[r] *= factor[((r / stride) % p) * stride + r % stride];
    }
    return coef;
}

std::vector<double> coefficients_log(const WeightProblem& wp)
{
    const std::size_t n = wp.combinations();
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> log_coef(n, 0.0);
    for (int g = 0; g < wp.groups.blocks(); ++g) {
        const auto [stride, p] = layout(wp.groups, g);
        const auto& lam = wp.lambdas[static_cast<std::size_t>(g)];
        // two-pass log-sum-exp per (j, tail)
        std::vector<double> peak(p * stride, neg_inf);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t slot = ((r / stride) % p) * stride + r % stride;
            peak[slot] = std::max(peak[slot], log_coef[r] + std::log(lam[r]));
        }
        std::vector<double> sum(p * stride, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t slot = ((r / stride) % p) * stride + r % stride;
            sum[slot] += std::exp(log_coef[r] + std::log(lam[r]) - peak[slot]);
        }
        std::vector<double> log_acc(p * stride);
        for (std::size_t s = 0; s < log_acc.size(); ++s) log_acc[s] = peak[s] + std::log(sum[s]);

        std::vector<double> log_factor(p * stride, 0.0);
        for (std::size_t j = 1; j < p; ++j)
            for (std::size_t t = 0; t < stride; ++t)
                log_factor[j * stride + t] = std::log(wp.ratios[static_cast<std::size_t>(g)][j - 1]) + log_acc[t] - log_acc[j * stride + t];
        for (std::size_t r = 0; r < n; ++r) log_coef[r] += log_factor[((r / stride) % p) * stride + r % stride];
    }
    return log_coef;
}

}  // namespace

WeightSystem construct_weights(const WeightProblem& wp, const WeightOptions& options)
{
    wp.validate();
    if (!(options.base > 0.0) || !std::isfinite(options.base)) throw Error(ErrorKind::NonPositiveEntry, "base weight must be positive");

    bool use_log = options.space == WeightOptions::Space::Log;
    if (options.space == WeightOptions::Space::Auto) use_log = wants_log_space(wp);

    WeightSystem ws;
    ws.base = options.base;
    if (use_log) {
        const std::vector<double> log_coef = coefficients_log(wp);
        ws.gammas.reserve(log_coef.size());
        const double log_base = std::log(options.base);
        for (double lc : log_coef) ws.gammas.push_back(std::exp(lc + log_base));
    } else {
        ws.gammas = coefficients_linear(wp);
        for (double& g : ws.gammas) g *= options.base;
    }
    for (double g : ws.gammas)
        if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorKind::NotFinite, "weight underflow or overflow; rescale lambdas or base");
    return ws;
}

double payoff(const WeightSystem& ws, const WeightProblem& wp, int group, int index)
{
    if (group < 0 || group >= wp.groups.blocks()) throw Error(ErrorKind::OutOfRange, "group " + std::to_string(group));
    if (index < 0 || index >= wp.groups.size(group)) throw Error(ErrorKind::OutOfRange, "index " + std::to_string(index));
    if (ws.gammas.size() != wp.combinations() || wp.lambdas.size() != static_cast<std::size_t>(wp.groups.blocks()))
        throw Error(ErrorKind::DimensionMismatch, "weight system does not match problem");
    const auto [stride, p] = layout(wp.groups, group);
    const auto& lam = wp.lambdas[static_cast<std::size_t>(group)];
    double total = 0.0;
    for (std::size_t r = 0; r < ws.gammas.size(); ++r)
        if ((r / stride) % p == static_cast<std::size_t>(index)) total += ws.gammas[r] * lam[r];
    return total;
}

double verify_ratios(const WeightSystem& ws, const WeightProblem& wp)
{
    double worst = 0.0;
    for (int g = 0; g < wp.groups.blocks(); ++g) {
        const double first = payoff(ws, wp, g, 0);
        for (int j = 1; j < wp.groups.size(g); ++j) {
            const double target = wp.ratios[static_cast<std::size_t>(g)][static_cast<std::size_t>(j - 1)];
            worst = std::max(worst, std::abs(payoff(ws, wp, g, j) / first - target) / target);
        }
    }
    return worst;
}

}  // namespace nsqstab
