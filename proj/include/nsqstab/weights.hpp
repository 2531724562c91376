#pragma once

#include <nsqstab/core.hpp>

#include <cstdint>
#include <vector>

namespace nsqstab {

/// Inputs of the combinatorial weight construction.
///
/// Combinations kappa = (kappa_1..kappa_m) are addressed by lexicographic rank (last
/// group fastest), matching the squared-matrix enumeration order.
struct WeightProblem {
    Partition groups;
    /// lambdas[phi][rank] = lambda^phi_kappa > 0
    std::vector<std::vector<double>> lambdas;
    /// ratios[phi][j] = target P_{phi,j+1} / P_{phi,0} > 0, length p_phi - 1
    std::vector<std::vector<double>> ratios;

    std::uint64_t combinations() const;
    /// Throws Error on shape violations or nonpositive entries.
    void validate() const;

    static WeightProblem uniform_lambdas(const Partition& groups, std::vector<std::vector<double>> ratios);
};

struct WeightSystem {
    std::vector<double> gammas;  // by lexicographic rank
    double base = 1.0;           // gamma of the all-first combination
};

struct WeightOptions {
    double base = 1.0;
    /// Force (or forbid) log-space accumulation; default chooses from problem size and lambda range.
    enum class Space { Auto, Linear, Log } space = Space::Auto;
};

/// P_{phi,j} = sum over kappa with kappa_phi = j of gamma_kappa * lambda^phi_kappa.
double payoff(const WeightSystem& ws, const WeightProblem& wp, int group, int index);

/// Strictly positive weights realizing every target payoff ratio.
///
/// Groups are processed in ascending order. Group phi fixes, separately for every tail
/// (kappa_{phi+1}..kappa_m), the weights with kappa_phi = j+1 relative to kappa_phi = 1 so
/// that the partial payoff over that tail has ratio k_j^phi; later groups rescale whole
/// tails only, which leaves earlier ratios intact. The last free parameter is `base`.
WeightSystem construct_weights(const WeightProblem& wp, const WeightOptions& options = {});

/// max over phi, j of |P_{phi,j+1}/P_{phi,1} - k_j^phi| / k_j^phi.
double verify_ratios(const WeightSystem& ws, const WeightProblem& wp);

}  // namespace nsqstab
