#pragma once

// Lower bounds on the weak (p sigma, p)-Sobolev constant of a ball: the
// Sobolev quotient of any zero-boundary test function is a lower bound, so
// we maximize it over grid functions by projected ascent.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sobdub/constants.hpp"
#include "sobdub/space.hpp"

namespace sobdub {

struct OptimizerConfig {
    int restarts = 4;          // random bump seeds, on top of tent and psi_j
    int max_iters = 200;
    double step = 0.25;        // initial step, relative to max |phi| = 1
    std::uint64_t seed = 1;
    double smoothing = 1e-3;   // epsilon in sqrt(t^2 + eps^2), used while ascending
    double tolerance = 1e-10;  // relative improvement counted as stagnation

    void validate() const;
};

struct SobolevQuotient {
    double numerator = 0.0;      // (avg_B |phi|^(p sigma))^(1 / (p sigma))
    double gradient_term = 0.0;  // R (avg_B g^p)^(1/p)
    double mass_term = 0.0;      // (avg_B |phi|^p)^(1/p)
    double ratio = 0.0;
};

/// The smallest C_S for which the weak Sobolev inequality holds for this phi
/// on B, with g = discrete_lip(phi) at scale h_lip (default 2h). Averages are
/// over the open ball. Throws InvalidInput if phi is identically zero or does
/// not vanish outside the ball.
SobolevQuotient sobolev_quotient(const DiscreteSpace& space, const Ball& ball,
                                 const GridFunction& phi, const SobolevParams& params,
                                 std::optional<double> h_lip = std::nullopt);

double sobolev_ratio(const DiscreteSpace& space, const Ball& ball, const GridFunction& phi,
                     const SobolevParams& params, std::optional<double> h_lip = std::nullopt);

struct SeedResult {
    std::string kind;  // "tent", "psi_<j>", "bump_<k>"
    double initial_ratio = 0.0;
    double final_ratio = 0.0;
    int iterations = 0;
    int restarts = 0;  // ascents restarted after repeated step failures
};

struct EstimateResult {
    double best_ratio = 0.0;
    GridFunction best_phi;
    std::string best_kind;
    std::uint64_t seed = 0;
    int iterations = 0;
    /// Best ratio seen so far, after each seed evaluation and ascent step,
    /// in seed order.
    std::vector<double> trace;
    std::vector<SeedResult> seeds;
};

/// Maximizes the Sobolev quotient over zero-boundary grid functions,
/// starting from a tent, the cutoffs psi_j (j <= default_J) and
/// `config.restarts` random gaussian bumps. Deterministic given the seed.
/// Requires at least 8 points inside the ball.
EstimateResult estimate_lower_bound(const DiscreteSpace& space, const Ball& ball,
                                    const SobolevParams& params, const OptimizerConfig& config);

}  // namespace sobdub
