#pragma once

// The nested Lipschitz cutoffs psi_j of a ball B(y, R):
//   r_j = (2^(-j-1) + 1/2) R,
//   psi_j(x) = min(1, max(0, (r_j - d(x, y)) / (r_j - r_{j+1}))),
//   B_j = {x : d(x, y) <= r_j}.

#include <optional>
#include <string>
#include <vector>

#include "sobdub/space.hpp"

namespace sobdub {

/// r_j for j >= 1.
double radius(int j, double R);

/// The clamped linear profile with support radius `outer` and plateau
/// radius `inner`.
double cutoff_profile(double distance, double outer, double inner);

/// psi_j evaluated at every point of the space.
GridFunction psi(int j, const Ball& ball, const DiscreteSpace& space);

struct CutoffFamily {
    Ball ball;
    int J_max = 0;
    /// radii[j - 1] = r_j for j = 1 .. J_max + 1.
    std::vector<double> radii;
    /// functions[j - 1] = psi_j for j = 1 .. J_max.
    std::vector<GridFunction> functions;
    /// nested_sets[j - 1] = B_j for j = 1 .. J_max + 1 (closed).
    std::vector<std::vector<PointId>> nested_sets;
    /// d(x, y) for every point x.
    std::vector<double> center_dist;

    double r(int j) const { return radii.at(static_cast<std::size_t>(j - 1)); }
    double gap(int j) const { return r(j) - r(j + 1); }
    /// 2^(j+2) / R, the exact Lipschitz constant of psi_j.
    double slope(int j) const;
    const GridFunction& function(int j) const { return functions.at(static_cast<std::size_t>(j - 1)); }
    const std::vector<PointId>& set(int j) const {
        return nested_sets.at(static_cast<std::size_t>(j - 1));
    }
};

/// Builds psi_1..psi_J and B_1..B_{J+1} for the ball's centre and radius.
CutoffFamily build_cutoff_family(const DiscreteSpace& space, const Ball& ball, int J);

/// Same construction from arbitrary decreasing radii r_1 > r_2 > ... (the
/// subelliptic families use plateaus shrinking towards nu R).
CutoffFamily build_cutoff_family(const DiscreteSpace& space, const Ball& ball,
                                 std::vector<double> radii);

/// Largest J resolvable on the space: floor(log2(R / (8h))) + 1 clamped to
/// [1, 40]. Throws InvalidInput("radius below resolution") when R <= 4h.
int default_J(const Ball& ball, const DiscreteSpace& space);

struct CutoffFailure {
    int j = 0;
    PointId point = 0;
    std::string check;
    double value = 0.0;
    double bound = 0.0;
};

struct CutoffLevelReport {
    int j = 0;
    bool below_resolution = false;
    bool support_ok = true;    // psi_j = 0 outside B_j
    bool plateau_ok = true;    // psi_j = 1 on B_{j+1}
    bool range_ok = true;      // 0 <= psi_j <= 1
    bool lip_ok = true;        // discrete_lip <= slope (1 + 2h / h_lip)
    bool pairwise_ok = true;   // |psi(x) - psi(z)| <= slope d(x, z)
    bool energy_ok = true;     // mean of lip^p over B* against the annulus measure
    double max_lip = 0.0;
    double max_pairwise = 0.0;
    double slope = 0.0;
    double lip_bound = 0.0;
    double energy = 0.0;
    double energy_bound = 0.0;
};

struct CutoffReport {
    double h_lip = 0.0;
    double tau_grid = 0.0;
    /// Levels with r_j - r_{j+1} < h are flagged and not checked.
    int resolved_J = 0;
    std::vector<CutoffLevelReport> levels;
    std::vector<CutoffFailure> failures;

    bool pass() const { return failures.empty(); }
};

/// Checks support, plateau, range, discrete-lip and exact pairwise Lipschitz
/// bounds for every resolved level. h_lip defaults to 2h.
CutoffReport verify_cutoff_properties(const DiscreteSpace& space, const CutoffFamily& family,
                                      double p, std::optional<double> h_lip = std::nullopt);

}  // namespace sobdub
