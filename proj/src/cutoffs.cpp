#include "sobdub/cutoffs.hpp"

#include <algorithm>
#include <cmath>

#include "sobdub/error.hpp"
#include "sobdub/parallel.hpp"

namespace sobdub {

namespace {

// Relative slack for bounds that hold exactly in real arithmetic.
constexpr double kUlpSlack = 1e-12;

double center_radius(const Ball& ball) {
    validate(ball);
    return ball.radius;
}

}  // namespace

double radius(int j, double R) {
    if (j < 1) throw InvalidInput("cutoff index j must be >= 1");
    if (!(R > 0.0)) throw InvalidInput("radius must be positive");
    return (std::ldexp(1.0, -j - 1) + 0.5) * R;
}

double cutoff_profile(double distance, double outer, double inner) {
    return std::min(1.0, std::max(0.0, (outer - distance) / (outer - inner)));
}

GridFunction psi(int j, const Ball& ball, const DiscreteSpace& space) {
    const double R = center_radius(ball);
    const double outer = radius(j, R);
    const double inner = radius(j + 1, R);
    const auto dist = center_distances(space, ball.center);
    GridFunction out(space.size(), 0.0);
    for (PointId i = 0; i < dist.size(); ++i) out[i] = cutoff_profile(dist[i], outer, inner);
    return out;
}

double CutoffFamily::slope(int j) const { return 1.0 / gap(j); }

CutoffFamily build_cutoff_family(const DiscreteSpace& space, const Ball& ball,
                                 std::vector<double> radii) {
    validate(ball);
    if (radii.size() < 2) throw InvalidInput("a cutoff family needs at least two radii");
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        if (!(radii[k] > radii[k + 1]) || !(radii[k + 1] > 0.0))
            throw InvalidInput("cutoff radii must be positive and strictly decreasing");

    CutoffFamily family;
    family.ball = ball;
    family.J_max = static_cast<int>(radii.size()) - 1;
    family.radii = std::move(radii);
    family.center_dist = center_distances(space, ball.center);
    const auto& dist = family.center_dist;
    for (int j = 1; j <= family.J_max; ++j) {
        GridFunction f(space.size(), 0.0);
        for (PointId i = 0; i < dist.size(); ++i)
            f[i] = cutoff_profile(dist[i], family.r(j), family.r(j + 1));
        family.functions.push_back(std::move(f));
    }
    for (int j = 1; j <= family.J_max + 1; ++j) {
        std::vector<PointId> members;
        for (PointId i = 0; i < dist.size(); ++i)
            if (dist[i] <= family.r(j)) members.push_back(i);
        family.nested_sets.push_back(std::move(members));
    }
    return family;
}

CutoffFamily build_cutoff_family(const DiscreteSpace& space, const Ball& ball, int J) {
    const double R = center_radius(ball);
    if (J < 1) throw InvalidInput("J must be >= 1");
    std::vector<double> radii;
    for (int j = 1; j <= J + 1; ++j) radii.push_back(radius(j, R));
    return build_cutoff_family(space, ball, std::move(radii));
}

int default_J(const Ball& ball, const DiscreteSpace& space) {
    const double R = center_radius(ball);
    const double h = space.mesh();
    if (R <= 4.0 * h) throw InvalidInput("radius below resolution");
    const int J = static_cast<int>(std::floor(std::log2(R / (8.0 * h)))) + 1;
    return std::clamp(J, 1, 40);
}

CutoffReport verify_cutoff_properties(const DiscreteSpace& space, const CutoffFamily& family,
                                      double p, std::optional<double> h_lip) {
    if (!(p >= 1.0)) throw InvalidInput("p must be >= 1");
    if (family.center_dist.size() != space.size())
        throw InvalidInput("cutoff family was built on a different space");
    CutoffReport report;
    report.h_lip = h_lip.value_or(2.0 * space.mesh());
    report.tau_grid = 2.0 * space.mesh() / report.h_lip;
    const double h = space.mesh();
    const auto& dist = family.center_dist;
    const double R = family.ball.radius;

    report.resolved_J = 0;
    for (int j = 1; j <= family.J_max; ++j) {
        if (family.gap(j) < h) break;
        report.resolved_J = j;
    }

    // mu(B*) for the energy check; B* is the open ball of radius 2R.
    double mu_star = 0.0;
    for (PointId i = 0; i < dist.size(); ++i)
        if (dist[i] < 2.0 * R) mu_star += space.mass(i);

    report.levels.resize(static_cast<std::size_t>(family.J_max));
    std::vector<std::vector<CutoffFailure>> failures(report.levels.size());
    parallel_for(report.levels.size(), [&](std::size_t idx) {
        const int j = static_cast<int>(idx) + 1;
        auto& level = report.levels[idx];
        auto& fails = failures[idx];
        level.j = j;
        level.slope = std::ldexp(1.0, j + 2) / R;
        level.below_resolution = j > report.resolved_J;
        if (level.below_resolution) return;

        const auto& f = family.function(j);
        const double exact_slope = family.slope(j);
        const double slope_bound = std::max(level.slope, exact_slope) * (1.0 + kUlpSlack);
        auto fail = [&](PointId x, const char* check, double value, double bound) {
            fails.push_back({j, x, check, value, bound});
        };

        for (PointId x = 0; x < f.size(); ++x) {
            if (!(f[x] >= 0.0 && f[x] <= 1.0)) {
                level.range_ok = false;
                fail(x, "range", f[x], 1.0);
            }
            if (dist[x] > family.r(j) && f[x] != 0.0) {
                level.support_ok = false;
                fail(x, "support", f[x], 0.0);
            }
            if (dist[x] <= family.r(j + 1) && f[x] != 1.0) {
                level.plateau_ok = false;
                fail(x, "plateau", f[x], 1.0);
            }
        }

        const auto lip = discrete_lip(space, f, report.h_lip);
        level.lip_bound = level.slope * (1.0 + report.tau_grid);
        double energy_sum = 0.0;
        for (PointId x = 0; x < f.size(); ++x) {
            level.max_lip = std::max(level.max_lip, lip.lip[x]);
            if (lip.lip[x] > level.lip_bound * (1.0 + kUlpSlack)) {
                level.lip_ok = false;
                fail(x, "discrete_lip", lip.lip[x], level.lip_bound);
            }
            if (dist[x] < 2.0 * R) energy_sum += space.mass(x) * std::pow(lip.lip[x], p);
        }

        // lip(psi_j) vanishes beyond distance h_lip from supp(psi_j), and is
        // at most the slope, so its p-mean over B* is bounded by the slope
        // times the measure of the enlarged ball B(y, r_j + h_lip).
        double enlarged = 0.0;
        const double reach = family.r(j) + report.h_lip * (1.0 + 1e-9);
        for (PointId x = 0; x < f.size(); ++x)
            if (dist[x] <= reach && dist[x] < 2.0 * R) enlarged += space.mass(x);
        level.energy = std::pow(energy_sum / mu_star, 1.0 / p);
        level.energy_bound = slope_bound * std::pow(enlarged / mu_star, 1.0 / p);
        if (level.energy > level.energy_bound * (1.0 + kUlpSlack)) {
            level.energy_ok = false;
            fail(0, "energy", level.energy, level.energy_bound);
        }

        // Exhaustive pairwise check over pairs with at least one point in the
        // support; pairs outside the support have zero increment.
        for (PointId x = 0; x < f.size(); ++x) {
            if (f[x] == 0.0) continue;
            const auto dx = space.distances_from(x);
            for (PointId z = 0; z < f.size(); ++z) {
                if (z == x || (f[z] != 0.0 && z < x)) continue;
                const double increment = std::abs(f[x] - f[z]);
                if (increment == 0.0) continue;
                const double q = increment / dx[z];
                level.max_pairwise = std::max(level.max_pairwise, q);
                if (increment > slope_bound * dx[z] + 1e-15) {
                    level.pairwise_ok = false;
                    fail(x, "pairwise_lipschitz", q, level.slope);
                }
            }
        }
    });
    for (auto& f : failures)
        report.failures.insert(report.failures.end(), f.begin(), f.end());
    return report;
}

}  // namespace sobdub
