#include "sobdub/sobolev_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "sobdub/cutoffs.hpp"
#include "sobdub/error.hpp"
#include "sobdub/parallel.hpp"

namespace sobdub {

namespace {

constexpr int kMaxHalvings = 30;
constexpr int kStagnationLimit = 5;

// The Sobolev quotient restricted to the points of an open ball. Values of
// phi outside the ball are pinned to zero, so the free variables are the
// interior values only.
class BallProblem {
public:
    BallProblem(const DiscreteSpace& space, const Ball& ball, const SobolevParams& params,
                double h_lip)
        : R_(ball.radius), p_(params.p), q_(params.p * params.sigma) {
        const auto dist = center_distances(space, ball.center);
        local_.assign(space.size(), -1);
        double mu = 0.0;
        for (PointId i = 0; i < dist.size(); ++i) {
            if (dist[i] < ball.radius) {
                local_[i] = static_cast<long>(inside_.size());
                inside_.push_back(i);
                mu += space.mass(i);
            }
        }
        if (inside_.empty()) throw EmptyBall();
        for (PointId i : inside_) weight_.push_back(space.mass(i) / mu);
        neighbors_.resize(inside_.size());
        for (std::size_t a = 0; a < inside_.size(); ++a) {
            for (const auto& nb : space.neighbors_within(inside_[a], h_lip)) {
                if (!(nb.distance > 0.0)) continue;
                neighbors_[a].push_back({local_[nb.id], nb.distance});
            }
        }
    }

    std::size_t size() const { return inside_.size(); }
    const std::vector<PointId>& inside() const { return inside_; }

    std::vector<double> restrict(const GridFunction& phi) const {
        std::vector<double> out(inside_.size());
        for (std::size_t a = 0; a < inside_.size(); ++a) out[a] = phi[inside_[a]];
        return out;
    }

    GridFunction extend(const std::vector<double>& values, std::size_t n) const {
        GridFunction out(n, 0.0);
        for (std::size_t a = 0; a < inside_.size(); ++a) out[inside_[a]] = values[a];
        return out;
    }

    struct Value {
        SobolevQuotient parts;
        double log_ratio = -std::numeric_limits<double>::infinity();
        std::vector<double> gradient;  // of log ratio
    };

    // eps > 0 replaces |t| by sqrt(t^2 + eps^2) in the two mean terms.
    Value evaluate(const std::vector<double>& phi, double eps, bool with_gradient) const {
        const std::size_t n = phi.size();
        std::vector<double> s(n), ds(n);
        for (std::size_t a = 0; a < n; ++a) {
            if (eps > 0.0) {
                s[a] = std::sqrt(phi[a] * phi[a] + eps * eps);
                ds[a] = phi[a] / s[a];
            } else {
                s[a] = std::abs(phi[a]);
                ds[a] = phi[a] > 0.0 ? 1.0 : (phi[a] < 0.0 ? -1.0 : 0.0);
            }
        }
        std::vector<double> g(n, 0.0), g_dist(n, 0.0), g_sign(n, 0.0);
        std::vector<long> g_arg(n, -1);
        std::vector<bool> g_set(n, false);
        for (std::size_t a = 0; a < n; ++a) {
            for (const auto& [b, d] : neighbors_[a]) {
                const double other = b >= 0 ? phi[static_cast<std::size_t>(b)] : 0.0;
                const double delta = phi[a] - other;
                const double slope = std::abs(delta) / d;
                if (!g_set[a] || slope > g[a]) {
                    g[a] = slope;
                    g_arg[a] = b;
                    g_dist[a] = d;
                    g_sign[a] = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
                    g_set[a] = true;
                }
            }
        }
        double sum_q = 0.0, sum_gp = 0.0, sum_p = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            sum_q += weight_[a] * std::pow(s[a], q_);
            sum_gp += weight_[a] * std::pow(g[a], p_);
            sum_p += weight_[a] * std::pow(s[a], p_);
        }
        Value v;
        v.parts.numerator = std::pow(sum_q, 1.0 / q_);
        const double G = std::pow(sum_gp, 1.0 / p_);
        v.parts.gradient_term = R_ * G;
        v.parts.mass_term = std::pow(sum_p, 1.0 / p_);
        const double denom = v.parts.gradient_term + v.parts.mass_term;
        v.parts.ratio = v.parts.numerator / denom;
        v.log_ratio = std::log(v.parts.numerator) - std::log(denom);
        if (!with_gradient || !std::isfinite(v.log_ratio)) return v;

        v.gradient.assign(n, 0.0);
        const double L = v.parts.mass_term;
        for (std::size_t a = 0; a < n; ++a) {
            const double dlogN = weight_[a] * std::pow(s[a], q_ - 1.0) * ds[a] / sum_q;
            const double dL = L > 0.0 ? std::pow(L, 1.0 - p_) * weight_[a] *
                                            std::pow(s[a], p_ - 1.0) * ds[a]
                                      : 0.0;
            v.gradient[a] += dlogN - dL / denom;
        }
        if (G > 0.0) {
            for (std::size_t a = 0; a < n; ++a) {
                if (g_arg[a] == -1 && !g_set[a]) continue;
                if (g[a] == 0.0 && p_ > 1.0) continue;
                const double c = std::pow(G, 1.0 - p_) * weight_[a] *
                                 (p_ > 1.0 ? std::pow(g[a], p_ - 1.0) : 1.0);
                const double dg = g_sign[a] / g_dist[a];
                v.gradient[a] -= R_ * c * dg / denom;
                if (g_arg[a] >= 0) v.gradient[static_cast<std::size_t>(g_arg[a])] += R_ * c * dg / denom;
            }
        }
        return v;
    }

private:
    double R_;
    double p_;
    double q_;
    std::vector<PointId> inside_;
    std::vector<long> local_;
    std::vector<double> weight_;
    std::vector<std::vector<std::pair<long, double>>> neighbors_;
};

bool normalize(std::vector<double>& phi) {
    double top = 0.0;
    for (double v : phi) top = std::max(top, std::abs(v));
    if (!(top > 0.0) || !std::isfinite(top)) return false;
    for (double& v : phi) v /= top;
    return true;
}

struct SeedRun {
    SeedResult result;
    std::vector<double> best_phi;
    std::vector<double> trace;  // best-so-far within this seed
};

SeedRun ascend(const BallProblem& problem, std::string kind, std::vector<double> phi,
               double eps, const OptimizerConfig& config) {
    SeedRun run;
    run.result.kind = std::move(kind);
    if (!normalize(phi)) throw InvalidInput("seed function vanishes on the ball");

    double best = problem.evaluate(phi, 0.0, false).parts.ratio;
    run.result.initial_ratio = best;
    run.best_phi = phi;
    run.trace.push_back(best);

    auto current = problem.evaluate(phi, eps, true);
    double step = config.step;
    int stagnant = 0;
    bool retried = false;
    for (int it = 0; it < config.max_iters; ++it) {
        double gmax = 0.0;
        for (double gv : current.gradient) gmax = std::max(gmax, std::abs(gv));
        if (!(gmax > 0.0) || !std::isfinite(gmax)) break;

        bool accepted = false;
        std::vector<double> trial;
        BallProblem::Value next;
        for (int halving = 0; halving < kMaxHalvings; ++halving, step /= 2.0) {
            trial = phi;
            for (std::size_t a = 0; a < trial.size(); ++a)
                trial[a] += step * current.gradient[a] / gmax;
            if (!normalize(trial)) continue;
            next = problem.evaluate(trial, eps, true);
            if (std::isfinite(next.log_ratio) && next.log_ratio > current.log_ratio) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Restart once from the current iterate with a fresh step.
            ++run.result.restarts;
            if (retried) break;
            retried = true;
            step = config.step;
            continue;
        }
        const double improvement = next.log_ratio - current.log_ratio;
        phi = std::move(trial);
        current = std::move(next);
        step = std::min(1.0, step * 1.5);
        ++run.result.iterations;

        const double exact = problem.evaluate(phi, 0.0, false).parts.ratio;
        if (exact > best) {
            best = exact;
            run.best_phi = phi;
        }
        run.trace.push_back(best);
        stagnant = improvement < config.tolerance ? stagnant + 1 : 0;
        if (stagnant >= kStagnationLimit) break;
    }
    run.result.final_ratio = best;
    return run;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (restarts < 0) throw InvalidInput("restarts must be nonnegative");
    if (max_iters < 0) throw InvalidInput("max_iters must be nonnegative");
    if (!(step > 0.0)) throw InvalidInput("step must be positive");
    if (!(smoothing >= 0.0)) throw InvalidInput("smoothing must be nonnegative");
    if (!(tolerance >= 0.0)) throw InvalidInput("tolerance must be nonnegative");
}

SobolevQuotient sobolev_quotient(const DiscreteSpace& space, const Ball& ball,
                                 const GridFunction& phi, const SobolevParams& params,
                                 std::optional<double> h_lip) {
    params.validate();
    validate(ball);
    if (phi.size() != space.size()) throw InvalidInput("grid function size does not match space");
    if (!phi.is_finite()) throw InvalidInput("grid function has non-finite values");
    if (!vanishes_outside(space, phi, ball)) throw InvalidInput("not zero-boundary");
    if (phi.support().empty()) throw InvalidInput("test function is identically zero");

    const auto dist = center_distances(space, ball.center);
    const double mu = measure(space, dist, ball.radius, false);
    const auto g = discrete_lip(space, phi, h_lip.value_or(2.0 * space.mesh())).lip;
    const double p = params.p;
    const double q = p * params.sigma;
    double sum_q = 0.0, sum_gp = 0.0, sum_p = 0.0;
    for (PointId i = 0; i < space.size(); ++i) {
        if (!(dist[i] < ball.radius)) continue;
        const double w = space.mass(i) / mu;
        sum_q += w * std::pow(std::abs(phi[i]), q);
        sum_gp += w * std::pow(g[i], p);
        sum_p += w * std::pow(std::abs(phi[i]), p);
    }
    SobolevQuotient out;
    out.numerator = std::pow(sum_q, 1.0 / q);
    out.gradient_term = ball.radius * std::pow(sum_gp, 1.0 / p);
    out.mass_term = std::pow(sum_p, 1.0 / p);
    out.ratio = out.numerator / (out.gradient_term + out.mass_term);
    return out;
}

double sobolev_ratio(const DiscreteSpace& space, const Ball& ball, const GridFunction& phi,
                     const SobolevParams& params, std::optional<double> h_lip) {
    return sobolev_quotient(space, ball, phi, params, h_lip).ratio;
}

EstimateResult estimate_lower_bound(const DiscreteSpace& space, const Ball& ball,
                                    const SobolevParams& params, const OptimizerConfig& config) {
    params.validate();
    config.validate();
    validate(ball);
    const BallProblem problem(space, ball, params, 2.0 * space.mesh());
    if (problem.size() < 8) throw InvalidInput("ball too small: fewer than 8 interior points");

    const double R = ball.radius;
    const auto dist = center_distances(space, ball.center);
    std::vector<std::pair<std::string, GridFunction>> seeds;

    GridFunction tent(space.size(), 0.0);
    for (PointId i = 0; i < space.size(); ++i)
        if (dist[i] < R) tent[i] = 1.0 - dist[i] / R;
    seeds.emplace_back("tent", std::move(tent));

    int J = 0;
    try {
        J = default_J(ball, space);
    } catch (const InvalidInput&) {
        J = 0;
    }
    for (int j = 1; j <= J; ++j) seeds.emplace_back("psi_" + std::to_string(j), psi(j, ball, space));

    std::mt19937_64 rng(config.seed);
    std::vector<PointId> half;
    for (PointId i = 0; i < space.size(); ++i)
        if (dist[i] < R / 2.0) half.push_back(i);
    if (half.empty()) half = problem.inside();
    for (int k = 0; k < config.restarts; ++k) {
        std::uniform_int_distribution<std::size_t> pick(0, half.size() - 1);
        std::uniform_real_distribution<double> width_dist(R / 8.0, R / 2.0);
        const PointId c = half[pick(rng)];
        const double width = width_dist(rng);
        const auto dc = space.distances_from(c);
        GridFunction bump(space.size(), 0.0);
        for (PointId i = 0; i < space.size(); ++i)
            if (dist[i] < R) bump[i] = std::exp(-dc[i] * dc[i] / (2.0 * width * width));
        seeds.emplace_back("bump_" + std::to_string(k), std::move(bump));
    }

    const bool smooth = params.p == 1.0 || params.p * params.sigma < 2.0;
    const double eps = smooth ? config.smoothing : 0.0;
    std::vector<SeedRun> runs(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        runs[k] = ascend(problem, seeds[k].first, problem.restrict(seeds[k].second), eps, config);
    });

    EstimateResult result;
    result.seed = config.seed;
    result.best_ratio = -1.0;
    std::size_t best_index = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        for (double t : runs[k].trace) {
            result.trace.push_back(std::max(t, result.trace.empty() ? t : result.trace.back()));
        }
        if (runs[k].result.final_ratio > result.best_ratio) {
            result.best_ratio = runs[k].result.final_ratio;
            best_index = k;
        }
        result.iterations += runs[k].result.iterations;
        result.seeds.push_back(runs[k].result);
    }
    result.best_kind = runs[best_index].result.kind;
    result.best_phi = problem.extend(runs[best_index].best_phi, space.size());
    return result;
}

}  // namespace sobdub
