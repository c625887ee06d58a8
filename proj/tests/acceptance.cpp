// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "golden_cases.hpp"
#include "oracles.hpp"
#include "sobdub/chain.hpp"
#include "sobdub/cli.hpp"
#include "sobdub/constants.hpp"
#include "sobdub/cutoffs.hpp"
#include "sobdub/error.hpp"
#include "sobdub/measures.hpp"
#include "sobdub/sobolev_opt.hpp"
#include "sobdub/subelliptic.hpp"

using namespace sobdub;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Criterion {
public:
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (failures_.size() < 4) failures_.push_back(what);
        }
    }
    void note(const std::string& text) { notes_.push_back(text); }

    Outcome outcome() const {
        std::ostringstream out;
        for (std::size_t i = 0; i < notes_.size(); ++i) out << (i ? "; " : "") << notes_[i];
        for (const auto& f : failures_) out << " | failed: " << f;
        return {pass_, out.str()};
    }

private:
    bool pass_ = true;
    std::vector<std::string> notes_;
    std::vector<std::string> failures_;
};

std::string fmt(double v, int digits = 6) {
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

// 1 ------------------------------------------------------------------------

Outcome constants_suite() {
    Criterion c;
    double worst = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        for (double sigma : {1.5, 2.0, 3.0, 5.0}) {
            const SobolevParams params{p, sigma};
            worst = std::max(worst, oracle::relative_error(series_S(sigma), oracle::series_S(sigma)));
            const double k1_log2 = oracle::log2_K1(p, sigma);
            worst = std::max(worst, oracle::relative_error(K1(params).log2, k1_log2));
            worst = std::max(worst, oracle::relative_error(K1(params).value(), std::exp2(k1_log2)));
            for (double cs : {0.03125, 0.5, 1.0, 3.0}) {
                const double ref = oracle::log2_doubling_constant(p, sigma, cs);
                const auto cd = doubling_constant(params, cs);
                worst = std::max(worst, std::abs(cd.log2 - ref) / std::max(1.0, std::abs(ref)));
                if (!cd.overflows())
                    worst = std::max(worst, oracle::relative_error(cd.value(), std::exp2(ref)));
            }
        }
    }
    c.require(worst <= 1e-12, "relative error " + fmt(worst));
    c.require(K1({2.0, 2.0}).value() == 16777216.0, "K1(2,2) != 2^24");
    c.note("max rel err " + fmt(worst, 3) + " over 16 (p, sigma) pairs");
    c.note("K1(2,2) = " + fmt(K1({2.0, 2.0}).value(), 10));
    return c.outcome();
}

// 2 ------------------------------------------------------------------------

Outcome cutoff_suite() {
    Criterion c;
    struct Case {
        std::string name;
        DiscreteSpace space;
        Ball ball;
    };
    std::vector<Case> cases;
    cases.push_back({"lebesgue 1D", build_grid(Box::interval(-2.5, 2.5), 4001, WeightFamily::lebesgue()),
                     Ball::open(Point{0.0, 0.0}, 1.0)});
    cases.push_back({"power 1D", build_grid(Box::interval(-1.0, 4.0), 2001, WeightFamily::power(1.0)),
                     Ball::open(Point{1.5, 0.0}, 0.8)});
    cases.push_back({"lebesgue 2D",
                     build_grid(Box::square(-2.5, 2.5), 81, WeightFamily::lebesgue(2)),
                     Ball::open(Point{0.0, 0.0}, 1.0)});
    cases.push_back({"gauss 2D", build_grid(Box::square(-2.0, 2.0), 61, WeightFamily::gaussian(1.0, 2)),
                     Ball::open(Point{0.2, -0.3}, 0.7)});
    int levels = 0;
    for (const auto& k : cases) {
        c.require(k.space.size() >= 1000, k.name + ": fewer than 1000 points");
        const int J = default_J(k.ball, k.space);
        const auto family = build_cutoff_family(k.space, k.ball, J);
        const auto report = verify_cutoff_properties(k.space, family, 2.0);
        c.require(report.pass(), k.name + ": " +
                                     (report.failures.empty() ? std::string()
                                                              : report.failures.front().check));
        for (const auto& level : report.levels) {
            if (level.below_resolution) continue;
            ++levels;
            const double slope = std::ldexp(1.0, level.j + 2) / k.ball.radius;
            c.require(level.max_pairwise <= slope * (1.0 + 1e-12),
                      k.name + ": pairwise quotient above 2^{j+2}/R at j=" + std::to_string(level.j));
            c.require(level.max_lip <= slope * (1.0 + report.tau_grid),
                      k.name + ": discrete lip above bound at j=" + std::to_string(level.j));
            c.require(report.tau_grid == 2.0 * k.space.mesh() / report.h_lip, k.name + ": tau_grid");
        }
        c.require(report.resolved_J == J, k.name + ": unresolved levels up to default_J");
    }
    c.note(std::to_string(cases.size()) + " spaces, " + std::to_string(levels) + " levels checked");
    return c.outcome();
}

// 3 ------------------------------------------------------------------------

Outcome chain_certificates() {
    Criterion c;
    struct Family {
        WeightFamily w;
        std::vector<Point> centers;
    };
    const std::vector<Point> line{{0.0, 0.0}, {0.3, 0.0}, {-1.2, 0.0}};
    const std::vector<Point> plane{{0.0, 0.0}, {0.3, -0.2}, {-1.0, 0.5}};
    std::vector<Family> families{{WeightFamily::lebesgue(1), line},
                                 {WeightFamily::lebesgue(2), plane},
                                 {WeightFamily::power(-0.5), line},
                                 {WeightFamily::power(0.0), line},
                                 {WeightFamily::power(1.0), line},
                                 {WeightFamily::power(2.0), line},
                                 {WeightFamily::exponential(1.0), line},
                                 {WeightFamily::gaussian(1.0), line}};
    const SobolevParams params{2.0, 2.0};
    int balls = 0;
    double worst_residual = 0.0;
    for (const auto& f : families) {
        for (const auto& y : f.centers) {
            for (double R : {0.25, 1.0, 3.0}) {
                const int dim = f.w.dimension;
                Box box{dim, {y[0] - 2.5 * R, dim == 2 ? y[1] - 2.5 * R : 0.0},
                        {y[0] + 2.5 * R, dim == 2 ? y[1] + 2.5 * R : 0.0}};
                const auto space = build_grid(box, dim == 1 ? 2001 : 201, f.w);
                const auto r = run_chain(space, Ball::open(y, R), params);
                const std::string tag = f.w.to_string() + " y=" + fmt(y[0]) + " R=" + fmt(R);
                ++balls;
                c.require(r.certificate && r.certificate->pass, tag + ": certificate");
                if (r.certificate) {
                    worst_residual = std::max(worst_residual, r.certificate->argmax_residual);
                    c.require(r.certificate->argmax_residual <= 1e-12, tag + ": argmax equality");
                }
                c.require(r.bound && std::log2(r.actual_doubling) <= r.bound->log2 + kLogSlack,
                          tag + ": doubling above theorem bound");
            }
        }
    }
    c.note(std::to_string(balls) + " balls, max argmax residual " + fmt(worst_residual, 3));
    return c.outcome();
}

// 4 ------------------------------------------------------------------------

Outcome analytic_doubling() {
    Criterion c;
    auto check = [&](const std::string& name, double value, double expected) {
        const double err = oracle::relative_error(value, expected);
        c.require(err <= 0.01, name + " ratio " + fmt(value) + " vs " + fmt(expected));
        c.note(name + " " + fmt(value, 5));
    };
    {
        const auto s = build_grid(Box::interval(-2.5, 2.5), 2001, WeightFamily::lebesgue());
        check("lebesgue 1D", doubling_ratio(s, Point{0.0, 0.0}, 1.0), 2.0);
    }
    {
        const auto s = build_grid(Box::square(-2.5, 2.5), 1001, WeightFamily::lebesgue(2));
        check("lebesgue 2D", doubling_ratio(s, Point{0.0, 0.0}, 1.0), 4.0);
    }
    {
        const auto s = build_grid(Box::interval(-2.5, 2.5), 2001, WeightFamily::power(1.0));
        check("power a=1", doubling_ratio(s, Point{0.0, 0.0}, 1.0), 4.0);
    }
    {
        const auto s = build_grid(Box::interval(-2.5, 2.5), 2001, WeightFamily::exponential(1.0));
        check("exp R=1", doubling_ratio(s, Point{0.0, 0.0}, 1.0), oracle::exp_ball(2.0) / oracle::exp_ball(1.0));
        c.require(std::abs(oracle::exp_ball(2.0) / oracle::exp_ball(1.0) - 2.0 * std::cosh(1.0)) < 1e-12,
                  "exp oracle");
    }
    return c.outcome();
}

// 5 ------------------------------------------------------------------------

Outcome non_doubling() {
    Criterion c;
    const SobolevParams params{2.0, 2.0};
    const double k1 = K1(params).value();
    const double exponent = (params.sigma - 1.0) / (params.p * params.sigma);
    double prev_c = 0.0, prev_lower = 0.0;
    std::string values;
    for (double R : {1.0, 2.0, 5.0, 10.0, 20.0}) {
        const auto space = build_grid(Box::interval(-2.5 * R, 2.5 * R), 2001, WeightFamily::exponential(1.0));
        const auto r = chain_ratios(space, Ball::open(Point{0.0, 0.0}, R), params);
        const double lower = std::pow(2.0 * std::cosh(R) / k1, exponent);
        c.require(r.c_min >= lower, "c_min " + fmt(r.c_min) + " < " + fmt(lower) + " at R=" + fmt(R));
        c.require(r.c_min > prev_c, "c_min not increasing at R=" + fmt(R));
        c.require(lower > prev_lower, "lower bound not increasing at R=" + fmt(R));
        prev_c = r.c_min;
        prev_lower = lower;
        values += (values.empty() ? "" : " ") + fmt(r.c_min, 4);
    }
    c.note("c_min at R=1,2,5,10,20: " + values);
    return c.outcome();
}

// 6 ------------------------------------------------------------------------

Outcome estimator() {
    Criterion c;
    const SobolevParams params{1.0, 2.0};
    const auto space = build_grid(Box::interval(-2.5, 2.5), 401, WeightFamily::lebesgue());
    const Ball ball = Ball::open(Point{0.0, 0.0}, 1.0);
    OptimizerConfig config;
    config.seed = 11;
    const auto a = estimate_lower_bound(space, ball, params, config);
    const double tent = oracle::tent_ratio(1.0, 2.0);
    c.require(a.best_ratio >= 0.3849 - 1e-3, "best ratio " + fmt(a.best_ratio));
    c.require(std::abs(tent - 0.3849) < 1e-4, "tent oracle " + fmt(tent));

    double worst_homogeneity = 0.0;
    for (double lambda : {-3.0, 0.001, 17.5, 1e6}) {
        GridFunction scaled = a.best_phi;
        for (auto& v : scaled.values) v *= lambda;
        const double base = sobolev_ratio(space, ball, a.best_phi, params);
        worst_homogeneity = std::max(
            worst_homogeneity, oracle::relative_error(sobolev_ratio(space, ball, scaled, params), base));
    }
    c.require(worst_homogeneity <= 1e-12, "0-homogeneity error " + fmt(worst_homogeneity));

    double worst_mass = 0.0;
    for (double lambda : {0.37, 1000.0}) {
        const auto scaled = estimate_lower_bound(space.with_scaled_masses(lambda), ball, params, config);
        worst_mass = std::max(worst_mass, oracle::relative_error(scaled.best_ratio, a.best_ratio));
    }
    c.require(worst_mass <= 1e-9, "mass scaling error " + fmt(worst_mass));

    const auto b = estimate_lower_bound(space, ball, params, config);
    c.require(a.best_ratio == b.best_ratio && a.best_phi.values == b.best_phi.values && a.trace == b.trace,
              "two runs with the same seed differ");

    c.note("best " + fmt(a.best_ratio, 5) + " (" + a.best_kind + ") vs tent " + fmt(tent, 5));
    c.note("homogeneity " + fmt(worst_homogeneity, 3) + ", mass scaling " + fmt(worst_mass, 3));
    return c.outcome();
}

// 7 ------------------------------------------------------------------------

Outcome subelliptic_suite() {
    Criterion c;
    const double X = 1.05;
    const double Y = X * X / std::numbers::pi;
    const std::size_t n = 401;
    const auto grid = build_grid(Box{2, {-X, -Y}, {X, Y}}, n, WeightFamily::lebesgue(2));
    const auto space = subunit_metric(grid, MatrixField::grushin(), 5);
    const auto origin = space.locate({0.0, 0.0});
    const auto d = space.distances_from(origin);
    const auto& g = *space.grid();
    auto node = [&](double x, double y) {
        const auto i = static_cast<std::size_t>(std::lround((x + X) / g.spacing[0]));
        const auto k = static_cast<std::size_t>(std::lround((y + Y) / g.spacing[1]));
        return g.index(i, k);
    };

    double worst_h = 0.0;
    for (double x : {0.3, 0.6, 0.9, -0.45}) {
        const auto id = node(x, 0.0);
        worst_h = std::max(worst_h, oracle::relative_error(d[id], std::abs(space.point(id)[0])));
    }
    c.require(worst_h <= 0.02, "horizontal distance error " + fmt(worst_h));

    // Offsets in grid steps from the centre node; (2a, 4b) is the exact
    // dilate of (a, b) under (x, y) -> (2x, 4y).
    double worst_dil = 0.0;
    const long centre_i = static_cast<long>(n / 2);
    auto offset = [&](long a, long b) {
        return g.index(static_cast<std::size_t>(centre_i + a), static_cast<std::size_t>(centre_i + b));
    };
    const std::pair<long, long> probes[] = {{38, 11}, {19, 17}, {29, 29}, {48, 6}, {-38, -23}, {10, 40}};
    for (auto [a, b] : probes)
        worst_dil = std::max(worst_dil, oracle::relative_error(d[offset(2 * a, 4 * b)], 2.0 * d[offset(a, b)]));
    c.require(worst_dil <= 0.03, "dilation error " + fmt(worst_dil));

    std::string ratios;
    for (double R : {0.2, 0.35, 0.5}) {
        const double ratio = measure(space, d, 2.0 * R, false) / measure(space, d, R, false);
        c.require(std::abs(ratio - 8.0) <= 0.4, "doubling " + fmt(ratio) + " at R=" + fmt(R));
        ratios += (ratios.empty() ? "" : " ") + fmt(ratio, 4);
    }

    const SubellipticParams params{2.0, 2.0, 8.0, 1.0, 2.0, 0.5};
    const auto cert = subelliptic_chain_certify(space, MatrixField::grushin(), Ball::open(origin, 0.15), params);
    c.require(cert.pass, "subelliptic certificate");
    c.require(cert.bound_holds, "limit bound below actual ratio");
    c.require(cert.family_check.pass(), "accumulating family checks");

    c.require(subelliptic_beta(params) == 1.5, "beta(2,2,8) != 1.5");
    bool rejected = false;
    try {
        subelliptic_beta(SubellipticParams{2.0, 2.0, 4.0, 1.0, 2.0, 0.5});
    } catch (const InvalidInput&) {
        rejected = true;
    }
    c.require(rejected, "s = p sigma' accepted");

    c.note("horizontal err " + fmt(worst_h, 3) + ", dilation err " + fmt(worst_dil, 3));
    c.note("doubling at R=0.2,0.35,0.5: " + ratios);
    c.note("certificate J=" + std::to_string(cert.J) + " actual " + fmt(cert.actual_ratio, 4) +
           " <= 2^" + fmt(cert.limit_bound.log2, 4));
    return c.outcome();
}

// 8 ------------------------------------------------------------------------

Outcome cli_contract() {
    Criterion c;
    int matched = 0;
    for (const auto& gc : golden::cases()) {
        std::ostringstream out1, out2, err;
        const int code1 = cli::run(gc.args, out1, err);
        const int code2 = cli::run(gc.args, out2, err);
        c.require(code1 == 0 && code2 == 0, gc.name + ": exit " + std::to_string(code1));
        c.require(out1.str() == out2.str(), gc.name + ": two runs differ");
        const auto expected = golden::read(gc.name);
        const auto actual = golden::normalize(out1.str());
        c.require(expected && *expected == actual, gc.name + ": differs from golden file");
        if (expected && *expected == actual) ++matched;
    }
    int codes = 0;
    for (const auto& bad : golden::malformed()) {
        std::ostringstream out, err;
        const int code = cli::run(bad.args, out, err);
        c.require(code == bad.expected_exit,
                  bad.name + ": exit " + std::to_string(code) + " expected " + std::to_string(bad.expected_exit));
        c.require(bad.expected_exit == 0 || !err.str().empty(), bad.name + ": no diagnostic");
        ++codes;
    }
    c.note(std::to_string(matched) + "/" + std::to_string(golden::cases().size()) +
           " golden outputs byte-identical, " + std::to_string(codes) + " exit-code cases");
    return c.outcome();
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 constants", constants_suite},
        {"2 cutoffs", cutoff_suite},
        {"3 chain certificate", chain_certificates},
        {"4 analytic doubling", analytic_doubling},
        {"5 non-doubling contrapositive", non_doubling},
        {"6 estimator", estimator},
        {"7 subelliptic", subelliptic_suite},
        {"8 cli", cli_contract},
    };
    const double limits[] = {1.0, 10.0, 30.0, 1e9, 1e9, 1e9, 120.0, 1e9};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > limits[i]) {
            o.pass = false;
            o.detail += " | failed: runtime " + fmt(seconds, 3) + " s over " + fmt(limits[i]) + " s";
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << criteria[i].first << "  ["
                  << fmt(seconds, 3) << " s]  " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed")
              << std::endl;
    return failed;
}
