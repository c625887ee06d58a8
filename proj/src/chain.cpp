#include "sobdub/chain.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sobdub/cutoffs.hpp"
#include "sobdub/error.hpp"

namespace sobdub {

ChainReport chain_ratios(const DiscreteSpace& space, const Ball& ball,
                         const SobolevParams& params, std::optional<int> J) {
    params.validate();
    validate(ball);
    const int levels = J.value_or(default_J(ball, space));
    if (levels < 1) throw InvalidInput("J must be >= 1");

    const double R = ball.radius;
    const auto dist = center_distances(space, ball.center);

    ChainReport report;
    report.ball = ball;
    report.params = params;
    report.J = levels;
    report.mu_ball = measure(space, dist, R, false);
    report.mu_star = measure(space, dist, 2.0 * R, false);

    std::vector<double> mu(static_cast<std::size_t>(levels) + 1);
    for (int j = 1; j <= levels + 1; ++j) {
        try {
            mu[static_cast<std::size_t>(j - 1)] = measure(space, dist, radius(j, R), true);
        } catch (const EmptyBall&) {
            throw EmptyBall("resolution too coarse: B_" + std::to_string(j) + " has no points");
        }
    }
    report.mu_last = mu.back();

    const double p = params.p;
    const double ps = p * params.sigma;
    const double log_star = std::log(report.mu_star);
    report.log_c_min = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= levels; ++j) {
        ChainRow row;
        row.j = j;
        row.mu = mu[static_cast<std::size_t>(j - 1)];
        const double log_m = std::log(row.mu) - log_star;
        const double log_m_next = std::log(mu[static_cast<std::size_t>(j)]) - log_star;
        row.m = std::exp(log_m);
        row.a_next = std::exp(log_m_next / ps);
        row.log_rho = log_m_next / ps - (j + 4) * std::numbers::ln2 - log_m / p;
        row.rho = std::exp(row.log_rho);
        if (row.log_rho > report.log_c_min) {
            report.log_c_min = row.log_rho;
            report.argmax_j = j;
        }
        report.rows.push_back(row);
    }
    report.c_min = std::exp(report.log_c_min);
    report.actual_doubling = report.mu_star / report.mu_ball;
    return report;
}

double minimal_chain_constant(const ChainReport& report) {
    if (report.rows.empty()) throw InvalidInput("chain report has no rows");
    return report.c_min;
}

ChainCertificate certify_finite_bound(const ChainReport& report) {
    if (report.rows.empty()) throw InvalidInput("chain report has no rows");
    const double sigma = report.params.sigma;
    const double sp = sigma * report.params.p;
    const int J = report.J;

    ChainCertificate cert;
    const double tail = std::pow(sigma, -J);
    cert.log_lhs = (1.0 - tail) * std::log(report.mu_star) + tail * std::log(report.mu_last);
    double log_C = 0.0;
    for (int j = 1; j <= J; ++j)
        log_C += (sp * report.log_c_min + sp * (j + 4) * std::numbers::ln2) / std::pow(sigma, j);
    cert.log_rhs = log_C + std::log(report.rows.front().mu);

    const auto& top = report.rows.at(static_cast<std::size_t>(report.argmax_j - 1));
    const double attained =
        report.c_min * std::ldexp(1.0, top.j + 4) * std::pow(top.m, 1.0 / report.params.p);
    cert.argmax_residual = std::abs(top.a_next - attained) / top.a_next;
    cert.pass = cert.log_lhs <= cert.log_rhs + kLogSlack;
    return cert;
}

PositiveConstant theorem_bound(const ChainReport& report) {
    if (report.rows.empty()) throw InvalidInput("chain report has no rows");
    return doubling_constant_from_log(report.params, report.log_c_min);
}

ChainReport run_chain(const DiscreteSpace& space, const Ball& ball, const SobolevParams& params,
                      std::optional<int> J) {
    auto report = chain_ratios(space, ball, params, J);
    report.certificate = certify_finite_bound(report);
    report.bound = theorem_bound(report);
    return report;
}

double sobolev_lower_bound(double doubling, const SobolevParams& params) {
    params.validate();
    if (!(doubling > 0.0)) throw InvalidInput("doubling ratio must be positive");
    return std::exp2((std::log2(doubling) - K1(params).log2) / params.constant_exponent());
}

double sobolev_lower_bound_from_doubling(const DiscreteSpace& space, const Center& center,
                                         double R, const SobolevParams& params) {
    return sobolev_lower_bound(doubling_ratio(space, center, R), params);
}

}  // namespace sobdub
