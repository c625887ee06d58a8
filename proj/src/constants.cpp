#include "sobdub/constants.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sobdub/error.hpp"

namespace sobdub {

namespace {

// exp2 overflows a double past this exponent.
constexpr double kMaxLog2 = 1023.0;

}  // namespace

void SobolevParams::validate() const {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("p must satisfy 1 <= p < inf");
    if (!(sigma > 1.0) || !std::isfinite(sigma))
        throw InvalidInput("sigma must satisfy 1 < sigma < inf");
}

void SubellipticParams::validate() const {
    sobolev().validate();
    if (!(K >= 0.0) || !std::isfinite(K)) throw InvalidInput("K must be nonnegative");
    if (!(N > 1.0) || !std::isfinite(N)) throw InvalidInput("N must be > 1");
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidInput("nu must lie in (0, 1)");
    if (!(s >= 1.0) || !std::isfinite(s)) throw InvalidInput("s must be >= 1");
}

double PositiveConstant::value() const { return std::exp2(log2); }

double PositiveConstant::ln() const { return log2 * std::numbers::ln2; }

bool PositiveConstant::overflows() const { return log2 > kMaxLog2; }

double series_S(double sigma) {
    if (!(sigma > 1.0) || !std::isfinite(sigma)) throw InvalidInput("sigma must be > 1");
    const double d = sigma - 1.0;
    return (5.0 * sigma - 4.0) / (d * d);
}

PositiveConstant K1(const SobolevParams& params) {
    params.validate();
    return {params.sigma * params.p * series_S(params.sigma)};
}

PositiveConstant doubling_constant_from_log(const SobolevParams& params, double log_c) {
    params.validate();
    if (!std::isfinite(log_c)) throw InvalidInput("constant c must be positive and finite");
    return {params.constant_exponent() * log_c / std::numbers::ln2 + K1(params).log2};
}

PositiveConstant doubling_constant(const SobolevParams& params, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("constant c must be positive and finite");
    params.validate();
    return {params.constant_exponent() * std::log2(c) + K1(params).log2};
}

double subelliptic_beta(const SubellipticParams& params) {
    params.sobolev().validate();
    if (!(params.s > 0.0)) throw InvalidInput("s must be positive");
    const double beta = params.sigma * (1.0 - params.p / params.s);
    if (!(params.s > params.p * params.sigma_dual()) || !(beta > 1.0))
        throw InvalidInput("beta <= 1: iteration diverges (need s > p sigma' = " +
                           std::to_string(params.p * params.sigma_dual()) + ")");
    return beta;
}

PositiveConstant subelliptic_doubling_constant(const SubellipticParams& params) {
    params.validate();
    const double beta = subelliptic_beta(params);
    const double ps = params.p * params.sigma;
    const double b1 = beta - 1.0;
    return {ps / b1 * std::log2(params.K + 1.0) + ps * beta / (b1 * b1) * std::log2(params.N)};
}

}  // namespace sobdub
