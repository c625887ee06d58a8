#pragma once

// Independent reference values: brute-force partial sums, telescoped
// remainders and closed-form integrals. Nothing here calls the library.

#include <cmath>
#include <numbers>

namespace oracle {

inline constexpr int kTerms = 60;

/// sum_{j=J+1}^inf (a j + b) x^j for 0 < x < 1, from
/// sum_{j>J} x^j = x^{J+1}/(1-x) and sum_{j>J} j x^j = x^{J+1}((J+1) - J x)/(1-x)^2.
inline long double linear_geometric_tail(long double a, long double b, long double x, int J) {
    const long double lead = std::pow(x, J + 1);
    const long double plain = lead / (1.0L - x);
    const long double weighted = lead * ((J + 1) - J * x) / ((1.0L - x) * (1.0L - x));
    return a * weighted + b * plain;
}

/// sum_{j=1}^{terms} (a j + b) x^j, term by term.
inline long double linear_geometric_partial(long double a, long double b, long double x,
                                            int terms = kTerms) {
    long double sum = 0.0L;
    long double power = 1.0L;
    for (int j = 1; j <= terms; ++j) {
        power *= x;
        sum += (a * j + b) * power;
    }
    return sum;
}

/// Plain 60-term partial sum of (j + 4) / sigma^j.
inline double series_S_partial(double sigma) {
    return static_cast<double>(linear_geometric_partial(1, 4, 1.0L / sigma));
}

/// 60-term partial sum plus its telescoped remainder.
inline double series_S(double sigma) {
    const long double x = 1.0L / sigma;
    return static_cast<double>(linear_geometric_partial(1, 4, x) +
                               linear_geometric_tail(1, 4, x, kTerms));
}

/// log2 of prod_j 2^{sigma p (j+4) / sigma^j}.
inline double log2_K1(double p, double sigma) { return sigma * p * series_S(sigma); }

/// log2 of prod_j (c^{sigma p})^{1/sigma^j} * K1.
inline double log2_doubling_constant(double p, double sigma, double c) {
    const long double x = 1.0L / sigma;
    const long double geometric = linear_geometric_partial(0, 1, x) + linear_geometric_tail(0, 1, x, kTerms);
    return static_cast<double>(sigma * p * geometric * std::log2(static_cast<long double>(c))) +
           log2_K1(p, sigma);
}

/// log2 of prod_j [(K+1) N^j]^{p sigma / beta^j}.
inline double log2_subelliptic_constant(double p, double sigma, double beta, double K, double N) {
    const long double x = 1.0L / beta;
    const long double plain = linear_geometric_partial(0, 1, x) + linear_geometric_tail(0, 1, x, kTerms);
    const long double weighted = linear_geometric_partial(1, 0, x) + linear_geometric_tail(1, 0, x, kTerms);
    return static_cast<double>(p * sigma *
                               (plain * std::log2(static_cast<long double>(K) + 1.0L) +
                                weighted * std::log2(static_cast<long double>(N))));
}

inline double relative_error(double value, double reference) {
    return std::abs(value - reference) / std::abs(reference);
}

/// mu(B(0, R)) on R with density exp(x): e^R - e^{-R}.
inline double exp_ball(double R) { return std::exp(R) - std::exp(-R); }

/// Sobolev quotient of the tent 1 - |x| on B(0,1) in Lebesgue R^1:
/// int_{-1}^{1} (1-|x|)^q dx / 2 = 1 / (q + 1).
inline double tent_ratio(double p, double sigma) {
    const double ps = p * sigma;
    const double numerator = std::pow(1.0 / (ps + 1.0), 1.0 / ps);
    const double gradient = 1.0;
    const double mass = std::pow(1.0 / (p + 1.0), 1.0 / p);
    return numerator / (gradient + mass);
}

/// Grushin control distance from the origin to (0, y): sqrt(2 pi |y|).
inline double grushin_vertical(double y) { return std::sqrt(2.0 * std::numbers::pi * std::abs(y)); }

}  // namespace oracle
