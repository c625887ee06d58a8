#pragma once

// Explicit constants of the Sobolev-to-doubling iteration, in plain and
// base-2 logarithmic form.

namespace sobdub {

/// Exponents of a weak (p sigma, p)-Sobolev inequality: p >= 1, sigma > 1.
struct SobolevParams {
    double p = 2.0;
    double sigma = 2.0;

    void validate() const;
    /// p sigma / (sigma - 1), the power carried by the Sobolev constant.
    double constant_exponent() const { return p * sigma / (sigma - 1.0); }
};

/// Parameters of the subelliptic variant. Requires s > p sigma' with
/// sigma' = sigma / (sigma - 1), K >= 0, N > 1 and 0 < nu < 1.
struct SubellipticParams {
    double p = 2.0;
    double sigma = 2.0;
    double s = 8.0;
    double K = 1.0;
    double N = 2.0;
    double nu = 0.5;

    void validate() const;
    SobolevParams sobolev() const { return {p, sigma}; }
    double sigma_dual() const { return sigma / (sigma - 1.0); }
};

/// A positive constant stored by its base-2 logarithm so that comparisons
/// stay exact when the plain value overflows.
struct PositiveConstant {
    double log2 = 0.0;

    double value() const;
    double ln() const;
    bool overflows() const;
};

/// Sum over j >= 1 of (j + 4) / sigma^j, equal to (5 sigma - 4) / (sigma - 1)^2.
double series_S(double sigma);

/// K1(sigma, p) = 2^(sigma p S(sigma)).
PositiveConstant K1(const SobolevParams& params);

/// C_D = c^(p sigma / (sigma - 1)) K1(sigma, p).
PositiveConstant doubling_constant(const SobolevParams& params, double c);

/// Same, with c given by its natural logarithm.
PositiveConstant doubling_constant_from_log(const SobolevParams& params, double log_c);

/// beta = sigma (1 - p / s). Throws InvalidInput when beta <= 1.
double subelliptic_beta(const SubellipticParams& params);

/// (K + 1)^(p sigma / (beta - 1)) * N^(p sigma beta / (beta - 1)^2).
PositiveConstant subelliptic_doubling_constant(const SubellipticParams& params);

}  // namespace sobdub
