#pragma once

// Per-ball form of the Sobolev-to-doubling iteration. For B = B(y, R),
// B* = B(y, 2R) (open) and the closed sets B_j = {d(x, y) <= r_j}:
//
//   m_j     = mu(B_j) / mu(B*)
//   a_{j+1} = m_{j+1}^(1 / (p sigma))
//   rho_j   = a_{j+1} / (2^(j+4) m_j^(1/p))
//
// c_min = max_j rho_j is the smallest constant satisfying every step
// a_{j+1} <= c 2^(j+4) m_j^(1/p), j = 1..J, and it feeds the telescoped
// bound mu(B*) <= c^(p sigma / (sigma - 1)) K1 mu(B).

#include <optional>
#include <vector>

#include "sobdub/constants.hpp"
#include "sobdub/space.hpp"

namespace sobdub {

struct ChainRow {
    int j = 0;
    double mu = 0.0;      // mu(B_j)
    double m = 0.0;       // mu(B_j) / mu(B*)
    double a_next = 0.0;  // m_{j+1}^(1 / (p sigma))
    double rho = 0.0;
    double log_rho = 0.0;
};

struct ChainCertificate {
    double log_lhs = 0.0;
    double log_rhs = 0.0;
    /// Relative residual of the step inequality at the argmax row.
    double argmax_residual = 0.0;
    bool pass = false;
};

struct ChainReport {
    Ball ball;
    SobolevParams params;
    int J = 0;
    std::vector<ChainRow> rows;  // j = 1..J
    double mu_ball = 0.0;        // mu(B), open
    double mu_star = 0.0;        // mu(B*), open
    double mu_last = 0.0;        // mu(B_{J+1})
    double c_min = 0.0;
    double log_c_min = 0.0;
    int argmax_j = 0;
    std::optional<ChainCertificate> certificate;
    double actual_doubling = 0.0;               // mu(B*) / mu(B)
    std::optional<PositiveConstant> bound;      // doubling_constant(params, c_min)
};

/// Log-space slack for certificate comparisons.
inline constexpr double kLogSlack = 1e-9;

/// Measures, ratios and c_min for j = 1..J. J defaults to default_J.
/// Throws EmptyBall("resolution too coarse") if B_{J+1} has no points.
ChainReport chain_ratios(const DiscreteSpace& space, const Ball& ball,
                         const SobolevParams& params, std::optional<int> J = std::nullopt);

/// max_j rho_j (already stored in the report by chain_ratios).
double minimal_chain_constant(const ChainReport& report);

/// The telescoped finite-J inequality in log space:
///   (1 - sigma^-J) log mu(B*) + sigma^-J log mu(B_{J+1})
///       <= sum_j [sigma p log c + sigma p (j + 4) log 2] / sigma^j + log mu(B_1).
ChainCertificate certify_finite_bound(const ChainReport& report);

/// doubling_constant(params, c_min).
PositiveConstant theorem_bound(const ChainReport& report);

/// Runs chain_ratios, the certificate and the theorem bound in one go.
ChainReport run_chain(const DiscreteSpace& space, const Ball& ball, const SobolevParams& params,
                      std::optional<int> J = std::nullopt);

/// (D / K1)^((sigma - 1) / (p sigma)) with D the doubling ratio at (center, R):
/// every constant valid for the chain at this ball is at least this large.
double sobolev_lower_bound_from_doubling(const DiscreteSpace& space, const Center& center,
                                         double R, const SobolevParams& params);

/// Same, from a known doubling ratio.
double sobolev_lower_bound(double doubling, const SobolevParams& params);

}  // namespace sobdub
