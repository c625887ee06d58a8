#pragma once

// Degenerate-elliptic structures on planar grids: Q-gradients
// [grad u]_Q = (grad u^T Q grad u)^(1/2), control (subunit) distances
// realized as shortest paths, accumulating cutoff families and the
// beta-iteration doubling certificate for Lebesgue measure.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sobdub/constants.hpp"
#include "sobdub/cutoffs.hpp"
#include "sobdub/space.hpp"

namespace sobdub {

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Mat2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

class MatrixField {
public:
    MatrixField(std::string name, std::function<Mat2(const Point&)> eval)
        : name_(std::move(name)), eval_(std::move(eval)) {}

    static MatrixField identity();
    static MatrixField diagonal(std::function<double(const Point&)> f,
                                std::function<double(const Point&)> g, std::string name);
    /// diag(1, x^2).
    static MatrixField grushin();

    Mat2 operator()(const Point& x) const { return eval_(x); }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::function<Mat2(const Point&)> eval_;
};

/// Parses "identity" or "grushin".
MatrixField parse_matrix_field(const std::string& name);

/// Cost of moving by `delta` under Q: sqrt(delta^T Q^+ delta) when delta lies
/// in the range of Q, +inf otherwise. This is the time needed at maximal
/// subunit speed along a straight segment.
double subunit_cost(const Point& delta, const Mat2& Q);

/// Central-difference gradient (one-sided on the boundary) followed by the
/// pointwise Q-norm. Requires a 2D grid space with at least two points per
/// axis.
GridFunction q_gradient_norm(const DiscreteSpace& space, const GridFunction& u,
                             const MatrixField& Q);

/// Shortest-path metric on the grid graph with edge costs
/// subunit_cost(edge, Q(midpoint)). Edges whose direction Q cannot move in are
/// removed. Masses, coordinates and grid layout are carried over.
///
/// `stencil` = 1 links the 8 nearest neighbours. Larger values also link
/// every offset (a, b) with gcd(|a|, |b|) = 1 and max(|a|, |b|) <= stencil,
/// which reduces the direction bias of grid shortest paths.
DiscreteSpace subunit_metric(const DiscreteSpace& grid_space, const MatrixField& Q,
                             int stencil = 1);

/// Smallest distance from the centre to a boundary node of the grid.
double boundary_distance(const DiscreteSpace& space, const Center& center);

struct AccumulatingCheck {
    bool support_in_ball = true;      // supp psi_1 in B
    bool plateau_contains_core = true;  // B(y, nu R) in {psi_j = 1}
    bool nested = true;               // supp psi_{j+1} in {psi_j = 1}
    bool range = true;                // 0 <= psi_j <= 1
    double max_euclidean_slope = 0.0;  // largest grid difference quotient
    std::vector<std::string> failures;

    bool pass() const { return failures.empty(); }
};

struct AccumulatingFamily {
    CutoffFamily cutoffs;  // radii r_j = nu R + (1 - nu) R 2^-j
    double nu = 0.5;
    double boundary_distance = 0.0;
    AccumulatingCheck check;

    int J() const { return cutoffs.J_max; }
};

/// Builds and verifies the family on a subunit space. Throws InvalidInput
/// ("ball too close to the boundary") unless R < boundary_distance / 6.
AccumulatingFamily build_accumulating_family(const DiscreteSpace& space, const MatrixField& Q,
                                             const Ball& ball, double nu = 0.5,
                                             std::optional<int> J = std::nullopt);

struct KNFit {
    double K = 0.0;
    /// ((1/|B|) int_B [grad psi_j]_Q^s)^(1/s) for j = 1..J.
    std::vector<double> averages;
    /// averages[j-1] * R / N^j.
    std::vector<double> per_level;
};

/// Minimal K with ((1/|B|) int_B [grad psi_j]_Q^s)^(1/s) <= K N^j / R for all j.
KNFit fit_KN(const DiscreteSpace& space, const MatrixField& Q, const AccumulatingFamily& family,
             double s, double N);

struct SubellipticRow {
    int j = 0;
    double volume = 0.0;  // |B_j|, B_j = supp psi_j
    double m = 0.0;       // |B_j| / |B*|
    double c = 0.0;       // (m_{j+1})^(1/(p sigma)) / (N^j m_j^(1/p - 1/s))
    double log_c = 0.0;
};

struct SubellipticCertificate {
    double beta = 0.0;
    int J = 0;
    std::vector<SubellipticRow> rows;
    double volume_ball = 0.0;  // |B|
    double volume_star = 0.0;  // |B*|
    double volume_last = 0.0;  // |B_{J+1}|
    double c_hat = 0.0;
    double log_c_hat = 0.0;
    int argmax_j = 0;
    double argmax_residual = 0.0;
    double log_lhs = 0.0;
    double log_rhs = 0.0;
    bool pass = false;
    PositiveConstant limit_bound;  // c_hat^(p sigma/(beta-1)) N^(p sigma beta/(beta-1)^2)
    double actual_ratio = 0.0;     // |B*| / |B|
    bool bound_holds = false;
    KNFit fit;
    PositiveConstant fitted_constant;  // subelliptic_doubling_constant with fitted K
    AccumulatingCheck family_check;
};

/// Chain constant for the supports B_j of the accumulating family, the
/// telescoped finite-J inequality with exponents 1/beta^j, and the limit
/// bound against the actual ratio |B*| / |B|. params.K is ignored (K is
/// fitted); s, N and nu are used as given.
SubellipticCertificate subelliptic_chain_certify(const DiscreteSpace& space, const MatrixField& Q,
                                                 const Ball& ball, const SubellipticParams& params,
                                                 std::optional<int> J = std::nullopt);

}  // namespace sobdub
