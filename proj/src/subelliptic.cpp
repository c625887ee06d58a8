#include "sobdub/subelliptic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "sobdub/chain.hpp"
#include "sobdub/error.hpp"

namespace sobdub {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigenvalues below this fraction of the largest one count as zero.
constexpr double kRankTolerance = 1e-14;

const GridShape& planar_grid(const DiscreteSpace& space) {
    const auto& grid = space.grid();
    if (!grid || grid->dim != 2) throw InvalidInput("a 2D coordinate grid is required");
    if (grid->count[0] < 2 || grid->count[1] < 2)
        throw InvalidInput("degenerate grid: need at least two points per axis");
    return *grid;
}

}  // namespace

MatrixField MatrixField::identity() {
    return {"identity", [](const Point&) { return Mat2{1.0, 0.0, 1.0}; }};
}

MatrixField MatrixField::diagonal(std::function<double(const Point&)> f,
                                  std::function<double(const Point&)> g, std::string name) {
    return {std::move(name), [f = std::move(f), g = std::move(g)](const Point& x) {
                return Mat2{f(x), 0.0, g(x)};
            }};
}

MatrixField MatrixField::grushin() {
    return {"grushin", [](const Point& x) { return Mat2{1.0, 0.0, x[0] * x[0]}; }};
}

MatrixField parse_matrix_field(const std::string& name) {
    if (name == "identity") return MatrixField::identity();
    if (name == "grushin") return MatrixField::grushin();
    throw InvalidInput("unknown matrix field '" + name + "'");
}

double subunit_cost(const Point& delta, const Mat2& Q) {
    const double len2 = delta[0] * delta[0] + delta[1] * delta[1];
    if (len2 == 0.0) return 0.0;
    // Spectral decomposition of the symmetric 2x2 matrix.
    const double mean = (Q.xx + Q.yy) / 2.0;
    const double half_gap = std::hypot((Q.xx - Q.yy) / 2.0, Q.xy);
    const double lam[2] = {mean + half_gap, mean - half_gap};
    if (lam[0] < 0.0 || lam[1] < -kRankTolerance * std::max(1.0, lam[0]))
        throw InvalidInput("matrix field is not positive semi-definite");
    Point v[2];
    if (Q.xy == 0.0) {
        v[0] = Q.xx >= Q.yy ? Point{1.0, 0.0} : Point{0.0, 1.0};
        v[1] = Q.xx >= Q.yy ? Point{0.0, 1.0} : Point{1.0, 0.0};
    } else {
        const double nx = lam[0] - Q.yy;
        const double norm = std::hypot(nx, Q.xy);
        v[0] = {nx / norm, Q.xy / norm};
        v[1] = {-v[0][1], v[0][0]};
    }
    const double floor = kRankTolerance * std::max(lam[0], std::numeric_limits<double>::min());
    double cost2 = 0.0;
    for (int k = 0; k < 2; ++k) {
        const double c = delta[0] * v[k][0] + delta[1] * v[k][1];
        if (lam[k] <= floor) {
            if (c * c > kRankTolerance * len2) return kInf;
            continue;
        }
        cost2 += c * c / lam[k];
    }
    return std::sqrt(cost2);
}

GridFunction q_gradient_norm(const DiscreteSpace& space, const GridFunction& u,
                             const MatrixField& Q) {
    const auto& grid = planar_grid(space);
    if (u.size() != space.size()) throw InvalidInput("grid function size does not match space");
    if (!u.is_finite()) throw InvalidInput("grid function has non-finite values");
    const std::size_t nx = grid.count[0];
    const std::size_t ny = grid.count[1];
    GridFunction out(space.size(), 0.0);
    auto derivative = [&](std::size_t i, std::size_t k, int axis) {
        const std::size_t n = axis == 0 ? nx : ny;
        const std::size_t pos = axis == 0 ? i : k;
        const double h = grid.spacing[static_cast<std::size_t>(axis)];
        auto at = [&](std::size_t t) { return axis == 0 ? u[grid.index(t, k)] : u[grid.index(i, t)]; };
        if (pos == 0) return (at(1) - at(0)) / h;
        if (pos + 1 == n) return (at(n - 1) - at(n - 2)) / h;
        return (at(pos + 1) - at(pos - 1)) / (2.0 * h);
    };
    for (std::size_t k = 0; k < ny; ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t idx = grid.index(i, k);
            const double gx = derivative(i, k, 0);
            const double gy = derivative(i, k, 1);
            const Mat2 q = Q(space.point(idx));
            const double form = gx * (q.xx * gx + q.xy * gy) + gy * (q.xy * gx + q.yy * gy);
            out[idx] = std::sqrt(std::max(0.0, form));
        }
    }
    return out;
}

DiscreteSpace subunit_metric(const DiscreteSpace& grid_space, const MatrixField& Q, int stencil) {
    const auto& grid = planar_grid(grid_space);
    if (stencil < 1 || stencil > 8) throw InvalidInput("stencil must lie in [1, 8]");
    const std::size_t nx = grid.count[0];
    const std::size_t ny = grid.count[1];
    // One representative per undirected primitive offset.
    std::vector<std::array<int, 2>> offsets;
    for (int a = 0; a <= stencil; ++a) {
        for (int b = -stencil; b <= stencil; ++b) {
            if (std::gcd(a, std::abs(b)) != 1) continue;
            if (a == 0 && b < 0) continue;
            offsets.push_back({a, b});
        }
    }
    std::vector<Edge> edges;
    edges.reserve(offsets.size() * nx * ny);
    for (std::size_t k = 0; k < ny; ++k) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t a = grid.index(i, k);
            const Point& pa = grid_space.point(a);
            for (const auto& off : offsets) {
                const long ti = static_cast<long>(i) + off[0];
                const long tk = static_cast<long>(k) + off[1];
                if (ti < 0 || tk < 0 || ti >= static_cast<long>(nx) || tk >= static_cast<long>(ny))
                    continue;
                const std::size_t b =
                    grid.index(static_cast<std::size_t>(ti), static_cast<std::size_t>(tk));
                const Point& pb = grid_space.point(b);
                const Point delta{pb[0] - pa[0], pb[1] - pa[1]};
                const Point mid{(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0};
                const double cost = subunit_cost(delta, Q(mid));
                if (std::isfinite(cost)) edges.push_back({a, b, cost});
            }
        }
    }
    std::vector<double> masses(grid_space.masses().begin(), grid_space.masses().end());
    std::vector<Point> coords(grid_space.points().begin(), grid_space.points().end());
    auto space = DiscreteSpace::from_graph(std::move(edges), std::move(masses), grid_space.mesh(),
                                           2, std::move(coords));
    space.set_grid(grid);
    return space;
}

double boundary_distance(const DiscreteSpace& space, const Center& center) {
    const auto& grid = planar_grid(space);
    const auto dist = center_distances(space, center);
    double best = kInf;
    for (std::size_t k = 0; k < grid.count[1]; ++k) {
        for (std::size_t i = 0; i < grid.count[0]; ++i) {
            if (i != 0 && k != 0 && i + 1 != grid.count[0] && k + 1 != grid.count[1]) continue;
            best = std::min(best, dist[grid.index(i, k)]);
        }
    }
    return best;
}

AccumulatingFamily build_accumulating_family(const DiscreteSpace& space, const MatrixField& Q,
                                             const Ball& ball, double nu, std::optional<int> J) {
    (void)Q;  // the family lives on the metric already induced by Q
    validate(ball);
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidInput("nu must lie in (0, 1)");
    const double R = ball.radius;

    AccumulatingFamily family;
    family.nu = nu;
    family.boundary_distance = boundary_distance(space, ball.center);
    if (!(R < family.boundary_distance / 6.0))
        throw InvalidInput("ball too close to the boundary: need R < dist(y, boundary) / 6");

    const int levels = J.value_or(default_J(ball, space));
    if (levels < 1) throw InvalidInput("J must be >= 1");
    std::vector<double> radii;
    for (int j = 1; j <= levels + 1; ++j) radii.push_back(nu * R + (1.0 - nu) * R * std::ldexp(1.0, -j));
    family.cutoffs = build_cutoff_family(space, ball, std::move(radii));

    auto& check = family.check;
    const auto& dist = family.cutoffs.center_dist;
    const auto& grid = planar_grid(space);
    for (int j = 1; j <= levels; ++j) {
        const auto& f = family.cutoffs.function(j);
        const GridFunction* next = j < levels ? &family.cutoffs.function(j + 1) : nullptr;
        for (PointId x = 0; x < f.size(); ++x) {
            if (!(f[x] >= 0.0 && f[x] <= 1.0)) check.range = false;
            if (j == 1 && f[x] > 0.0 && !(dist[x] < R)) check.support_in_ball = false;
            if (dist[x] < nu * R && f[x] != 1.0) check.plateau_contains_core = false;
            if (next && (*next)[x] > 0.0 && f[x] != 1.0) check.nested = false;
        }
        // Euclidean difference quotients between grid neighbours.
        for (std::size_t k = 0; k < grid.count[1]; ++k) {
            for (std::size_t i = 0; i < grid.count[0]; ++i) {
                const std::size_t a = grid.index(i, k);
                if (i + 1 < grid.count[0])
                    check.max_euclidean_slope =
                        std::max(check.max_euclidean_slope,
                                 std::abs(f[grid.index(i + 1, k)] - f[a]) / grid.spacing[0]);
                if (k + 1 < grid.count[1])
                    check.max_euclidean_slope =
                        std::max(check.max_euclidean_slope,
                                 std::abs(f[grid.index(i, k + 1)] - f[a]) / grid.spacing[1]);
            }
        }
    }
    if (!check.support_in_ball) check.failures.emplace_back("supp psi_1 not contained in B");
    if (!check.plateau_contains_core) check.failures.emplace_back("B(y, nu R) not in {psi_j = 1}");
    if (!check.nested) check.failures.emplace_back("supp psi_{j+1} not in {psi_j = 1}");
    if (!check.range) check.failures.emplace_back("psi_j outside [0, 1]");
    if (!std::isfinite(check.max_euclidean_slope)) check.failures.emplace_back("psi_j not Lipschitz");
    return family;
}

KNFit fit_KN(const DiscreteSpace& space, const MatrixField& Q, const AccumulatingFamily& family,
             double s, double N) {
    if (!(s >= 1.0)) throw InvalidInput("s must be >= 1");
    if (!(N > 1.0)) throw InvalidInput("N must be > 1");
    const auto& dist = family.cutoffs.center_dist;
    const double R = family.cutoffs.ball.radius;
    double volume = 0.0;
    for (PointId x = 0; x < dist.size(); ++x)
        if (dist[x] < R) volume += space.mass(x);
    if (!(volume > 0.0)) throw EmptyBall();

    KNFit fit;
    for (int j = 1; j <= family.J(); ++j) {
        const auto g = q_gradient_norm(space, family.cutoffs.function(j), Q);
        double sum = 0.0;
        for (PointId x = 0; x < dist.size(); ++x)
            if (dist[x] < R) sum += space.mass(x) * std::pow(g[x], s);
        const double avg = std::pow(sum / volume, 1.0 / s);
        fit.averages.push_back(avg);
        fit.per_level.push_back(avg * R / std::pow(N, j));
        fit.K = std::max(fit.K, fit.per_level.back());
    }
    return fit;
}

SubellipticCertificate subelliptic_chain_certify(const DiscreteSpace& space, const MatrixField& Q,
                                                 const Ball& ball, const SubellipticParams& params,
                                                 std::optional<int> J) {
    params.validate();
    SubellipticCertificate cert;
    cert.beta = subelliptic_beta(params);
    const auto family = build_accumulating_family(space, Q, ball, params.nu, J);
    cert.family_check = family.check;
    cert.J = family.J();
    const double R = ball.radius;
    const auto& dist = family.cutoffs.center_dist;

    cert.volume_ball = measure(space, dist, R, false);
    cert.volume_star = measure(space, dist, 2.0 * R, false);
    std::vector<double> volume;
    for (int j = 1; j <= cert.J + 1; ++j) {
        try {
            // supp psi_j = {d < r_j}
            volume.push_back(measure(space, dist, family.cutoffs.r(j), false));
        } catch (const EmptyBall&) {
            throw EmptyBall("resolution too coarse: supp psi_" + std::to_string(j) + " is empty");
        }
    }
    cert.volume_last = volume.back();

    const double p = params.p;
    const double ps = p * params.sigma;
    const double log_star = std::log(cert.volume_star);
    const double log_N = std::log(params.N);
    const double inner = 1.0 / p - 1.0 / params.s;
    cert.log_c_hat = -kInf;
    for (int j = 1; j <= cert.J; ++j) {
        SubellipticRow row;
        row.j = j;
        row.volume = volume[static_cast<std::size_t>(j - 1)];
        const double log_m = std::log(row.volume) - log_star;
        const double log_m_next = std::log(volume[static_cast<std::size_t>(j)]) - log_star;
        row.m = std::exp(log_m);
        row.log_c = log_m_next / ps - j * log_N - inner * log_m;
        row.c = std::exp(row.log_c);
        if (row.log_c > cert.log_c_hat) {
            cert.log_c_hat = row.log_c;
            cert.argmax_j = j;
        }
        cert.rows.push_back(row);
    }
    cert.c_hat = std::exp(cert.log_c_hat);

    const auto& top = cert.rows.at(static_cast<std::size_t>(cert.argmax_j - 1));
    const double lhs_top = std::exp(
        (std::log(volume[static_cast<std::size_t>(top.j)]) - log_star) / ps);
    const double rhs_top = cert.c_hat * std::pow(params.N, top.j) * std::pow(top.m, inner);
    cert.argmax_residual = std::abs(lhs_top - rhs_top) / lhs_top;

    const double beta = cert.beta;
    const double tail = std::pow(beta, -cert.J);
    cert.log_lhs = (1.0 - tail) * log_star + tail * std::log(cert.volume_last);
    double log_C = 0.0;
    for (int j = 1; j <= cert.J; ++j)
        log_C += ps * (cert.log_c_hat + j * log_N) / std::pow(beta, j);
    cert.log_rhs = log_C + std::log(volume.front());
    cert.pass = cert.log_lhs <= cert.log_rhs + kLogSlack;

    const double b1 = beta - 1.0;
    cert.limit_bound.log2 =
        (ps / b1 * cert.log_c_hat + ps * beta / (b1 * b1) * log_N) / std::numbers::ln2;
    cert.actual_ratio = cert.volume_star / cert.volume_ball;
    cert.bound_holds = std::log2(cert.actual_ratio) <= cert.limit_bound.log2 + kLogSlack;

    cert.fit = fit_KN(space, Q, family, params.s, params.N);
    SubellipticParams fitted = params;
    fitted.K = cert.fit.K;
    cert.fitted_constant = subelliptic_doubling_constant(fitted);
    return cert;
}

}  // namespace sobdub
