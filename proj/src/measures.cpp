#include "sobdub/measures.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "sobdub/error.hpp"
#include "sobdub/space_io.hpp"

namespace sobdub {

namespace {

std::string format_real(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

double parse_value(std::string_view text, std::string_view family) {
    const std::string s(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput("malformed number '" + s + "' in family string '" + std::string(family) + "'");
}

// Integral of |x|^alpha over [a, b] in 1D.
double power_integral_1d(double a, double b, double alpha) {
    auto antiderivative = [alpha](double x) {
        return std::copysign(std::pow(std::abs(x), alpha + 1.0) / (alpha + 1.0), x);
    };
    return antiderivative(b) - antiderivative(a);
}

// Integral of |x|^alpha over the rectangle [0, a] x [0, b], split along the
// diagonal into two triangles and integrated in polar form.
double power_corner_integral_2d(double a, double b, double alpha) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    const double k = alpha + 2.0;
    const double split = std::atan2(b, a);
    const double lower = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return std::pow(a / std::cos(t), k) / k; }, 0.0, split, 8, 1e-14);
    const double upper = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return std::pow(b / std::sin(t), k) / k; }, split,
        std::numbers::pi / 2.0, 8, 1e-14);
    return lower + upper;
}

// Integral of |x|^alpha over a rectangle that contains the origin.
double power_cell_integral_2d(const Point& lo, const Point& hi, double alpha) {
    return power_corner_integral_2d(hi[0], hi[1], alpha) +
           power_corner_integral_2d(-lo[0], hi[1], alpha) +
           power_corner_integral_2d(hi[0], -lo[1], alpha) +
           power_corner_integral_2d(-lo[0], -lo[1], alpha);
}

}  // namespace

void WeightFamily::validate() const {
    if (dimension != 1 && dimension != 2) throw InvalidInput("dimension must be 1 or 2");
    switch (kind) {
        case WeightKind::power:
            if (!(alpha > -dimension) || !std::isfinite(alpha))
                throw InvalidInput("power weight requires alpha > -dimension");
            break;
        case WeightKind::exponential:
            if (!std::isfinite(rate)) throw InvalidInput("exponential rate must be finite");
            break;
        case WeightKind::gaussian:
            if (!(scale > 0.0) || !std::isfinite(scale))
                throw InvalidInput("gaussian scale must be positive");
            break;
        case WeightKind::table:
            if (path.empty()) throw InvalidInput("table family requires path=...");
            break;
        case WeightKind::lebesgue:
            break;
    }
}

double WeightFamily::density(const Point& x) const {
    const double r2 = x[0] * x[0] + (dimension == 2 ? x[1] * x[1] : 0.0);
    switch (kind) {
        case WeightKind::lebesgue:
            return 1.0;
        case WeightKind::power:
            if (r2 == 0.0)
                return alpha > 0.0 ? 0.0
                                   : (alpha == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
            return std::pow(r2, alpha / 2.0);
        case WeightKind::exponential:
            return std::exp(rate * x[0]);
        case WeightKind::gaussian:
            return std::exp(-r2 / (2.0 * scale * scale));
        case WeightKind::table:
            throw InvalidInput("table family has no density formula");
    }
    return 0.0;
}

std::string WeightFamily::to_string() const {
    switch (kind) {
        case WeightKind::lebesgue:
            return "lebesgue";
        case WeightKind::power:
            return "power:alpha=" + format_real(alpha);
        case WeightKind::exponential:
            return "exp:rate=" + format_real(rate);
        case WeightKind::gaussian:
            return "gauss:s=" + format_real(scale);
        case WeightKind::table:
            return "table:path=" + path + (edges.empty() ? "" : ",edges=" + edges);
    }
    return {};
}

WeightFamily parse_family(std::string_view text, int dimension) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    std::vector<std::pair<std::string_view, std::string_view>> args;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw InvalidInput("expected key=value in family string '" + std::string(text) + "'");
            args.emplace_back(item.substr(0, eq), item.substr(eq + 1));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    auto only = [&](std::initializer_list<std::string_view> allowed) {
        for (const auto& [key, value] : args) {
            bool ok = false;
            for (auto a : allowed) ok = ok || key == a;
            if (!ok)
                throw InvalidInput("unknown parameter '" + std::string(key) + "' in family string '" +
                                   std::string(text) + "'");
        }
    };
    auto get = [&](std::string_view key, double fallback) {
        for (const auto& [k, v] : args)
            if (k == key) return parse_value(v, text);
        return fallback;
    };

    WeightFamily family;
    family.dimension = dimension;
    if (name == "lebesgue") {
        only({});
        family.kind = WeightKind::lebesgue;
    } else if (name == "power") {
        only({"alpha"});
        family.kind = WeightKind::power;
        family.alpha = get("alpha", 0.0);
    } else if (name == "exp") {
        only({"rate"});
        family.kind = WeightKind::exponential;
        family.rate = get("rate", 1.0);
    } else if (name == "gauss") {
        only({"s"});
        family.kind = WeightKind::gaussian;
        family.scale = get("s", 1.0);
    } else if (name == "table") {
        only({"path", "edges"});
        family.kind = WeightKind::table;
        for (const auto& [k, v] : args) {
            if (k == "path") family.path = std::string(v);
            if (k == "edges") family.edges = std::string(v);
        }
    } else {
        throw InvalidInput("unknown weight family '" + std::string(text) + "'");
    }
    family.validate();
    return family;
}

DiscreteSpace build_grid(const Box& domain, std::size_t resolution, const WeightFamily& family) {
    return build_grid(domain, std::array<std::size_t, 2>{resolution, resolution}, family);
}

DiscreteSpace build_grid(const Box& domain, std::array<std::size_t, 2> resolution,
                         const WeightFamily& family) {
    family.validate();
    if (family.kind == WeightKind::table)
        throw InvalidInput("table families are loaded from file, not gridded");
    if (domain.dim != family.dimension)
        throw InvalidInput("domain and weight family dimensions differ");
    const int dim = domain.dim;
    if (resolution[0] < 16 || (dim == 2 && resolution[1] < 16))
        throw InvalidInput("grid resolution must be at least 16 points per axis");
    for (int k = 0; k < dim; ++k)
        if (!(domain.hi[k] > domain.lo[k]) || !std::isfinite(domain.hi[k] - domain.lo[k]))
            throw InvalidInput("degenerate domain");

    GridShape shape;
    shape.dim = dim;
    shape.lo = domain.lo;
    shape.count = {resolution[0], dim == 2 ? resolution[1] : 1};
    shape.spacing = {(domain.hi[0] - domain.lo[0]) / static_cast<double>(resolution[0] - 1),
                     dim == 2 ? (domain.hi[1] - domain.lo[1]) / static_cast<double>(resolution[1] - 1)
                              : 1.0};

    auto coordinate = [&](int axis, std::size_t i) {
        return i + 1 == shape.count[axis] ? domain.hi[axis]
                                   : domain.lo[axis] + static_cast<double>(i) * shape.spacing[axis];
    };
    // Dual cell [x - dx/2, x + dx/2] clipped to the domain.
    auto cell = [&](int axis, std::size_t i, double x) {
        const double half = shape.spacing[axis] / 2.0;
        return std::pair{i == 0 ? domain.lo[axis] : x - half,
                         i + 1 == shape.count[axis] ? domain.hi[axis] : x + half};
    };

    const bool singular_power = family.kind == WeightKind::power && family.alpha < 0.0;
    std::vector<Point> coords;
    std::vector<double> masses;
    coords.reserve(shape.size());
    masses.reserve(shape.size());
    for (std::size_t k = 0; k < shape.count[1]; ++k) {
        const double y = dim == 2 ? coordinate(1, k) : 0.0;
        const auto [y0, y1] = dim == 2 ? cell(1, k, y) : std::pair{0.0, 1.0};
        for (std::size_t i = 0; i < shape.count[0]; ++i) {
            const double x = coordinate(0, i);
            const auto [x0, x1] = cell(0, i, x);
            const Point p{x, y};
            double m = 0.0;
            if (singular_power && dim == 1) {
                m = power_integral_1d(x0, x1, family.alpha);
            } else if (singular_power && x0 <= 0.0 && 0.0 <= x1 && y0 <= 0.0 && 0.0 <= y1) {
                m = power_cell_integral_2d({x0, y0}, {x1, y1}, family.alpha);
            } else {
                m = family.density(p) * (x1 - x0) * (y1 - y0);
            }
            if (!(m > 0.0) || !std::isfinite(m)) {
                // Zero density at an isolated node (positive powers at the
                // origin): fall back to the exact cell integral.
                if (family.kind == WeightKind::power && dim == 1)
                    m = power_integral_1d(x0, x1, family.alpha);
                else if (family.kind == WeightKind::power)
                    m = power_cell_integral_2d({x0, y0}, {x1, y1}, family.alpha);
            }
            if (!(m > 0.0) || !std::isfinite(m))
                throw InvalidInput("weight is non-finite or not positive at a grid node");
            coords.push_back(p);
            masses.push_back(m);
        }
    }
    const double mesh = std::hypot(shape.spacing[0], dim == 2 ? shape.spacing[1] : 0.0) / 2.0;
    auto space = DiscreteSpace::from_coordinates(dim, std::move(coords), std::move(masses), mesh);
    space.set_grid(shape);
    return space;
}

DiscreteSpace load_table_space(const WeightFamily& family) {
    family.validate();
    if (family.kind != WeightKind::table) throw InvalidInput("not a table family");
    std::optional<std::filesystem::path> edges;
    if (!family.edges.empty()) edges = family.edges;
    return read_space_csv(family.path, edges);
}

std::optional<double> analytic_ball_measure(const WeightFamily& family, const Point& center,
                                            double radius) {
    if (!(radius > 0.0)) return std::nullopt;
    const bool at_origin = center[0] == 0.0 && (family.dimension == 1 || center[1] == 0.0);
    switch (family.kind) {
        case WeightKind::lebesgue:
            return family.dimension == 1 ? 2.0 * radius : std::numbers::pi * radius * radius;
        case WeightKind::power: {
            if (!at_origin) return std::nullopt;
            const double e = family.alpha + family.dimension;
            return family.dimension == 1 ? 2.0 * std::pow(radius, e) / e
                                         : 2.0 * std::numbers::pi * std::pow(radius, e) / e;
        }
        case WeightKind::exponential: {
            if (family.dimension != 1) return std::nullopt;
            const double l = family.rate;
            if (l == 0.0) return 2.0 * radius;
            return std::exp(l * center[0]) * 2.0 * std::sinh(l * radius) / l;
        }
        case WeightKind::gaussian:
        case WeightKind::table:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace sobdub
