#pragma once

// Grid discretizations of weighted Euclidean measures dmu = w dx, and
// closed-form ball measures for the families that have one.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "sobdub/space.hpp"

namespace sobdub {

enum class WeightKind { lebesgue, power, exponential, gaussian, table };

struct WeightFamily {
    WeightKind kind = WeightKind::lebesgue;
    int dimension = 1;
    double alpha = 0.0;  // power: |x|^alpha
    double rate = 1.0;   // exponential: exp(rate * x_1)
    double scale = 1.0;  // gaussian: exp(-|x|^2 / (2 scale^2))
    std::string path;    // table: space file
    std::string edges;   // table: optional edge file

    static WeightFamily lebesgue(int dim = 1) { return make(WeightKind::lebesgue, dim); }
    static WeightFamily power(double a, int dim = 1) {
        auto f = make(WeightKind::power, dim);
        f.alpha = a;
        return f;
    }
    static WeightFamily exponential(double r, int dim = 1) {
        auto f = make(WeightKind::exponential, dim);
        f.rate = r;
        return f;
    }
    static WeightFamily gaussian(double s, int dim = 1) {
        auto f = make(WeightKind::gaussian, dim);
        f.scale = s;
        return f;
    }
    static WeightFamily make(WeightKind kind, int dim) {
        WeightFamily f;
        f.kind = kind;
        f.dimension = dim;
        return f;
    }

    /// Throws InvalidInput on out-of-domain parameters (alpha <= -dim,
    /// scale <= 0, dimension outside {1, 2}).
    void validate() const;

    /// Density w at a point; +inf at the origin for negative powers.
    double density(const Point& x) const;

    /// Canonical family string, e.g. "power:alpha=1".
    std::string to_string() const;
};

/// Parses `lebesgue`, `power:alpha=1`, `exp:rate=1`, `gauss:s=1`,
/// `table:path=...[,edges=...]`.
WeightFamily parse_family(std::string_view text, int dimension = 1);

struct Box {
    int dim = 1;
    Point lo{0.0, 0.0};
    Point hi{1.0, 1.0};

    static Box interval(double a, double b) { return {1, {a, 0.0}, {b, 0.0}}; }
    static Box square(double a, double b) { return {2, {a, a}, {b, b}}; }
};

/// Uniform vertex grid with `resolution` points per axis (endpoints
/// included). Each node carries the measure of its dual cell clipped to the
/// box: w(node) * cell volume, except cells touching a singular origin
/// (negative powers), which get their exact integral. Mesh h is half the
/// cell diagonal.
DiscreteSpace build_grid(const Box& domain, std::size_t resolution, const WeightFamily& family);

/// Same with a separate point count per axis (2D only uses both).
DiscreteSpace build_grid(const Box& domain, std::array<std::size_t, 2> resolution,
                         const WeightFamily& family);

/// Table families are loaded from file rather than gridded.
DiscreteSpace load_table_space(const WeightFamily& family);

/// Exact mu(B(center, R)) where a closed form exists: Lebesgue (1D/2D),
/// power weights centred at the origin (1D/2D), exponential weights in 1D.
std::optional<double> analytic_ball_measure(const WeightFamily& family, const Point& center,
                                            double radius);

}  // namespace sobdub
