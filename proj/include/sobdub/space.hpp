#pragma once

// Discrete metric measure spaces: a finite point set with a metric oracle
// and strictly positive point masses, plus balls, measures of balls and the
// one-scale discrete lip operator.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sobdub {

using PointId = std::size_t;

/// Coordinates in R^1 or R^2. In 1D the second entry is unused and zero.
using Point = std::array<double, 2>;

enum class MetricKind { euclidean, table, graph };

struct Edge {
    PointId a = 0;
    PointId b = 0;
    double cost = 0.0;
};

struct Neighbor {
    PointId id = 0;
    double distance = 0.0;
};

/// Layout of a uniform tensor grid (vertex-centred, endpoints included).
/// Point (i, k) has index k * count[0] + i.
struct GridShape {
    int dim = 1;
    std::array<std::size_t, 2> count{1, 1};
    Point lo{0.0, 0.0};
    std::array<double, 2> spacing{1.0, 1.0};

    std::size_t index(std::size_t i, std::size_t k = 0) const { return k * count[0] + i; }
    std::size_t size() const { return count[0] * count[1]; }
};

class DiscreteSpace {
public:
    /// Euclidean distance between coordinates (dim 1 or 2).
    static DiscreteSpace from_coordinates(int dim, std::vector<Point> coords,
                                          std::vector<double> masses, double mesh);

    /// Explicit symmetric distance table, row-major n x n.
    static DiscreteSpace from_table(std::vector<double> distances, std::vector<double> masses,
                                    double mesh);

    /// Shortest-path metric over undirected edges with nonnegative costs.
    /// Edges with infinite cost are dropped. Coordinates are optional and only
    /// used for locating centres given by position.
    static DiscreteSpace from_graph(std::vector<Edge> edges, std::vector<double> masses,
                                    double mesh, int dim = 0, std::vector<Point> coords = {});

    std::size_t size() const { return masses_.size(); }
    int dim() const { return dim_; }
    bool has_coordinates() const { return !coords_.empty(); }
    const Point& point(PointId i) const;
    std::span<const Point> points() const { return coords_; }

    double mass(PointId i) const { return masses_.at(i); }
    std::span<const double> masses() const { return masses_; }
    double total_mass() const;
    double mesh() const { return mesh_; }
    MetricKind metric_kind() const { return kind_; }

    const std::optional<GridShape>& grid() const { return grid_; }
    DiscreteSpace& set_grid(GridShape shape);

    /// Optional external identifiers (as read from a space file).
    DiscreteSpace& set_ids(std::vector<std::string> ids);
    bool has_ids() const { return !ids_.empty(); }
    const std::string& id(PointId i) const;
    PointId index_of(const std::string& id) const;

    /// Copy with every mass multiplied by lambda > 0.
    DiscreteSpace with_scaled_masses(double lambda) const;

    /// Throws InvalidInput for unknown ids and for disconnected graph points.
    double distance(PointId a, PointId b) const;
    /// Distances to every point; +inf marks points unreachable from the source.
    std::vector<double> distances_from(PointId source) const;
    /// Euclidean spaces accept any position; other metrics require the
    /// position to coincide with a sample point.
    std::vector<double> distances_from(const Point& position) const;

    /// Points y != x with d(x, y) <= radius.
    std::vector<Neighbor> neighbors_within(PointId x, double radius) const;

    /// Sample point located at `position` (tolerance relative to the mesh).
    PointId locate(const Point& position) const;

    std::span<const Edge> edges() const { return edges_; }

private:
    DiscreteSpace() = default;
    void validate_masses() const;
    void build_buckets();
    void build_adjacency();
    std::vector<double> dijkstra(PointId source, double cutoff) const;
    double euclid(const Point& a, const Point& b) const;

    MetricKind kind_ = MetricKind::euclidean;
    int dim_ = 0;
    std::vector<Point> coords_;
    std::vector<double> masses_;
    double mesh_ = 0.0;
    std::optional<GridShape> grid_;
    std::vector<std::string> ids_;

    // table metric
    std::vector<double> table_;

    // graph metric (CSR adjacency)
    std::vector<Edge> edges_;
    std::vector<std::size_t> adj_offset_;
    std::vector<PointId> adj_target_;
    std::vector<double> adj_cost_;

    // euclidean neighbour buckets
    double bucket_size_ = 0.0;
    Point bucket_lo_{0.0, 0.0};
    std::array<std::size_t, 2> bucket_count_{1, 1};
    std::vector<std::size_t> bucket_offset_;
    std::vector<PointId> bucket_items_;
};

/// Ball centre: a sample point or a free position.
using Center = std::variant<PointId, Point>;

struct Ball {
    Center center;
    double radius = 1.0;
    bool closed = false;

    static Ball open(Center c, double r) { return Ball{c, r, false}; }
    static Ball closed_ball(Center c, double r) { return Ball{c, r, true}; }
};

/// Throws InvalidInput unless radius > 0 and finite.
void validate(const Ball& ball);

/// One real per point of a space.
struct GridFunction {
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(std::vector<double> v) : values(std::move(v)) {}
    GridFunction(std::size_t n, double fill) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    std::vector<PointId> support() const;
    bool is_finite() const;
};

std::vector<double> center_distances(const DiscreteSpace& space, const Center& center);

bool in_ball(double distance_to_center, double radius, bool closed);

std::vector<PointId> ball_members(const DiscreteSpace& space, const Ball& ball);

/// Sum of masses over the ball. Throws EmptyBall if no point is inside.
double measure(const DiscreteSpace& space, const Ball& ball);

/// Same, reusing precomputed distances from the ball centre.
double measure(const DiscreteSpace& space, std::span<const double> center_dist, double radius,
               bool closed);

/// mu(B(y, 2R)) / mu(B(y, R)) for open balls.
double doubling_ratio(const DiscreteSpace& space, const Center& center, double radius);

/// True when u vanishes at every point outside the ball.
bool vanishes_outside(const DiscreteSpace& space, const GridFunction& u, const Ball& ball);

struct LipResult {
    GridFunction lip;
    /// Points without any neighbour within h_lip; their value is 0.
    std::vector<PointId> isolated;
};

/// Largest slope max |u(x) - u(y)| / d(x, y) over 0 < d(x, y) <= h_lip.
LipResult discrete_lip(const DiscreteSpace& space, const GridFunction& u, double h_lip);

/// discrete_lip at the default scale h_lip = 2 * mesh.
LipResult discrete_lip(const DiscreteSpace& space, const GridFunction& u);

}  // namespace sobdub
