#include "sobdub/space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "sobdub/error.hpp"

namespace sobdub {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neighbourhoods of radius r include points at distance r * (1 + kScaleSlack),
// so that grid neighbours at exactly the spacing are not lost to rounding.
constexpr double kScaleSlack = 1e-9;

}  // namespace

DiscreteSpace DiscreteSpace::from_coordinates(int dim, std::vector<Point> coords,
                                              std::vector<double> masses, double mesh) {
    if (dim != 1 && dim != 2) throw InvalidInput("coordinate dimension must be 1 or 2");
    if (coords.size() != masses.size())
        throw InvalidInput("coordinate and mass counts differ");
    DiscreteSpace s;
    s.kind_ = MetricKind::euclidean;
    s.dim_ = dim;
    s.coords_ = std::move(coords);
    s.masses_ = std::move(masses);
    s.mesh_ = mesh;
    if (dim == 1)
        for (auto& c : s.coords_) c[1] = 0.0;
    for (const auto& c : s.coords_)
        if (!std::isfinite(c[0]) || !std::isfinite(c[1]))
            throw InvalidInput("non-finite coordinate");
    s.validate_masses();
    s.build_buckets();
    return s;
}

DiscreteSpace DiscreteSpace::from_table(std::vector<double> distances, std::vector<double> masses,
                                        double mesh) {
    const std::size_t n = masses.size();
    if (distances.size() != n * n) throw InvalidInput("distance table must be n x n");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = distances[i * n + j];
            if (!(d >= 0.0) || !std::isfinite(d))
                throw InvalidInput("distance table entries must be finite and nonnegative");
            if (d != distances[j * n + i]) throw InvalidInput("distance table is not symmetric");
            if ((i == j) != (d == 0.0))
                throw InvalidInput("distance table must vanish exactly on the diagonal");
        }
    }
    DiscreteSpace s;
    s.kind_ = MetricKind::table;
    s.table_ = std::move(distances);
    s.masses_ = std::move(masses);
    s.mesh_ = mesh;
    s.validate_masses();
    return s;
}

DiscreteSpace DiscreteSpace::from_graph(std::vector<Edge> edges, std::vector<double> masses,
                                        double mesh, int dim, std::vector<Point> coords) {
    const std::size_t n = masses.size();
    if (!coords.empty() && coords.size() != n)
        throw InvalidInput("coordinate and mass counts differ");
    DiscreteSpace s;
    s.kind_ = MetricKind::graph;
    s.dim_ = coords.empty() ? 0 : dim;
    s.coords_ = std::move(coords);
    s.masses_ = std::move(masses);
    s.mesh_ = mesh;
    s.validate_masses();
    s.edges_.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.a >= n || e.b >= n) throw InvalidInput("edge references unknown point id");
        if (std::isnan(e.cost) || e.cost < 0.0) throw InvalidInput("edge cost must be nonnegative");
        if (e.a == e.b || std::isinf(e.cost)) continue;
        s.edges_.push_back(e);
    }
    s.build_adjacency();
    return s;
}

void DiscreteSpace::validate_masses() const {
    if (masses_.empty()) throw InvalidInput("space has no points");
    for (double m : masses_)
        if (!(m > 0.0) || !std::isfinite(m))
            throw InvalidInput("every mass must be strictly positive and finite");
    if (!(mesh_ > 0.0) || !std::isfinite(mesh_)) throw InvalidInput("mesh h must be positive");
}

void DiscreteSpace::build_adjacency() {
    const std::size_t n = size();
    adj_offset_.assign(n + 1, 0);
    for (const auto& e : edges_) {
        ++adj_offset_[e.a + 1];
        ++adj_offset_[e.b + 1];
    }
    for (std::size_t i = 0; i < n; ++i) adj_offset_[i + 1] += adj_offset_[i];
    adj_target_.resize(adj_offset_[n]);
    adj_cost_.resize(adj_offset_[n]);
    std::vector<std::size_t> fill(adj_offset_.begin(), adj_offset_.end() - 1);
    for (const auto& e : edges_) {
        adj_target_[fill[e.a]] = e.b;
        adj_cost_[fill[e.a]++] = e.cost;
        adj_target_[fill[e.b]] = e.a;
        adj_cost_[fill[e.b]++] = e.cost;
    }
}

void DiscreteSpace::build_buckets() {
    Point lo{kInf, kInf};
    Point hi{-kInf, -kInf};
    for (const auto& c : coords_) {
        for (int k = 0; k < 2; ++k) {
            lo[k] = std::min(lo[k], c[k]);
            hi[k] = std::max(hi[k], c[k]);
        }
    }
    // Bucket edge 2h matches the default lip scale; widen it if the box is
    // so sparse that buckets would outnumber points by a large factor.
    double size = 2.0 * mesh_;
    const double cap = 4.0 * static_cast<double>(coords_.size()) + 16.0;
    for (int iter = 0; iter < 64; ++iter) {
        const double nx = std::floor((hi[0] - lo[0]) / size) + 1.0;
        const double ny = std::floor((hi[1] - lo[1]) / size) + 1.0;
        if (nx * ny <= cap) break;
        size *= 2.0;
    }
    bucket_size_ = size;
    bucket_lo_ = lo;
    bucket_count_ = {static_cast<std::size_t>(std::floor((hi[0] - lo[0]) / size)) + 1,
                     static_cast<std::size_t>(std::floor((hi[1] - lo[1]) / size)) + 1};
    const std::size_t nb = bucket_count_[0] * bucket_count_[1];
    auto bucket_of = [&](const Point& c) {
        const auto bx = std::min(bucket_count_[0] - 1,
                                 static_cast<std::size_t>((c[0] - lo[0]) / size));
        const auto by = std::min(bucket_count_[1] - 1,
                                 static_cast<std::size_t>((c[1] - lo[1]) / size));
        return by * bucket_count_[0] + bx;
    };
    bucket_offset_.assign(nb + 1, 0);
    for (const auto& c : coords_) ++bucket_offset_[bucket_of(c) + 1];
    for (std::size_t b = 0; b < nb; ++b) bucket_offset_[b + 1] += bucket_offset_[b];
    bucket_items_.resize(coords_.size());
    std::vector<std::size_t> fill(bucket_offset_.begin(), bucket_offset_.end() - 1);
    for (PointId i = 0; i < coords_.size(); ++i) bucket_items_[fill[bucket_of(coords_[i])]++] = i;
}

const Point& DiscreteSpace::point(PointId i) const {
    if (i >= coords_.size()) throw InvalidInput("unknown point id " + std::to_string(i));
    return coords_[i];
}

double DiscreteSpace::total_mass() const {
    double total = 0.0;
    for (double m : masses_) total += m;
    return total;
}

DiscreteSpace& DiscreteSpace::set_grid(GridShape shape) {
    if (shape.size() != size()) throw InvalidInput("grid shape does not match point count");
    grid_ = shape;
    return *this;
}

DiscreteSpace& DiscreteSpace::set_ids(std::vector<std::string> ids) {
    if (ids.size() != size()) throw InvalidInput("id count does not match point count");
    ids_ = std::move(ids);
    return *this;
}

const std::string& DiscreteSpace::id(PointId i) const {
    if (i >= ids_.size()) throw InvalidInput("space carries no id for point " + std::to_string(i));
    return ids_[i];
}

PointId DiscreteSpace::index_of(const std::string& id) const {
    const auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw InvalidInput("unknown point id '" + id + "'");
    return static_cast<PointId>(it - ids_.begin());
}

DiscreteSpace DiscreteSpace::with_scaled_masses(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidInput("mass scale must be positive");
    DiscreteSpace copy = *this;
    for (double& m : copy.masses_) m *= lambda;
    return copy;
}

double DiscreteSpace::euclid(const Point& a, const Point& b) const {
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double DiscreteSpace::distance(PointId a, PointId b) const {
    const std::size_t n = size();
    if (a >= n) throw InvalidInput("unknown point id " + std::to_string(a));
    if (b >= n) throw InvalidInput("unknown point id " + std::to_string(b));
    if (a == b) return 0.0;
    switch (kind_) {
        case MetricKind::euclidean:
            return euclid(coords_[a], coords_[b]);
        case MetricKind::table:
            return table_[a * n + b];
        case MetricKind::graph: {
            // Always from the smaller id so that d(a, b) == d(b, a) bitwise.
            const double d = dijkstra(std::min(a, b), kInf)[std::max(a, b)];
            if (!std::isfinite(d))
                throw InvalidInput("points " + std::to_string(a) + " and " + std::to_string(b) +
                                   " are disconnected");
            return d;
        }
    }
    return kInf;
}

std::vector<double> DiscreteSpace::dijkstra(PointId source, double cutoff) const {
    std::vector<double> dist(size(), kInf);
    using Item = std::pair<double, PointId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        for (std::size_t k = adj_offset_[u]; k < adj_offset_[u + 1]; ++k) {
            const double nd = d + adj_cost_[k];
            const PointId v = adj_target_[k];
            if (nd < dist[v] && nd <= cutoff) {
                dist[v] = nd;
                queue.emplace(nd, v);
            }
        }
    }
    return dist;
}

std::vector<double> DiscreteSpace::distances_from(PointId source) const {
    const std::size_t n = size();
    if (source >= n) throw InvalidInput("unknown point id " + std::to_string(source));
    switch (kind_) {
        case MetricKind::euclidean: {
            std::vector<double> out(n);
            for (PointId i = 0; i < n; ++i)
                out[i] = i == source ? 0.0 : euclid(coords_[source], coords_[i]);
            return out;
        }
        case MetricKind::table:
            return {table_.begin() + static_cast<std::ptrdiff_t>(source * n),
                    table_.begin() + static_cast<std::ptrdiff_t>((source + 1) * n)};
        case MetricKind::graph:
            return dijkstra(source, kInf);
    }
    return {};
}

std::vector<double> DiscreteSpace::distances_from(const Point& position) const {
    if (kind_ != MetricKind::euclidean) return distances_from(locate(position));
    std::vector<double> out(size());
    for (PointId i = 0; i < size(); ++i) out[i] = euclid(position, coords_[i]);
    return out;
}

PointId DiscreteSpace::locate(const Point& position) const {
    if (coords_.empty()) throw InvalidInput("space has no coordinates to locate a centre");
    Point p = position;
    if (dim_ == 1) p[1] = 0.0;
    PointId best = 0;
    double best_d = kInf;
    for (PointId i = 0; i < coords_.size(); ++i) {
        const double d = euclid(p, coords_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (best_d > 1e-9 * mesh_ + 1e-12)
        throw InvalidInput("centre does not coincide with a sample point of this space");
    return best;
}

std::vector<Neighbor> DiscreteSpace::neighbors_within(PointId x, double radius) const {
    const std::size_t n = size();
    if (x >= n) throw InvalidInput("unknown point id " + std::to_string(x));
    const double reach = radius * (1.0 + kScaleSlack);
    std::vector<Neighbor> out;
    switch (kind_) {
        case MetricKind::euclidean: {
            const Point& c = coords_[x];
            const auto span = static_cast<long>(std::ceil(reach / bucket_size_));
            const long bx = static_cast<long>((c[0] - bucket_lo_[0]) / bucket_size_);
            const long by = static_cast<long>((c[1] - bucket_lo_[1]) / bucket_size_);
            const long nx = static_cast<long>(bucket_count_[0]);
            const long ny = static_cast<long>(bucket_count_[1]);
            for (long j = std::max(0L, by - span); j <= std::min(ny - 1, by + span); ++j) {
                for (long i = std::max(0L, bx - span); i <= std::min(nx - 1, bx + span); ++i) {
                    const auto b = static_cast<std::size_t>(j * nx + i);
                    for (std::size_t k = bucket_offset_[b]; k < bucket_offset_[b + 1]; ++k) {
                        const PointId y = bucket_items_[k];
                        if (y == x) continue;
                        const double d = euclid(c, coords_[y]);
                        if (d <= reach) out.push_back({y, d});
                    }
                }
            }
            std::sort(out.begin(), out.end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
            return out;
        }
        case MetricKind::table:
            for (PointId y = 0; y < n; ++y)
                if (y != x && table_[x * n + y] <= reach) out.push_back({y, table_[x * n + y]});
            return out;
        case MetricKind::graph: {
            const auto dist = dijkstra(x, reach);
            for (PointId y = 0; y < n; ++y)
                if (y != x && dist[y] <= reach) out.push_back({y, dist[y]});
            return out;
        }
    }
    return out;
}

void validate(const Ball& ball) {
    if (!(ball.radius > 0.0) || !std::isfinite(ball.radius))
        throw InvalidInput("ball radius must be positive and finite");
}

std::vector<PointId> GridFunction::support() const {
    std::vector<PointId> out;
    for (PointId i = 0; i < values.size(); ++i)
        if (values[i] != 0.0) out.push_back(i);
    return out;
}

bool GridFunction::is_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> center_distances(const DiscreteSpace& space, const Center& center) {
    return std::visit([&](const auto& c) { return space.distances_from(c); }, center);
}

bool in_ball(double distance_to_center, double radius, bool closed) {
    return closed ? distance_to_center <= radius : distance_to_center < radius;
}

std::vector<PointId> ball_members(const DiscreteSpace& space, const Ball& ball) {
    validate(ball);
    const auto dist = center_distances(space, ball.center);
    std::vector<PointId> out;
    for (PointId i = 0; i < dist.size(); ++i)
        if (in_ball(dist[i], ball.radius, ball.closed)) out.push_back(i);
    return out;
}

double measure(const DiscreteSpace& space, std::span<const double> center_dist, double radius,
               bool closed) {
    double total = 0.0;
    bool any = false;
    for (PointId i = 0; i < center_dist.size(); ++i) {
        if (in_ball(center_dist[i], radius, closed)) {
            total += space.mass(i);
            any = true;
        }
    }
    if (!any) throw EmptyBall();
    return total;
}

double measure(const DiscreteSpace& space, const Ball& ball) {
    validate(ball);
    const auto dist = center_distances(space, ball.center);
    return measure(space, dist, ball.radius, ball.closed);
}

double doubling_ratio(const DiscreteSpace& space, const Center& center, double radius) {
    validate(Ball::open(center, radius));
    const auto dist = center_distances(space, center);
    const double inner = measure(space, dist, radius, false);
    const double outer = measure(space, dist, 2.0 * radius, false);
    return outer / inner;
}

bool vanishes_outside(const DiscreteSpace& space, const GridFunction& u, const Ball& ball) {
    if (u.size() != space.size()) throw InvalidInput("grid function size does not match space");
    const auto dist = center_distances(space, ball.center);
    for (PointId i = 0; i < u.size(); ++i)
        if (!in_ball(dist[i], ball.radius, ball.closed) && u[i] != 0.0) return false;
    return true;
}

LipResult discrete_lip(const DiscreteSpace& space, const GridFunction& u, double h_lip) {
    if (u.size() != space.size()) throw InvalidInput("grid function size does not match space");
    if (!u.is_finite()) throw InvalidInput("grid function has non-finite values");
    if (!(h_lip >= space.mesh())) throw InvalidInput("h_lip must be at least the mesh h");
    LipResult result{GridFunction(space.size(), 0.0), {}};
    for (PointId x = 0; x < space.size(); ++x) {
        const auto nbrs = space.neighbors_within(x, h_lip);
        if (nbrs.empty()) {
            result.isolated.push_back(x);
            continue;
        }
        double best = 0.0;
        for (const auto& nb : nbrs) {
            if (!(nb.distance > 0.0)) continue;
            best = std::max(best, std::abs(u[x] - u[nb.id]) / nb.distance);
        }
        result.lip[x] = best;
    }
    return result;
}

LipResult discrete_lip(const DiscreteSpace& space, const GridFunction& u) {
    return discrete_lip(space, u, 2.0 * space.mesh());
}

}  // namespace sobdub
