#include "sobdub/space_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sobdub/error.hpp"

namespace sobdub {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_real(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidInput("malformed number '" + text + "' in " + where);
    }
}

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path,
                                                 const std::vector<std::vector<std::string>>& headers,
                                                 std::size_t& header_index) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("empty file " + path.string());
    const auto header = split_row(line);
    const auto it = std::find(headers.begin(), headers.end(), header);
    if (it == headers.end()) throw InvalidInput("unexpected header in " + path.string());
    header_index = static_cast<std::size_t>(it - headers.begin());
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto row = split_row(line);
        if (row.size() != header.size())
            throw InvalidInput("wrong column count in " + path.string() + ": " + line);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

DiscreteSpace read_space_csv(const std::filesystem::path& points,
                             const std::optional<std::filesystem::path>& edges,
                             std::optional<double> mesh) {
    std::size_t layout = 0;
    const auto rows = read_table(points, {{"id", "x", "mass"}, {"id", "x", "y", "mass"}}, layout);
    const int dim = layout == 0 ? 1 : 2;
    const std::string where = points.string();

    std::vector<std::string> ids;
    std::vector<Point> coords;
    std::vector<double> masses;
    std::unordered_map<std::string, PointId> index;
    for (const auto& row : rows) {
        if (!index.emplace(row[0], ids.size()).second)
            throw InvalidInput("duplicate point id '" + row[0] + "' in " + where);
        ids.push_back(row[0]);
        Point p{parse_real(row[1], where), dim == 2 ? parse_real(row[2], where) : 0.0};
        coords.push_back(p);
        masses.push_back(parse_real(row.back(), where));
    }
    if (ids.empty()) throw InvalidInput("no points in " + where);

    std::vector<Edge> edge_list;
    if (edges) {
        std::size_t unused = 0;
        const auto erows = read_table(*edges, {{"a", "b", "cost"}}, unused);
        for (const auto& row : erows) {
            const auto a = index.find(row[0]);
            const auto b = index.find(row[1]);
            if (a == index.end() || b == index.end())
                throw InvalidInput("edge references unknown point id in " + edges->string());
            edge_list.push_back({a->second, b->second, parse_real(row[2], edges->string())});
        }
    }

    double h = 0.0;
    if (mesh) {
        h = *mesh;
    } else if (edges) {
        std::vector<double> shortest(ids.size(), std::numeric_limits<double>::infinity());
        for (const auto& e : edge_list) {
            shortest[e.a] = std::min(shortest[e.a], e.cost);
            shortest[e.b] = std::min(shortest[e.b], e.cost);
        }
        for (double s : shortest)
            if (std::isfinite(s)) h = std::max(h, s / 2.0);
    } else {
        for (std::size_t i = 0; i < coords.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < coords.size(); ++j)
                if (j != i)
                    nearest = std::min(nearest, std::hypot(coords[i][0] - coords[j][0],
                                                           coords[i][1] - coords[j][1]));
            if (std::isfinite(nearest)) h = std::max(h, nearest / 2.0);
        }
    }
    if (!(h > 0.0)) h = 1.0;  // a single isolated point has no intrinsic scale

    DiscreteSpace space = edges ? DiscreteSpace::from_graph(std::move(edge_list), std::move(masses),
                                                            h, dim, std::move(coords))
                                : DiscreteSpace::from_coordinates(dim, std::move(coords),
                                                                  std::move(masses), h);
    space.set_ids(std::move(ids));
    return space;
}

void write_space_csv(std::ostream& out, const DiscreteSpace& space) {
    if (!space.has_coordinates()) throw InvalidInput("space file format requires coordinates");
    out << (space.dim() == 2 ? "id,x,y,mass\n" : "id,x,mass\n");
    const auto old_precision = out.precision(17);
    for (PointId i = 0; i < space.size(); ++i) {
        if (space.has_ids())
            out << space.id(i);
        else
            out << i;
        out << ',' << space.point(i)[0] << ',';
        if (space.dim() == 2) out << space.point(i)[1] << ',';
        out << space.mass(i) << '\n';
    }
    out.precision(old_precision);
}

}  // namespace sobdub
