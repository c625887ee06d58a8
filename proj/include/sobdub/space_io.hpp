#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "sobdub/space.hpp"

namespace sobdub {

/// Reads a space file with header `id,x,mass` or `id,x,y,mass`. When an edge
/// file (header `a,b,cost`, endpoints given by id) is supplied, the metric is
/// the shortest-path metric over those edges; otherwise it is Euclidean.
/// Without an explicit mesh, h is estimated as half the largest
/// nearest-neighbour spacing.
DiscreteSpace read_space_csv(const std::filesystem::path& points,
                             const std::optional<std::filesystem::path>& edges = std::nullopt,
                             std::optional<double> mesh = std::nullopt);

void write_space_csv(std::ostream& out, const DiscreteSpace& space);

}  // namespace sobdub
