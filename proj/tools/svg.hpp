#pragma once

#include <array>
#include <string>
#include <vector>

#include "slit/grid.hpp"

namespace slit::svg {

/// Heatmap on a fixed 640 x 640 viewport with a fixed nine-stop palette.
/// Large grids are block-averaged down to at most 96 cells per side.
/// Markers are drawn as rings at (x, y) in field coordinates.
std::string heatmap(const Field& f, const std::vector<std::array<double, 2>>& markers = {});

}  // namespace slit::svg
