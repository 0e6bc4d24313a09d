#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "slit/params.hpp"

namespace slit {

/// Uniform square-cell grid. Node (i, j) sits at (x0 + i h, y0 + j h).
/// A reflected grid is the y >= 0 half of a domain even in y; its row 0 lies
/// on y = 0.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    bool reflected = false;

    /// Reflected half-box [xmin, xmax] x [0, ymax] with `cells_x` cells across.
    static Grid2D half_box(double xmin, double xmax, double ymax, int cells_x);
    /// Full box [xmin, xmax] x [ymin, ymax] with spacing h (extents must be multiples of h).
    static Grid2D box(double xmin, double xmax, double ymin, double ymax, double h);

    double x(int i) const noexcept { return x0 + i * h; }
    double y(int j) const noexcept { return y0 + j * h; }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    bool on_outer_boundary(int i, int j) const noexcept {
        return i == 0 || i == nx - 1 || j == ny - 1 || (j == 0 && !reflected);
    }
    /// Nearest column index for abscissa x, or -1 if x is not on a column.
    int column_of(double x) const noexcept;

    void validate() const;
};

/// Iteration record attached to solver output.
struct SolveInfo {
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;
};

/// Scalar samples on a grid. `defined` is empty when every node carries a
/// value; otherwise nodes with defined[k] == 0 are excluded from reports.
struct Field {
    Grid2D grid;
    Params params;
    std::vector<double> values;
    std::vector<std::uint8_t> defined;
    SolveInfo info;

    Field(const Grid2D& g, const Params& p) : grid(g), params(p), values(g.size(), 0.0) {}

    static Field sample(const Grid2D& g, const Params& p, const std::function<double(double, double)>& fn);

    double& operator()(int i, int j) { return values[grid.index(i, j)]; }
    double operator()(int i, int j) const { return values[grid.index(i, j)]; }
    bool is_defined(std::size_t k) const { return defined.empty() || defined[k] != 0; }

    /// Piecewise-cubic interpolation (4x4 Lagrange stencil, clamped at the
    /// edges, mirrored across y = 0 on reflected grids).
    double interpolate(double x, double y) const;

    /// Throws ValidationError when a defined node holds a non-finite value.
    void validate() const;
};

}  // namespace slit
