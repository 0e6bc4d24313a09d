#include "slit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slit/errors.hpp"

namespace slit {

namespace {

int cells_between(double lo, double hi, double h) {
    const double n = (hi - lo) / h;
    const long rounded = std::lround(n);
    if (rounded < 2 || std::abs(n - static_cast<double>(rounded)) > 1e-9 * std::max(1.0, n)) {
        throw DomainError("box extent is not a multiple of h (at least two cells)");
    }
    return static_cast<int>(rounded);
}

}  // namespace

Grid2D Grid2D::half_box(double xmin, double xmax, double ymax, int cells_x) {
    if (!(xmax > xmin) || !(ymax > 0.0) || cells_x < 2) throw DomainError("degenerate half box");
    Grid2D g;
    g.h = (xmax - xmin) / cells_x;
    g.nx = cells_x + 1;
    g.ny = cells_between(0.0, ymax, g.h) + 1;
    g.x0 = xmin;
    g.y0 = 0.0;
    g.reflected = true;
    g.validate();
    return g;
}

Grid2D Grid2D::box(double xmin, double xmax, double ymin, double ymax, double h) {
    if (!(h > 0.0)) throw DomainError("grid spacing must be positive");
    Grid2D g;
    g.h = h;
    g.nx = cells_between(xmin, xmax, h) + 1;
    g.ny = cells_between(ymin, ymax, h) + 1;
    g.x0 = xmin;
    g.y0 = ymin;
    g.reflected = false;
    g.validate();
    return g;
}

int Grid2D::column_of(double x) const noexcept {
    const double u = (x - x0) / h;
    const long i = std::lround(u);
    if (i < 0 || i >= nx || std::abs(u - static_cast<double>(i)) > 1e-9) return -1;
    return static_cast<int>(i);
}

void Grid2D::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("grid spacing must be positive and finite");
    if (nx < 3 || ny < 3) throw DomainError("grid needs at least 3 nodes per axis");
    if (reflected && y0 != 0.0) throw DomainError("reflected grid must start on y = 0");
}

Field Field::sample(const Grid2D& g, const Params& p, const std::function<double(double, double)>& fn) {
    Field f(g, p);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) f(i, j) = fn(g.x(i), g.y(j));
    }
    return f;
}

double Field::interpolate(double x, double y) const {
    if (grid.nx < 4 || grid.ny < 4) throw DomainError("cubic interpolation needs 4 nodes per axis");
    if (grid.reflected) y = std::abs(y);
    const double u = (x - grid.x0) / grid.h;
    const double v = (y - grid.y0) / grid.h;
    // Stencil start: the two nodes left of the point, kept inside the grid
    // (except on reflected grids where rows -1 mirror rows 1).
    int i0 = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, grid.nx - 4);
    int j0 = static_cast<int>(std::floor(v)) - 1;
    j0 = grid.reflected ? std::min(j0, grid.ny - 4) : std::clamp(j0, 0, grid.ny - 4);

    auto weights = [](double t, int start, double* w) {
        for (int a = 0; a < 4; ++a) {
            double num = 1.0;
            double den = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (b == a) continue;
                num *= t - (start + b);
                den *= static_cast<double>(a - b);
            }
            w[a] = num / den;
        }
    };
    double wx[4];
    double wy[4];
    weights(u, i0, wx);
    weights(v, j0, wy);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int j = std::abs(j0 + b);
        double row = 0.0;
        for (int a = 0; a < 4; ++a) row += wx[a] * (*this)(i0 + a, j);
        acc += wy[b] * row;
    }
    return acc;
}

void Field::validate() const {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (is_defined(k) && !std::isfinite(values[k])) {
            throw ValidationError("field holds a non-finite value at node " + std::to_string(k));
        }
    }
}

}  // namespace slit
