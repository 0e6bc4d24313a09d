#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace slit::svg {

namespace {

constexpr int kView = 640;
constexpr int kMargin = 40;
constexpr int kMaxCells = 96;

// Perceptually ordered stops, dark blue to yellow.
constexpr std::array<std::array<int, 3>, 9> kPalette{{{68, 1, 84},
                                                      {72, 40, 120},
                                                      {62, 74, 137},
                                                      {49, 104, 142},
                                                      {38, 130, 142},
                                                      {31, 158, 137},
                                                      {53, 183, 121},
                                                      {109, 205, 89},
                                                      {253, 231, 37}}};

std::string color(double t) {
    if (!std::isfinite(t)) return "#ffffff";
    t = std::clamp(t, 0.0, 1.0) * (kPalette.size() - 1);
    const std::size_t k = std::min(kPalette.size() - 2, static_cast<std::size_t>(t));
    const double w = t - static_cast<double>(k);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c) {
        rgb[c] = static_cast<int>(std::lround((1.0 - w) * kPalette[k][c] + w * kPalette[k + 1][c]));
    }
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void open(std::ostringstream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kView << "\" height=\"" << kView
        << "\" viewBox=\"0 0 " << kView << ' ' << kView << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << kView << "\" height=\"" << kView << "\" fill=\"#ffffff\"/>\n";
}

}  // namespace

std::string heatmap(const Field& f, const std::vector<std::array<double, 2>>& markers) {
    const Grid2D& g = f.grid;
    const int bx = std::max(1, (g.nx + kMaxCells - 1) / kMaxCells);
    const int by = std::max(1, (g.ny + kMaxCells - 1) / kMaxCells);
    const int cx = (g.nx + bx - 1) / bx;
    const int cy = (g.ny + by - 1) / by;
    std::vector<double> cells(static_cast<std::size_t>(cx) * static_cast<std::size_t>(cy),
                              std::numeric_limits<double>::quiet_NaN());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int J = 0; J < cy; ++J) {
        for (int I = 0; I < cx; ++I) {
            double sum = 0.0;
            int n = 0;
            for (int j = J * by; j < std::min(g.ny, (J + 1) * by); ++j) {
                for (int i = I * bx; i < std::min(g.nx, (I + 1) * bx); ++i) {
                    const std::size_t k = g.index(i, j);
                    if (!f.is_defined(k) || !std::isfinite(f.values[k])) continue;
                    sum += f.values[k];
                    ++n;
                }
            }
            if (n == 0) continue;
            const double v = sum / n;
            cells[static_cast<std::size_t>(J) * static_cast<std::size_t>(cx) + static_cast<std::size_t>(I)] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double span = hi > lo ? hi - lo : 0.0;
    const double plot = kView - 2.0 * kMargin;
    const double width = g.h * (g.nx - 1);
    const double height = g.h * (g.ny - 1);
    const double unit = plot / std::max(width, height);
    const double w_cell = unit * g.h * bx;
    const double h_cell = unit * g.h * by;

    std::ostringstream out;
    open(out);
    for (int J = 0; J < cy; ++J) {
        for (int I = 0; I < cx; ++I) {
            const double v = cells[static_cast<std::size_t>(J) * static_cast<std::size_t>(cx) + static_cast<std::size_t>(I)];
            const double t = span > 0.0 ? (v - lo) / span : 0.5;
            const double px = kMargin + unit * g.h * I * bx;
            const double py = kMargin + unit * height - unit * g.h * (J + 1) * by;
            out << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(std::max<double>(kMargin, py)) << "\" width=\""
                << fmt(w_cell + 0.05) << "\" height=\"" << fmt(h_cell + 0.05) << "\" fill=\"" << color(t) << "\"/>\n";
        }
    }
    for (const auto& m : markers) {
        const double px = kMargin + unit * (m[0] - g.x0);
        const double py = kMargin + unit * height - unit * (m[1] - g.y0);
        out << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py)
            << "\" r=\"5\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    }
    out << "<text x=\"" << kMargin << "\" y=\"" << kView - 12 << "\" font-family=\"monospace\" font-size=\"12\">min "
        << label(lo) << "  max " << label(hi) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace slit::svg
