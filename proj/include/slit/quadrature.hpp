#pragma once

#include <vector>

namespace slit {

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadRule gauss_legendre(int n);

/// Maps a rule on [-1, 1] to [lo, hi] and appends it to `out`.
void append_mapped(const QuadRule& ref, double lo, double hi, QuadRule& out);

/// Composite rule on [0, L] with panels shrinking geometrically (ratio q)
/// toward both endpoints; `panels` must be even.
QuadRule graded_interval(double length, int panels, double ratio, int points);

/// Angular rule on the unit circle, graded toward the four axis crossings
/// where |sin 2 theta|^a degenerates. `panels` counts panels per quadrant.
struct CircleQuadrature {
    std::vector<double> theta;
    std::vector<double> weight;  // arc-length weights (dsigma), weight function not included

    static CircleQuadrature graded(int panels = 64, int points = 24, double ratio = 0.25);
    std::size_t size() const noexcept { return theta.size(); }
};

}  // namespace slit
