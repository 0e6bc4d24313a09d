#include "slit/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "slit/errors.hpp"

namespace slit {

QuadRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("Gauss-Legendre order must be positive");
    QuadRule q;
    q.nodes.resize(static_cast<std::size_t>(n));
    q.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.nodes[static_cast<std::size_t>(i)] = -x;
        q.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        q.weights[static_cast<std::size_t>(i)] = w;
        q.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return q;
}

void append_mapped(const QuadRule& ref, double lo, double hi, QuadRule& out) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
        out.nodes.push_back(mid + half * ref.nodes[k]);
        out.weights.push_back(half * ref.weights[k]);
    }
}

QuadRule graded_interval(double length, int panels, double ratio, int points) {
    if (panels < 2 || panels % 2 != 0) throw DomainError("graded rule needs an even panel count");
    if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("grading ratio must lie in (0,1)");
    const QuadRule ref = gauss_legendre(points);
    const int per_side = panels / 2;
    const double half = 0.5 * length;
    // Breakpoints from the endpoint outward: 0, half*q^{m-1}, ..., half*q, half.
    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (int k = per_side - 1; k >= 0; --k) breaks.push_back(half * std::pow(ratio, k));
    QuadRule out;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) append_mapped(ref, breaks[b], breaks[b + 1], out);
    for (std::size_t b = breaks.size() - 1; b > 0; --b) {
        append_mapped(ref, length - breaks[b], length - breaks[b - 1], out);
    }
    return out;
}

CircleQuadrature CircleQuadrature::graded(int panels, int points, double ratio) {
    const double quarter = 0.5 * std::numbers::pi;
    const QuadRule base = graded_interval(quarter, panels, ratio, points);
    CircleQuadrature c;
    for (int quadrant = 0; quadrant < 4; ++quadrant) {
        for (std::size_t k = 0; k < base.nodes.size(); ++k) {
            c.theta.push_back(quadrant * quarter + base.nodes[k]);
            c.weight.push_back(base.weights[k]);
        }
    }
    return c;
}

}  // namespace slit
