#pragma once

#include <array>
#include <vector>

#include "slit/params.hpp"

namespace slit {

/// A point X = (x', x_n, y). In flat mode only (x_n, y) matter and x_n plays
/// the role of the planar coordinate x.
struct Point {
    double xt = 0.0;  // tangential coordinate x'
    double xn = 0.0;  // normal-direction coordinate x_n
    double y = 0.0;

    static Point planar(double x, double y) { return Point{0.0, x, y}; }
    std::array<double, 2> z() const { return {xn, y}; }
};

enum class GeometryMode { flat, curve };

/// Nearest point on the edge curve for a planar query (x', x_n).
struct FootPoint {
    double t = 0.0;          // curve parameter of the nearest point
    double distance = 0.0;   // signed distance
    double gap = 0.0;        // distance excess of the runner-up local minimum (inf if none)
};

struct NormalCurvature {
    std::array<double, 2> normal{};  // grad d in the (x', x_n) plane
    double curvature = 0.0;          // -Laplacian of d
};

/// The slit P = {x_n <= gamma(x'), y = 0} and its edge Gamma.
///
/// Flat mode is the one-dimensional edge {x = edge} with the slit on the side
/// opposite to `orientation`; d = orientation * (x - edge) exactly.
/// Curve mode is the graph gamma(t) = A |t|^p over [-T, T], n = 2.
/// Sign convention everywhere: d > 0 where x_n > gamma(x').
class SlitGeometry {
public:
    static SlitGeometry flat(double edge = 0.0, int orientation = 1);
    static SlitGeometry power_curve(double amplitude, double exponent, double half_width = 1.0,
                                    int samples_log2 = 16);

    GeometryMode mode() const noexcept { return mode_; }
    double edge() const noexcept { return edge_; }
    int orientation() const noexcept { return orientation_; }
    double amplitude() const noexcept { return amplitude_; }
    double exponent() const noexcept { return exponent_; }
    double half_width() const noexcept { return half_width_; }

    /// Declared Hoelder exponent of gamma' (never above the true one).
    double holder_exponent() const noexcept { return alpha_; }
    void declare_holder_exponent(double alpha);

    double gamma(double t) const;
    double dgamma(double t) const;
    double d2gamma(double t) const;  // +-inf at t = 0 when 1 < p < 2

    double signed_distance(double x) const;              // flat mode
    double signed_distance(double xt, double xn) const;  // both modes
    FootPoint foot_point(double xt, double xn) const;
    /// r = (d^2 + y^2)^{1/2}: distance to the edge.
    double slit_distance(const Point& X) const;
    /// Distance to the slit set itself: |y| over the slit (d <= 0), r beyond it.
    double distance_to_slit(const Point& X) const;

    /// grad d and -Laplacian d at a planar point (curve mode).
    NormalCurvature normal_curvature(double xt, double xn) const;

    /// Euclidean distance from (x', x_n) to the set of points with more than
    /// one nearest edge point. Infinite when that set is empty nearby.
    double cut_locus_distance(double xt, double xn) const;

private:
    SlitGeometry() = default;
    std::vector<double> refine_candidates(double xt, double xn, std::size_t k0, std::size_t k1,
                                          std::vector<double>& dist2) const;
    double refine_min(double xt, double xn, double lo, double hi) const;

    GeometryMode mode_ = GeometryMode::flat;
    double edge_ = 0.0;
    int orientation_ = 1;
    double amplitude_ = 0.0;
    double exponent_ = 2.0;
    double half_width_ = 1.0;
    double alpha_ = 1.0;
    double step_ = 0.0;
    std::vector<double> samples_;  // gamma at t_k = -T + k * step_
    double cut_start_ = 0.0;       // cut locus is {x' = 0, sign(A) x_n > cut_start_}
};

/// U_a = ((r + d)/2)^s; switches to |y|^{2s} / (2^s (r - d)^s) on the slit
/// side, where r + d suffers cancellation.
double profile_u_a(const SlitGeometry& geom, const Params& p, const Point& X);

}  // namespace slit
