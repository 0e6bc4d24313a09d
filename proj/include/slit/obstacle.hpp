#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slit/grid.hpp"
#include "slit/params.hpp"

namespace slit {

enum class ObstacleKind { quadratic, bump, cosine };

/// Named analytic obstacles on the line, all with a single positivity interval
/// around the origin:
///   quadratic  A - x^2 / w
///   bump       A (2 b(x/w) - 1), b(t) = exp(1 - 1/(1 - t^2)) on |t| < 1, else 0
///   cosine     A cos(pi x / w) on |x| < w, else -A
struct ObstaclePreset {
    ObstacleKind kind = ObstacleKind::quadratic;
    double amplitude = 0.5;
    double width = 1.0;

    static ObstaclePreset parse(const std::string& name, double amplitude, double width);
    std::string name() const;
    double value(double x) const;
    /// phi(x0), phi'(x0), ..., phi^{(order)}(x0).
    std::vector<double> derivatives(double x0, int order) const;
};

/// c_0 = 1, c_j = 2j(2j + a - 1) c_{j-1}.
std::vector<double> extension_constants(const Params& p, int count);

/// phi~(x, y) = phi(x) + sum_{j=1}^{m/2+1} (-1)^j / c_j  y^{2j}  T^{(2j)}(x), where T
/// is the order-m Taylor polynomial of phi at x0 built from `derivs`.
/// L_a phi~ = |y|^a (phi - T)''.
Field extend_obstacle(const std::function<double(double)>& phi, const std::vector<double>& derivs, double x0,
                      const Params& p, int m, const Grid2D& grid);

/// Localized obstacle problem on a reflected box: L_a v = 0 off the contact
/// set, v(x, 0) >= phi(x), L_a v <= 0 on the row y = 0, v = boundary outside.
struct ObstacleProblem {
    Params params;
    Grid2D grid;
    std::function<double(double)> obstacle;
    std::function<double(double, double)> boundary = [](double, double) { return 0.0; };
    SolverSettings settings{};
    /// Projected sweeps before the active-set polish takes over; 0 selects 4 max(nx, ny).
    int warmup_sweeps = 0;
};

struct ObstacleSolution {
    Field field;
    std::vector<double> obstacle_row;   // phi at the row-0 nodes
    std::vector<std::uint8_t> contact;  // one flag per column of row 0
    int psor_sweeps = 0;
    int active_set_rounds = 0;
};

/// Projected SOR (constrained row relaxed with omega = 1.5, then clamped),
/// followed by a primal-dual active-set polish that re-solves the linear
/// system with the contact nodes pinned until the contact set is stable.
/// Throws ConvergenceError when neither stage reaches tolerance.
ObstacleSolution solve_obstacle(const ObstacleProblem& prob);

struct ComplementarityMetrics {
    double offcontact_residual = 0.0;  // max |L_a v| over free nodes off contact
    double contact_flux_min = 0.0;     // min over contact of -flux_limit (>= 0 when consistent)
    double offcontact_flux_max = 0.0;  // max |flux_limit| on row 0 off contact, away from the free boundary
    int contact_nodes = 0;
};

/// `exclusion` is the distance kept from free-boundary points and the box
/// sides when measuring off-contact flux.
ComplementarityMetrics complementarity_audit(const ObstacleSolution& sol, double exclusion = 0.25);

struct FreeBoundaryPoint {
    double x = 0.0;
    int side = 0;  // -1 left end of a contact run, +1 right end
};

/// Ends of every contact run, refined inside the adjacent cell by linear
/// extrapolation of (v - phi)^{1/(1+s)} from the next two free nodes.
std::vector<FreeBoundaryPoint> free_boundary(const ObstacleSolution& sol);

}  // namespace slit
