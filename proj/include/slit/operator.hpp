#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slit/geometry.hpp"
#include "slit/grid.hpp"
#include "slit/params.hpp"

namespace slit {

/// Weight at a face midpoint (xm, ym). Non-finite or NaN marks a degenerate
/// face; nodes touching one get no stencil.
using FaceWeight = std::function<double(double xm, double ym)>;

/// Mean of |y|^a over [ym - h/2, ym + h/2]: the exact weight of a face
/// crossed by x-direction flux. On the axis it is (h/2)^a / (1 + a).
FaceWeight axis_weight(const Params& p, double h);

/// |ym|^a, exact for faces crossed by y-direction flux (constant y).
FaceWeight midpoint_weight(const Params& p);

/// Five-point flux-form stencil of div(w grad u).
///
/// The Params constructor weights x-direction faces by the mean of |y|^a
/// over the face and y-direction faces by |y|^a at the face; a midpoint
/// rule on x-faces would leave a spurious axis flux of order h^{1+a}.
/// balance(u) at node k is sum_f c_f (u_nbr - u_k); the discrete operator is
/// balance / h^2. On a reflected grid row 0 mirrors row 1, so its north
/// coefficient counts both half-cells. Multiplying each row by theta (1/2 on
/// the mirrored row, 1 elsewhere) makes the free-node system symmetric.
class FluxStencil {
public:
    FluxStencil(const Grid2D& grid, const Params& p);
    FluxStencil(const Grid2D& grid, const FaceWeight& weight);

    const Grid2D& grid() const noexcept { return grid_; }
    bool has_stencil(std::size_t k) const noexcept { return active_[k] != 0; }
    double balance(const std::vector<double>& u, int i, int j) const;
    double diagonal(std::size_t k) const noexcept { return diag_[k]; }
    double theta(int j) const noexcept { return (grid_.reflected && j == 0) ? 0.5 : 1.0; }
    double node_weight(std::size_t k) const noexcept { return node_w_[k]; }

    enum class Face { east, west, north, south };
    /// Replaces one face coefficient of node k and keeps the diagonal
    /// consistent. A mirrored north face takes 2c, counting both half-cells.
    void set_face(std::size_t k, Face face, double c);

    double east(std::size_t k) const noexcept { return ce_[k]; }
    double west(std::size_t k) const noexcept { return cw_[k]; }
    double north(std::size_t k) const noexcept { return cn_[k]; }
    double south(std::size_t k) const noexcept { return cs_[k]; }

private:
    void build(const FaceWeight& weight, const FaceWeight& y_weight);

    Grid2D grid_;
    std::vector<double> ce_, cw_, cn_, cs_, diag_, node_w_;
    std::vector<std::uint8_t> active_;
};

/// Discrete L_a u = div(|y|^a grad u) at every node with a full stencil.
Field apply_La(const Field& f);

/// balance / h^2 times scale(x, y) for a general stencil; nodes without a
/// stencil are left undefined.
Field apply_stencil(const FluxStencil& stencil, const Field& f,
                    const std::function<double(double, double)>& scale);

/// Linear problem on a grid: solve L_h u = W f on free nodes, u fixed on
/// pinned nodes. `values` carries pinned data and the initial guess.
struct LinearProblem {
    std::vector<std::uint8_t> pinned;
    std::vector<double> values;
    std::vector<double> source;  // empty means zero
};

/// Relative residual ||b - A u|| / ||b|| of the symmetric free-node system
/// (absolute when b = 0).
double relative_residual(const FluxStencil& stencil, const LinearProblem& prob, const std::vector<double>& u);

/// Quadratic energy 1/2 u'Au - b'u of the symmetric free-node system.
double system_energy(const FluxStencil& stencil, const LinearProblem& prob, const std::vector<double>& u);

/// One lexicographic over-relaxation sweep in place.
void sor_sweep(const FluxStencil& stencil, const LinearProblem& prob, std::vector<double>& u, double omega);

/// Solves a linear problem with SOR or Jacobi-preconditioned CG.
/// Throws ConvergenceError (with residual history) at max_iter.
Field solve_linear(const FluxStencil& stencil, const Params& p, const LinearProblem& prob,
                   const SolverSettings& settings);

/// Dirichlet problem in a flat slit domain on a reflected grid: u = boundary
/// on the outer boundary (and on extra pinned nodes), u = slit_value(x) on
/// nodes with y = 0 and d <= 0, L_a u = |y|^a source elsewhere.
/// In columns over the slit every y-face carries h / int y^{-a} dy over the
/// face's span, which makes the one-dimensional profile y^{1-a} exact; at the
/// slit face the midpoint weight would misstate its flux by 2^{-a} / (1-a).
/// Faces whose midpoint lies within tip_radius * h of the edge instead carry
/// flux(U_a) / (U_a(B) - U_a(A)) with the face flux integrated exactly, so the
/// scheme is conservative for the singular tip profile; 0 disables this.
Field dirichlet_solve(const SlitGeometry& geom, const Params& p, const Grid2D& grid,
                      const std::function<double(double, double)>& boundary,
                      const std::function<double(double)>& slit_value, const Field* source,
                      const SolverSettings& settings, const std::vector<std::uint8_t>* extra_pinned = nullptr,
                      double tip_radius = 6.0);

/// Slit nodes of a reflected grid: row 0 with d <= 0.
std::vector<std::uint8_t> slit_mask(const SlitGeometry& geom, const Grid2D& grid);

/// Extrapolated lim y^a du/dy at (x, 0+) from rows 1 and 2 under the model
/// u = u(x,0) + L y^{1-a}/(1-a) + c y^2, Richardson-combined to remove c.
/// Un-normalized: (-Delta)^s differs by the dimensional constant.
double flux_limit(const Field& f, double x);

/// The two one-row estimates entering flux_limit, exposed for diagnostics.
struct FluxEstimates {
    double row1 = 0.0;
    double row2 = 0.0;
    double combined = 0.0;
};
FluxEstimates flux_estimates(const Field& f, int column);

}  // namespace slit
