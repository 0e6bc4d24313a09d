#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slit/geometry.hpp"
#include "slit/params.hpp"

namespace slit {

/// Radial bump exp(-1/(1 - |u|^2)) on the unit disk, discretized by a tensor
/// Gauss-Legendre rule on [-1, 1]^2 and dilated to radius lambda/50 at use.
/// Weights are normalized so the discrete mass is exactly 1.
struct MollifierSpec {
    int points = 33;
    double support_fraction = 1.0 / 50.0;
    std::vector<std::array<double, 2>> nodes;      // unit-disk offsets u
    std::vector<double> weights;                   // eta(u) dA, sum 1
    std::vector<std::array<double, 2>> gradients;  // grad_u eta(u) dA with the same normalization

    static MollifierSpec standard(int points = 33);
    double discrete_mass() const;
    /// Relative gap between the discrete normalization and the radial integral of the bump.
    double normalization_defect() const;

private:
    double continuum_scale_ = 0.0;
};

/// d_lambda and its first two derivatives at a planar point.
struct MollifiedDistance {
    double value = 0.0;                 // d_lambda
    double defect = 0.0;                // d_lambda - d, summed without cancellation
    std::array<double, 2> gradient{};   // grad d_lambda
    std::array<double, 2> grad_defect{};  // grad d_lambda - nu
    double laplacian = 0.0;             // Laplacian of d_lambda
};

/// Every quantity entering the regularized-distance estimates at one point.
struct RegularizedSample {
    int scale_index = 0;  // k with r in [0.75 lambda_k, 3 lambda_k)
    double r = 0.0;
    double d = 0.0;
    double u = 0.0;       // U_a
    double r_star = 0.0;
    double u_star = 0.0;
    std::array<double, 3> grad_r_star{};  // (x', x_n, y)
    std::array<double, 3> grad_u_star{};
    double la_r_star = 0.0;  // L_a r_* / |y|^a
    double la_u_star = 0.0;  // L_a U_{a,*} / |y|^a
    double psi = 0.0;        // blend weight Psi
};

/// Dyadic regularization of r and U_a near a curved edge (curve mode, n = 2)
/// or the flat edge, where every regularization is exact.
class RegularizedDistance {
public:
    explicit RegularizedDistance(SlitGeometry geom, MollifierSpec mollifier = MollifierSpec::standard(),
                                 int finest_scale = 12);

    const SlitGeometry& geometry() const noexcept { return geom_; }
    const MollifierSpec& mollifier() const noexcept { return moll_; }
    static double scale(int k);  // lambda_k = 4^{-k}
    /// Smallest r the constructed scales can serve: 0.75 lambda_{finest}.
    double smallest_radius() const;

    /// C^2 quintic cutoff: 1 for t <= 2.25, 0 for t >= 2.75.
    static double psi(double t);

    /// d * eta_lambda at (x', x_n); requires |d| < 4 lambda.
    MollifiedDistance mollify(double lambda, double xt, double xn) const;
    double mollified_distance(double lambda, double xt, double xn) const { return mollify(lambda, xt, xn).value; }

    RegularizedSample evaluate(const Params& p, const Point& X) const;
    double r_star(const Point& X) const;
    double ua_star(const Params& p, const Point& X) const;

private:
    SlitGeometry geom_;
    MollifierSpec moll_;
    int finest_;
};

struct EstimateFit {
    std::string name;
    double stated_exponent = 0.0;
    double fitted_exponent = 0.0;
    double constant = 0.0;  // max_k M_k / r_k^{stated}
    std::vector<double> shell_max;
    bool pass = false;
};

struct AppendixReport {
    std::vector<double> shell_radii;  // representative radius 2 * 4^{-k}
    std::vector<int> shell_index;
    std::vector<EstimateFit> estimates;
    int samples_per_shell = 0;
    int skipped_near_cut_locus = 0;
    bool pass() const;
};

/// The seven estimates, normalized so each should decay like r^{stated}:
///   |r_*/r - 1| (alpha), |U_*/U - 1| (alpha), |grad r_* - grad r| (alpha),
///   |d_y r_* - d_y r| / (|y|^a U) (s - 1 + alpha), ||grad U_*| / |grad U| - 1| (alpha),
///   |L_a r_* - 2(1-s)|y|^a / r| / |y|^a (alpha - 1), |L_a U_*| / |y|^a (s - 2 + alpha).
/// Shell k holds r in [4^{-k}, 4^{-k+1}); every shell reuses the same relative
/// samples. Points whose mollifier disks could reach the cut locus are skipped.
AppendixReport verify_appendix_estimates(const RegularizedDistance& rd, const Params& p, int samples_per_shell = 256,
                                         std::uint64_t seed = 1, int first_shell = 2, int last_shell = 6,
                                         double tolerance = 0.05);

struct BarrierReport {
    double alpha = 0.0;
    double beta = 0.0;
    double h = 0.0;
    int points = 0;              // grid nodes with r > 4h off the axis
    double c_discrete = 0.0;     // min of -L_h v / (|y|^a r^{alpha-2+s})
    double c_continuum = 0.0;    // same ratio from the closed form at random points
    double c_theory = 0.0;       // alpha (s + alpha)
    bool pass = false;
};

/// Flat-edge barrier v = U_a - U_a^beta, beta = 1 + alpha/s, alpha in (0, 1 - s).
BarrierReport barrier_check(const Params& p, double alpha, int cells = 256, int continuum_points = 1000,
                            std::uint64_t seed = 1);

}  // namespace slit
