#pragma once

#include <array>
#include <functional>
#include <vector>

#include "slit/grid.hpp"
#include "slit/params.hpp"
#include "slit/quadrature.hpp"

namespace slit {

/// (z1, z2) -> (x, y) = (z1^2 - z2^2, 2 z1 z2): the right half-plane onto the
/// plane minus the negative x-axis.
std::array<double, 2> zip(double z1, double z2);

/// Inverse of zip on the branch z1 >= 0 (principal square root of x + iy).
std::array<double, 2> unzip(double x, double y);

/// |2 z1 z2|^a.
double zipped_weight(const Params& p, double z1, double z2);

/// Unnormalized b_0 .. b_j with b_0 = 1.
std::vector<double> basis_recursion(int j, const Params& p);

/// u_j(z) = |z1|^{-a} z1 sum_i b_i z1^{2i} z2^{2(j-i)}, homogeneous of degree 2s + 2j.
class HomogeneousSolution {
public:
    HomogeneousSolution(int j, const Params& p, std::vector<double> b, bool normalized);

    int index() const noexcept { return j_; }
    const Params& params() const noexcept { return params_; }
    const std::vector<double>& coefficients() const noexcept { return b_; }
    bool normalized() const noexcept { return normalized_; }
    double degree() const noexcept { return 2.0 * params_.s() + 2.0 * j_; }

    double operator()(double z1, double z2) const;
    std::array<double, 2> gradient(double z1, double z2) const;
    /// (z / |z|) . grad u at z.
    double radial_derivative(double z1, double z2) const;

    /// Coefficients of u_j o unzip / U_a as a polynomial in (x, r):
    /// entry mu multiplies x^mu r^{j - mu}.
    std::vector<double> xr_coefficients() const;

private:
    int j_;
    Params params_;
    std::vector<double> b_;
    bool normalized_;
};

/// Weighted circle quadrature: integral over the unit circle of
/// f(cos t, sin t) |sin 2t|^a dt.
class BoundaryQuadrature {
public:
    explicit BoundaryQuadrature(const Params& p, int panels = 64, int points = 24);

    const Params& params() const noexcept { return params_; }
    std::size_t size() const noexcept { return z1_.size(); }
    double z1(std::size_t k) const noexcept { return z1_[k]; }
    double z2(std::size_t k) const noexcept { return z2_[k]; }
    double weight(std::size_t k) const noexcept { return w_[k]; }  // includes |sin 2t|^a

    double integrate(const std::function<double(double, double)>& f) const;
    /// Numerical total mass of the weight.
    double weight_mass() const noexcept { return mass_; }
    /// Closed form 2 B((1+a)/2, 1/2), used to certify the grading.
    static double weight_mass_exact(const Params& p);

private:
    Params params_;
    std::vector<double> z1_, z2_, w_;
    double mass_ = 0.0;
};

/// Builds u_j with b_0 > 0 scaled to unit weighted boundary norm.
/// Throws DomainError when the quadrature cannot resolve the weight.
HomogeneousSolution make_basis(int j, const BoundaryQuadrature& quad);
HomogeneousSolution make_basis(int j, const Params& p, int quad_panels = 64);

/// The normalized constant iota_a together with u_0 .. u_J on one quadrature.
class SpectralBasis {
public:
    SpectralBasis(const Params& p, int J = 12, int quad_panels = 64);

    const Params& params() const noexcept { return quad_.params(); }
    const BoundaryQuadrature& quadrature() const noexcept { return quad_; }
    int truncation() const noexcept { return static_cast<int>(basis_.size()) - 1; }
    const HomogeneousSolution& operator[](int j) const { return basis_.at(static_cast<std::size_t>(j)); }
    /// Constant with unit weighted boundary norm: |omega|_{L^1}^{-1/2}.
    double iota() const noexcept { return iota_; }

    /// Gram matrix of (iota, u_0, ..., u_J) under the weighted boundary product.
    std::vector<std::vector<double>> gram() const;

private:
    BoundaryQuadrature quad_;
    std::vector<HomogeneousSolution> basis_;
    double iota_;
};

struct SpectralExpansion {
    Params params;
    double const_coeff = 0.0;
    std::vector<double> coeffs;
};

/// Projection of boundary samples g (one per quadrature node).
SpectralExpansion boundary_project(const std::vector<double>& g, const SpectralBasis& basis);
SpectralExpansion boundary_project(const std::function<double(double, double)>& g, const SpectralBasis& basis);

struct ExtensionValue {
    double value = 0.0;
    double tail_estimate = 0.0;  // |z|^{2s+2(J+1)} (|c_{J-1}| + |c_J|)
};

/// Interior value sum_j c_j |z|^{2s+2j} u_j(z/|z|) + c iota for |z| < 1.
ExtensionValue extend(const SpectralExpansion& e, const SpectralBasis& basis, double z1, double z2);

/// Discrete (4|z|^2)^{-1} div(|2 z1 z2|^a grad u); nodes on either axis are undefined.
Field apply_La_bar(const Field& f, const Params& p);

struct BasisResidual {
    double max_residual = 0.0;
    double scale = 0.0;     // max over nodes of |(dw) u'| + |w u''| (both directions), at least |u| / (4|z|^2)
    double relative = 0.0;  // max_residual / scale
    int nodes = 0;
};

/// Discrete zipped residual of u on the first-quadrant grid of spacing h,
/// over nodes in the closed unit disk at distance >= margin from both axes.
BasisResidual basis_residual(const HomogeneousSolution& u, double h, double margin = 1.0 / 16.0);

/// omega-weighted average of u^2 over the circle of radius lambda.
double phi_functional(const std::function<double(double, double)>& u, const BoundaryQuadrature& quad, double lambda);
/// Grid version: bicubic interpolation; lambda must be at least 4h and inside the grid.
double phi_functional(const Field& f, const BoundaryQuadrature& quad, double lambda);

struct GreenResidual {
    double identity1 = 0.0;  // |int_D grad u . grad v w - int_dD u d_nu v w|
    double identity2 = 0.0;  // |int_dD (u d_nu v - v d_nu u) w|
    double volume = 0.0;
    double surface = 0.0;
};

/// Green identities on D_lambda for two basis functions (analytic derivatives,
/// polar volume quadrature).
GreenResidual green_check(const HomogeneousSolution& u, const HomogeneousSolution& v, double lambda,
                          const BoundaryQuadrature& quad);
/// Green identities for grid fields: cell-midpoint volume sum, interpolated
/// boundary values and centred normal differences.
GreenResidual green_check(const Field& u, const Field& v, double lambda, const BoundaryQuadrature& quad);

}  // namespace slit
