#pragma once

#include <array>
#include <map>
#include <vector>

#include "slit/geometry.hpp"
#include "slit/grid.hpp"

namespace slit {

/// Exponent pair (mu, m) of the monomial x^mu r^m. mu[0] is the tangential
/// exponent (always 0 when n = 1), mu[1] the normal one.
struct XRIndex {
    std::array<int, 2> mu{0, 0};
    int m = 0;

    int grade() const noexcept { return mu[0] + mu[1] + m; }
    auto operator<=>(const XRIndex&) const = default;
};

/// P(x, r) = sum p_{mu m} x^mu r^m over n <= 2 spatial variables.
/// Terms with |mu| + m > degree are never stored.
class PolyXR {
public:
    PolyXR(int n, int degree);

    int dimension() const noexcept { return n_; }
    int degree() const noexcept { return degree_; }
    const std::map<XRIndex, double>& terms() const noexcept { return terms_; }

    double get(const XRIndex& idx) const;
    void set(const XRIndex& idx, double value);
    /// max |p_{mu m}|.
    double norm() const;
    /// P at x = (xt, xn) and the given r; xt is ignored when n = 1.
    double operator()(double xt, double xn, double r) const;

    /// Every admissible index of this dimension with grade <= `degree`.
    static std::vector<XRIndex> indices(int n, int degree);

private:
    int n_;
    int degree_;
    std::map<XRIndex, double> terms_;
};

/// Least-squares slope of log sup_{B_lambda(center)} |f| against log lambda.
/// The sup runs over grid nodes inside the ball and interpolated samples on
/// its circle, so it varies continuously with lambda.
double homogeneity_slope(const Field& f, double cx, double cy, const std::vector<double>& scales);

struct QuotientFit {
    PolyXR poly;
    std::vector<double> radii;      // outer radius of each annulus
    std::vector<double> residuals;  // 95th percentile of |u/U - P| per annulus
    double residual_exponent = 0.0;  // +inf when the fit is exact
};

/// Fits u/U by x^mu r^m (x the signed distance to the flat edge) over the
/// annuli {rho/2 <= |X| < rho}, rho in `radii`, skipping nodes within 2h of
/// the slit. Each annulus carries equal total weight.
QuotientFit quotient_expand(const Field& u, const Field& U, const SlitGeometry& geom, int degree,
                            const std::vector<double>& radii = {0.5, 0.25, 0.125, 0.0625, 0.03125});

}  // namespace slit
