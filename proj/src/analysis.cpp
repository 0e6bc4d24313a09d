#include "slit/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "slit/errors.hpp"

namespace slit {

PolyXR::PolyXR(int n, int degree) : n_(n), degree_(degree) {
    if (n != 1 && n != 2) throw DomainError("PolyXR supports n = 1 or n = 2 spatial variables");
    if (degree < 0) throw DomainError("polynomial degree must be non-negative");
}

double PolyXR::get(const XRIndex& idx) const {
    const auto it = terms_.find(idx);
    return it == terms_.end() ? 0.0 : it->second;
}

void PolyXR::set(const XRIndex& idx, double value) {
    if (idx.mu[0] < 0 || idx.mu[1] < 0 || idx.m < 0) throw DomainError("negative exponent in PolyXR index");
    if (n_ == 1 && idx.mu[0] != 0) throw DomainError("tangential exponent in a one-variable PolyXR");
    if (idx.grade() > degree_) {
        throw DomainError("monomial of grade " + std::to_string(idx.grade()) + " exceeds degree " +
                          std::to_string(degree_));
    }
    terms_[idx] = value;
}

double PolyXR::norm() const {
    double m = 0.0;
    for (const auto& [idx, v] : terms_) m = std::max(m, std::abs(v));
    return m;
}

double PolyXR::operator()(double xt, double xn, double r) const {
    double acc = 0.0;
    for (const auto& [idx, v] : terms_) {
        double term = v * std::pow(xn, idx.mu[1]) * std::pow(r, idx.m);
        if (n_ == 2) term *= std::pow(xt, idx.mu[0]);
        acc += term;
    }
    return acc;
}

std::vector<XRIndex> PolyXR::indices(int n, int degree) {
    std::vector<XRIndex> out;
    for (int g = 0; g <= degree; ++g) {
        for (int m = 0; m <= g; ++m) {
            const int rest = g - m;
            if (n == 1) {
                out.push_back({{0, rest}, m});
            } else {
                for (int t = 0; t <= rest; ++t) out.push_back({{t, rest - t}, m});
            }
        }
    }
    return out;
}

namespace {

struct Extents {
    double xmin, xmax, ymin, ymax;
};

Extents extents(const Grid2D& g) {
    const double ymax = g.y(g.ny - 1);
    return {g.x0, g.x(g.nx - 1), g.reflected ? -ymax : g.y0, ymax};
}

double ball_sup(const Field& f, double cx, double cy, double lambda) {
    const Grid2D& g = f.grid;
    double sup = 0.0;
    const double l2 = lambda * lambda;
    for (int j = 0; j < g.ny; ++j) {
        const double y = g.y(j);
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.x(i) - cx;
            const bool inside = dx * dx + (y - cy) * (y - cy) <= l2 ||
                                (g.reflected && dx * dx + (y + cy) * (y + cy) <= l2);
            if (inside) sup = std::max(sup, std::abs(f(i, j)));
        }
    }
    const int samples = std::max(256, static_cast<int>(16.0 * std::numbers::pi * lambda / g.h));
    for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * std::numbers::pi * k / samples;
        sup = std::max(sup, std::abs(f.interpolate(cx + lambda * std::cos(t), cy + lambda * std::sin(t))));
    }
    return sup;
}

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k] / n;
        my += ys[k] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    return sxy / sxx;
}

}  // namespace

double homogeneity_slope(const Field& f, double cx, double cy, const std::vector<double>& scales) {
    if (scales.size() < 2) throw DomainError("homogeneity slope needs at least two scales");
    const Extents e = extents(f.grid);
    const double smallest = *std::min_element(scales.begin(), scales.end());
    if (smallest < 4.0 * f.grid.h * (1.0 - 1e-12)) {
        throw DomainError("smallest scale " + std::to_string(smallest) + " is below 4h");
    }
    std::vector<double> xs, ys;
    for (double lambda : scales) {
        if (cx - lambda < e.xmin || cx + lambda > e.xmax || cy - lambda < e.ymin || cy + lambda > e.ymax) {
            throw DomainError("ball of radius " + std::to_string(lambda) + " leaves the grid");
        }
        const double sup = ball_sup(f, cx, cy, lambda);
        if (!(sup > 0.0)) {
            throw DomainError("field vanishes on the ball of radius " + std::to_string(lambda) +
                              "; homogeneity undefined");
        }
        xs.push_back(std::log(lambda));
        ys.push_back(std::log(sup));
    }
    return ls_slope(xs, ys);
}

QuotientFit quotient_expand(const Field& u, const Field& U, const SlitGeometry& geom, int degree,
                            const std::vector<double>& radii) {
    if (geom.mode() != GeometryMode::flat) throw DomainError("quotient_expand works in the flat geometry");
    if (u.grid.nx != U.grid.nx || u.grid.ny != U.grid.ny || u.grid.h != U.grid.h) {
        throw DomainError("quotient fields must share a grid");
    }
    if (radii.size() < 2) throw DomainError("need at least two annuli");
    const Grid2D& g = u.grid;
    const double h = g.h;
    const std::vector<XRIndex> basis = PolyXR::indices(1, degree);

    struct Sample {
        double d, r, q;
        std::size_t annulus;
    };
    std::vector<Sample> samples;
    std::vector<std::size_t> counts(radii.size(), 0);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.x(i);
            const double y = g.y(j);
            const double rho = std::hypot(x - geom.edge(), y);
            std::size_t a = radii.size();
            for (std::size_t k = 0; k < radii.size(); ++k) {
                if (rho < radii[k] && rho >= 0.5 * radii[k]) {
                    a = k;
                    break;
                }
            }
            if (a == radii.size()) continue;
            const double d = geom.signed_distance(x);
            const double slit_gap = d <= 0.0 ? std::abs(y) : std::hypot(d, y);
            if (slit_gap < 2.0 * h) continue;
            const double den = U(i, j);
            if (!(den > 0.0)) {
                throw DomainError("denominator field is not positive off the slit at (" + std::to_string(x) + ", " +
                                  std::to_string(y) + ")");
            }
            samples.push_back({d, std::hypot(d, y), u(i, j) / den, a});
            ++counts[a];
        }
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < basis.size()) {
            throw DomainError("annulus of radius " + std::to_string(radii[k]) + " holds too few nodes for the fit");
        }
    }

    Eigen::MatrixXd A(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(basis.size()));
    Eigen::VectorXd b(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const double w = 1.0 / std::sqrt(static_cast<double>(counts[samples[s].annulus]));
        for (std::size_t c = 0; c < basis.size(); ++c) {
            A(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) =
                w * std::pow(samples[s].d, basis[c].mu[1]) * std::pow(samples[s].r, basis[c].m);
        }
        b(static_cast<Eigen::Index>(s)) = w * samples[s].q;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::VectorXd abs_diag = qr.matrixQR().diagonal().cwiseAbs();
    if (qr.rank() < static_cast<Eigen::Index>(basis.size()) || abs_diag.minCoeff() < 1e-10 * abs_diag.maxCoeff()) {
        throw DomainError("quotient fit is ill-conditioned; widen the annuli or lower the degree");
    }
    const Eigen::VectorXd coef = qr.solve(b);

    QuotientFit fit{PolyXR(1, degree), radii, std::vector<double>(radii.size(), 0.0), 0.0};
    for (std::size_t c = 0; c < basis.size(); ++c) fit.poly.set(basis[c], coef(static_cast<Eigen::Index>(c)));

    std::vector<std::vector<double>> errs(radii.size());
    double qmax = 0.0;
    for (const Sample& s : samples) {
        errs[s.annulus].push_back(std::abs(s.q - fit.poly(0.0, s.d, s.r)));
        qmax = std::max(qmax, std::abs(s.q));
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        auto& e = errs[k];
        const std::size_t at = std::min(e.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(e.size()))) - 1);
        std::nth_element(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(at), e.end());
        fit.residuals[k] = e[at];
        worst = std::max(worst, e[at]);
    }
    if (worst <= 1e-12 * std::max(qmax, 1.0)) {
        fit.residual_exponent = std::numeric_limits<double>::infinity();
        return fit;
    }
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!(fit.residuals[k] > 0.0)) continue;
        xs.push_back(std::log(radii[k]));
        ys.push_back(std::log(fit.residuals[k]));
    }
    fit.residual_exponent = xs.size() >= 2 ? ls_slope(xs, ys) : std::numeric_limits<double>::infinity();
    return fit;
}

}  // namespace slit
