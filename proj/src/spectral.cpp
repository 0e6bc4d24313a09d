#include "slit/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "slit/errors.hpp"
#include "slit/operator.hpp"

namespace slit {

std::array<double, 2> zip(double z1, double z2) { return {z1 * z1 - z2 * z2, 2.0 * z1 * z2}; }

std::array<double, 2> unzip(double x, double y) {
    const double r = std::hypot(x, y);
    if (r == 0.0) return {0.0, 0.0};
    if (x >= 0.0) {
        const double z1 = std::sqrt(0.5 * (r + x));
        return {z1, y / (2.0 * z1)};
    }
    const double z2 = std::sqrt(0.5 * (r - x));
    return {std::abs(y) / (2.0 * z2), y < 0.0 ? -z2 : z2};
}

double zipped_weight(const Params& p, double z1, double z2) { return std::pow(std::abs(2.0 * z1 * z2), p.a()); }

std::vector<double> basis_recursion(int j, const Params& p) {
    if (j < 0) throw DomainError("basis index must be non-negative");
    const double s = p.s();
    std::vector<double> b(static_cast<std::size_t>(j) + 1);
    b[0] = 1.0;
    for (int i = 1; i <= j; ++i) {
        const double m = j - i + 1;
        b[static_cast<std::size_t>(i)] = -(m * (m - s)) / (i * (i + s)) * b[static_cast<std::size_t>(i - 1)];
    }
    return b;
}

HomogeneousSolution::HomogeneousSolution(int j, const Params& p, std::vector<double> b, bool normalized)
    : j_(j), params_(p), b_(std::move(b)), normalized_(normalized) {
    if (j < 0 || b_.size() != static_cast<std::size_t>(j) + 1) throw DomainError("basis coefficient count != j+1");
}

namespace {

// Q(t, w) = sum_i b_i t^i w^{j-i} and its partials, t = z1^2, w = z2^2.
struct QValue {
    double q = 0.0;
    double dq_dt = 0.0;
    double dq_dw = 0.0;
};

QValue evaluate_q(const std::vector<double>& b, double t, double w) {
    const int j = static_cast<int>(b.size()) - 1;
    QValue out;
    // Monomials are evaluated directly; j stays small (<= ~20).
    for (int i = 0; i <= j; ++i) {
        const double bi = b[static_cast<std::size_t>(i)];
        const double ti = std::pow(t, i);
        const double wi = std::pow(w, j - i);
        out.q += bi * ti * wi;
        if (i > 0) out.dq_dt += bi * i * std::pow(t, i - 1) * wi;
        if (j - i > 0) out.dq_dw += bi * (j - i) * ti * std::pow(w, j - i - 1);
    }
    return out;
}

}  // namespace

double HomogeneousSolution::operator()(double z1, double z2) const {
    if (z1 == 0.0) return 0.0;
    const QValue q = evaluate_q(b_, z1 * z1, z2 * z2);
    return std::pow(std::abs(z1), -params_.a()) * z1 * q.q;
}

std::array<double, 2> HomogeneousSolution::gradient(double z1, double z2) const {
    const double a = params_.a();
    const QValue q = evaluate_q(b_, z1 * z1, z2 * z2);
    if (z1 == 0.0) {
        if (a > 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
        if (a < 0.0) return {0.0, 0.0};
        return {q.q, 0.0};
    }
    const double lead = std::pow(std::abs(z1), -a);  // |z1|^{-a}
    const double d1 = (1.0 - a) * lead * q.q + lead * z1 * 2.0 * z1 * q.dq_dt;
    const double d2 = lead * z1 * 2.0 * z2 * q.dq_dw;
    return {d1, d2};
}

double HomogeneousSolution::radial_derivative(double z1, double z2) const {
    const auto g = gradient(z1, z2);
    const double rho = std::hypot(z1, z2);
    return (z1 * g[0] + z2 * g[1]) / rho;
}

std::vector<double> HomogeneousSolution::xr_coefficients() const {
    // ((r+x)/2)^i ((r-x)/2)^{j-i} expanded by the binomial theorem.
    std::vector<double> out(static_cast<std::size_t>(j_) + 1, 0.0);
    auto binom = [](int n, int k) {
        double c = 1.0;
        for (int m = 1; m <= k; ++m) c = c * (n - k + m) / m;
        return c;
    };
    const double scale = std::pow(0.5, j_);
    for (int i = 0; i <= j_; ++i) {
        for (int p = 0; p <= i; ++p) {
            for (int q = 0; q <= j_ - i; ++q) {
                const double sign = (q % 2 == 0) ? 1.0 : -1.0;
                out[static_cast<std::size_t>(p + q)] +=
                    scale * b_[static_cast<std::size_t>(i)] * binom(i, p) * binom(j_ - i, q) * sign;
            }
        }
    }
    return out;
}

BoundaryQuadrature::BoundaryQuadrature(const Params& p, int panels, int points) : params_(p) {
    // Offsets u in [0, pi/4] from the nearest axis crossing; mirroring by exact
    // quarter turns keeps |sin 2t| = sin 2u accurate down to the tiniest panels.
    const QuadRule quarter = graded_interval(0.5 * std::numbers::pi, panels, 0.25, points);
    const std::size_t half = quarter.nodes.size() / 2;
    z1_.reserve(8 * half);
    z2_.reserve(8 * half);
    w_.reserve(8 * half);
    for (int turn = 0; turn < 4; ++turn) {
        for (std::size_t k = 0; k < half; ++k) {
            const double u = quarter.nodes[k];
            const double w = quarter.weights[k] * std::pow(std::sin(2.0 * u), p.a());
            for (const auto& [c1, c2] : {std::array<double, 2>{std::cos(u), std::sin(u)},
                                         std::array<double, 2>{std::sin(u), std::cos(u)}}) {
                double x = c1, y = c2;
                for (int q = 0; q < turn; ++q) {
                    const double t = x;
                    x = -y;
                    y = t;
                }
                z1_.push_back(x);
                z2_.push_back(y);
                w_.push_back(w);
                mass_ += w;
            }
        }
    }
}

double BoundaryQuadrature::integrate(const std::function<double(double, double)>& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < z1_.size(); ++k) acc += w_[k] * f(z1_[k], z2_[k]);
    return acc;
}

double BoundaryQuadrature::weight_mass_exact(const Params& p) { return 2.0 * std::beta(0.5 * (1.0 + p.a()), 0.5); }

HomogeneousSolution make_basis(int j, const BoundaryQuadrature& quad) {
    const Params& p = quad.params();
    const double exact = BoundaryQuadrature::weight_mass_exact(p);
    if (std::abs(quad.weight_mass() - exact) > 1e-9 * exact) {
        throw DomainError("boundary quadrature fails to resolve |sin 2t|^a for a = " + std::to_string(p.a()) +
                          " (relative mass error " + std::to_string(std::abs(quad.weight_mass() / exact - 1.0)) +
                          ")");
    }
    const HomogeneousSolution raw(j, p, basis_recursion(j, p), false);
    const double norm2 = quad.integrate([&](double z1, double z2) {
        const double u = raw(z1, z2);
        return u * u;
    });
    std::vector<double> b = raw.coefficients();
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& bi : b) bi *= scale;
    return HomogeneousSolution(j, p, std::move(b), true);
}

HomogeneousSolution make_basis(int j, const Params& p, int quad_panels) {
    return make_basis(j, BoundaryQuadrature(p, quad_panels));
}

SpectralBasis::SpectralBasis(const Params& p, int J, int quad_panels) : quad_(p, quad_panels), iota_(0.0) {
    if (J < 0) throw DomainError("truncation J must be non-negative");
    for (int j = 0; j <= J; ++j) basis_.push_back(make_basis(j, quad_));
    iota_ = 1.0 / std::sqrt(quad_.weight_mass());
    const auto g = gram();
    for (std::size_t r = 0; r < g.size(); ++r) {
        for (std::size_t c = 0; c < g.size(); ++c) {
            const double target = r == c ? 1.0 : 0.0;
            if (std::abs(g[r][c] - target) > 1e-8) {
                throw DomainError("truncation J = " + std::to_string(J) +
                                  " exceeds the boundary quadrature resolution (Gram defect " +
                                  std::to_string(std::abs(g[r][c] - target)) + ")");
            }
        }
    }
}

std::vector<std::vector<double>> SpectralBasis::gram() const {
    const std::size_t n = basis_.size() + 1;
    std::vector<std::vector<double>> values(quad_.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < quad_.size(); ++k) {
        values[k][0] = iota_;
        for (std::size_t j = 0; j < basis_.size(); ++j) values[k][j + 1] = basis_[j](quad_.z1(k), quad_.z2(k));
    }
    std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < quad_.size(); ++k) {
        const double w = quad_.weight(k);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = r; c < n; ++c) g[r][c] += w * values[k][r] * values[k][c];
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < r; ++c) g[r][c] = g[c][r];
    }
    return g;
}

SpectralExpansion boundary_project(const std::vector<double>& g, const SpectralBasis& basis) {
    const BoundaryQuadrature& quad = basis.quadrature();
    if (g.size() != quad.size()) throw DomainError("boundary samples must sit on the quadrature nodes");
    SpectralExpansion e{basis.params(), 0.0, {}};
    e.coeffs.assign(static_cast<std::size_t>(basis.truncation()) + 1, 0.0);
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double wg = quad.weight(k) * g[k];
        e.const_coeff += wg * basis.iota();
        for (int j = 0; j <= basis.truncation(); ++j) {
            e.coeffs[static_cast<std::size_t>(j)] += wg * basis[j](quad.z1(k), quad.z2(k));
        }
    }
    return e;
}

SpectralExpansion boundary_project(const std::function<double(double, double)>& g, const SpectralBasis& basis) {
    const BoundaryQuadrature& quad = basis.quadrature();
    std::vector<double> samples(quad.size());
    for (std::size_t k = 0; k < quad.size(); ++k) samples[k] = g(quad.z1(k), quad.z2(k));
    return boundary_project(samples, basis);
}

ExtensionValue extend(const SpectralExpansion& e, const SpectralBasis& basis, double z1, double z2) {
    const double rho = std::hypot(z1, z2);
    if (!(rho < 1.0)) throw DomainError("spectral extension is defined for |z| < 1");
    const int J = static_cast<int>(e.coeffs.size()) - 1;
    if (J > basis.truncation()) throw DomainError("expansion longer than the basis");
    ExtensionValue out;
    out.value = e.const_coeff * basis.iota();
    if (rho > 0.0) {
        for (int j = 0; j <= J; ++j) {
            const HomogeneousSolution& u = basis[j];
            out.value += e.coeffs[static_cast<std::size_t>(j)] * std::pow(rho, u.degree()) * u(z1 / rho, z2 / rho);
        }
    }
    double tail = 0.0;
    if (J >= 0) tail += std::abs(e.coeffs[static_cast<std::size_t>(J)]);
    if (J >= 1) tail += std::abs(e.coeffs[static_cast<std::size_t>(J - 1)]);
    out.tail_estimate = std::pow(rho, 2.0 * e.params.s() + 2.0 * (J + 1)) * tail;
    return out;
}

Field apply_La_bar(const Field& f, const Params& p) {
    const double a = p.a();
    const double tiny = 1e-12 * f.grid.h;
    const FaceWeight weight = [a, tiny](double xm, double ym) {
        if (std::abs(xm) < tiny || std::abs(ym) < tiny) return std::numeric_limits<double>::quiet_NaN();
        return std::pow(std::abs(2.0 * xm * ym), a);
    };
    const FluxStencil stencil(f.grid, weight);
    return apply_stencil(stencil, f, [](double x, double y) { return 1.0 / (4.0 * (x * x + y * y)); });
}

BasisResidual basis_residual(const HomogeneousSolution& u, double h, double margin) {
    if (!(h > 0.0 && h <= margin)) throw DomainError("basis residual needs 0 < h <= margin");
    const Grid2D grid = Grid2D::box(0.0, 1.0, 0.0, 1.0, h);
    const Params& p = u.params();
    const Field f = Field::sample(grid, p, [&](double z1, double z2) { return u(z1, z2); });
    const double a = p.a();
    const double tiny = 1e-12 * h;
    const FluxStencil stencil(grid, [a, tiny](double xm, double ym) {
        if (std::abs(xm) < tiny || std::abs(ym) < tiny) return std::numeric_limits<double>::quiet_NaN();
        return std::pow(std::abs(2.0 * xm * ym), a);
    });
    BasisResidual out;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const double z1 = grid.x(i);
            const double z2 = grid.y(j);
            if (z1 < margin - tiny || z2 < margin - tiny || z1 * z1 + z2 * z2 > 1.0 + tiny) continue;
            const std::size_t k = grid.index(i, j);
            if (!stencil.has_stencil(k)) continue;
            const double norm = 1.0 / (4.0 * (z1 * z1 + z2 * z2) * h * h);
            // Each direction splits as (dw) u' + w u''; the size sums both parts in absolute value.
            const double uk = f(i, j);
            auto split = [&](double c_plus, double c_minus, double u_plus, double u_minus) {
                return std::abs(0.5 * (c_plus - c_minus) * (u_plus - u_minus)) +
                       std::abs(0.5 * (c_plus + c_minus) * (u_plus - 2.0 * uk + u_minus));
            };
            // Floored by |u| / (4|z|^2) so affine u (both parts vanish) is measured against its own size.
            const double size = std::max(norm * (split(stencil.east(k), stencil.west(k), f(i + 1, j), f(i - 1, j)) +
                                                 split(stencil.north(k), stencil.south(k), f(i, j + 1), f(i, j - 1))),
                                         std::abs(uk) * norm * h * h);
            out.max_residual = std::max(out.max_residual, std::abs(stencil.balance(f.values, i, j)) * norm);
            out.scale = std::max(out.scale, size);
            ++out.nodes;
        }
    }
    if (out.nodes == 0) throw DomainError("no residual nodes satisfy the margin");
    out.relative = out.scale > 0.0 ? out.max_residual / out.scale : 0.0;
    return out;
}

double phi_functional(const std::function<double(double, double)>& u, const BoundaryQuadrature& quad, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("phi functional needs lambda > 0");
    double num = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double v = u(lambda * quad.z1(k), lambda * quad.z2(k));
        num += quad.weight(k) * v * v;
    }
    return num / quad.weight_mass();
}

namespace {

void check_disk_coverage(const Field& f, double radius) {
    const Grid2D& g = f.grid;
    const double xmin = g.x0;
    const double xmax = g.x(g.nx - 1);
    const double ymin = g.reflected ? -g.y(g.ny - 1) : g.y0;
    const double ymax = g.y(g.ny - 1);
    if (radius > std::min({-xmin, xmax, -ymin, ymax}) + 1e-12) {
        throw DomainError("circle of radius " + std::to_string(radius) + " leaves the grid");
    }
}

}  // namespace

double phi_functional(const Field& f, const BoundaryQuadrature& quad, double lambda) {
    if (lambda < 4.0 * f.grid.h) {
        throw DomainError("lambda = " + std::to_string(lambda) + " is below 4h = " + std::to_string(4.0 * f.grid.h));
    }
    check_disk_coverage(f, lambda);
    return phi_functional([&](double z1, double z2) { return f.interpolate(z1, z2); }, quad, lambda);
}

GreenResidual green_check(const HomogeneousSolution& u, const HomogeneousSolution& v, double lambda,
                          const BoundaryQuadrature& quad) {
    const Params& p = quad.params();
    GreenResidual out;
    // Surface: omega = lambda^{2a} |sin 2t|^a and dsigma = lambda dt.
    const double surface_scale = std::pow(lambda, 1.0 + 2.0 * p.a());
    double cross = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double z1 = lambda * quad.z1(k);
        const double z2 = lambda * quad.z2(k);
        const double w = quad.weight(k) * surface_scale;
        out.surface += w * u(z1, z2) * v.radial_derivative(z1, z2);
        cross += w * v(z1, z2) * u.radial_derivative(z1, z2);
    }
    // Volume in polar form; the radial integrand is a polynomial in rho.
    const QuadRule radial = gauss_legendre(32);
    for (std::size_t m = 0; m < radial.nodes.size(); ++m) {
        const double rho = 0.5 * lambda * (radial.nodes[m] + 1.0);
        const double wr = 0.5 * lambda * radial.weights[m] * rho * std::pow(rho, 2.0 * p.a());
        for (std::size_t k = 0; k < quad.size(); ++k) {
            const double z1 = rho * quad.z1(k);
            const double z2 = rho * quad.z2(k);
            const auto gu = u.gradient(z1, z2);
            const auto gv = v.gradient(z1, z2);
            out.volume += wr * quad.weight(k) * (gu[0] * gv[0] + gu[1] * gv[1]);
        }
    }
    out.identity1 = std::abs(out.volume - out.surface);
    out.identity2 = std::abs(out.surface - cross);
    return out;
}

GreenResidual green_check(const Field& u, const Field& v, double lambda, const BoundaryQuadrature& quad) {
    if (u.grid.nx != v.grid.nx || u.grid.ny != v.grid.ny || u.grid.h != v.grid.h) {
        throw DomainError("green_check fields must share a grid");
    }
    const Grid2D& g = u.grid;
    const double h = g.h;
    check_disk_coverage(u, lambda + h);
    if (lambda < 4.0 * h) throw DomainError("lambda below 4h");
    const Params& p = quad.params();
    GreenResidual out;

    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double cx = g.x(i) + 0.5 * h;
            const double cy = g.y(j) + 0.5 * h;
            if (cx * cx + cy * cy >= lambda * lambda) continue;
            auto grad = [&](const Field& f) {
                const double gx = (f(i + 1, j) + f(i + 1, j + 1) - f(i, j) - f(i, j + 1)) / (2.0 * h);
                const double gy = (f(i, j + 1) + f(i + 1, j + 1) - f(i, j) - f(i + 1, j)) / (2.0 * h);
                return std::array<double, 2>{gx, gy};
            };
            const auto gu = grad(u);
            const auto gv = grad(v);
            const double mult = g.reflected ? 2.0 : 1.0;
            out.volume += mult * h * h * zipped_weight(p, cx, cy) * (gu[0] * gv[0] + gu[1] * gv[1]);
        }
    }
    const double surface_scale = std::pow(lambda, 1.0 + 2.0 * p.a());
    double cross = 0.0;
    for (std::size_t k = 0; k < quad.size(); ++k) {
        const double c = quad.z1(k);
        const double s = quad.z2(k);
        auto normal_derivative = [&](const Field& f) {
            return (f.interpolate((lambda + h) * c, (lambda + h) * s) - f.interpolate((lambda - h) * c, (lambda - h) * s)) /
                   (2.0 * h);
        };
        const double uval = u.interpolate(lambda * c, lambda * s);
        const double vval = v.interpolate(lambda * c, lambda * s);
        const double w = quad.weight(k) * surface_scale;
        out.surface += w * uval * normal_derivative(v);
        cross += w * vval * normal_derivative(u);
    }
    out.identity1 = std::abs(out.volume - out.surface);
    out.identity2 = std::abs(out.surface - cross);
    return out;
}

}  // namespace slit
