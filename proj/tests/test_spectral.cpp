#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "slit/approx_system.hpp"
#include "slit/errors.hpp"
#include "slit/geometry.hpp"
#include "slit/operator.hpp"
#include "slit/spectral.hpp"

using namespace slit;

namespace {

// Quarter-disk grid in z, reflected across z2 = 0 (every basis function is even in z2).
Grid2D z_grid(double h) { return Grid2D::half_box(-1.0, 1.0, 1.0, static_cast<int>(std::lround(2.0 / h))); }

}  // namespace

TEST_CASE("zip maps the right half plane onto the slit plane") {
    CHECK((zip(1.0, 0.0) == std::array<double, 2>{1.0, 0.0}));
    CHECK((zip(0.0, 1.0) == std::array<double, 2>{-1.0, 0.0}));
    testing::Gen gen(31);
    for (int k = 0; k < 10000; ++k) {
        const double z1 = gen.uniform(1e-6, 1.0);
        const double z2 = gen.uniform(-1.0, 1.0);
        const auto x = zip(z1, z2);
        const auto z = unzip(x[0], x[1]);
        REQUIRE(std::abs(z[0] - z1) <= 1e-12);
        REQUIRE(std::abs(z[1] - z2) <= 1e-12);
    }
}

TEST_CASE("coefficient recursion") {
    testing::Gen gen(32);
    for (int trial = 0; trial < 50; ++trial) {
        const Params p = gen.params(0.05, 0.95);
        const int j = gen.integer(1, 10);
        const std::vector<double> b = basis_recursion(j, p);
        REQUIRE(b.size() == static_cast<std::size_t>(j) + 1);
        CHECK(b[0] == 1.0);
        const double s = p.s();
        for (int i = 1; i <= j; ++i) {
            const double ratio = -((j - i + 1) * (j - i + 1 - s)) / (i * (i + s));
            CHECK(b[static_cast<std::size_t>(i)] / b[static_cast<std::size_t>(i) - 1] == doctest::Approx(ratio).epsilon(1e-14));
        }
    }
    // a = 0, j = 1: u_1 is proportional to z1 z2^2 - z1^3 / 3, whose Laplacian 2 z1 - 2 z1 vanishes.
    const std::vector<double> b = basis_recursion(1, Params::from_a(0.0));
    CHECK(b[1] / b[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(basis_recursion(-1, Params::from_a(0.0)), DomainError);
}

TEST_CASE("normalization constants") {
    const HomogeneousSolution u0 = make_basis(0, Params::from_a(0.0));
    CHECK(u0.coefficients()[0] == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(u0.degree() == 1.0);
    for (double a : {-0.5, 0.0, 0.5}) {
        const Params p = Params::from_a(a);
        const BoundaryQuadrature quad(p);
        CHECK(quad.weight_mass() == doctest::Approx(BoundaryQuadrature::weight_mass_exact(p)).epsilon(1e-9));
        for (int j = 0; j <= 8; ++j) {
            const HomogeneousSolution u = make_basis(j, quad);
            CHECK(u.coefficients()[0] > 0.0);
            CHECK(u.degree() == doctest::Approx(2 * p.s() + 2 * j));
            CHECK(quad.integrate([&](double z1, double z2) { return u(z1, z2) * u(z1, z2); }) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("basis parity and homogeneity are exact") {
    testing::Gen gen(33);
    for (int trial = 0; trial < 200; ++trial) {
        const Params p = gen.params();
        const int j = gen.integer(0, 6);
        const HomogeneousSolution u(j, p, basis_recursion(j, p), false);
        const double z1 = gen.uniform(0.01, 1.0), z2 = gen.uniform(-1.0, 1.0), t = gen.uniform(0.1, 3.0);
        CHECK(u(-z1, z2) == -u(z1, z2));
        CHECK(u(z1, -z2) == u(z1, z2));
        CHECK(u(0.0, z2) == 0.0);
        CHECK(u(t * z1, t * z2) == doctest::Approx(std::pow(t, u.degree()) * u(z1, z2)).epsilon(1e-12));
    }
}

TEST_CASE("eigen relation on the unit circle") {
    for (double a : {-0.5, 0.0, 0.5}) {
        const SpectralBasis basis(Params::from_a(a), 8);
        const BoundaryQuadrature& q = basis.quadrature();
        for (int j = 0; j <= 8; ++j) {
            for (std::size_t k = 0; k < q.size(); k += 7) {
                CHECK(std::abs(basis[j].radial_derivative(q.z1(k), q.z2(k)) - basis[j].degree() * basis[j](q.z1(k), q.z2(k))) <= 1e-10);
            }
        }
    }
}

TEST_CASE("zipped basis is the profile times a polynomial in (x, r)") {
    testing::Gen gen(34);
    const SlitGeometry flat = SlitGeometry::flat();
    for (double a : {-0.5, 0.0, 0.5}) {
        const Params p = Params::from_a(a);
        for (int j = 0; j <= 4; ++j) {
            const HomogeneousSolution u = make_basis(j, p);
            const std::vector<double> c = u.xr_coefficients();
            for (int k = 0; k < 200; ++k) {
                const double x = gen.uniform(-1, 1), y = gen.uniform(-1, 1);
                const double r = std::hypot(x, y);
                double poly = 0.0;
                for (std::size_t mu = 0; mu < c.size(); ++mu) poly += c[mu] * std::pow(x, mu) * std::pow(r, j - static_cast<int>(mu));
                const auto z = unzip(x, y);
                const double lhs = u(z[0], z[1]);
                REQUIRE(std::abs(lhs - profile_u_a(flat, p, Point::planar(x, y)) * poly) <= 1e-10 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("zipped basis belongs to the a-harmonic companion family") {
    // Seeding the companion with the x^j coefficient alone reproduces every coefficient.
    for (double a : {-0.5, 0.0, 0.5}) {
        const Params p = Params::from_a(a);
        for (int j = 1; j <= 6; ++j) {
            const std::vector<double> c = make_basis(j, p).xr_coefficients();
            const PolyXR P = a_harmonic_companion(j - 1, p, {{XRIndex{{0, j}, 0}, c[static_cast<std::size_t>(j)]}});
            double scale = 0.0;
            for (double v : c) scale = std::max(scale, std::abs(v));
            for (int mu = 0; mu <= j; ++mu) {
                CHECK(std::abs(P.get({{0, mu}, j - mu}) - c[static_cast<std::size_t>(mu)]) <= 1e-10 * scale);
            }
        }
    }
}

TEST_CASE("zipped operator") {
    SUBCASE("constants") {
        const Params p = Params::from_a(0.4);
        const Field f = Field::sample(z_grid(1.0 / 32), p, [](double, double) { return 2.0; });
        const Field L = apply_La_bar(f, p);
        for (std::size_t k = 0; k < L.values.size(); ++k) {
            if (L.is_defined(k)) REQUIRE(std::abs(L.values[k]) <= 1e-10);
        }
    }
    SUBCASE("a = 0 is the plain operator over 4|z|^2") {
        const Params p = Params::from_a(0.0);
        const Field f = Field::sample(z_grid(1.0 / 32), p, [](double z1, double z2) { return std::sin(z1) * std::cosh(0.5 * z2) + z1 * z1; });
        const Field L = apply_La_bar(f, p);
        const Field plain = apply_La(f);
        for (int j = 1; j < f.grid.ny - 1; ++j) {
            for (int i = 1; i < f.grid.nx - 1; ++i) {
                const std::size_t k = f.grid.index(i, j);
                if (!L.is_defined(k)) continue;
                const double z2 = f.grid.x(i) * f.grid.x(i) + f.grid.y(j) * f.grid.y(j);
                REQUIRE(std::abs(L.values[k] - plain.values[k] / (4.0 * z2)) <= 1e-9 * (1.0 + std::abs(L.values[k])));
            }
        }
    }
    SUBCASE("axis nodes are skipped") {
        const Params p = Params::from_a(0.5);
        const Field L = apply_La_bar(Field::sample(z_grid(1.0 / 16), p, [](double, double) { return 1.0; }), p);
        CHECK_FALSE(L.is_defined(L.grid.index(L.grid.nx / 2, 3)));
        CHECK_FALSE(L.is_defined(L.grid.index(3, 0)));
    }
    SUBCASE("basis residual decays to second order") {
        for (double a : {-0.5, 0.5}) {
            const HomogeneousSolution u = make_basis(3, Params::from_a(a));
            const double coarse = basis_residual(u, 1.0 / 32).relative;
            const double fine = basis_residual(u, 1.0 / 64).relative;
            CHECK(std::log2(coarse / fine) >= 1.8);
        }
        CHECK_THROWS_AS(basis_residual(make_basis(0, Params::from_a(0.0)), 0.5), DomainError);
    }
}

TEST_CASE("boundary projection") {
    for (double a : {-0.5, 0.0, 0.5}) {
        const SpectralBasis basis(Params::from_a(a), 8);
        const BoundaryQuadrature& q = basis.quadrature();
        SUBCASE("single mode") {
            const SpectralExpansion e = boundary_project([&](double z1, double z2) { return basis[3](z1, z2); }, basis);
            for (int j = 0; j <= 8; ++j) CHECK(std::abs(e.coeffs[static_cast<std::size_t>(j)] - (j == 3 ? 1.0 : 0.0)) <= 1e-8);
            CHECK(std::abs(e.const_coeff) <= 1e-8);
        }
        SUBCASE("linear combination from samples") {
            std::vector<double> g(q.size());
            for (std::size_t k = 0; k < q.size(); ++k) g[k] = 2.0 * basis[0](q.z1(k), q.z2(k)) - 0.5 * basis[2](q.z1(k), q.z2(k));
            const SpectralExpansion e = boundary_project(g, basis);
            for (int j = 0; j <= 8; ++j) {
                const double expected = j == 0 ? 2.0 : (j == 2 ? -0.5 : 0.0);
                CHECK(std::abs(e.coeffs[static_cast<std::size_t>(j)] - expected) <= 1e-8);
            }
            CHECK_THROWS_AS(boundary_project(std::vector<double>(3, 0.0), basis), DomainError);
        }
        SUBCASE("data even in z1 projects onto the constant only") {
            const SpectralExpansion e = boundary_project([](double z1, double z2) { return 1.0 + z1 * z1 * z2 * z2; }, basis);
            CHECK(e.const_coeff != doctest::Approx(0.0));
            for (double c : e.coeffs) CHECK(std::abs(c) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(SpectralBasis(Params::from_a(0.0), -1), DomainError);
}

TEST_CASE("interior extension") {
    const Params p = Params::from_s(0.3);
    const SpectralBasis basis(p, 6);
    SpectralExpansion unit{p, 0.0, std::vector<double>(7, 0.0)};
    unit.coeffs[0] = 1.0;
    const double t = 0.7;
    const double z1 = 0.5 * std::cos(t), z2 = 0.5 * std::sin(t);
    CHECK(extend(unit, basis, z1, z2).value == doctest::Approx(basis[0](z1, z2)).epsilon(1e-14));
    // Leading homogeneity |z|^{2s} as z -> 0.
    const double v1 = extend(unit, basis, 1e-2 * std::cos(t), 1e-2 * std::sin(t)).value;
    const double v2 = extend(unit, basis, 1e-4 * std::cos(t), 1e-4 * std::sin(t)).value;
    CHECK(std::log(v1 / v2) / std::log(100.0) == doctest::Approx(2 * p.s()).epsilon(1e-12));
    CHECK_THROWS_AS(extend(unit, basis, 1.0, 0.0), DomainError);
}

TEST_CASE("monotone functional") {
    const Params p = Params::from_a(0.5);
    const BoundaryQuadrature quad(p);
    for (double lambda : {0.1, 0.5, 0.9}) CHECK(phi_functional([](double, double) { return 1.0; }, quad, lambda) == doctest::Approx(1.0).epsilon(1e-13));
    for (int j : {0, 2}) {
        const HomogeneousSolution u = make_basis(j, quad);
        const double one = phi_functional([&](double a, double b) { return u(a, b); }, quad, 1.0);
        for (double lambda : {0.2, 0.6}) {
            CHECK(phi_functional([&](double a, double b) { return u(a, b); }, quad, lambda) ==
                  doctest::Approx(std::pow(lambda, 2 * u.degree()) * one).epsilon(1e-12));
        }
    }
    const Field f = Field::sample(z_grid(1.0 / 16), p, [](double, double) { return 1.0; });
    CHECK(phi_functional(f, quad, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(phi_functional(f, quad, 0.2), DomainError);
    CHECK_THROWS_AS(phi_functional(f, quad, 1.5), DomainError);
}

TEST_CASE("Green identities") {
    for (double a : {-0.5, 0.5}) {
        const Params p = Params::from_a(a);
        const BoundaryQuadrature quad(p);
        const HomogeneousSolution u0 = make_basis(0, quad);
        CHECK(green_check(u0, u0, 1.0, quad).identity2 == 0.0);
        for (auto [j, k] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {2, 2}}) {
            const HomogeneousSolution u = make_basis(j, quad), v = make_basis(k, quad);
            const GreenResidual r = green_check(u, v, 0.8, quad);
            CHECK(r.identity1 <= 1e-10 * std::max(1.0, std::abs(r.surface)));
            CHECK(r.identity2 <= 1e-10);
        }
        // Grid version: both sides from independent discretizations, converging with h.
        const HomogeneousSolution u = make_basis(1, quad), v = make_basis(2, quad);
        std::vector<double> defect;
        for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
            const Field fu = Field::sample(z_grid(h), p, [&](double z1, double z2) { return u(z1, z2); });
            const Field fv = Field::sample(z_grid(h), p, [&](double z1, double z2) { return v(z1, z2); });
            defect.push_back(green_check(fu, fv, 0.75, quad).identity1);
        }
        CHECK(defect[1] < defect[0]);
        CHECK(defect[2] < defect[1]);
    }
}
