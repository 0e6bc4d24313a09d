#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "slit/errors.hpp"
#include "slit/geometry.hpp"
#include "slit/operator.hpp"

using namespace slit;

namespace {

// Brute-force nearest point over 10^6 uniform samples of the edge curve.
double brute_signed_distance(const SlitGeometry& g, double xt, double xn) {
    const int n = 1'000'000;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
        const double t = -g.half_width() + 2.0 * g.half_width() * k / n;
        best = std::min(best, std::hypot(xt - t, xn - g.gamma(t)));
    }
    return xn >= g.gamma(xt) ? best : -best;
}

SlitGeometry holder_curve() {
    SlitGeometry g = SlitGeometry::power_curve(0.2, 1.5);
    g.declare_holder_exponent(0.5);
    return g;
}

}  // namespace

TEST_CASE("params keep a = 1 - 2s and reject the degenerate range") {
    testing::Gen gen(11);
    for (int k = 0; k < 1000; ++k) {
        const double s = gen.uniform(1e-6, 1.0 - 1e-6);
        const Params p = Params::from_s(s);
        CHECK(p.a() == doctest::Approx(1.0 - 2.0 * s).epsilon(1e-15));
        const Params q = Params::from_a(p.a());
        CHECK(std::abs(q.s() - s) <= 1e-15);
    }
    CHECK_THROWS_AS(Params::from_a(1.0), DomainError);
    CHECK_THROWS_AS(Params::from_a(-1.0), DomainError);
    CHECK_THROWS_AS(Params::from_s(0.0), DomainError);
    CHECK_THROWS_AS(Params::from_s(std::nan("")), DomainError);
}

TEST_CASE("flat signed distance is the coordinate itself") {
    const SlitGeometry g = SlitGeometry::flat();
    CHECK(g.signed_distance(0.3) == 0.3);
    CHECK(g.signed_distance(-0.5) == -0.5);
    CHECK(SlitGeometry::flat(0.25, -1).signed_distance(0.0) == 0.25);
}

TEST_CASE("curve signed distance matches brute-force nearest point") {
    const SlitGeometry g = holder_curve();
    // Above the vertex the nearest point is not the vertex: the curve bends
    // upward slower than the circle of radius 0.1 around the query.
    const double on_axis = g.signed_distance(0.0, 0.1);
    CHECK(std::abs(on_axis - brute_signed_distance(g, 0.0, 0.1)) <= 1e-6);
    CHECK(on_axis < 0.1);
    CHECK(std::abs(g.signed_distance(0.4, 0.3) - brute_signed_distance(g, 0.4, 0.3)) <= 1e-6);
    CHECK(std::abs(g.signed_distance(-0.3, -0.2) - brute_signed_distance(g, -0.3, -0.2)) <= 1e-6);
    CHECK(g.signed_distance(0.5, 1.0) > 0.0);
    CHECK(g.signed_distance(0.5, -1.0) < 0.0);
    CHECK_THROWS_AS(g.signed_distance(1.5, 0.0), DomainError);
}

TEST_CASE("curve frame is normalized at the origin") {
    const SlitGeometry g = holder_curve();
    CHECK(g.gamma(0.0) == 0.0);
    CHECK(g.dgamma(0.0) == 0.0);
    CHECK(g.holder_exponent() == 0.5);
}

TEST_CASE("slit distance is r") {
    const SlitGeometry flat = SlitGeometry::flat();
    CHECK(flat.slit_distance(Point::planar(0.3, 0.4)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flat.slit_distance(Point::planar(-1.0, 0.0)) == 1.0);
    CHECK(flat.distance_to_slit(Point::planar(-1.0, 0.25)) == 0.25);
    CHECK(flat.distance_to_slit(Point::planar(0.3, 0.4)) == doctest::Approx(0.5));

    const SlitGeometry g = holder_curve();
    testing::Gen gen(12);
    for (int k = 0; k < 5; ++k) {
        const Point X{gen.uniform(-0.8, 0.8), gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)};
        const double d = brute_signed_distance(g, X.xt, X.xn);
        CHECK(std::abs(g.slit_distance(X) - std::hypot(d, X.y)) <= 1e-6);
    }
}

TEST_CASE("normal and curvature agree with differences of the distance") {
    SUBCASE("flat limit") {
        const NormalCurvature nc = SlitGeometry::flat().normal_curvature(0.2, 0.3);
        CHECK(nc.normal[0] == 0.0);
        CHECK(nc.normal[1] == 1.0);
        CHECK(nc.curvature == 0.0);
    }
    SUBCASE("parabola") {
        const double c = 0.5;
        const SlitGeometry g = SlitGeometry::power_curve(c, 2.0);
        // At the vertex -Laplacian d equals the edge curvature 2c.
        CHECK(g.normal_curvature(0.0, 1e-9).curvature == doctest::Approx(2.0 * c).epsilon(1e-6));
        for (const auto& [xt, xn] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {-0.3, 0.0}, {0.2, -0.3}}) {
            const NormalCurvature nc = g.normal_curvature(xt, xn);
            const double step = 1e-5;
            const double gx = (g.signed_distance(xt + step, xn) - g.signed_distance(xt - step, xn)) / (2 * step);
            const double gy = (g.signed_distance(xt, xn + step) - g.signed_distance(xt, xn - step)) / (2 * step);
            CHECK(std::abs(nc.normal[0] - gx) <= 1e-4);
            CHECK(std::abs(nc.normal[1] - gy) <= 1e-4);
            const double e = 1e-4;
            const double lap = (g.signed_distance(xt + e, xn) + g.signed_distance(xt - e, xn) + g.signed_distance(xt, xn + e) +
                                g.signed_distance(xt, xn - e) - 4.0 * g.signed_distance(xt, xn)) /
                               (e * e);
            CHECK(nc.curvature == doctest::Approx(-lap).epsilon(1e-4));
        }
    }
    SUBCASE("cut locus is refused") {
        const SlitGeometry g = SlitGeometry::power_curve(0.5, 2.0);
        CHECK_THROWS_AS(g.normal_curvature(0.0, 1.5), DomainError);
    }
}

TEST_CASE("gradient of r has unit length off the edge") {
    const SlitGeometry g = holder_curve();
    testing::Gen gen(13);
    int checked = 0;
    while (checked < 10000) {
        const Point X{gen.uniform(-0.8, 0.8), gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)};
        if (g.slit_distance(X) < 0.01 || g.cut_locus_distance(X.xt, X.xn) < 0.01) continue;
        const double e = 1e-6;
        auto r = [&](double dt, double dn, double dy) { return g.slit_distance(Point{X.xt + dt, X.xn + dn, X.y + dy}); };
        const double gt = (r(e, 0, 0) - r(-e, 0, 0)) / (2 * e);
        const double gn = (r(0, e, 0) - r(0, -e, 0)) / (2 * e);
        const double gy = (r(0, 0, e) - r(0, 0, -e)) / (2 * e);
        REQUIRE(std::abs(std::sqrt(gt * gt + gn * gn + gy * gy) - 1.0) <= 1e-4);
        ++checked;
    }
}

TEST_CASE("profile values") {
    const SlitGeometry g = SlitGeometry::flat();
    for (double s : {0.1, 0.5, 0.9}) {
        const Params p = Params::from_s(s);
        CHECK(profile_u_a(g, p, Point::planar(1.0, 0.0)) == 1.0);
        CHECK(profile_u_a(g, p, Point::planar(-0.5, 0.0)) == 0.0);
    }
}

TEST_CASE("half-order profile is the real part of the principal square root") {
    const SlitGeometry g = SlitGeometry::flat();
    const Params p = Params::from_s(0.5);
    for (int i = 0; i <= 64; ++i) {
        for (int j = 0; j <= 64; ++j) {
            const double x = -1.0 + i / 32.0;
            const double y = -1.0 + j / 32.0;
            const double expected = std::sqrt(std::complex<double>(x, y)).real();
            REQUIRE(std::abs(profile_u_a(g, p, Point::planar(x, y)) - expected) <= 1e-12);
        }
    }
}

TEST_CASE("both profile forms agree off the axis") {
    testing::Gen gen(14);
    const SlitGeometry g = SlitGeometry::flat();
    for (int k = 0; k < 2000; ++k) {
        const Params p = gen.params(0.05, 0.95);
        const long double d = -gen.uniform(0.01, 1.0);
        const long double y = gen.uniform(0.05, 1.0) * (gen.integer(0, 1) ? 1 : -1);
        const long double r = std::sqrt(d * d + y * y);
        const long double direct = std::pow((r + d) / 2.0L, static_cast<long double>(p.s()));
        const double value = profile_u_a(g, p, Point::planar(static_cast<double>(d), static_cast<double>(y)));
        REQUIRE(std::abs(value - static_cast<double>(direct)) <= 1e-12 * static_cast<double>(direct));
    }
}

TEST_CASE("discrete operator annihilates the profile to second order away from the slit") {
    const SlitGeometry geom = SlitGeometry::flat();
    for (double s : {0.25, 0.5, 0.75}) {
        const Params p = Params::from_s(s);
        std::vector<double> sup;
        for (int cells : {64, 128, 256}) {
            const Grid2D grid = Grid2D::half_box(-1.0, 1.0, 1.0, cells);
            const Field U = Field::sample(grid, p, [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); });
            const Field L = apply_La(U);
            double m = 0.0;
            for (int j = 1; j < grid.ny - 1; ++j) {
                for (int i = 1; i < grid.nx - 1; ++i) {
                    const Point X = Point::planar(grid.x(i), grid.y(j));
                    if (geom.distance_to_slit(X) < 0.25 || geom.slit_distance(X) > 0.75) continue;
                    m = std::max(m, std::abs(L(i, j)) / std::pow(X.y, p.a()));
                }
            }
            sup.push_back(m);
        }
        CHECK(std::log2(sup[0] / sup[1]) >= 1.8);
        CHECK(std::log2(sup[1] / sup[2]) >= 1.8);
    }
}
