#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "slit/errors.hpp"
#include "slit/geometry.hpp"
#include "slit/operator.hpp"

using namespace slit;

namespace {

double max_abs_interior(const Field& L) {
    double m = 0.0;
    for (int j = 0; j < L.grid.ny; ++j) {
        for (int i = 0; i < L.grid.nx; ++i) {
            if (L.is_defined(L.grid.index(i, j))) m = std::max(m, std::abs(L(i, j)));
        }
    }
    return m;
}

// Smooth random boundary data: a few low modes with seeded amplitudes.
struct RandomData {
    double c0, c1, c2, c3;
    explicit RandomData(testing::Gen& g)
        : c0(g.uniform(-1, 1)), c1(g.uniform(-1, 1)), c2(g.uniform(-1, 1)), c3(g.uniform(-1, 1)) {}
    double operator()(double x, double y) const {
        return c0 + c1 * std::sin(2.0 * x + 1.0) + c2 * std::cos(3.0 * y) + c3 * x * y;
    }
};

}  // namespace

TEST_CASE("grid geometry and validation") {
    const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, 8);
    CHECK(g.nx == 9);
    CHECK(g.ny == 5);
    CHECK(g.h == 0.25);
    CHECK(g.y(0) == 0.0);
    CHECK(g.reflected);
    CHECK(g.column_of(0.5) == 6);
    CHECK(g.column_of(0.3) == -1);
    Grid2D tiny = g;
    tiny.nx = 2;
    CHECK_THROWS_AS(tiny.validate(), DomainError);
    CHECK_THROWS_AS(Grid2D::box(0.0, 1.0, 0.0, 1.0, 0.3), DomainError);
}

TEST_CASE("field validation flags non-finite values") {
    Field f(Grid2D::half_box(-1.0, 1.0, 1.0, 4), Params::from_s(0.5));
    f(1, 1) = std::nan("");
    CHECK_THROWS_AS(f.validate(), ValidationError);
}

TEST_CASE("axis face weight is the exact face mean") {
    const double h = 0.125;
    for (double a : {-0.5, 0.0, 0.5}) {
        const Params p = Params::from_a(a);
        CHECK(axis_weight(p, h)(0.0, 0.0) == doctest::Approx(std::pow(h / 2, a) / (1 + a)).epsilon(1e-14));
        // Mean of |y|^a over [y - h/2, y + h/2] away from the axis.
        const double y = 0.5;
        const double mean = (std::pow(y + h / 2, 1 + a) - std::pow(y - h / 2, 1 + a)) / ((1 + a) * h);
        CHECK(axis_weight(p, h)(0.3, y) == doctest::Approx(mean).epsilon(1e-13));
        CHECK(midpoint_weight(p)(0.0, y) == doctest::Approx(std::pow(y, a)));
    }
}

TEST_CASE("operator annihilates constants") {
    for (double a : {-0.7, 0.0, 0.7}) {
        const Params p = Params::from_a(a);
        const Field f = Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, 16), p, [](double, double) { return 3.5; });
        CHECK(max_abs_interior(apply_La(f)) <= 1e-12);
    }
}

TEST_CASE("a = 0 reduces to the five-point Laplacian") {
    const Params p = Params::from_a(0.0);
    const Field f = Field::sample(Grid2D::box(-1.0, 1.0, -1.0, 1.0, 1.0 / 16), p, [](double x, double y) { return x * x - y * y; });
    CHECK(max_abs_interior(apply_La(f)) <= 1e-10);
    const Field g = Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, 32), p, [](double x, double y) { return x * x - y * y; });
    CHECK(max_abs_interior(apply_La(g)) <= 1e-10);
}

TEST_CASE("weighted balance of |y|^{2s} scales like h^{2s} at a fixed row") {
    // L_a |y|^{2s} = 0 for y != 0; the stencil at row j sees the same profile
    // at every h up to the factor h^{2s}, so balance / |y|^a is self-similar.
    for (double s : {0.25, 0.75}) {
        const Params p = Params::from_s(s);
        std::vector<double> near, far;
        for (int cells : {32, 64, 128}) {
            const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, cells);
            const Field f = Field::sample(g, p, [&](double, double y) { return std::pow(std::abs(y), 2 * s); });
            const Field L = apply_La(f);
            const int i = g.nx / 2;
            near.push_back(std::abs(L(i, 2)) * g.h * g.h / std::pow(g.y(2), p.a()));
            far.push_back(std::abs(L(i, g.ny / 2)) / std::pow(g.y(g.ny / 2), p.a()));
        }
        for (int k = 0; k < 2; ++k) {
            CHECK(std::log2(near[k] / near[k + 1]) == doctest::Approx(2 * s).epsilon(1e-6));
            CHECK(std::log2(far[k] / far[k + 1]) >= 1.9);
        }
    }
}

TEST_CASE("constant data gives the constant solution") {
    const SlitGeometry geom = SlitGeometry::flat();
    for (double a : {-0.5, 0.5}) {
        const Params p = Params::from_a(a);
        const Field u = dirichlet_solve(geom, p, Grid2D::half_box(-1.0, 1.0, 1.0, 32), [](double, double) { return 1.0; },
                                        [](double) { return 1.0; }, nullptr, SolverSettings{});
        for (double v : u.values) REQUIRE(std::abs(v - 1.0) <= 1e-9);
    }
}

TEST_CASE("slit solve converges to the profile under refinement") {
    const SlitGeometry geom = SlitGeometry::flat();
    for (double a : {-0.5, 0.5}) {
        const Params p = Params::from_a(a);
        auto profile = [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); };
        auto off_slit_error = [&](int cells, double tip_radius) {
            const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, cells);
            const Field u = dirichlet_solve(geom, p, g, profile, [](double) { return 0.0; }, nullptr, SolverSettings{},
                                            nullptr, tip_radius);
            double m = 0.0;
            for (int j = 0; j < g.ny; ++j) {
                for (int i = 0; i < g.nx; ++i) {
                    const Point X = Point::planar(g.x(i), g.y(j));
                    if (geom.distance_to_slit(X) >= 0.1) m = std::max(m, std::abs(u(i, j) - profile(X.xn, X.y)));
                }
            }
            return m;
        };
        std::vector<double> plain;
        for (int cells : {32, 64, 128}) plain.push_back(off_slit_error(cells, 0.0));
        CHECK(plain[1] < plain[0]);
        CHECK(plain[2] < plain[1]);
        // Tip-adapted faces make the singular profile nearly exact; what is
        // left comes from the ring where adapted and midpoint faces meet.
        for (int idx = 0; idx < 3; ++idx) {
            const double adapted = off_slit_error(32 << idx, 6.0);
            CHECK(adapted <= 2e-4);
            CHECK(adapted <= 0.05 * plain[static_cast<std::size_t>(idx)]);
        }
        CHECK(off_slit_error(64, 1e9) <= 1e-8);
    }
}

TEST_CASE("SOR and CG agree") {
    const SlitGeometry geom = SlitGeometry::flat();
    const Params p = Params::from_s(0.3);
    const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, 32);
    auto profile = [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); };
    SolverSettings cg;
    cg.method = SolverMethod::cg;
    const Field a = dirichlet_solve(geom, p, g, profile, [](double) { return 0.0; }, nullptr, SolverSettings{});
    const Field b = dirichlet_solve(geom, p, g, profile, [](double) { return 0.0; }, nullptr, cg);
    for (std::size_t k = 0; k < a.values.size(); ++k) REQUIRE(std::abs(a.values[k] - b.values[k]) <= 1e-8);
}

TEST_CASE("discrete maximum principle") {
    testing::Gen gen(21);
    const SlitGeometry geom = SlitGeometry::flat();
    for (int trial = 0; trial < 8; ++trial) {
        const Params p = gen.params();
        const RandomData data(gen);
        const double slit = gen.uniform(-1, 1);
        const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, 32);
        SolverSettings settings;
        settings.tol = 1e-13;
        const Field u = dirichlet_solve(geom, p, g, data, [&](double) { return slit; }, nullptr, settings);
        const auto slit_nodes = slit_mask(geom, g);
        double lo = slit, hi = slit, ilo = 1e300, ihi = -1e300;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                if (g.on_outer_boundary(i, j) || slit_nodes[k]) {
                    lo = std::min(lo, u.values[k]);
                    hi = std::max(hi, u.values[k]);
                } else {
                    ilo = std::min(ilo, u.values[k]);
                    ihi = std::max(ihi, u.values[k]);
                }
            }
        }
        // Slack covers the solver tolerance only.
        CHECK(ilo >= lo - 1e-10);
        CHECK(ihi <= hi + 1e-10);
    }
}

TEST_CASE("relaxation with omega <= 1 never raises the energy") {
    const SlitGeometry geom = SlitGeometry::flat();
    testing::Gen gen(22);
    for (double omega : {1.0, 0.7}) {
        const Params p = gen.params();
        const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, 24);
        const FluxStencil stencil(g, p);
        const RandomData data(gen);
        LinearProblem prob;
        prob.pinned = slit_mask(geom, g);
        prob.values.assign(g.size(), 0.0);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                if (g.on_outer_boundary(i, j)) prob.pinned[k] = 1;
                prob.values[k] = prob.pinned[k] ? data(g.x(i), g.y(j)) : gen.uniform(-1, 1);
            }
        }
        std::vector<double> u = prob.values;
        double energy = system_energy(stencil, prob, u);
        for (int sweep = 0; sweep < 60; ++sweep) {
            sor_sweep(stencil, prob, u, omega);
            const double next = system_energy(stencil, prob, u);
            REQUIRE(next <= energy + 1e-13 * std::abs(energy));
            energy = next;
        }
    }
}

TEST_CASE("local boundedness constant is stable under refinement") {
    // sup over the half-size box against the weighted L2 mean over the full box.
    const SlitGeometry geom = SlitGeometry::flat();
    testing::Gen gen(23);
    auto ratio = [&](const Params& p, const RandomData& data, int cells) {
        const Grid2D g = Grid2D::half_box(-1.0, 1.0, 1.0, cells);
        const Field u = dirichlet_solve(geom, p, g, data, [](double) { return 0.0; }, nullptr, SolverSettings{});
        double sup = 0.0, mass = 0.0, weight = 0.0;
        for (int j = 1; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const double w = std::pow(g.y(j), p.a());
                mass += w * u(i, j) * u(i, j);
                weight += w;
                if (std::abs(g.x(i)) <= 0.5 && g.y(j) <= 0.5) sup = std::max(sup, std::abs(u(i, j)));
            }
        }
        return sup / std::sqrt(mass / weight);
    };
    double fitted = 0.0;
    std::vector<std::pair<Params, RandomData>> cases;
    for (int k = 0; k < 6; ++k) {
        cases.emplace_back(gen.params(), RandomData(gen));
        fitted = std::max(fitted, ratio(cases.back().first, cases.back().second, 32));
    }
    for (const auto& [p, data] : cases) CHECK(ratio(p, data, 64) <= 1.1 * fitted);
}

TEST_CASE("solver errors carry the residual history") {
    const SlitGeometry geom = SlitGeometry::flat();
    const Params p = Params::from_s(0.5);
    SolverSettings settings;
    settings.max_iter = 3;
    try {
        (void)dirichlet_solve(geom, p, Grid2D::half_box(-1.0, 1.0, 1.0, 32),
                              [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); },
                              [](double) { return 0.0; }, nullptr, settings);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.history().size() >= 1);
    }
    settings.max_iter = 0;
    settings.omega = 2.5;
    CHECK_THROWS_AS(dirichlet_solve(geom, p, Grid2D::half_box(-1.0, 1.0, 1.0, 8), [](double, double) { return 0.0; },
                                    [](double) { return 0.0; }, nullptr, settings),
                    DomainError);
}

TEST_CASE("flux extrapolation") {
    SUBCASE("model profile carries unit flux") {
        for (double s : {0.25, 0.5, 0.75}) {
            const Params p = Params::from_s(s);
            const Field f = Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, 1024), p,
                                          [&](double, double y) { return std::pow(std::abs(y), 2 * s) / (2 * s); });
            CHECK(std::abs(flux_limit(f, 0.0) - 1.0) <= 1e-3);
        }
    }
    SUBCASE("even smooth data carries no flux") {
        const Params p = Params::from_a(0.5);
        const Field f = Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, 64), p, [](double x, double y) { return x + y * y; });
        CHECK(std::abs(flux_limit(f, 0.25)) <= 1e-10);
    }
    SUBCASE("profile is flux free beyond the edge") {
        const SlitGeometry geom = SlitGeometry::flat();
        for (double s : {0.25, 0.75}) {
            const Params p = Params::from_s(s);
            std::vector<double> flux;
            for (int cells : {64, 128, 256}) {
                const Field f = Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, cells), p,
                                              [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); });
                flux.push_back(std::abs(flux_limit(f, 0.5)));
            }
            const double order = std::min(2 * s, 1.0);
            CHECK(std::log2(flux[0] / flux[1]) >= order - 0.1);
            CHECK(std::log2(flux[1] / flux[2]) >= order - 0.1);
        }
    }
    SUBCASE("misuse is refused") {
        const Params p = Params::from_s(0.96);
        const Field f(Grid2D::half_box(-1.0, 1.0, 1.0, 16), p);
        CHECK_THROWS_AS(flux_limit(f, 0.0), DomainError);
        const Field g(Grid2D::half_box(-1.0, 1.0, 1.0, 16), Params::from_s(0.5));
        CHECK_THROWS_AS(flux_limit(g, 0.03), DomainError);
    }
}
