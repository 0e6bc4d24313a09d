#include <cmath>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "slit/analysis.hpp"
#include "slit/approx_system.hpp"
#include "slit/errors.hpp"
#include "slit/operator.hpp"
#include "slit/spectral.hpp"

using namespace slit;

namespace {

XRIndex at(int mu, int m) { return XRIndex{{0, mu}, m}; }

Field profile_times(const Params& p, int cells, const std::function<double(double, double)>& factor) {
    const SlitGeometry flat = SlitGeometry::flat();
    return Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, cells), p,
                         [&](double x, double y) { return profile_u_a(flat, p, Point::planar(x, y)) * factor(x, std::hypot(x, y)); });
}

ApproxSystem random_system(testing::Gen& gen, int k, int n, bool perturbed) {
    ApproxSystem sys{k, n, gen.params(), {}, {}, {}};
    const std::vector<XRIndex> all = PolyXR::indices(n, k + 1);
    for (const XRIndex& idx : all) {
        if (idx.grade() <= k) sys.rhs[idx] = gen.uniform(-1, 1);
        if (idx.m == 0) sys.seed[idx] = gen.uniform(-1, 1);
    }
    if (perturbed) {
        for (const XRIndex& eq : all) {
            if (eq.grade() > k) continue;
            for (const XRIndex& term : all) {
                if (term.grade() <= eq.grade() && gen.uniform(0, 1) < 0.3) sys.perturbation.push_back({eq, term, gen.uniform(-0.1, 0.1)});
            }
        }
    }
    return sys;
}

}  // namespace

TEST_CASE("polynomial in (x, r)") {
    PolyXR P(1, 2);
    P.set(at(0, 0), 1.0);
    P.set(at(1, 1), -2.0);
    P.set(at(0, 2), 0.5);
    CHECK(P.get(at(2, 0)) == 0.0);
    CHECK(P.norm() == 2.0);
    CHECK(P(9.0, 0.3, 2.0) == doctest::Approx(1.0 - 2.0 * 0.3 * 2.0 + 0.5 * 4.0));
    CHECK_THROWS_AS(P.set(at(2, 1), 1.0), DomainError);
    CHECK_THROWS_AS(P.set(XRIndex{{1, 0}, 0}, 1.0), DomainError);
    CHECK_THROWS_AS(PolyXR(3, 1), DomainError);
    for (int d = 0; d <= 5; ++d) {
        CHECK(PolyXR::indices(1, d).size() == static_cast<std::size_t>((d + 1) * (d + 2) / 2));
        CHECK(PolyXR::indices(2, d).size() == static_cast<std::size_t>((d + 1) * (d + 2) * (d + 3) / 6));
    }
}

TEST_CASE("blow-up slope of homogeneous fields") {
    const std::vector<double> scales{0.5, 0.25, 0.125, 0.0625};
    for (double s : {0.25, 0.5, 0.75}) {
        const Params p = Params::from_s(s);
        const Field U = profile_times(p, 256, [](double, double) { return 1.0; });
        CHECK(homogeneity_slope(U, 0.0, 0.0, scales) == doctest::Approx(s).epsilon(0.02 / s));

        const HomogeneousSolution u1 = make_basis(1, p);
        const Field zipped = Field::sample(U.grid, p, [&](double x, double y) {
            const auto z = unzip(x, y);
            return u1(z[0], z[1]);
        });
        const double slope = homogeneity_slope(zipped, 0.0, 0.0, scales);
        CHECK(std::abs(slope - (s + 1.0)) <= 0.02);
        Field scaled = zipped;
        for (double& v : scaled.values) v *= 3.0;
        CHECK(homogeneity_slope(scaled, 0.0, 0.0, scales) == doctest::Approx(slope).epsilon(1e-12));
    }
    const Params p = Params::from_s(0.5);
    const Field zero(Grid2D::half_box(-1, 1, 1, 64), p);
    CHECK_THROWS_AS(homogeneity_slope(zero, 0.0, 0.0, scales), DomainError);
    const Field U = profile_times(p, 64, [](double, double) { return 1.0; });
    CHECK_THROWS_AS(homogeneity_slope(U, 0.0, 0.0, {0.5, 0.05}), DomainError);
    CHECK_THROWS_AS(homogeneity_slope(U, 0.0, 0.0, {0.5}), DomainError);
    CHECK_THROWS_AS(homogeneity_slope(U, 0.8, 0.0, {0.5, 0.25}), DomainError);
}

TEST_CASE("quotient expansion") {
    const Params p = Params::from_s(0.5);
    const SlitGeometry flat = SlitGeometry::flat();
    const Field U = profile_times(p, 256, [](double, double) { return 1.0; });

    SUBCASE("exact polynomial quotient") {
        const Field u = profile_times(p, 256, [](double x, double r) { return 1.0 + x + r; });
        const QuotientFit fit = quotient_expand(u, U, flat, 1);
        CHECK(std::abs(fit.poly.get(at(0, 0)) - 1.0) <= 1e-6);
        CHECK(std::abs(fit.poly.get(at(1, 0)) - 1.0) <= 1e-6);
        CHECK(std::abs(fit.poly.get(at(0, 1)) - 1.0) <= 1e-6);
        CHECK(std::isinf(fit.residual_exponent));
    }
    SUBCASE("swapping the quotient inverts the constant term") {
        const Field u = profile_times(p, 256, [](double x, double r) { return 2.0 + 0.3 * x + 0.2 * r; });
        const double direct = quotient_expand(u, U, flat, 2).poly.get(at(0, 0));
        const double swapped = quotient_expand(U, u, flat, 2).poly.get(at(0, 0));
        CHECK(direct == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(std::abs(swapped - 1.0 / direct) <= 1e-4);
    }
    SUBCASE("failure modes") {
        CHECK_THROWS_AS(quotient_expand(U, U, SlitGeometry::power_curve(0.2, 1.5), 1), DomainError);
        CHECK_THROWS_AS(quotient_expand(U, U, flat, 1, {0.5}), DomainError);
        CHECK_THROWS_AS(quotient_expand(U, U, flat, 12, {0.02, 0.01}), DomainError);
        const Field coarse = profile_times(p, 64, [](double, double) { return 1.0; });
        CHECK_THROWS_AS(quotient_expand(U, coarse, flat, 1), DomainError);
    }
}

TEST_CASE("approximating system") {
    SUBCASE("k = 0 by hand") {
        const Params p = Params::from_s(0.4);
        ApproxSystem sys{0, 1, p, {{at(0, 0), 0.3}}, {{at(1, 0), 0.7}, {at(0, 0), 1.5}}, {}};
        const PolyXR P = solve_approx_system(sys);
        // A_00 = 2 p_01 + 2s p_10.
        CHECK(P.get(at(0, 1)) == doctest::Approx((0.3 - 2 * 0.4 * 0.7) / 2.0).epsilon(1e-15));
        CHECK(P.get(at(0, 0)) == 1.5);
        CHECK(P.get(at(1, 0)) == 0.7);
    }
    SUBCASE("zero data gives the zero polynomial") {
        const PolyXR P = solve_approx_system(ApproxSystem{3, 2, Params::from_s(0.5), {}, {}, {}});
        CHECK(P.norm() == 0.0);
    }
    SUBCASE("solve then recompute") {
        testing::Gen gen(51);
        for (int trial = 0; trial < 40; ++trial) {
            const int k = gen.integer(0, 4);
            const int n = gen.integer(1, 2);
            const ApproxSystem sys = random_system(gen, k, n, trial % 2 == 1);
            const PolyXR P = solve_approx_system(sys);
            for (const auto& [idx, value] : sys.seed) REQUIRE(P.get(idx) == value);
            const auto rhs = recompute_rhs(sys, P);
            for (const auto& [idx, value] : rhs) {
                const auto it = sys.rhs.find(idx);
                REQUIRE(std::abs(value - (it == sys.rhs.end() ? 0.0 : it->second)) <= 1e-12);
            }
        }
    }
    SUBCASE("structure violations are named") {
        const Params p = Params::from_s(0.5);
        ApproxSystem high_term{1, 1, p, {}, {}, {{at(0, 0), at(1, 1), 0.05}}};
        CHECK_THROWS_AS(solve_approx_system(high_term), ValidationError);
        ApproxSystem bad_seed{1, 1, p, {}, {{at(0, 1), 1.0}}, {}};
        CHECK_THROWS_AS(solve_approx_system(bad_seed), ValidationError);
        ApproxSystem bad_rhs{1, 1, p, {{at(2, 0), 1.0}}, {}, {}};
        CHECK_THROWS_AS(bad_rhs.check_structure(), ValidationError);
        ApproxSystem negative{-1, 1, p, {}, {}, {}};
        CHECK_THROWS_AS(negative.check_structure(), ValidationError);
    }
    SUBCASE("k = 0 companion is the next homogeneous solution") {
        // U_{1/2} (x - r/2) = Re (x + iy)^{3/2} / 2.
        const PolyXR P = a_harmonic_companion(0, Params::from_s(0.5), {{at(1, 0), 1.0}});
        CHECK(P.get(at(0, 1)) == doctest::Approx(-0.5));
        CHECK(P.get(at(0, 0)) == 0.0);
    }
}

TEST_CASE("companion polynomials are discretely a-harmonic to second order") {
    for (double s : {0.25, 0.5, 0.75}) {
        const Params p = Params::from_s(s);
        const PolyXR P = a_harmonic_companion(2, p, {{at(0, 0), 1.0}, {at(1, 0), -0.7}, {at(2, 0), 0.4}, {at(3, 0), 0.3}});
        const SlitGeometry flat = SlitGeometry::flat();
        std::vector<double> sup;
        for (int cells : {64, 128}) {
            const Field f = profile_times(p, cells, [&](double x, double r) { return P(0.0, x, r); });
            const Field L = apply_La(f);
            double m = 0.0;
            for (int j = 1; j < f.grid.ny - 1; ++j) {
                for (int i = 1; i < f.grid.nx - 1; ++i) {
                    const Point X = Point::planar(f.grid.x(i), f.grid.y(j));
                    if (flat.slit_distance(X) > 0.75 || flat.distance_to_slit(X) < 0.25) continue;
                    m = std::max(m, std::abs(L(i, j)) / std::pow(X.y, p.a()));
                }
            }
            sup.push_back(m);
        }
        CHECK(std::log2(sup[0] / sup[1]) >= 1.8);
    }
}
