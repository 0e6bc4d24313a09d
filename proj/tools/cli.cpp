#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <list>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "slit/analysis.hpp"
#include "slit/approx_system.hpp"
#include "slit/errors.hpp"
#include "slit/geometry.hpp"
#include "slit/io.hpp"
#include "slit/obstacle.hpp"
#include "slit/operator.hpp"
#include "slit/regdist.hpp"
#include "slit/spectral.hpp"
#include "svg.hpp"

namespace slit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for configuration mistakes CLI11 cannot see (missing --a/--s).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by plot for unreadable CSV input.
struct BadData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Infinity is not JSON; "exact" fits carry null plus an explicit flag.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Raw flag values of one subcommand; a flag counts only when given.
struct RunConfig {
    double a = 0.0;
    double s = 0.0;
    CLI::Option* a_opt = nullptr;
    CLI::Option* s_opt = nullptr;
    int grid_n = 0;
    CLI::Option* grid_opt = nullptr;
    double tol = 0.0;
    CLI::Option* tol_opt = nullptr;
    int max_iter = 0;
    CLI::Option* max_iter_opt = nullptr;
    double omega = 0.0;
    CLI::Option* omega_opt = nullptr;
    std::string method;
    CLI::Option* method_opt = nullptr;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::string config;
    std::string geometry;

    // Subcommand-specific flags.
    std::string obstacle = "quadratic";
    double amplitude = 0.0;
    CLI::Option* amplitude_opt = nullptr;
    double width = 1.0;
    double alpha = 0.0;
    CLI::Option* alpha_opt = nullptr;
    int j_max = 8;
    std::string check = "none";
    int dump_basis = -1;
    double center = 0.0;
    int degree = 2;
    std::vector<double> scales;
    int samples = 256;
    bool sweep = false;
    std::string input;
    std::string overlay;
};

/// Everything a pipeline needs after precedence is applied.
struct Resolved {
    Params params = Params::from_s(0.5);
    SolverSettings settings;
    int grid_n = 0;
    fs::path out;
    std::uint64_t seed = 1;
    bool has_geometry = false;
    SlitGeometry geometry = SlitGeometry::flat();
    std::vector<std::string> banner;
};

struct Command {
    std::string name;
    CLI::App* app = nullptr;
    RunConfig cfg;
    int default_grid_n = 128;
    double default_s = 0.0;  // 0: --a or --s is mandatory
    bool needs_params = true;
    std::function<int(RunConfig&, Resolved&, std::ostream&)> body;
};

void add_common(Command& c) {
    RunConfig& r = c.cfg;
    CLI::App* app = c.app;
    r.a_opt = app->add_option("--a", r.a, "weight exponent a in (-1, 1)");
    r.s_opt = app->add_option("--s", r.s, "fractional order s in (0, 1); a = 1 - 2s");
    r.a_opt->excludes(r.s_opt);
    r.s_opt->excludes(r.a_opt);
    r.grid_opt = app->add_option("--grid-n", r.grid_n, "cells across the x extent")->check(CLI::PositiveNumber);
    r.tol_opt = app->add_option("--tol", r.tol, "solver tolerance");
    r.max_iter_opt = app->add_option("--max-iter", r.max_iter, "iteration cap (0: automatic)");
    r.omega_opt = app->add_option("--omega", r.omega, "over-relaxation factor in (0, 2)");
    r.method_opt = app->add_option("--method", r.method, "linear solver")->check(CLI::IsMember({"sor", "cg"}));
    app->add_option("--out", r.out_dir, "output directory");
    app->add_option("--seed", r.seed, "seed for randomized inputs");
    app->add_option("--config", r.config, "solver settings JSON (overridden by flags)");
    app->add_option("--geometry", r.geometry, "geometry JSON");
}

void ensure_writable(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
    const fs::path probe = dir / ".write-probe";
    {
        std::ofstream f(probe);
        if (!f) throw ValidationError("output directory " + dir.string() + " is not writable");
    }
    fs::remove(probe, ec);
}

Resolved resolve(const Command& c) {
    const RunConfig& r = c.cfg;
    Resolved out;
    if (r.a_opt->count() > 0) {
        out.params = Params::from_a(r.a);
    } else if (r.s_opt->count() > 0) {
        out.params = Params::from_s(r.s);
    } else if (c.default_s > 0.0) {
        out.params = Params::from_s(c.default_s);
    } else if (c.needs_params) {
        throw UsageError("exactly one of --a or --s is required");
    }

    SolverSettings settings;
    if (!r.config.empty()) settings = parse_solver_json(read_text_file(r.config), settings);
    if (r.tol_opt->count() > 0) settings.tol = r.tol;
    if (r.max_iter_opt->count() > 0) settings.max_iter = r.max_iter;
    if (r.omega_opt->count() > 0) settings.omega = r.omega;
    if (r.method_opt->count() > 0) settings.method = r.method == "cg" ? SolverMethod::cg : SolverMethod::sor;
    if (!(settings.omega > 0.0 && settings.omega < 2.0)) throw ValidationError("omega must lie in (0, 2)");
    if (!(settings.tol > 0.0)) throw ValidationError("tol must be positive");
    if (settings.max_iter < 0) throw ValidationError("max-iter must be non-negative");
    out.settings = settings;

    out.grid_n = r.grid_opt->count() > 0 ? r.grid_n : c.default_grid_n;
    out.seed = r.seed;
    if (!r.geometry.empty()) {
        out.geometry = parse_geometry_json(read_text_file(r.geometry));
        out.has_geometry = true;
    }
    out.out = r.out_dir;
    ensure_writable(out.out);

    out.banner = {"slit-harmonic " + c.name,
                  "params a=" + short_num(out.params.a()) + " s=" + short_num(out.params.s()),
                  "solver omega=" + short_num(settings.omega) + " tol=" + short_num(settings.tol) +
                      " max_iter=" + std::to_string(settings.max_iter) +
                      " method=" + (settings.method == SolverMethod::cg ? "cg" : "sor"),
                  "grid_n=" + std::to_string(out.grid_n) + " seed=" + std::to_string(out.seed)};
    if (!r.config.empty()) out.banner.push_back("config " + r.config);
    if (!r.geometry.empty()) out.banner.push_back("geometry " + r.geometry);
    return out;
}

std::string banner_text(const std::vector<std::string>& banner) {
    std::string text;
    for (const std::string& line : banner) text += "# " + line + "\n";
    return text;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path.string());
    f << text;
    if (!f) throw ValidationError("write failed for " + path.string());
}

void write_field(const fs::path& path, const Field& f, const std::vector<std::string>& banner) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ValidationError("cannot write " + path.string());
    write_field_csv(file, f, banner);
}

// JSON reports carry the banner as a "provenance" array instead of comments.
void write_json(const fs::path& path, json doc, const std::vector<std::string>& banner) {
    doc["provenance"] = banner;
    write_text(path, doc.dump(2) + "\n");
}

void emit(std::ostream& out, const json& summary) { out << summary.dump(2) << '\n'; }

// ---------------------------------------------------------------- solve

int cmd_solve(RunConfig&, Resolved& r, std::ostream& out) {
    const SlitGeometry geom = r.has_geometry ? r.geometry : SlitGeometry::flat();
    if (geom.mode() != GeometryMode::flat) throw DomainError("solve works in the flat geometry");
    const Grid2D grid = Grid2D::half_box(-1.0, 1.0, 1.0, r.grid_n);
    const Params p = r.params;
    auto profile = [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); };
    const Field u = dirichlet_solve(geom, p, grid, profile, [](double) { return 0.0; }, nullptr, r.settings);

    double err = 0.0, ref = 0.0;
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Point X = Point::planar(grid.x(i), grid.y(j));
            if (geom.distance_to_slit(X) < 0.05) continue;
            const double exact = profile_u_a(geom, p, X);
            err = std::max(err, std::abs(u(i, j) - exact));
            ref = std::max(ref, std::abs(exact));
        }
    }
    r.banner.push_back("boundary data U_a, slit value 0, box [-1,1]x[0,1]");
    write_field(r.out / "solve.csv", u, r.banner);
    const json summary = {{"subcommand", "solve"},
                          {"h", grid.h},
                          {"iterations", u.info.iterations},
                          {"residual", u.info.residual},
                          {"max_error_off_slit", err},
                          {"relative_error_off_slit", ref > 0.0 ? err / ref : 0.0},
                          {"slit_exclusion", 0.05}};
    write_json(r.out / "solve.json", summary, r.banner);
    emit(out, summary);
    return ok;
}

// ------------------------------------------------------------- obstacle

int cmd_obstacle(RunConfig& c, Resolved& r, std::ostream& out) {
    const ObstaclePreset preset =
        ObstaclePreset::parse(c.obstacle, c.amplitude_opt->count() > 0 ? c.amplitude : 0.5, c.width);
    const Params p = r.params;
    ObstacleProblem prob{p, Grid2D::half_box(-2.0, 2.0, 2.0, r.grid_n), [preset](double x) { return preset.value(x); }};
    prob.settings = r.settings;
    const ObstacleSolution sol = solve_obstacle(prob);
    const Grid2D& g = sol.field.grid;

    const ComplementarityMetrics audit = complementarity_audit(sol, 0.25);
    double gap_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx; ++i) gap_min = std::min(gap_min, sol.field(i, 0) - sol.obstacle_row[static_cast<std::size_t>(i)]);

    std::vector<double> scales = c.scales;
    if (scales.empty()) scales = {4.0 * g.h, 8.0 * g.h, 16.0 * g.h};
    const std::vector<FreeBoundaryPoint> fbs = free_boundary(sol);
    const double target = 1.0 + p.s();

    r.banner.push_back("obstacle " + preset.name() + " amplitude=" + short_num(preset.amplitude) +
                       " width=" + short_num(preset.width) + " box [-2,2]x[0,2]");
    std::string fb_csv = banner_text(r.banner) + "x_f,side\n";
    std::string hom_csv = banner_text(r.banner) + "x_f,side,slope,target\n";
    json homogeneity = json::array();
    bool hom_pass = !fbs.empty();
    for (const FreeBoundaryPoint& fb : fbs) {
        fb_csv += num(fb.x) + "," + std::to_string(fb.side) + "\n";
        const Field extension = extend_obstacle([preset](double x) { return preset.value(x); },
                                                preset.derivatives(fb.x, 4), fb.x, p, 4, g);
        Field diff = sol.field;
        for (std::size_t k = 0; k < diff.values.size(); ++k) diff.values[k] -= extension.values[k];
        const double slope = homogeneity_slope(diff, fb.x, 0.0, scales);
        const bool pass = std::abs(slope - target) <= 0.1;
        hom_pass = hom_pass && pass;
        hom_csv += num(fb.x) + "," + std::to_string(fb.side) + "," + num(slope) + "," + num(target) + "\n";
        homogeneity.push_back({{"x_f", fb.x}, {"side", fb.side}, {"slope", slope}, {"target", target}, {"pass", pass}});
    }

    write_field(r.out / "obstacle.csv", sol.field, r.banner);
    write_text(r.out / "free_boundary.csv", fb_csv);
    write_text(r.out / "homogeneity.csv", hom_csv);

    json scale_list = scales;
    const json summary = {{"subcommand", "obstacle"},
                          {"h", g.h},
                          {"psor_sweeps", sol.psor_sweeps},
                          {"active_set_rounds", sol.active_set_rounds},
                          {"contact_nodes", audit.contact_nodes},
                          {"min_gap", gap_min},
                          {"admissible", gap_min >= 0.0},
                          {"offcontact_residual", audit.offcontact_residual},
                          {"contact_flux_min", audit.contact_flux_min},
                          {"offcontact_flux_max", audit.offcontact_flux_max},
                          {"homogeneity_scales", scale_list},
                          {"homogeneity", homogeneity},
                          {"homogeneity_pass", hom_pass}};
    write_json(r.out / "homogeneity.json", summary, r.banner);
    emit(out, summary);
    return ok;
}

// ------------------------------------------------------------- spectral

double gram_deviation(const std::vector<std::vector<double>>& G) {
    double dev = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
        for (std::size_t j = 0; j < G.size(); ++j) dev = std::max(dev, std::abs(G[i][j] - (i == j ? 1.0 : 0.0)));
    }
    return dev;
}

double eigen_deviation(const SpectralBasis& basis) {
    const BoundaryQuadrature& q = basis.quadrature();
    double dev = 0.0;
    for (int j = 0; j <= basis.truncation(); ++j) {
        const HomogeneousSolution& u = basis[j];
        for (std::size_t k = 0; k < q.size(); ++k) {
            dev = std::max(dev, std::abs(u.radial_derivative(q.z1(k), q.z2(k)) - u.degree() * u(q.z1(k), q.z2(k))));
        }
    }
    return dev;
}

int cmd_spectral(RunConfig& c, Resolved& r, std::ostream& out) {
    if (c.j_max < 0) throw DomainError("--j-max must be non-negative");
    const SpectralBasis basis(r.params, c.j_max);
    const auto G = basis.gram();
    r.banner.push_back("j_max=" + std::to_string(c.j_max) + " check=" + c.check);

    std::string gram = banner_text(r.banner) + "basis,iota";
    for (int j = 0; j <= c.j_max; ++j) gram += ",u_" + std::to_string(j);
    gram += "\n";
    for (std::size_t i = 0; i < G.size(); ++i) {
        gram += i == 0 ? std::string("iota") : "u_" + std::to_string(i - 1);
        for (double v : G[i]) gram += "," + num(v);
        gram += "\n";
    }
    write_text(r.out / "gram.csv", gram);

    std::string coeffs = banner_text(r.banner) + "j,i,b_i,degree\n";
    for (int j = 0; j <= c.j_max; ++j) {
        const HomogeneousSolution& u = basis[j];
        for (std::size_t i = 0; i < u.coefficients().size(); ++i) {
            coeffs += std::to_string(j) + "," + std::to_string(i) + "," + num(u.coefficients()[i]) + "," + num(u.degree()) + "\n";
        }
    }
    coeffs += "# iota=" + num(basis.iota()) + "\n";
    write_text(r.out / "coefficients.csv", coeffs);

    if (c.dump_basis >= 0) {
        if (c.dump_basis > c.j_max) throw DomainError("--dump-basis exceeds --j-max");
        const HomogeneousSolution& u = basis[c.dump_basis];
        const Field f = Field::sample(Grid2D::half_box(-1.0, 1.0, 1.0, r.grid_n), r.params, [&](double x, double y) {
            const auto z = unzip(x, y);
            return u(z[0], z[1]);
        });
        write_field(r.out / ("basis_" + std::to_string(c.dump_basis) + ".csv"), f, r.banner);
    }

    json summary = {{"subcommand", "spectral"}, {"j_max", c.j_max}, {"iota", basis.iota()},
                    {"weight_mass", basis.quadrature().weight_mass()},
                    {"weight_mass_exact", BoundaryQuadrature::weight_mass_exact(r.params)}};
    bool pass = true;
    if (c.check == "gram" || c.check == "all") {
        const double dev = gram_deviation(G);
        summary["gram_deviation"] = dev;
        summary["gram_pass"] = dev < 1e-6;
        pass = pass && dev < 1e-6;
    }
    if (c.check == "eigen" || c.check == "all") {
        const double dev = eigen_deviation(basis);
        summary["eigen_deviation"] = dev;
        summary["eigen_pass"] = dev < 1e-6;
        pass = pass && dev < 1e-6;
    }
    if (c.check != "none") summary["result"] = pass ? "PASS" : "FAIL";
    write_json(r.out / "spectral.json", summary, r.banner);
    emit(out, summary);
    return pass ? ok : failed;
}

// ---------------------------------------------------------- basis-check

int cmd_basis_check(RunConfig& c, Resolved& r, std::ostream& out) {
    if (c.j_max < 0) throw DomainError("--j-max must be non-negative");
    const BoundaryQuadrature quad(r.params);
    const std::vector<double> hs = {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0};
    std::string csv = banner_text(r.banner) + "j,h,max_residual,scale,relative,nodes\n";
    json rows = json::array();
    bool pass = true;
    for (int j = 0; j <= c.j_max; ++j) {
        const HomogeneousSolution u = make_basis(j, quad);
        std::vector<double> rel;
        for (double h : hs) {
            const BasisResidual res = basis_residual(u, h);
            rel.push_back(res.relative);
            csv += std::to_string(j) + "," + num(h) + "," + num(res.max_residual) + "," + num(res.scale) + "," +
                   num(res.relative) + "," + std::to_string(res.nodes) + "\n";
        }
        // Residuals at roundoff level carry no order information.
        const bool exact = std::all_of(rel.begin(), rel.end(), [](double v) { return v < 1e-9; });
        double min_order = std::numeric_limits<double>::infinity();
        if (!exact) {
            for (std::size_t k = 0; k + 1 < rel.size(); ++k) min_order = std::min(min_order, std::log2(rel[k] / rel[k + 1]));
        }
        const bool ok_j = exact || (min_order >= 1.8 && rel.back() < 1e-3);
        pass = pass && ok_j;
        rows.push_back({{"j", j}, {"relative_finest", rel.back()}, {"min_order", finite_or_null(min_order)},
                        {"exact", exact}, {"pass", ok_j}});
    }
    write_text(r.out / "basis_residual.csv", csv);
    const json summary = {{"subcommand", "basis-check"}, {"rows", rows}, {"result", pass ? "PASS" : "FAIL"}};
    write_json(r.out / "basis_check.json", summary, r.banner);
    emit(out, summary);
    return pass ? ok : failed;
}

// ----------------------------------------------------------- regularity

int cmd_regularity(RunConfig& c, Resolved& r, std::ostream& out) {
    if (c.degree < 0) throw DomainError("--degree must be non-negative");
    std::vector<double> radii = c.scales.empty() ? std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.03125} : c.scales;
    const double largest = *std::max_element(radii.begin(), radii.end());
    if (std::abs(c.center) + largest > 1.0) throw DomainError("largest annulus around --center leaves the box [-1,1]x[0,1]");
    const Params p = r.params;
    const SlitGeometry geom = SlitGeometry::flat(c.center);

    // Reference quotient: an exact companion seeded from --seed with p_00 = 1.
    std::mt19937_64 rng(r.seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::map<XRIndex, double> seed{{XRIndex{{0, 0}, 0}, 1.0}};
    for (int mu = 1; mu <= c.degree; ++mu) seed[XRIndex{{0, mu}, 0}] = coeff(rng);
    PolyXR reference(1, c.degree);
    if (c.degree == 0) {
        reference.set({{0, 0}, 0}, 1.0);
    } else {
        reference = a_harmonic_companion(c.degree - 1, p, seed);
    }

    const Grid2D grid = Grid2D::half_box(-1.0, 1.0, 1.0, r.grid_n);
    auto profile = [&](double x, double y) { return profile_u_a(geom, p, Point::planar(x, y)); };
    auto boundary = [&](double x, double y) {
        const double d = x - c.center;
        return profile(x, y) * reference(0.0, d, std::hypot(d, y));
    };
    const Field u = dirichlet_solve(geom, p, grid, boundary, [](double) { return 0.0; }, nullptr, r.settings);
    const Field U = Field::sample(grid, p, profile);
    const QuotientFit fit = quotient_expand(u, U, geom, c.degree, radii);

    r.banner.push_back("center=" + short_num(c.center) + " degree=" + std::to_string(c.degree));
    std::string csv = banner_text(r.banner) + "mu,m,fitted,reference\n";
    json coefficients = json::array();
    for (const XRIndex& idx : PolyXR::indices(1, c.degree)) {
        const double fitted = fit.poly.get(idx);
        const double ref = reference.get(idx);
        csv += std::to_string(idx.mu[1]) + "," + std::to_string(idx.m) + "," + num(fitted) + "," + num(ref) + "\n";
        coefficients.push_back({{"mu", idx.mu[1]}, {"m", idx.m}, {"fitted", fitted}, {"reference", ref}});
    }
    write_text(r.out / "regularity.csv", csv);
    std::string res_csv = banner_text(r.banner) + "radius,residual\n";
    json annuli = json::array();
    for (std::size_t k = 0; k < fit.radii.size(); ++k) {
        res_csv += num(fit.radii[k]) + "," + num(fit.residuals[k]) + "\n";
        annuli.push_back({{"radius", fit.radii[k]}, {"residual", fit.residuals[k]}});
    }
    write_text(r.out / "quotient_residuals.csv", res_csv);
    const json summary = {{"subcommand", "regularity"},
                          {"center", c.center},
                          {"degree", c.degree},
                          {"coefficients", coefficients},
                          {"annuli", annuli},
                          {"residual_exponent", finite_or_null(fit.residual_exponent)},
                          {"exact", !std::isfinite(fit.residual_exponent)}};
    write_json(r.out / "regularity.json", summary, r.banner);
    emit(out, summary);
    return ok;
}

// ------------------------------------------------------- distance-check

SlitGeometry curve_geometry(double amplitude, double alpha) {
    if (amplitude == 0.0) return SlitGeometry::flat();
    SlitGeometry g = SlitGeometry::power_curve(amplitude, 1.0 + alpha);
    g.declare_holder_exponent(alpha);
    return g;
}

int cmd_distance_check(RunConfig& c, Resolved& r, std::ostream& out) {
    const double alpha = c.alpha_opt->count() > 0 ? c.alpha : 0.5;
    const double amplitude = c.amplitude_opt->count() > 0 ? c.amplitude : 0.2;
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("--alpha must lie in (0, 1]");
    const SlitGeometry geom = r.has_geometry ? r.geometry : curve_geometry(amplitude, alpha);
    const AppendixReport report = verify_appendix_estimates(RegularizedDistance(geom), r.params, c.samples, r.seed);

    std::vector<EstimateFit> halved;
    if (c.sweep) {
        if (r.has_geometry) throw DomainError("--sweep scales the built-in curve; drop --geometry");
        halved = verify_appendix_estimates(RegularizedDistance(curve_geometry(0.5 * amplitude, alpha)), r.params,
                                           c.samples, r.seed)
                     .estimates;
    }

    r.banner.push_back("curve amplitude=" + short_num(amplitude) + " alpha=" + short_num(alpha) +
                       " samples=" + std::to_string(c.samples) + (c.sweep ? " sweep" : ""));
    json estimates = json::object();
    std::string csv = banner_text(r.banner) + "shell,radius";
    for (const EstimateFit& e : report.estimates) csv += "," + e.name;
    csv += "\n";
    for (std::size_t k = 0; k < report.shell_radii.size(); ++k) {
        csv += std::to_string(report.shell_index[k]) + "," + num(report.shell_radii[k]);
        for (const EstimateFit& e : report.estimates) csv += "," + num(e.shell_max[k]);
        csv += "\n";
    }
    for (std::size_t n = 0; n < report.estimates.size(); ++n) {
        const EstimateFit& e = report.estimates[n];
        json entry = {{"constant", e.constant},
                      {"exponent", finite_or_null(e.fitted_exponent)},
                      {"stated_exponent", e.stated_exponent},
                      {"exact", !std::isfinite(e.fitted_exponent)},
                      {"pass", e.pass}};
        if (!halved.empty()) {
            entry["constant_half_amplitude"] = halved[n].constant;
            entry["amplitude_ratio"] = halved[n].constant > 0.0 ? e.constant / halved[n].constant : 0.0;
        }
        estimates[e.name] = entry;
    }
    write_text(r.out / "shell_maxima.csv", csv);
    json file = estimates;
    file["provenance"] = r.banner;
    write_text(r.out / "distance_report.json", file.dump(2) + "\n");

    const json summary = {{"subcommand", "distance-check"},
                          {"estimates", estimates},
                          {"samples_per_shell", report.samples_per_shell},
                          {"skipped_near_cut_locus", report.skipped_near_cut_locus},
                          {"result", report.pass() ? "PASS" : "FAIL"}};
    emit(out, summary);
    return report.pass() ? ok : failed;
}

// -------------------------------------------------------- barrier-check

int cmd_barrier_check(RunConfig& c, Resolved& r, std::ostream& out) {
    const double alpha = c.alpha_opt->count() > 0 ? c.alpha : 0.25;
    const BarrierReport b = barrier_check(r.params, alpha, r.grid_n, 1000, r.seed);
    r.banner.push_back("alpha=" + short_num(alpha));
    const json summary = {{"subcommand", "barrier-check"}, {"alpha", b.alpha},     {"beta", b.beta},
                          {"h", b.h},                      {"points", b.points},   {"c_discrete", b.c_discrete},
                          {"c_continuum", b.c_continuum},  {"c_theory", b.c_theory}, {"result", b.pass ? "PASS" : "FAIL"}};
    write_json(r.out / "barrier.json", summary, r.banner);
    emit(out, summary);
    return b.pass ? ok : failed;
}

// ----------------------------------------------------------------- plot

std::vector<std::array<double, 2>> read_overlay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::vector<std::array<double, 2>> markers;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "x_f,side") throw BadData(path + " line " + std::to_string(lineno) + ": expected header x_f,side");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        try {
            if (comma == std::string::npos) throw std::invalid_argument("missing comma");
            std::size_t used = 0;
            const double x = std::stod(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("trailing text");
            (void)std::stoi(line.substr(comma + 1));
            markers.push_back({x, 0.0});
        } catch (const std::exception&) {
            throw BadData(path + " line " + std::to_string(lineno) + ": malformed free-boundary row");
        }
    }
    if (!header) throw BadData(path + ": missing header x_f,side");
    return markers;
}

int cmd_plot(RunConfig& c, Resolved& r, std::ostream& out) {
    std::ifstream in(c.input);
    if (!in) throw ValidationError("cannot open " + c.input);
    Field f = [&] {
        try {
            return read_field_csv(in, r.params);
        } catch (const ValidationError& e) {
            throw BadData(c.input + ": " + e.what());
        }
    }();
    const std::vector<std::array<double, 2>> markers = c.overlay.empty() ? std::vector<std::array<double, 2>>{} : read_overlay(c.overlay);
    std::string svg = svg::heatmap(f, markers);
    std::string prov = "<!--";
    for (const std::string& line : r.banner) prov += " " + line + ";";
    prov += " input " + fs::path(c.input).filename().string() + " -->\n";
    svg.insert(svg.find('\n') + 1, prov);
    const fs::path target = r.out / (fs::path(c.input).stem().string() + ".svg");
    write_text(target, svg);
    emit(out, {{"subcommand", "plot"}, {"svg", target.string()}, {"markers", markers.size()}});
    return ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weighted slit-domain solvers, spectral basis and regularity checks", "slit-harmonic"};
    app.require_subcommand(1);

    std::list<Command> commands;
    auto add = [&](std::string name, std::string help, int grid_n, double default_s,
                   std::function<int(RunConfig&, Resolved&, std::ostream&)> body) -> Command& {
        Command& c = commands.emplace_back();
        c.name = std::move(name);
        c.app = app.add_subcommand(c.name, std::move(help));
        c.default_grid_n = grid_n;
        c.default_s = default_s;
        c.body = std::move(body);
        add_common(c);
        return c;
    };

    add("solve", "flat slit Dirichlet problem with boundary data U_a", 128, 0.0, cmd_solve);

    Command& obstacle = add("obstacle", "fractional obstacle problem via the extension", 256, 0.0, cmd_obstacle);
    obstacle.app->add_option("--obstacle", obstacle.cfg.obstacle, "preset")->check(CLI::IsMember({"quadratic", "bump", "cos"}));
    obstacle.cfg.amplitude_opt = obstacle.app->add_option("--amplitude", obstacle.cfg.amplitude, "obstacle amplitude");
    obstacle.app->add_option("--width", obstacle.cfg.width, "obstacle width");
    obstacle.app->add_option("--scales", obstacle.cfg.scales, "homogeneity radii (default 4h,8h,16h)")->delimiter(',');

    Command& spectral = add("spectral", "homogeneous basis, Gram matrix and coefficient tables", 128, 0.0, cmd_spectral);
    spectral.app->add_option("--j-max", spectral.cfg.j_max, "largest basis index");
    spectral.app->add_option("--check", spectral.cfg.check, "self-check")->check(CLI::IsMember({"none", "gram", "eigen", "all"}));
    spectral.app->add_option("--dump-basis", spectral.cfg.dump_basis, "write basis function J as a field CSV");

    Command& basis = add("basis-check", "discrete a-harmonicity of the basis under refinement", 128, 0.0, cmd_basis_check);
    basis.app->add_option("--j-max", basis.cfg.j_max, "largest basis index");

    Command& regularity = add("regularity", "quotient expansion u / U_a near the flat edge", 256, 0.0, cmd_regularity);
    regularity.app->add_option("--center", regularity.cfg.center, "edge position");
    regularity.app->add_option("--degree", regularity.cfg.degree, "degree of the fitted polynomial");
    regularity.app->add_option("--scales", regularity.cfg.scales, "annulus radii")->delimiter(',');

    Command& distance = add("distance-check", "regularized distance estimates near a curved edge (default s = 0.5)", 128, 0.5,
                            cmd_distance_check);
    distance.cfg.alpha_opt = distance.app->add_option("--alpha", distance.cfg.alpha, "Hoelder exponent of gamma'");
    distance.cfg.amplitude_opt = distance.app->add_option("--amplitude", distance.cfg.amplitude, "curve amplitude");
    distance.app->add_option("--samples", distance.cfg.samples, "samples per shell")->check(CLI::PositiveNumber);
    distance.app->add_flag("--sweep", distance.cfg.sweep, "also run at half amplitude and report constant ratios");

    Command& barrier = add("barrier-check", "sign of L_a on the flat barrier (default s = 0.5)", 256, 0.5, cmd_barrier_check);
    barrier.cfg.alpha_opt = barrier.app->add_option("--alpha", barrier.cfg.alpha, "barrier exponent in (0, 1 - s)");

    Command& plot = add("plot", "render a field CSV as SVG", 128, 0.5, cmd_plot);
    plot.app->add_option("--input", plot.cfg.input, "field CSV")->required();
    plot.app->add_option("--overlay", plot.cfg.overlay, "free-boundary CSV x_f,side");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << app.help();
        return usage;
    }

    for (Command& c : commands) {
        if (!app.got_subcommand(c.app)) continue;
        try {
            Resolved r = resolve(c);
            return c.body(c.cfg, r, out);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n\n" << c.app->help();
            return usage;
        } catch (const BadData& e) {
            err << "error: " << e.what() << '\n';
            return bad_data;
        } catch (const ConvergenceError& e) {
            err << "error: " << e.what() << " (" << e.history().size() << " residuals recorded)\n";
            return no_convergence;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return failed;
        }
    }
    return usage;
}

}  // namespace slit::cli
