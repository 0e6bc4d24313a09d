#include "slit/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slit/errors.hpp"
#include "slit/operator.hpp"

namespace slit {

namespace {

// Truncated Taylor series arithmetic, coefficient k multiplies eps^k.
using Series = std::vector<double>;

Series series_mul(const Series& a, const Series& b) {
    Series c(a.size(), 0.0);
    for (std::size_t n = 0; n < c.size(); ++n) {
        for (std::size_t i = 0; i <= n; ++i) c[n] += a[i] * b[n - i];
    }
    return c;
}

Series series_reciprocal(const Series& u) {
    Series r(u.size(), 0.0);
    r[0] = 1.0 / u[0];
    for (std::size_t n = 1; n < u.size(); ++n) {
        double acc = 0.0;
        for (std::size_t i = 1; i <= n; ++i) acc += u[i] * r[n - i];
        r[n] = -acc / u[0];
    }
    return r;
}

Series series_exp(const Series& f) {
    Series e(f.size(), 0.0);
    e[0] = std::exp(f[0]);
    for (std::size_t n = 1; n < f.size(); ++n) {
        double acc = 0.0;
        for (std::size_t k = 1; k <= n; ++k) acc += static_cast<double>(k) * f[k] * e[n - k];
        e[n] = acc / static_cast<double>(n);
    }
    return e;
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

}  // namespace

ObstaclePreset ObstaclePreset::parse(const std::string& name, double amplitude, double width) {
    if (!(width > 0.0) || !std::isfinite(amplitude)) throw DomainError("obstacle needs width > 0 and finite amplitude");
    ObstaclePreset p;
    p.amplitude = amplitude;
    p.width = width;
    if (name == "quadratic") {
        p.kind = ObstacleKind::quadratic;
    } else if (name == "bump") {
        p.kind = ObstacleKind::bump;
    } else if (name == "cos") {
        p.kind = ObstacleKind::cosine;
    } else {
        throw DomainError("unknown obstacle preset '" + name + "' (quadratic|bump|cos)");
    }
    return p;
}

std::string ObstaclePreset::name() const {
    switch (kind) {
        case ObstacleKind::quadratic: return "quadratic";
        case ObstacleKind::bump: return "bump";
        case ObstacleKind::cosine: return "cos";
    }
    return "?";
}

double ObstaclePreset::value(double x) const {
    switch (kind) {
        case ObstacleKind::quadratic: return amplitude - x * x / width;
        case ObstacleKind::bump: {
            const double t = x / width;
            const double b = std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
            return amplitude * (2.0 * b - 1.0);
        }
        case ObstacleKind::cosine:
            return std::abs(x) < width ? amplitude * std::cos(std::numbers::pi * x / width) : -amplitude;
    }
    return 0.0;
}

std::vector<double> ObstaclePreset::derivatives(double x0, int order) const {
    if (order < 0) throw DomainError("derivative order must be non-negative");
    const std::size_t n = static_cast<std::size_t>(order) + 1;
    std::vector<double> d(n, 0.0);
    d[0] = value(x0);
    switch (kind) {
        case ObstacleKind::quadratic:
            if (n > 1) d[1] = -2.0 * x0 / width;
            if (n > 2) d[2] = -2.0 / width;
            break;
        case ObstacleKind::cosine:
            if (std::abs(x0) < width) {
                const double k = std::numbers::pi / width;
                for (std::size_t m = 1; m < n; ++m) {
                    d[m] = amplitude * std::pow(k, static_cast<double>(m)) *
                           std::cos(k * x0 + 0.5 * std::numbers::pi * static_cast<double>(m));
                }
            }
            break;
        case ObstacleKind::bump: {
            const double t0 = x0 / width;
            if (std::abs(t0) >= 1.0) break;
            Series t(n, 0.0);
            t[0] = t0;
            if (n > 1) t[1] = 1.0 / width;
            Series u = series_mul(t, t);
            for (double& c : u) c = -c;
            u[0] += 1.0;
            Series v = series_reciprocal(u);
            for (double& c : v) c = -c;
            v[0] += 1.0;
            const Series b = series_exp(v);
            for (std::size_t m = 1; m < n; ++m) d[m] = 2.0 * amplitude * b[m] * factorial(static_cast<int>(m));
            break;
        }
    }
    return d;
}

std::vector<double> extension_constants(const Params& p, int count) {
    std::vector<double> c(static_cast<std::size_t>(std::max(count, 1)), 1.0);
    for (std::size_t j = 1; j < c.size(); ++j) {
        const double jj = static_cast<double>(j);
        c[j] = 2.0 * jj * (2.0 * jj + p.a() - 1.0) * c[j - 1];
    }
    return c;
}

Field extend_obstacle(const std::function<double(double)>& phi, const std::vector<double>& derivs, double x0,
                      const Params& p, int m, const Grid2D& grid) {
    if (m < 2) throw DomainError("obstacle extension needs Taylor order m >= 2");
    if (derivs.size() < static_cast<std::size_t>(m) + 1) throw DomainError("need derivatives up to order m");
    const int terms = m / 2 + 1;
    const std::vector<double> c = extension_constants(p, terms + 1);
    // Even derivatives of the Taylor polynomial: T^{(2j)}(x) = sum_{k>=2j} d_k (x-x0)^{k-2j} / (k-2j)!.
    auto taylor_derivative = [&](int order, double x) {
        double acc = 0.0;
        for (int k = order; k <= m; ++k) acc += derivs[static_cast<std::size_t>(k)] * std::pow(x - x0, k - order) / factorial(k - order);
        return acc;
    };
    return Field::sample(grid, p, [&](double x, double y) {
        double v = phi(x);
        double y2j = 1.0;
        for (int j = 1; j <= terms; ++j) {
            y2j *= y * y;
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            v += sign / c[static_cast<std::size_t>(j)] * y2j * taylor_derivative(2 * j, x);
        }
        return v;
    });
}

namespace {

constexpr double kRowOmega = 1.5;
constexpr int kMaxActiveSetRounds = 50;

struct Workspace {
    const Grid2D& g;
    const FluxStencil& stencil;
    const std::vector<double>& phi;
    const std::vector<std::uint8_t>& outer;
};

void psor_sweep(const Workspace& w, std::vector<double>& u, double omega) {
    const Grid2D& g = w.g;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (w.outer[k]) continue;
            const double update = w.stencil.balance(u, i, j) / w.stencil.diagonal(k);
            if (j == 0) {
                u[k] = std::max(u[k] + kRowOmega * update, w.phi[static_cast<std::size_t>(i)]);
            } else {
                u[k] += omega * update;
            }
        }
    }
}

// Max natural residual in L_a units: |L_a u| on unconstrained nodes and
// |min(gap * diag, -balance)| / h^2 on row 0.
double natural_residual(const Workspace& w, const std::vector<double>& u) {
    const Grid2D& g = w.g;
    const double inv_h2 = 1.0 / (g.h * g.h);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (w.outer[k]) continue;
            const double bal = w.stencil.balance(u, i, j);
            double r = std::abs(bal);
            if (j == 0) {
                const double gap = (u[k] - w.phi[static_cast<std::size_t>(i)]) * w.stencil.diagonal(k);
                r = std::abs(std::min(gap, -bal));
            }
            worst = std::max(worst, r * inv_h2);
        }
    }
    return worst;
}

// Solves with `pinned` fixed, then applies residual-correction solves until the
// max stencil residual on free nodes drops below `target` (L_a units) or stalls.
void pinned_solve(const Workspace& w, const Params& p, const std::vector<std::uint8_t>& pinned,
                  std::vector<double>& u, const SolverSettings& settings, double target) {
    const Grid2D& g = w.g;
    SolverSettings cg = settings;
    cg.method = SolverMethod::cg;
    cg.tol = 1e-11;
    LinearProblem prob;
    prob.pinned = pinned;
    prob.values = u;
    u = solve_linear(w.stencil, p, prob, cg).values;

    const double h2 = g.h * g.h;
    double last = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 4; ++round) {
        LinearProblem corr;
        corr.pinned = pinned;
        corr.values.assign(g.size(), 0.0);
        corr.source.assign(g.size(), 0.0);
        double worst = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                if (pinned[k]) continue;
                const double bal = w.stencil.balance(u, i, j);
                worst = std::max(worst, std::abs(bal) / h2);
                corr.source[k] = -bal / (h2 * w.stencil.node_weight(k));
            }
        }
        if (worst < target || worst > 0.5 * last) return;
        last = worst;
        const Field delta = solve_linear(w.stencil, p, corr, cg);
        for (std::size_t k = 0; k < g.size(); ++k) u[k] += delta.values[k];
    }
}

// Primal-dual active set on row 0. Returns the number of rounds, or -1 if the
// active set never settled.
int active_set_polish(const Workspace& w, const Params& p, std::vector<double>& u, const SolverSettings& settings) {
    const Grid2D& g = w.g;
    std::vector<std::uint8_t> active(static_cast<std::size_t>(g.nx), 0);
    for (int i = 1; i + 1 < g.nx; ++i) {
        active[static_cast<std::size_t>(i)] = u[g.index(i, 0)] <= w.phi[static_cast<std::size_t>(i)];
    }
    for (int round = 1; round <= kMaxActiveSetRounds; ++round) {
        std::vector<std::uint8_t> pinned = w.outer;
        for (int i = 1; i + 1 < g.nx; ++i) {
            if (!active[static_cast<std::size_t>(i)]) continue;
            const std::size_t k = g.index(i, 0);
            pinned[k] = 1;
            u[k] = w.phi[static_cast<std::size_t>(i)];
        }
        pinned_solve(w, p, pinned, u, settings, 0.1 * settings.tol);
        bool changed = false;
        for (int i = 1; i + 1 < g.nx; ++i) {
            const std::size_t k = g.index(i, 0);
            const bool next = active[static_cast<std::size_t>(i)] ? w.stencil.balance(u, i, 0) < 0.0
                                                                  : u[k] < w.phi[static_cast<std::size_t>(i)];
            if (next != static_cast<bool>(active[static_cast<std::size_t>(i)])) changed = true;
            active[static_cast<std::size_t>(i)] = next;
        }
        if (!changed) return round;
    }
    return -1;
}

}  // namespace

ObstacleSolution solve_obstacle(const ObstacleProblem& prob) {
    const Grid2D& g = prob.grid;
    g.validate();
    if (!g.reflected) throw DomainError("obstacle problems live on a reflected grid");
    if (!prob.obstacle) throw DomainError("obstacle function missing");
    if (!(prob.settings.tol > 0.0)) throw DomainError("solver tolerance must be positive");
    if (!(prob.settings.omega > 0.0 && prob.settings.omega < 2.0)) throw DomainError("omega must lie in (0,2)");

    ObstacleSolution sol{Field(g, prob.params), std::vector<double>(static_cast<std::size_t>(g.nx)),
                         std::vector<std::uint8_t>(static_cast<std::size_t>(g.nx), 0), 0, 0};
    for (int i = 0; i < g.nx; ++i) {
        const double v = prob.obstacle(g.x(i));
        if (!std::isfinite(v)) throw ValidationError("obstacle is not finite at x = " + std::to_string(g.x(i)));
        sol.obstacle_row[static_cast<std::size_t>(i)] = v;
    }
    for (int i : {0, g.nx - 1}) {
        if (!(sol.obstacle_row[static_cast<std::size_t>(i)] < prob.boundary(g.x(i), 0.0))) {
            throw DomainError("obstacle must stay below the boundary data at the box sides");
        }
    }

    std::vector<std::uint8_t> outer(g.size(), 0);
    std::vector<double>& u = sol.field.values;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (g.on_outer_boundary(i, j)) {
                outer[k] = 1;
                u[k] = prob.boundary(g.x(i), g.y(j));
            } else if (j == 0) {
                u[k] = std::max(0.0, sol.obstacle_row[static_cast<std::size_t>(i)]);
            }
        }
    }

    const FluxStencil stencil(g, prob.params);
    const Workspace w{g, stencil, sol.obstacle_row, outer};
    const int max_iter = prob.settings.max_iter > 0 ? prob.settings.max_iter : 200 * std::max(g.nx, g.ny);
    const int warmup = std::min(max_iter, prob.warmup_sweeps > 0 ? prob.warmup_sweeps : 4 * std::max(g.nx, g.ny));
    SolveInfo& info = sol.field.info;

    auto run_psor = [&](int until) {
        while (sol.psor_sweeps < until) {
            psor_sweep(w, u, prob.settings.omega);
            ++sol.psor_sweeps;
            if (sol.psor_sweeps % 10 == 0 || sol.psor_sweeps == until) {
                info.residual = natural_residual(w, u);
                info.history.push_back(info.residual);
                if (info.residual < prob.settings.tol) return true;
            }
        }
        return false;
    };

    bool done = run_psor(warmup);
    if (!done) {
        std::vector<double> backup = u;
        int rounds = -1;
        try {
            rounds = active_set_polish(w, prob.params, u, prob.settings);
        } catch (const ConvergenceError&) {
            rounds = -1;
        }
        if (rounds > 0) {
            sol.active_set_rounds = rounds;
            info.residual = natural_residual(w, u);
            info.history.push_back(info.residual);
            done = info.residual < prob.settings.tol;
        }
        if (!done) {
            if (rounds < 0) u = backup;
            done = run_psor(max_iter);
        }
    }
    info.iterations = sol.psor_sweeps;
    if (!done) {
        throw ConvergenceError("obstacle solve did not reach natural residual " + std::to_string(prob.settings.tol) +
                                   " (last " + std::to_string(info.residual) + ")",
                               info.history);
    }
    sol.field.validate();

    // Contact: a final projected sweep would clamp the node, and the gap is negligible.
    for (int i = 1; i + 1 < g.nx; ++i) {
        const std::size_t k = g.index(i, 0);
        const double phi = sol.obstacle_row[static_cast<std::size_t>(i)];
        const double trial = u[k] + kRowOmega * stencil.balance(u, i, 0) / stencil.diagonal(k);
        sol.contact[static_cast<std::size_t>(i)] = trial <= phi && u[k] - phi < 10.0 * prob.settings.tol;
    }
    return sol;
}

std::vector<FreeBoundaryPoint> free_boundary(const ObstacleSolution& sol) {
    const Grid2D& g = sol.field.grid;
    const double power = 1.0 / (1.0 + sol.field.params.s());
    auto gap = [&](int i) {
        const double d = sol.field(i, 0) - sol.obstacle_row[static_cast<std::size_t>(i)];
        return std::pow(std::max(d, 0.0), power);
    };
    auto is_contact = [&](int i) { return i >= 0 && i < g.nx && sol.contact[static_cast<std::size_t>(i)] != 0; };
    // From contact end `edge`, free nodes at edge + dir and edge + 2 dir.
    auto refine = [&](int edge, int dir) {
        const int i1 = edge + dir;
        const int i2 = edge + 2 * dir;
        if (i2 < 0 || i2 >= g.nx || is_contact(i2)) return g.x(edge);
        const double g1 = gap(i1);
        const double g2 = gap(i2);
        if (!(g2 > g1)) return g.x(edge);
        // Root of the line through (x_{i1}, g1), (x_{i2}, g2), clipped to the cell.
        const double t = std::clamp(g1 / (g2 - g1), 0.0, 1.0);
        return g.x(i1) - dir * t * g.h;
    };
    std::vector<FreeBoundaryPoint> out;
    for (int i = 0; i < g.nx; ++i) {
        if (!is_contact(i)) continue;
        if (!is_contact(i - 1)) out.push_back({refine(i, -1), -1});
        if (!is_contact(i + 1)) out.push_back({refine(i, +1), +1});
    }
    return out;
}

ComplementarityMetrics complementarity_audit(const ObstacleSolution& sol, double exclusion) {
    const Field& f = sol.field;
    const Grid2D& g = f.grid;
    const FluxStencil stencil(g, f.params);
    const double inv_h2 = 1.0 / (g.h * g.h);
    ComplementarityMetrics m;

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (g.on_outer_boundary(i, j)) continue;
            if (j == 0 && sol.contact[static_cast<std::size_t>(i)]) continue;
            m.offcontact_residual = std::max(m.offcontact_residual, std::abs(stencil.balance(f.values, i, j)) * inv_h2);
        }
    }

    const std::vector<FreeBoundaryPoint> fb = free_boundary(sol);
    const double xmin = g.x(0);
    const double xmax = g.x(g.nx - 1);
    double contact_min = std::numeric_limits<double>::infinity();
    for (int i = 1; i + 1 < g.nx; ++i) {
        const double x = g.x(i);
        const double flux = flux_limit(f, x);
        if (sol.contact[static_cast<std::size_t>(i)]) {
            ++m.contact_nodes;
            contact_min = std::min(contact_min, -flux);
            continue;
        }
        if (x - xmin < exclusion || xmax - x < exclusion) continue;
        bool near = false;
        for (const auto& p : fb) near = near || std::abs(x - p.x) < exclusion;
        if (!near) m.offcontact_flux_max = std::max(m.offcontact_flux_max, std::abs(flux));
    }
    m.contact_flux_min = m.contact_nodes > 0 ? contact_min : 0.0;
    return m;
}

}  // namespace slit
