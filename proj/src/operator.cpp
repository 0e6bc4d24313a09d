#include "slit/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slit/errors.hpp"
#include "slit/quadrature.hpp"

namespace slit {

FaceWeight axis_weight(const Params& p, double h) {
    const double a = p.a();
    // Antiderivative of |y|^a, odd in y.
    const auto primitive = [a](double y) { return std::copysign(std::pow(std::abs(y), 1.0 + a), y) / (1.0 + a); };
    return [primitive, h](double, double ym) { return (primitive(ym + 0.5 * h) - primitive(ym - 0.5 * h)) / h; };
}

FaceWeight midpoint_weight(const Params& p) {
    const double a = p.a();
    return [a](double, double ym) { return std::pow(std::abs(ym), a); };
}

FluxStencil::FluxStencil(const Grid2D& grid, const Params& p) : grid_(grid) {
    grid_.validate();
    build(axis_weight(p, grid.h), midpoint_weight(p));
}

FluxStencil::FluxStencil(const Grid2D& grid, const FaceWeight& weight) : grid_(grid) {
    grid_.validate();
    build(weight, weight);
}

void FluxStencil::build(const FaceWeight& weight, const FaceWeight& y_weight) {
    const std::size_t n = grid_.size();
    ce_.assign(n, 0.0);
    cw_.assign(n, 0.0);
    cn_.assign(n, 0.0);
    cs_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    node_w_.assign(n, 0.0);
    active_.assign(n, 0);
    const double hh = 0.5 * grid_.h;
    for (int j = 0; j < grid_.ny; ++j) {
        for (int i = 0; i < grid_.nx; ++i) {
            const std::size_t k = grid_.index(i, j);
            const double x = grid_.x(i);
            const double y = grid_.y(j);
            node_w_[k] = weight(x, y);
            if (grid_.on_outer_boundary(i, j)) continue;
            const bool mirrored = grid_.reflected && j == 0;
            const double e = weight(x + hh, y);
            const double w = weight(x - hh, y);
            double nn = y_weight(x, y + hh);
            double ss = y_weight(x, y - hh);
            if (mirrored) {
                nn += ss;
                ss = 0.0;
            }
            const double sum = e + w + nn + ss;
            if (!std::isfinite(sum) || !(sum > 0.0)) continue;
            ce_[k] = e;
            cw_[k] = w;
            cn_[k] = nn;
            cs_[k] = ss;
            diag_[k] = sum;
            active_[k] = 1;
        }
    }
}

void FluxStencil::set_face(std::size_t k, Face face, double c) {
    if (!active_[k]) return;
    double* slot = nullptr;
    switch (face) {
        case Face::east: slot = &ce_[k]; break;
        case Face::west: slot = &cw_[k]; break;
        case Face::north:
            slot = &cn_[k];
            if (grid_.reflected && k < static_cast<std::size_t>(grid_.nx)) c *= 2.0;
            break;
        case Face::south: slot = &cs_[k]; break;
    }
    diag_[k] += c - *slot;
    *slot = c;
}

double FluxStencil::balance(const std::vector<double>& u, int i, int j) const {
    const std::size_t k = grid_.index(i, j);
    const std::size_t nx = static_cast<std::size_t>(grid_.nx);
    const double c = u[k];
    double acc = ce_[k] * (u[k + 1] - c) + cw_[k] * (u[k - 1] - c) + cn_[k] * (u[k + nx] - c);
    if (cs_[k] != 0.0) acc += cs_[k] * (u[k - nx] - c);
    return acc;
}

Field apply_stencil(const FluxStencil& stencil, const Field& f,
                    const std::function<double(double, double)>& scale) {
    const Grid2D& g = stencil.grid();
    if (g.nx != f.grid.nx || g.ny != f.grid.ny) throw DomainError("stencil and field grids differ");
    Field out(g, f.params);
    out.defined.assign(g.size(), 0);
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (!stencil.has_stencil(k)) continue;
            out.values[k] = stencil.balance(f.values, i, j) * inv_h2 * scale(g.x(i), g.y(j));
            out.defined[k] = 1;
        }
    }
    return out;
}

Field apply_La(const Field& f) {
    f.grid.validate();
    const FluxStencil stencil(f.grid, f.params);
    return apply_stencil(stencil, f, [](double, double) { return 1.0; });
}

namespace {

void check_problem(const FluxStencil& stencil, const LinearProblem& prob) {
    const Grid2D& g = stencil.grid();
    if (prob.pinned.size() != g.size() || prob.values.size() != g.size()) {
        throw DomainError("linear problem arrays do not match the grid");
    }
    if (!prob.source.empty() && prob.source.size() != g.size()) {
        throw DomainError("source array does not match the grid");
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!prob.pinned[k] && !stencil.has_stencil(k)) {
            throw DomainError("free node " + std::to_string(k) + " has no complete stencil");
        }
        if (!std::isfinite(prob.values[k])) throw ValidationError("non-finite boundary or initial data");
    }
}

double source_term(const FluxStencil& stencil, const LinearProblem& prob, std::size_t k) {
    if (prob.source.empty()) return 0.0;
    const double h = stencil.grid().h;
    return h * h * stencil.node_weight(k) * prob.source[k];
}

// ||b||_2 of the symmetric system: pinned-neighbour contributions minus source.
double rhs_norm(const FluxStencil& stencil, const LinearProblem& prob) {
    const Grid2D& g = stencil.grid();
    const std::size_t nx = static_cast<std::size_t>(g.nx);
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (prob.pinned[k]) continue;
            double b = -source_term(stencil, prob, k);
            if (prob.pinned[k + 1]) b += stencil.east(k) * prob.values[k + 1];
            if (prob.pinned[k - 1]) b += stencil.west(k) * prob.values[k - 1];
            if (prob.pinned[k + nx]) b += stencil.north(k) * prob.values[k + nx];
            if (stencil.south(k) != 0.0 && prob.pinned[k - nx]) b += stencil.south(k) * prob.values[k - nx];
            b *= stencil.theta(j);
            acc += b * b;
        }
    }
    return std::sqrt(acc);
}

double residual_norm(const FluxStencil& stencil, const LinearProblem& prob, const std::vector<double>& u) {
    const Grid2D& g = stencil.grid();
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (prob.pinned[k]) continue;
            const double r = stencil.theta(j) * (stencil.balance(u, i, j) - source_term(stencil, prob, k));
            acc += r * r;
        }
    }
    return std::sqrt(acc);
}

}  // namespace

double relative_residual(const FluxStencil& stencil, const LinearProblem& prob, const std::vector<double>& u) {
    check_problem(stencil, prob);
    const double b = rhs_norm(stencil, prob);
    const double r = residual_norm(stencil, prob, u);
    return b > 0.0 ? r / b : r;
}

double system_energy(const FluxStencil& stencil, const LinearProblem& prob, const std::vector<double>& u) {
    // With free values x: E = 1/2 x'Ax - b'x = -1/2 sum_k x_k (r_k + b_k), r = b - Ax.
    const Grid2D& g = stencil.grid();
    const std::size_t nx = static_cast<std::size_t>(g.nx);
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (prob.pinned[k]) continue;
            const double th = stencil.theta(j);
            const double r = th * (stencil.balance(u, i, j) - source_term(stencil, prob, k));
            double b = -source_term(stencil, prob, k);
            if (prob.pinned[k + 1]) b += stencil.east(k) * prob.values[k + 1];
            if (prob.pinned[k - 1]) b += stencil.west(k) * prob.values[k - 1];
            if (prob.pinned[k + nx]) b += stencil.north(k) * prob.values[k + nx];
            if (stencil.south(k) != 0.0 && prob.pinned[k - nx]) b += stencil.south(k) * prob.values[k - nx];
            acc += u[k] * (r + th * b);
        }
    }
    return -0.5 * acc;
}

void sor_sweep(const FluxStencil& stencil, const LinearProblem& prob, std::vector<double>& u, double omega) {
    const Grid2D& g = stencil.grid();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (prob.pinned[k]) continue;
            const double update = (stencil.balance(u, i, j) - source_term(stencil, prob, k)) / stencil.diagonal(k);
            u[k] += omega * update;
        }
    }
}

namespace {

int effective_max_iter(const Grid2D& g, const SolverSettings& s) {
    return s.max_iter > 0 ? s.max_iter : 200 * std::max(g.nx, g.ny);
}

void solve_sor(const FluxStencil& stencil, const LinearProblem& prob, const SolverSettings& settings,
               std::vector<double>& u, SolveInfo& info) {
    if (!(settings.omega > 0.0 && settings.omega < 2.0)) throw DomainError("SOR requires omega in (0,2)");
    const double bnorm = rhs_norm(stencil, prob);
    const double scale = bnorm > 0.0 ? bnorm : 1.0;
    const int max_iter = effective_max_iter(stencil.grid(), settings);
    constexpr int kCheckEvery = 10;
    for (int it = 1; it <= max_iter; ++it) {
        sor_sweep(stencil, prob, u, settings.omega);
        if (it % kCheckEvery == 0 || it == max_iter) {
            const double rel = residual_norm(stencil, prob, u) / scale;
            info.history.push_back(rel);
            info.iterations = it;
            info.residual = rel;
            if (rel < settings.tol) return;
        }
    }
    throw ConvergenceError("SOR did not reach relative residual " + std::to_string(settings.tol) + " in " +
                               std::to_string(max_iter) + " sweeps (last " + std::to_string(info.residual) + ")",
                           info.history);
}

void solve_cg(const FluxStencil& stencil, const LinearProblem& prob, const SolverSettings& settings,
              std::vector<double>& u, SolveInfo& info) {
    const Grid2D& g = stencil.grid();
    const std::size_t n = g.size();
    const std::size_t nx = static_cast<std::size_t>(g.nx);
    const double bnorm = rhs_norm(stencil, prob);
    const double scale = bnorm > 0.0 ? bnorm : 1.0;
    const int max_iter = effective_max_iter(g, settings);

    std::vector<double> r(n, 0.0), z(n, 0.0), p(n, 0.0), ap(n, 0.0), inv_m(n, 0.0);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (prob.pinned[k]) continue;
            r[k] = stencil.theta(j) * (stencil.balance(u, i, j) - source_term(stencil, prob, k));
            inv_m[k] = 1.0 / (stencil.theta(j) * stencil.diagonal(k));
        }
    }
    double rz = 0.0;
    double rr = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        z[k] = inv_m[k] * r[k];
        p[k] = z[k];
        rz += r[k] * z[k];
        rr += r[k] * r[k];
    }
    info.residual = std::sqrt(rr) / scale;
    info.history.push_back(info.residual);
    if (info.residual < settings.tol) return;

    for (int it = 1; it <= max_iter; ++it) {
        double pap = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            const double th = stencil.theta(j);
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.index(i, j);
                if (prob.pinned[k]) {
                    ap[k] = 0.0;
                    continue;
                }
                // p vanishes on pinned nodes, so the full stencil is the free-node product.
                double acc = stencil.diagonal(k) * p[k] - stencil.east(k) * p[k + 1] - stencil.west(k) * p[k - 1] -
                             stencil.north(k) * p[k + nx];
                if (stencil.south(k) != 0.0) acc -= stencil.south(k) * p[k - nx];
                ap[k] = th * acc;
                pap += p[k] * ap[k];
            }
        }
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        double rz_new = 0.0;
        rr = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            u[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = inv_m[k] * r[k];
            rz_new += r[k] * z[k];
            rr += r[k] * r[k];
        }
        info.iterations = it;
        info.residual = std::sqrt(rr) / scale;
        if (it % 10 == 0) info.history.push_back(info.residual);
        if (info.residual < settings.tol) {
            info.residual = residual_norm(stencil, prob, u) / scale;
            info.history.push_back(info.residual);
            if (info.residual < 10.0 * settings.tol) return;
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    info.residual = residual_norm(stencil, prob, u) / scale;
    if (info.residual < settings.tol) return;
    throw ConvergenceError("CG did not reach relative residual " + std::to_string(settings.tol) + " in " +
                               std::to_string(max_iter) + " iterations (last " + std::to_string(info.residual) +
                               ")",
                           info.history);
}

}  // namespace

Field solve_linear(const FluxStencil& stencil, const Params& p, const LinearProblem& prob,
                   const SolverSettings& settings) {
    check_problem(stencil, prob);
    if (!(settings.tol > 0.0)) throw DomainError("solver tolerance must be positive");
    Field out(stencil.grid(), p);
    out.values = prob.values;
    if (settings.method == SolverMethod::cg) {
        solve_cg(stencil, prob, settings, out.values, out.info);
    } else {
        solve_sor(stencil, prob, settings, out.values, out.info);
    }
    out.validate();
    return out;
}

namespace {

// Tip profile ((r + d)/2)^s and its gradient in the edge frame; the overall
// normalization cancels in every face coefficient.
struct TipProfile {
    double s = 0.5;
    double edge = 0.0;
    int orientation = 1;

    double value(double x, double y) const {
        const double d = orientation * (x - edge);
        const double r = std::hypot(d, y);
        const double half = d >= 0.0 ? 0.5 * (r + d) : 0.5 * y * y / (r - d);
        return half > 0.0 ? std::pow(half, s) : 0.0;
    }
    double dx(double x, double y) const {
        const double r = std::hypot(orientation * (x - edge), y);
        return r > 0.0 ? orientation * s * value(x, y) / r : 0.0;
    }
    // y > 0 only.
    double dy(double x, double y) const {
        const double d = orientation * (x - edge);
        const double r = std::hypot(d, y);
        const double ratio = d >= 0.0 ? y / (r + d) : (r - d) / y;
        return s * value(x, y) * ratio / r;
    }
};

// Face flux of the tip profile between nodes A and B = A + h e, with the
// weight |y|^a. Mirrored x-faces span [-h/2, h/2] and use y = t^{1/(1+a)} to
// absorb the weight singularity.
double tip_face_flux(const TipProfile& tip, double a, double h, double xa, double ya, bool along_x) {
    static const QuadRule rule = gauss_legendre(24);
    double acc = 0.0;
    if (along_x) {
        const double xf = xa + 0.5 * h;
        if (ya == 0.0) {
            const double top = std::pow(0.5 * h, 1.0 + a);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double t = 0.5 * top * (rule.nodes[q] + 1.0);
                acc += rule.weights[q] * 0.5 * top * tip.dx(xf, std::pow(t, 1.0 / (1.0 + a)));
            }
            return 2.0 * acc / (1.0 + a);
        }
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double y = ya + 0.5 * h * rule.nodes[q];
            acc += rule.weights[q] * 0.5 * h * std::pow(y, a) * tip.dx(xf, y);
        }
        return acc;
    }
    const double yf = ya + 0.5 * h;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        for (double half : {-0.25, 0.25}) {
            const double x = xa + half * h + 0.25 * h * rule.nodes[q];
            acc += rule.weights[q] * 0.25 * h * tip.dy(x, yf);
        }
    }
    return std::pow(yf, a) * acc;
}

// Overrides faces near the edge with flux / difference of the tip profile.
// Both sides of a face receive the same value, preserving symmetry.
void adapt_tip_faces(FluxStencil& stencil, const SlitGeometry& geom, const Params& p, double radius) {
    const Grid2D& g = stencil.grid();
    const TipProfile tip{p.s(), geom.edge(), geom.orientation()};
    const double a = p.a();
    const double h = g.h;
    using Face = FluxStencil::Face;
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double x = g.x(i);
            const double y = g.y(j);
            const std::size_t k = g.index(i, j);
            for (bool along_x : {true, false}) {
                const double xb = along_x ? x + h : x;
                const double yb = along_x ? y : y + h;
                if (std::hypot(0.5 * (x + xb) - geom.edge(), 0.5 * (y + yb)) > radius) continue;
                const std::size_t kb = along_x ? k + 1 : k + static_cast<std::size_t>(g.nx);
                if (!stencil.has_stencil(k) && !stencil.has_stencil(kb)) continue;
                const double jump = tip.value(xb, yb) - tip.value(x, y);
                const double scale = std::max(tip.value(xb, yb), tip.value(x, y));
                if (!(std::abs(jump) > 1e-8 * scale)) continue;
                const double c = tip_face_flux(tip, a, h, x, y, along_x) / jump;
                if (!std::isfinite(c) || !(c > 0.0)) continue;
                stencil.set_face(k, along_x ? Face::east : Face::north, c);
                stencil.set_face(kb, along_x ? Face::west : Face::south, c);
            }
        }
    }
}

}  // namespace

std::vector<std::uint8_t> slit_mask(const SlitGeometry& geom, const Grid2D& grid) {
    if (!grid.reflected) throw DomainError("slit nodes are defined on reflected grids");
    std::vector<std::uint8_t> mask(grid.size(), 0);
    for (int i = 0; i < grid.nx; ++i) {
        if (geom.signed_distance(0.0, grid.x(i)) <= 0.0) mask[grid.index(i, 0)] = 1;
    }
    return mask;
}

Field dirichlet_solve(const SlitGeometry& geom, const Params& p, const Grid2D& grid,
                      const std::function<double(double, double)>& boundary,
                      const std::function<double(double)>& slit_value, const Field* source,
                      const SolverSettings& settings, const std::vector<std::uint8_t>* extra_pinned,
                      double tip_radius) {
    if (geom.mode() != GeometryMode::flat) throw DomainError("grid solves support the flat slit only");
    grid.validate();
    if (!grid.reflected) throw DomainError("dirichlet_solve expects a reflected grid");
    if (extra_pinned && extra_pinned->size() != grid.size()) throw DomainError("pinned mask does not match grid");

    LinearProblem prob;
    prob.pinned.assign(grid.size(), 0);
    prob.values.assign(grid.size(), 0.0);
    const std::vector<std::uint8_t> slit = slit_mask(geom, grid);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const std::size_t k = grid.index(i, j);
            if (slit[k]) {
                prob.pinned[k] = 1;
                prob.values[k] = slit_value(grid.x(i));
            } else if (grid.on_outer_boundary(i, j) || (extra_pinned && (*extra_pinned)[k])) {
                prob.pinned[k] = 1;
                prob.values[k] = boundary(grid.x(i), grid.y(j));
            }
        }
    }
    if (source) {
        if (source->grid.nx != grid.nx || source->grid.ny != grid.ny) throw DomainError("source grid mismatch");
        source->validate();
        prob.source = source->values;
    }
    FluxStencil stencil(grid, p);
    // Columns over the slit: every y-face gets h / int y^{-a}, exact for y^{1-a}.
    const double one_minus_a = 1.0 - p.a();
    for (int i = 0; i < grid.nx; ++i) {
        if (!slit[grid.index(i, 0)]) continue;
        for (int j = 0; j + 1 < grid.ny; ++j) {
            const double lo = grid.y(j);
            const double c = grid.h * one_minus_a / (std::pow(lo + grid.h, one_minus_a) - std::pow(lo, one_minus_a));
            stencil.set_face(grid.index(i, j), FluxStencil::Face::north, c);
            stencil.set_face(grid.index(i, j + 1), FluxStencil::Face::south, c);
        }
    }
    if (tip_radius > 0.0) adapt_tip_faces(stencil, geom, p, tip_radius * grid.h);
    return solve_linear(stencil, p, prob, settings);
}

FluxEstimates flux_estimates(const Field& f, int column) {
    if (!f.grid.reflected) throw DomainError("flux extrapolation needs a reflected grid");
    if (column < 0 || column >= f.grid.nx) throw DomainError("flux column outside grid");
    const double a = f.params.a();
    const double h = f.grid.h;
    const double u0 = f(column, 0);
    FluxEstimates e;
    e.row1 = (f(column, 1) - u0) * (1.0 - a) / std::pow(h, 1.0 - a);
    e.row2 = (f(column, 2) - u0) * (1.0 - a) / std::pow(2.0 * h, 1.0 - a);
    const double q = std::pow(2.0, 1.0 + a);
    e.combined = (q * e.row1 - e.row2) / (q - 1.0);
    return e;
}

double flux_limit(const Field& f, double x) {
    if (f.params.s() >= 0.95) {
        throw DomainError("flux extrapolation is ill-conditioned for s >= 0.95");
    }
    const int column = f.grid.column_of(x);
    if (column < 0) throw DomainError("flux_limit abscissa is not aligned to a grid column");
    return flux_estimates(f, column).combined;
}

}  // namespace slit
