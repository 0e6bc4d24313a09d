#include "slit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slit/errors.hpp"

namespace slit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace

SlitGeometry SlitGeometry::flat(double edge, int orientation) {
    if (orientation != 1 && orientation != -1) {
        throw DomainError("flat slit orientation must be +1 or -1");
    }
    SlitGeometry g;
    g.mode_ = GeometryMode::flat;
    g.edge_ = edge;
    g.orientation_ = orientation;
    g.alpha_ = 1.0;
    g.cut_start_ = kInf;
    return g;
}

SlitGeometry SlitGeometry::power_curve(double amplitude, double exponent, double half_width,
                                       int samples_log2) {
    if (!std::isfinite(amplitude)) throw DomainError("curve amplitude must be finite");
    if (!(exponent > 1.0)) throw DomainError("power exponent must exceed 1 (gamma'(0) = 0)");
    if (!(half_width > 0.0)) throw DomainError("sampled half-width must be positive");
    if (samples_log2 < 4 || samples_log2 > 24) throw DomainError("samples_log2 out of range [4,24]");

    SlitGeometry g;
    g.mode_ = GeometryMode::curve;
    g.amplitude_ = amplitude;
    g.exponent_ = exponent;
    g.half_width_ = half_width;
    g.alpha_ = std::min(1.0, exponent - 1.0);

    const std::size_t n = std::size_t{1} << samples_log2;
    g.step_ = 2.0 * half_width / static_cast<double>(n);
    g.samples_.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        g.samples_[k] = g.gamma(-half_width + static_cast<double>(k) * g.step_);
    }

    // The curve is even, so the only nearby cut locus is the symmetry axis on
    // the convex side, starting at the focal point of t = 0.
    if (amplitude == 0.0) {
        g.cut_start_ = kInf;
    } else if (exponent < 2.0) {
        g.cut_start_ = 0.0;
    } else if (exponent == 2.0) {
        g.cut_start_ = 1.0 / (2.0 * std::abs(amplitude));
    } else {
        const double sigma = amplitude > 0 ? 1.0 : -1.0;
        auto splits = [&](double eta) {
            return std::abs(g.foot_point(0.0, sigma * eta).t) > 1e-9;
        };
        double hi = 4.0 * half_width;
        if (!splits(hi)) {
            g.cut_start_ = kInf;
        } else {
            double lo = 0.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (splits(mid) ? hi : lo) = mid;
            }
            g.cut_start_ = hi;
        }
    }
    return g;
}

void SlitGeometry::declare_holder_exponent(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Hoelder exponent must lie in (0,1]");
    if (mode_ == GeometryMode::curve && alpha > std::min(1.0, exponent_ - 1.0) + 1e-12) {
        throw DomainError("declared Hoelder exponent exceeds the regularity of gamma");
    }
    alpha_ = alpha;
}

double SlitGeometry::gamma(double t) const {
    if (mode_ == GeometryMode::flat) return 0.0;
    return amplitude_ * std::pow(std::abs(t), exponent_);
}

double SlitGeometry::dgamma(double t) const {
    if (mode_ == GeometryMode::flat || t == 0.0) return 0.0;
    const double v = amplitude_ * exponent_ * std::pow(std::abs(t), exponent_ - 1.0);
    return t > 0 ? v : -v;
}

double SlitGeometry::d2gamma(double t) const {
    if (mode_ == GeometryMode::flat || amplitude_ == 0.0) return 0.0;
    if (t == 0.0 && exponent_ < 2.0) return amplitude_ > 0 ? kInf : -kInf;
    return amplitude_ * exponent_ * (exponent_ - 1.0) * std::pow(std::abs(t), exponent_ - 2.0);
}

double SlitGeometry::signed_distance(double x) const {
    if (mode_ != GeometryMode::flat) {
        throw DomainError("one-coordinate signed distance requires flat mode");
    }
    return orientation_ * (x - edge_);
}

double SlitGeometry::signed_distance(double xt, double xn) const {
    if (mode_ == GeometryMode::flat) return orientation_ * (xn - edge_);
    return foot_point(xt, xn).distance;
}

// Minimizes |(t, gamma(t)) - (xt, xn)|^2 on [lo, hi] by Newton on the
// stationarity condition, falling back to bisection whenever a step leaves
// the bracket (gamma'' may be infinite at t = 0).
double SlitGeometry::refine_min(double xt, double xn, double lo, double hi) const {
    auto g = [&](double t) { return (t - xt) + (gamma(t) - xn) * dgamma(t); };
    const double glo = g(lo);
    const double ghi = g(hi);
    if (glo >= 0.0) return lo;
    if (ghi <= 0.0) return hi;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double gt = g(t);
        if (gt == 0.0) return t;
        (gt < 0.0 ? lo : hi) = t;
        const double dg = 1.0 + dgamma(t) * dgamma(t) + (gamma(t) - xn) * d2gamma(t);
        double next = t - gt / dg;
        if (!std::isfinite(next) || !(dg > 0.0) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        const double tol = 4.0 * kEps * std::max(std::abs(next), std::abs(t));
        if (std::abs(next - t) <= tol || hi - lo <= tol) return next;
        t = next;
    }
    return t;
}

FootPoint SlitGeometry::foot_point(double xt, double xn) const {
    if (!std::isfinite(xt) || !std::isfinite(xn)) throw DomainError("non-finite query point");
    if (mode_ == GeometryMode::flat) {
        return FootPoint{xt, orientation_ * (xn - edge_), kInf};
    }
    if (std::abs(xt) > half_width_) {
        throw DomainError("query x' = " + std::to_string(xt) + " outside the sampled curve domain [-" +
                          std::to_string(half_width_) + ", " + std::to_string(half_width_) + "]");
    }
    const double vertical = xn - gamma(xt);
    if (vertical == 0.0) return FootPoint{xt, 0.0, kInf};
    const double b = std::abs(vertical);

    // Any nearest point lies within the vertical distance of the query.
    const double lo = std::max(-half_width_, xt - b);
    const double hi = std::min(half_width_, xt + b);
    const std::size_t n = samples_.size() - 1;
    auto index_of = [&](double t) { return (t + half_width_) / step_; };
    std::size_t k0 = static_cast<std::size_t>(std::max(0.0, std::floor(index_of(lo))));
    std::size_t k1 = static_cast<std::size_t>(std::min<double>(n, std::ceil(index_of(hi))));
    if (k1 < k0 + 2) {
        k0 = k0 > 0 ? k0 - 1 : 0;
        k1 = std::min(n, k1 + 1);
    }

    std::vector<double> dist2;
    const std::vector<double> roots = refine_candidates(xt, xn, k0, k1, dist2);
    std::size_t best = 0;
    for (std::size_t c = 1; c < roots.size(); ++c) {
        if (dist2[c] < dist2[best]) best = c;
    }
    double runner_up = kInf;
    for (std::size_t c = 0; c < roots.size(); ++c) {
        if (c != best && std::abs(roots[c] - roots[best]) > 8.0 * kEps * (1.0 + std::abs(roots[best]))) {
            runner_up = std::min(runner_up, std::sqrt(dist2[c]));
        }
    }
    const double dist = std::sqrt(dist2[best]);
    return FootPoint{roots[best], vertical > 0 ? dist : -dist, runner_up - dist};
}

// Refines every discrete local minimum of the squared distance among samples
// k0..k1 and returns the refined parameters with their squared distances.
std::vector<double> SlitGeometry::refine_candidates(double xt, double xn, std::size_t k0,
                                                    std::size_t k1, std::vector<double>& dist2) const {
    auto t_of = [&](std::size_t k) { return -half_width_ + static_cast<double>(k) * step_; };
    auto f_sample = [&](std::size_t k) {
        const double dt = t_of(k) - xt;
        const double dn = samples_[k] - xn;
        return dt * dt + dn * dn;
    };
    auto f_exact = [&](double t) {
        const double dt = t - xt;
        const double dn = gamma(t) - xn;
        return dt * dt + dn * dn;
    };

    std::vector<double> roots;
    double prev = f_sample(k0);
    double cur = prev;
    for (std::size_t k = k0; k <= k1; ++k) {
        const double next = k < k1 ? f_sample(k + 1) : std::numeric_limits<double>::infinity();
        if (cur <= prev && cur <= next) {
            const double blo = t_of(k > k0 ? k - 1 : k0);
            const double bhi = t_of(k < k1 ? k + 1 : k1);
            const double t = refine_min(xt, xn, blo, bhi);
            roots.push_back(t);
            dist2.push_back(f_exact(t));
        }
        prev = cur;
        cur = next;
    }
    return roots;
}

double SlitGeometry::slit_distance(const Point& X) const {
    return std::hypot(signed_distance(X.xt, X.xn), X.y);
}

double SlitGeometry::distance_to_slit(const Point& X) const {
    const double d = signed_distance(X.xt, X.xn);
    return d <= 0.0 ? std::abs(X.y) : std::hypot(d, X.y);
}

double SlitGeometry::cut_locus_distance(double xt, double xn) const {
    if (mode_ == GeometryMode::flat || !std::isfinite(cut_start_)) return kInf;
    const double sigma = amplitude_ > 0 ? 1.0 : -1.0;
    const double along = sigma * xn;
    if (along > cut_start_) return std::abs(xt);
    return std::hypot(xt, along - cut_start_);
}

NormalCurvature SlitGeometry::normal_curvature(double xt, double xn) const {
    if (mode_ == GeometryMode::flat) {
        return NormalCurvature{{0.0, static_cast<double>(orientation_)}, 0.0};
    }
    const FootPoint fp = foot_point(xt, xn);
    if (cut_locus_distance(xt, xn) <= 1e-12 || fp.gap <= 1e-14) {
        throw DomainError("normal/curvature requested on the cut locus (non-unique foot point)");
    }
    const double slope = dgamma(fp.t);
    const double norm = std::sqrt(1.0 + slope * slope);
    NormalCurvature nc;
    nc.normal = {-slope / norm, 1.0 / norm};
    const double k_edge = d2gamma(fp.t) / (norm * norm * norm);
    const double d = fp.distance;
    if (std::isinf(k_edge)) {
        // Focal limit: parallel curves of an infinitely curved point are circles of radius |d|.
        if (d * k_edge >= 0.0) throw DomainError("curvature undefined at an infinitely curved edge point");
        nc.curvature = -1.0 / d;
    } else {
        nc.curvature = k_edge / (1.0 - d * k_edge);
    }
    return nc;
}

double profile_u_a(const SlitGeometry& geom, const Params& p, const Point& X) {
    const double d = geom.signed_distance(X.xt, X.xn);
    const double r = std::hypot(d, X.y);
    const double s = p.s();
    if (d >= 0.0) return std::pow(0.5 * (r + d), s);
    if (X.y == 0.0) return 0.0;
    return std::pow(std::abs(X.y), 2.0 * s) / (std::pow(2.0, s) * std::pow(r - d, s));
}

}  // namespace slit
