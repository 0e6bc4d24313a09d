#pragma once

namespace slit {

/// Exponent pair of the weighted operator: a = 1 - 2s with s in (0,1).
/// Only the two named constructors exist so the pair can never drift apart.
class Params {
public:
    static Params from_s(double s);
    static Params from_a(double a);

    double a() const noexcept { return a_; }
    double s() const noexcept { return s_; }

private:
    Params(double a, double s) : a_(a), s_(s) {}
    double a_;
    double s_;
};

enum class SolverMethod { sor, cg };

/// Iteration controls shared by the linear and obstacle solvers.
/// max_iter == 0 selects 200 * max(nx, ny).
struct SolverSettings {
    double omega = 1.8;
    double tol = 1e-10;
    int max_iter = 0;
    SolverMethod method = SolverMethod::sor;
};

}  // namespace slit
