#include "slit/approx_system.hpp"

#include <algorithm>
#include <string>

#include "slit/errors.hpp"

namespace slit {

namespace {

std::string describe(const XRIndex& i) {
    return "(mu = (" + std::to_string(i.mu[0]) + "," + std::to_string(i.mu[1]) + "), m = " + std::to_string(i.m) + ")";
}

bool valid_index(const XRIndex& i, int n) {
    return i.mu[0] >= 0 && i.mu[1] >= 0 && i.m >= 0 && (n == 2 || i.mu[0] == 0);
}

// Equations sorted by (grade asc, l asc).
std::vector<XRIndex> equation_order(int n, int k) {
    std::vector<XRIndex> eqs = PolyXR::indices(n, k);
    std::stable_sort(eqs.begin(), eqs.end(), [](const XRIndex& a, const XRIndex& b) {
        if (a.grade() != b.grade()) return a.grade() < b.grade();
        return a.m < b.m;
    });
    return eqs;
}

// Sum of every term of the relation except the leading (l+1)(l+2+2 sigma_n) p_{sigma,l+1}.
double lower_terms(const ApproxSystem& sys, const XRIndex& eq, const PolyXR& P,
                   const std::multimap<XRIndex, const Perturbation*>& by_equation) {
    const double s = sys.params.s();
    const int l = eq.m;
    const int sn = eq.mu[1];
    double acc = 2.0 * s * (sn + 1) * P.get({{eq.mu[0], sn + 1}, l});
    if (l >= 1) {
        for (int i = (sys.n == 2 ? 0 : 1); i < 2; ++i) {
            XRIndex t{eq.mu, l - 1};
            t.mu[static_cast<std::size_t>(i)] += 2;
            const int si = eq.mu[static_cast<std::size_t>(i)];
            acc += (si + 1.0) * (si + 2.0) * P.get(t);
        }
    }
    const auto range = by_equation.equal_range(eq);
    for (auto it = range.first; it != range.second; ++it) acc += it->second->value * P.get(it->second->term);
    return acc;
}

double leading_factor(const XRIndex& eq) { return (eq.m + 1.0) * (eq.m + 2.0 + 2.0 * eq.mu[1]); }

std::multimap<XRIndex, const Perturbation*> index_perturbation(const ApproxSystem& sys) {
    std::multimap<XRIndex, const Perturbation*> out;
    for (const Perturbation& c : sys.perturbation) out.emplace(c.equation, &c);
    return out;
}

}  // namespace

void ApproxSystem::check_structure() const {
    if (n != 1 && n != 2) throw ValidationError("approximating systems support n = 1 or 2");
    if (k < 0) throw ValidationError("degree k must be non-negative");
    for (const auto& [idx, v] : rhs) {
        if (!valid_index(idx, n) || idx.grade() > k) throw ValidationError("right-hand side index " + describe(idx) + " outside grades <= k");
    }
    for (const auto& [idx, v] : seed) {
        if (!valid_index(idx, n) || idx.m != 0 || idx.grade() > k + 1) {
            throw ValidationError("seed index " + describe(idx) + " is not a p_{mu 0} of grade <= k+1");
        }
    }
    for (const Perturbation& c : perturbation) {
        if (!valid_index(c.equation, n) || !valid_index(c.term, n) || c.equation.grade() > k ||
            c.term.grade() > c.equation.grade()) {
            throw ValidationError("perturbation c^{" + describe(c.term) + "}_{" + describe(c.equation) +
                                  "} violates |mu| + m <= |sigma| + l <= k");
        }
    }
}

PolyXR solve_approx_system(const ApproxSystem& sys) {
    sys.check_structure();
    PolyXR P(sys.n, sys.k + 1);
    for (const XRIndex& idx : PolyXR::indices(sys.n, sys.k + 1)) {
        if (idx.m == 0) {
            const auto it = sys.seed.find(idx);
            P.set(idx, it == sys.seed.end() ? 0.0 : it->second);
        }
    }
    const auto by_equation = index_perturbation(sys);
    for (const XRIndex& eq : equation_order(sys.n, sys.k)) {
        const auto it = sys.rhs.find(eq);
        const double a = it == sys.rhs.end() ? 0.0 : it->second;
        P.set({eq.mu, eq.m + 1}, (a - lower_terms(sys, eq, P, by_equation)) / leading_factor(eq));
    }
    return P;
}

std::map<XRIndex, double> recompute_rhs(const ApproxSystem& sys, const PolyXR& P) {
    sys.check_structure();
    const auto by_equation = index_perturbation(sys);
    std::map<XRIndex, double> out;
    for (const XRIndex& eq : equation_order(sys.n, sys.k)) {
        out[eq] = leading_factor(eq) * P.get({eq.mu, eq.m + 1}) + lower_terms(sys, eq, P, by_equation);
    }
    return out;
}

PolyXR a_harmonic_companion(int k, const Params& p, const std::map<XRIndex, double>& seed, int n) {
    ApproxSystem sys{k, n, p, {}, seed, {}};
    return solve_approx_system(sys);
}

}  // namespace slit
