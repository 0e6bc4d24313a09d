#pragma once

#include <map>
#include <vector>

#include "slit/analysis.hpp"
#include "slit/params.hpp"

namespace slit {

/// One perturbation coefficient c^{mu m}_{sigma l}: in the equation indexed by
/// `equation` = (sigma, l) it multiplies the unknown p at `term` = (mu, m).
struct Perturbation {
    XRIndex equation;
    XRIndex term;
    double value = 0.0;
};

/// The graded system for a polynomial P of degree k + 1 in n <= 2 variables:
///
///   A_{sigma l} = (l+1)(l+2+2 sigma_n) p_{sigma,l+1} + 2s(sigma_n+1) p_{sigma+n,l}
///               + sum_i (sigma_i+1)(sigma_i+2) p_{sigma+2i,l-1} + sum c^{mu m}_{sigma l} p_{mu m}
///
/// for every (sigma, l) of grade <= k. The seed p_{mu 0} (|mu| <= k+1) is
/// free data; c couples only to terms of grade <= |sigma| + l.
struct ApproxSystem {
    int k = 0;
    int n = 1;
    Params params;
    std::map<XRIndex, double> rhs;   // A_{sigma l}; missing entries are 0
    std::map<XRIndex, double> seed;  // p_{mu 0}; missing entries are 0
    std::vector<Perturbation> perturbation;

    /// Throws ValidationError naming the first index that breaks the structure condition.
    void check_structure() const;
};

/// Graded elimination: equations in increasing grade, then increasing l,
/// each solved for its leading unknown p_{sigma,l+1}.
PolyXR solve_approx_system(const ApproxSystem& sys);

/// A_{sigma l} recomputed from P by the defining relation.
std::map<XRIndex, double> recompute_rhs(const ApproxSystem& sys, const PolyXR& P);

/// Flat companion with A = 0 and no perturbation: U_a P is a-harmonic off the slit.
PolyXR a_harmonic_companion(int k, const Params& p, const std::map<XRIndex, double>& seed, int n = 1);

}  // namespace slit
