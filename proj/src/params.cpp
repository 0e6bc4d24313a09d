#include "slit/params.hpp"

#include <cmath>
#include <string>

#include "slit/errors.hpp"

namespace slit {

Params Params::from_s(double s) {
    if (!(s > 0.0 && s < 1.0)) {
        throw DomainError("s must lie in (0,1), got " + std::to_string(s));
    }
    return Params(1.0 - 2.0 * s, s);
}

Params Params::from_a(double a) {
    if (!(a > -1.0 && a < 1.0)) {
        throw DomainError("a must lie in (-1,1), got " + std::to_string(a));
    }
    return Params(a, 0.5 * (1.0 - a));
}

}  // namespace slit
