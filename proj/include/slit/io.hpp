#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slit/geometry.hpp"
#include "slit/grid.hpp"
#include "slit/params.hpp"

namespace slit {

/// Field CSV: '#' comment lines (the first ones form the provenance banner),
/// then the header "x,y,value" and one row per node in row-major order.
/// Undefined nodes are written as "nan". A "# grid nx ny h x0 y0 reflected"
/// line records the lattice so a dump can be read back exactly.
void write_field_csv(std::ostream& out, const Field& f, const std::vector<std::string>& banner);

/// Reads a field CSV. Without a grid line the lattice is inferred from the
/// coordinates (reflected when the lowest row sits on y = 0). Any malformed
/// line throws ValidationError naming the line.
Field read_field_csv(std::istream& in, const Params& p);

/// {"mode": "flat"|"curve", "gamma": {"kind": "power", "amplitude": A, "exponent": 1+alpha}, "alpha": alpha}.
/// Flat documents may carry "edge" and "orientation".
SlitGeometry parse_geometry_json(const std::string& text);

/// {"omega": ..., "tol": ..., "max_iter": ...}; missing keys keep `base`.
SolverSettings parse_solver_json(const std::string& text, SolverSettings base = {});

std::string read_text_file(const std::string& path);

}  // namespace slit
