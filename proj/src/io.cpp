#include "slit/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "slit/errors.hpp"

namespace slit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, std::size_t line) {
    const std::string t = trim(token);
    if (t == "nan") return std::nan("");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) {
        throw ValidationError("line " + std::to_string(line) + ": '" + t + "' is not a number");
    }
    return v;
}

int index_on_lattice(double v, double origin, double h, std::size_t line) {
    const double k = (v - origin) / h;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-6) throw ValidationError("line " + std::to_string(line) + ": coordinate off the lattice");
    return static_cast<int>(r);
}

}  // namespace

void write_field_csv(std::ostream& out, const Field& f, const std::vector<std::string>& banner) {
    for (const std::string& b : banner) out << "# " << b << '\n';
    const Grid2D& g = f.grid;
    out << std::setprecision(17) << "# grid " << g.nx << ' ' << g.ny << ' ' << g.h << ' ' << g.x0 << ' ' << g.y0 << ' '
        << (g.reflected ? 1 : 0) << '\n';
    out << "x,y,value\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            out << g.x(i) << ',' << g.y(j) << ',';
            if (f.is_defined(k) && std::isfinite(f.values[k])) {
                out << f.values[k];
            } else {
                out << "nan";
            }
            out << '\n';
        }
    }
}

Field read_field_csv(std::istream& in, const Params& p) {
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    bool have_grid = false;
    Grid2D grid;
    std::vector<std::array<double, 3>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            std::istringstream ss(t.substr(1));
            std::string key;
            ss >> key;
            if (key == "grid") {
                int refl = 0;
                if (!(ss >> grid.nx >> grid.ny >> grid.h >> grid.x0 >> grid.y0 >> refl)) {
                    throw ValidationError("line " + std::to_string(lineno) + ": malformed grid line");
                }
                grid.reflected = refl != 0;
                have_grid = true;
            }
            continue;
        }
        if (!header) {
            if (t != "x,y,value") throw ValidationError("line " + std::to_string(lineno) + ": expected header x,y,value");
            header = true;
            continue;
        }
        std::array<std::string, 3> parts;
        std::size_t start = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t comma = t.find(',', start);
            if ((c < 2) == (comma == std::string::npos)) {
                throw ValidationError("line " + std::to_string(lineno) + ": expected three comma-separated values");
            }
            parts[c] = t.substr(start, c < 2 ? comma - start : std::string::npos);
            start = comma + 1;
        }
        const double x = parse_number(parts[0], lineno);
        const double y = parse_number(parts[1], lineno);
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw ValidationError("line " + std::to_string(lineno) + ": non-finite coordinate");
        }
        rows.push_back({x, y, parse_number(parts[2], lineno)});
    }
    if (!header) throw ValidationError("missing header x,y,value");
    if (rows.empty()) throw ValidationError("field CSV holds no rows");

    if (!have_grid) {
        std::vector<double> xs, ys;
        for (const auto& r : rows) {
            xs.push_back(r[0]);
            ys.push_back(r[1]);
        }
        auto uniq = [](std::vector<double>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                    v.end());
        };
        uniq(xs);
        uniq(ys);
        if (xs.size() < 2 || ys.size() < 2) throw ValidationError("field CSV needs at least two rows and columns");
        grid.nx = static_cast<int>(xs.size());
        grid.ny = static_cast<int>(ys.size());
        grid.h = xs[1] - xs[0];
        grid.x0 = xs.front();
        grid.y0 = ys.front();
        grid.reflected = std::abs(ys.front()) < 1e-12;
        if (std::abs(ys[1] - ys[0] - grid.h) > 1e-9 * grid.h) throw ValidationError("field CSV cells are not square");
    }
    try {
        grid.validate();
    } catch (const std::exception& e) {
        throw ValidationError(std::string("field CSV grid: ") + e.what());
    }
    if (rows.size() != grid.size()) {
        throw ValidationError("field CSV has " + std::to_string(rows.size()) + " rows, grid needs " +
                              std::to_string(grid.size()));
    }
    Field f(grid, p);
    std::vector<std::uint8_t> seen(grid.size(), 0);
    f.defined.assign(grid.size(), 1);
    bool all_defined = true;
    for (std::size_t n = 0; n < rows.size(); ++n) {
        const int i = index_on_lattice(rows[n][0], grid.x0, grid.h, n + 1);
        const int j = index_on_lattice(rows[n][1], grid.y0, grid.h, n + 1);
        if (i < 0 || i >= grid.nx || j < 0 || j >= grid.ny) throw ValidationError("row " + std::to_string(n + 1) + " lies outside the grid");
        const std::size_t k = grid.index(i, j);
        if (seen[k]) throw ValidationError("row " + std::to_string(n + 1) + " repeats a node");
        seen[k] = 1;
        f.values[k] = rows[n][2];
        if (!std::isfinite(rows[n][2])) {
            f.defined[k] = 0;
            all_defined = false;
        }
    }
    if (all_defined) f.defined.clear();
    return f;
}

SlitGeometry parse_geometry_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("geometry JSON: ") + e.what());
    }
    try {
        const std::string mode = doc.at("mode").get<std::string>();
        if (mode == "flat") {
            SlitGeometry g = SlitGeometry::flat(doc.value("edge", 0.0), doc.value("orientation", 1));
            return g;
        }
        if (mode != "curve") throw ValidationError("geometry mode must be \"flat\" or \"curve\"");
        const auto& gamma = doc.at("gamma");
        if (gamma.value("kind", std::string("power")) != "power") throw ValidationError("only power curves are supported");
        const double amplitude = gamma.at("amplitude").get<double>();
        const double exponent = gamma.at("exponent").get<double>();
        SlitGeometry g = SlitGeometry::power_curve(amplitude, exponent, doc.value("half_width", 1.0));
        g.declare_holder_exponent(doc.value("alpha", std::min(1.0, exponent - 1.0)));
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("geometry JSON: ") + e.what());
    }
}

SolverSettings parse_solver_json(const std::string& text, SolverSettings base) {
    try {
        const nlohmann::json doc = nlohmann::json::parse(text);
        if (doc.contains("omega")) base.omega = doc.at("omega").get<double>();
        if (doc.contains("tol")) base.tol = doc.at("tol").get<double>();
        if (doc.contains("max_iter")) base.max_iter = doc.at("max_iter").get<int>();
        if (doc.contains("method")) {
            const std::string m = doc.at("method").get<std::string>();
            if (m == "sor") {
                base.method = SolverMethod::sor;
            } else if (m == "cg") {
                base.method = SolverMethod::cg;
            } else {
                throw ValidationError("solver method must be \"sor\" or \"cg\"");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("solver JSON: ") + e.what());
    }
    if (!(base.omega > 0.0 && base.omega < 2.0)) throw ValidationError("omega must lie in (0, 2)");
    if (!(base.tol > 0.0)) throw ValidationError("tol must be positive");
    if (base.max_iter < 0) throw ValidationError("max_iter must be non-negative");
    return base;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace slit
