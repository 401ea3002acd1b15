#include "hjb/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hjb {

namespace {

using nlohmann::ordered_json;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, std::size_t line) {
    if (v == "inf") return kPlusInfinity;
    try {
        std::size_t n = 0;
        double x = std::stod(v, &n);
        if (n != v.size()) bad(line, "trailing characters in number '" + v + "'");
        return x;
    } catch (const std::logic_error&) {
        bad(line, "expected a number, got '" + v + "'");
    }
}

std::size_t parse_count(const std::string& v, std::size_t line) {
    double x = parse_double(v, line);
    if (x < 0 || x != std::floor(x)) bad(line, "expected a nonnegative integer, got '" + v + "'");
    return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true") return true;
    if (v == "false") return false;
    bad(line, "expected true or false, got '" + v + "'");
}

std::string parse_string(const std::string& v, std::size_t line) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    if (v.find('"') != std::string::npos) bad(line, "unterminated string");
    return v;
}

// exact decimal form: 17 significant digits round-trip any double
std::string fmt(double x) {
    if (is_infinite(x)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ordered_json vec_json(const Vec& v) {
    ordered_json a = ordered_json::array();
    for (std::size_t i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ordered_json check_json(const CheckResult& c) {
    return ordered_json{{"name", c.name},
                        {"verdict", to_string(c.verdict)},
                        {"worst_residual", c.worst_residual},
                        {"witness", vec_json(c.witness)}};
}

}  // namespace

std::size_t RunConfig::steps() const {
    if (dt <= 0.0 || horizon <= 0.0) throw ConfigError("dt and horizon must be positive");
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

BolzaProblem RunConfig::make_problem() const {
    Grid xg{{Axis{x_lo, x_hi, x_count}}};
    Grid ug{{Axis{u_lo, u_hi, u_count}}};
    LagrangianModel::Potential pot;
    if (potential != 0.0) {
        double w = potential;
        pot = [w](const Vec& x) { return w * dot(x, x); };
    }
    LagrangianModel L = lagrangian == "quadratic" ? LagrangianModel::quadratic(xg, ug, pot)
                        : lagrangian == "quartic" ? LagrangianModel::quartic(xg, ug, pot)
                        : throw ConfigError("unknown lagrangian kind '" + lagrangian + "'");

    auto phi = [&]() -> TerminalCost {
        if (terminal == "abs")
            return TerminalCost::analytic([](const Vec& y) { return std::abs(y[0]); });
        if (terminal == "zero") return TerminalCost::analytic([](const Vec&) { return 0.0; });
        if (terminal == "quadratic")
            return TerminalCost::analytic([](const Vec& y) { return 0.5 * dot(y, y); });
        if (terminal == "indicator_point") return TerminalCost::indicator_point(xg, Vec{target});
        throw ConfigError("unknown terminal cost '" + terminal + "'");
    }();
    return build_problem(std::move(L), std::move(phi));
}

Grid RunConfig::p_grid() const { return Grid{{Axis{p_lo, p_hi, p_count}}}; }

VerifySettings RunConfig::verify_settings() const {
    VerifySettings s;
    s.tol = tol;
    s.interior_samples = interior_samples;
    s.boundary_samples = boundary_samples;
    s.run_viability = viability;
    s.seed = seed;
    return s;
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen;

    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') bad(lineno, "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known{"problem", "discretization",
                                                     "verification", "output"};
            if (!known.count(section)) bad(lineno, "unknown section [" + section + "]");
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) bad(lineno, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) bad(lineno, "expected key = value");
        if (section.empty()) bad(lineno, "key '" + key + "' outside any section");
        std::string full = section + "." + key;
        if (!seen.insert(full).second) bad(lineno, "duplicate key '" + full + "'");

        if (section == "problem") {
            if (key == "lagrangian") cfg.lagrangian = parse_string(val, lineno);
            else if (key == "potential") cfg.potential = parse_double(val, lineno);
            else if (key == "terminal") cfg.terminal = parse_string(val, lineno);
            else if (key == "target") cfg.target = parse_double(val, lineno);
            else if (key == "x_lo") cfg.x_lo = parse_double(val, lineno);
            else if (key == "x_hi") cfg.x_hi = parse_double(val, lineno);
            else if (key == "x_count") cfg.x_count = parse_count(val, lineno);
            else if (key == "u_lo") cfg.u_lo = parse_double(val, lineno);
            else if (key == "u_hi") cfg.u_hi = parse_double(val, lineno);
            else if (key == "u_count") cfg.u_count = parse_count(val, lineno);
            else bad(lineno, "unknown key '" + full + "'");
        } else if (section == "discretization") {
            if (key == "dt") cfg.dt = parse_double(val, lineno);
            else if (key == "horizon") cfg.horizon = parse_double(val, lineno);
            else if (key == "u_samples") cfg.u_samples = parse_count(val, lineno);
            else if (key == "u_max") cfg.u_max = parse_double(val, lineno);
            else if (key == "p_lo") cfg.p_lo = parse_double(val, lineno);
            else if (key == "p_hi") cfg.p_hi = parse_double(val, lineno);
            else if (key == "p_count") cfg.p_count = parse_count(val, lineno);
            else bad(lineno, "unknown key '" + full + "'");
        } else if (section == "verification") {
            if (key == "tol") cfg.tol = parse_double(val, lineno);
            else if (key == "interior_samples") cfg.interior_samples = parse_count(val, lineno);
            else if (key == "boundary_samples") cfg.boundary_samples = parse_count(val, lineno);
            else if (key == "viability") cfg.viability = parse_bool(val, lineno);
            else if (key == "seed") cfg.seed = static_cast<std::uint32_t>(parse_count(val, lineno));
            else bad(lineno, "unknown key '" + full + "'");
        } else {  // output
            if (key == "field_csv") cfg.field_csv = parse_string(val, lineno);
            else if (key == "report_json") cfg.report_json = parse_string(val, lineno);
            else if (key == "hamiltonian_csv") cfg.hamiltonian_csv = parse_string(val, lineno);
            else if (key == "trajectory_csv") cfg.trajectory_csv = parse_string(val, lineno);
            else bad(lineno, "unknown key '" + full + "'");
        }
    }

    if (cfg.dt <= 0.0) throw ConfigError("discretization.dt must be positive");
    if (cfg.horizon <= 0.0) throw ConfigError("discretization.horizon must be positive");
    if (cfg.x_count < 2 || cfg.u_count < 2 || cfg.p_count < 2)
        throw ConfigError("grid counts must be at least 2");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void write_field_csv(const SampledFunction& field, std::ostream& out) {
    const Grid& g = field.grid();
    out << "t";
    if (g.dim() == 2) out << ",x";
    else
        for (std::size_t a = 1; a < g.dim(); ++a) out << ",x" << a;
    out << ",V\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec z = g.point_flat(i);
        for (std::size_t a = 0; a < g.dim(); ++a) {
            if (a) out << ',';
            out << fmt(z[a]);
        }
        out << ',' << fmt(field[i]) << '\n';
    }
}

SampledFunction read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("field CSV: empty input");
    std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    if (cols < 2) throw ConfigError("field CSV: malformed header '" + line + "'");
    const std::size_t dim = cols - 1;

    std::vector<std::vector<double>> coords(dim);
    std::vector<double> values;
    std::vector<std::set<double>> axes(dim);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::stringstream row(line);
        std::string cell;
        for (std::size_t c = 0; c < cols; ++c) {
            if (!std::getline(row, cell, ','))
                throw ConfigError("field CSV line " + std::to_string(lineno) + ": too few columns");
            double x = parse_double(trim(cell), lineno);
            if (c < dim) {
                coords[c].push_back(x);
                axes[c].insert(x);
            } else {
                values.push_back(x);
            }
        }
    }

    std::vector<Axis> ax(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        if (axes[a].size() < 2)
            throw ConfigError("field CSV: axis " + std::to_string(a) + " has fewer than 2 nodes");
        ax[a] = Axis{*axes[a].begin(), *axes[a].rbegin(), axes[a].size()};
    }
    Grid g(ax);
    if (values.size() != g.size()) throw ConfigError("field CSV: row count does not tile a grid");

    SampledFunction f(g, kPlusInfinity);
    for (std::size_t r = 0; r < values.size(); ++r) {
        Vec z(dim);
        for (std::size_t a = 0; a < dim; ++a) z[a] = coords[a][r];
        f[g.flat(g.nearest(z))] = values[r];
    }
    return f;
}

void write_hamiltonian_csv(const HamiltonianTable& table, std::ostream& out) {
    const Grid& xg = table.x_grid();
    const Grid& pg = table.p_grid();
    out << "x,p,H\n";
    for (std::size_t i = 0; i < xg.size(); ++i) {
        Vec x = xg.point_flat(i);
        for (std::size_t j = 0; j < pg.size(); ++j) {
            Vec p = pg.point_flat(j);
            for (std::size_t a = 0; a < xg.dim(); ++a) out << fmt(x[a]) << ',';
            for (std::size_t a = 0; a < pg.dim(); ++a) out << fmt(p[a]) << ',';
            out << fmt(table.at(i, j)) << '\n';
        }
    }
}

void write_trajectory_csv(const TrajectoryPath& path, std::ostream& out) {
    const std::size_t dim = path.nodes.empty() ? 0 : path.nodes.front().size();
    out << "t";
    if (dim == 1) out << ",x";
    else
        for (std::size_t a = 0; a < dim; ++a) out << ",x" << a + 1;
    out << '\n';
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
        out << fmt(path.t_start + path.step * static_cast<double>(k));
        for (std::size_t a = 0; a < dim; ++a) out << ',' << fmt(path.nodes[k][a]);
        out << '\n';
    }
}

std::string report_to_json(const CertificateReport& report) {
    ordered_json j;
    j["checks"] = ordered_json::array();
    for (const auto& c : report.checks) j["checks"].push_back(check_json(c));
    j["conclusion"] = report.conclusion;
    j["tol"] = report.tol;
    j["lipschitz_estimate"] = report.lipschitz_estimate;
    return j.dump(2) + "\n";
}

std::string viability_to_json(const ViabilityReport& domain, const PolarReport& polar) {
    ordered_json j;
    j["domain"] = ordered_json{{"verdict", domain.pass ? "PASS" : "FAIL"},
                               {"points", ordered_json::array()}};
    for (const auto& p : domain.points)
        j["domain"]["points"].push_back(ordered_json{{"x", vec_json(p.x)},
                                                     {"best_ratio", p.best_ratio},
                                                     {"pass", p.pass}});
    j["polar"] = ordered_json{{"verdict", polar.pass ? "PASS" : "FAIL"},
                              {"worst", polar.worst},
                              {"worst_p", vec_json(polar.worst_p)}};
    return j.dump(2) + "\n";
}

}  // namespace hjb
