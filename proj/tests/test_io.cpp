#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hjb/io.hpp"

using namespace hjb;

TEST_CASE("parse_config reads sections and applies defaults") {
    std::istringstream in(R"(
# benchmark: phi = |y|
[problem]
lagrangian = quadratic
terminal = "abs"
x_lo = -3
x_hi = 3
x_count = 301

[discretization]
dt = 0.02
horizon = 1.0
u_samples = 40

[verification]
tol = 0.4
viability = false
)");
    RunConfig cfg = parse_config(in);
    CHECK(cfg.lagrangian == "quadratic");
    CHECK(cfg.terminal == "abs");
    CHECK(cfg.x_count == 301);
    CHECK(cfg.dt == 0.02);
    CHECK(cfg.steps() == 50);
    CHECK(cfg.tol == 0.4);
    CHECK(cfg.u_count == 81);           // untouched default
    CHECK(cfg.field_csv == "field.csv");
    auto problem = cfg.make_problem();
    CHECK(problem.x_box().axis(0).count == 301);
}

TEST_CASE("parse_config diagnostics name the line and key") {
    auto expect = [](const char* text, const char* needle) {
        std::istringstream in(text);
        try {
            parse_config(in);
            FAIL("expected ConfigError for: " << text);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect("[problem]\nflux = 3\n", "unknown key 'problem.flux'");
    expect("[warp]\n", "unknown section");
    expect("dt = 0.1\n", "outside any section");
    expect("[problem]\nx_lo -3\n", "key = value");
    expect("[problem]\nx_lo = -3\nx_lo = 2\n", "duplicate key");
    expect("[discretization]\ndt = soon\n", "line 2");
    expect("[verification]\nviability = maybe\n", "true or false");
}

TEST_CASE("parse_config accepts inf and rejects bad counts") {
    std::istringstream in("[discretization]\nu_max = inf\n");
    CHECK(is_infinite(parse_config(in).u_max));
    std::istringstream bad("[problem]\nx_count = 2.5\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("field CSV round-trips nodewise exactly") {
    Grid g{{make_axis(0.0, 1.0, 11), make_axis(-2.0, 2.0, 17)}};
    auto V = SampledFunction::from_callable(g, [](const Vec& z) {
        if (z[1] > 1.9) return kPlusInfinity;  // exercise the inf spelling
        return std::sin(3.0 * z[0]) * std::exp(z[1]) / 7.0;
    });

    std::ostringstream out;
    write_field_csv(V, out);
    std::istringstream back(out.str());
    SampledFunction W = read_field_csv(back);

    REQUIRE(W.grid().size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (is_infinite(V[i])) CHECK(is_infinite(W[i]));
        else CHECK(W[i] == V[i]);  // exact: 17 significant digits
    }

    // header and row count
    std::istringstream again(out.str());
    std::string header;
    std::getline(again, header);
    CHECK(header == "t,x,V");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(again, line)) ++rows;
    CHECK(rows == g.size());
}

TEST_CASE("field CSV export is deterministic") {
    Grid g{{make_axis(0.0, 1.0, 6), make_axis(-1.0, 1.0, 9)}};
    auto V = SampledFunction::from_callable(
        g, [](const Vec& z) { return z[0] * z[0] - 0.3 * z[1]; });
    std::ostringstream a, b;
    write_field_csv(V, a);
    write_field_csv(V, b);
    CHECK(a.str() == b.str());
}

TEST_CASE("trajectory CSV lists t and the node coordinates") {
    TrajectoryPath path;
    path.t_start = 0.0;
    path.step = 0.25;
    path.nodes = {Vec{1.0}, Vec{0.5}, Vec{0.25}};
    std::ostringstream out;
    write_trajectory_csv(path, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x");
    std::getline(in, line);
    CHECK(line == "0,1");
    std::getline(in, line);
    CHECK(line == "0.25,0.5");
}

TEST_CASE("report JSON carries the fixed check schema") {
    CertificateReport report;
    CheckResult c;
    c.name = "hj_equation";
    c.verdict = Verdict::Pass;
    c.worst_residual = 0.125;
    c.witness = Vec{0.5, -0.25};
    report.checks.push_back(c);
    report.conclusion = "consistent with W = V (uniqueness class)";
    report.tol = 0.4;

    std::string j = report_to_json(report);
    CHECK(j.find("\"checks\"") != std::string::npos);
    CHECK(j.find("\"name\": \"hj_equation\"") != std::string::npos);
    CHECK(j.find("\"verdict\": \"PASS\"") != std::string::npos);
    CHECK(j.find("\"worst_residual\": 0.125") != std::string::npos);
    CHECK(j.find("\"witness\"") != std::string::npos);
    CHECK(j == report_to_json(report));  // byte-stable
}
