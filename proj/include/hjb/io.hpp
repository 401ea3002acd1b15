#pragma once

#include <iosfwd>
#include <string>

#include "hjb/verifier.hpp"

namespace hjb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Key-value config with [section] headers. Unknown sections or keys are
// rejected; +infinity is spelled `inf`.
struct RunConfig {
    // [problem]
    std::string lagrangian = "quadratic";  // quadratic | quartic
    double potential = 0.0;                // adds potential * |x|^2 to L
    std::string terminal = "abs";          // abs | zero | quadratic | indicator_point
    double target = 0.0;                   // indicator_point location
    double x_lo = -2.0, x_hi = 2.0;
    std::size_t x_count = 201;
    double u_lo = -4.0, u_hi = 4.0;
    std::size_t u_count = 81;

    // [discretization]
    double dt = 0.01;
    double horizon = 1.0;
    std::size_t u_samples = 40;  // m; the velocity search uses 2m+1 points per axis
    double u_max = 0.0;          // 0 -> derived from coercivity
    double p_lo = -3.0, p_hi = 3.0;
    std::size_t p_count = 121;

    // [verification]
    double tol = 0.0;  // 0 -> module default
    std::size_t interior_samples = 120;
    std::size_t boundary_samples = 15;
    bool viability = false;
    std::uint32_t seed = 2024;

    // [output]
    std::string field_csv = "field.csv";
    std::string report_json = "report.json";
    std::string hamiltonian_csv = "hamiltonian.csv";
    std::string trajectory_csv;  // empty -> skip

    std::size_t steps() const;
    BolzaProblem make_problem() const;
    Grid p_grid() const;
    VerifySettings verify_settings() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Long-form CSV, one row per node, header `t,x,V` (x expands to one column
// per spatial axis). 17 significant digits so doubles round-trip exactly.
void write_field_csv(const SampledFunction& field, std::ostream& out);
SampledFunction read_field_csv(std::istream& in);

void write_hamiltonian_csv(const HamiltonianTable& table, std::ostream& out);

void write_trajectory_csv(const TrajectoryPath& path, std::ostream& out);

std::string report_to_json(const CertificateReport& report);
std::string viability_to_json(const ViabilityReport& domain, const PolarReport& polar);

}  // namespace hjb
