#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hjb/io.hpp"
#include "hjb/parallel.hpp"

namespace fs = std::filesystem;
using namespace hjb;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    double tol = -1.0;  // < 0 -> keep config value
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "run configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--threads", opts.threads, "worker thread count");
    cmd->add_option("--tol", opts.tol, "verification tolerance override");
}

RunConfig load(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
    if (opts.threads >= 1) set_thread_count(opts.threads);
    if (opts.tol >= 0.0) cfg.tol = opts.tol;
    fs::create_directories(opts.out_dir);
    return cfg;
}

std::ofstream open_out(const CommonOpts& opts, const std::string& name) {
    fs::path p = fs::path(opts.out_dir) / name;
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

HamiltonianTable make_table(const RunConfig& cfg, const BolzaProblem& problem) {
    return hamiltonian_table(problem.lagrangian().eval(), problem.x_box(), problem.u_box(),
                             cfg.p_grid(), &problem.lagrangian().theta());
}

VelocitySearchBox search_box(const RunConfig& cfg, const BolzaProblem& problem) {
    if (cfg.u_max > 0.0 && !is_infinite(cfg.u_max))
        return VelocitySearchBox{cfg.u_max, cfg.u_samples, "config override"};
    VelocitySearchBox box = derive_search_box(problem, cfg.dt);
    box.m = cfg.u_samples;
    return box;
}

int run_conjugate(const CommonOpts& opts) {
    RunConfig cfg = load(opts);
    auto problem = cfg.make_problem();
    auto H = make_table(cfg, problem);
    auto out = open_out(opts, cfg.hamiltonian_csv);
    write_hamiltonian_csv(H, out);
    std::cout << "wrote " << cfg.hamiltonian_csv << " (" << H.x_grid().size() << " x "
              << H.p_grid().size() << " nodes)\n";
    return 0;
}

int run_solve(const CommonOpts& opts) {
    RunConfig cfg = load(opts);
    auto problem = cfg.make_problem();
    auto box = search_box(cfg, problem);
    ValueField V = solve_dp(problem, cfg.dt, cfg.steps(), problem.x_box(), box);
    {
        auto out = open_out(opts, cfg.field_csv);
        write_field_csv(V.field(), out);
    }
    std::cout << "wrote " << cfg.field_csv << " (" << V.field().size() << " rows)\n";
    if (!cfg.trajectory_csv.empty()) {
        auto path = reconstruct_trajectory(V, problem, box, cfg.horizon, Vec{cfg.target});
        auto out = open_out(opts, cfg.trajectory_csv);
        write_trajectory_csv(path, out);
        std::cout << "wrote " << cfg.trajectory_csv << "\n";
    }
    return 0;
}

int run_verify(const CommonOpts& opts, const std::string& candidate_csv) {
    RunConfig cfg = load(opts);
    auto problem = cfg.make_problem();
    auto box = search_box(cfg, problem);
    auto H = make_table(cfg, problem);

    ValueField candidate(cfg.dt, cfg.steps(), problem.x_box(),
                         Provenance::Candidate);
    if (candidate_csv.empty()) {
        candidate = solve_dp(problem, cfg.dt, cfg.steps(), problem.x_box(), box);
    } else {
        std::ifstream in(candidate_csv);
        if (!in) throw std::runtime_error("cannot read " + candidate_csv);
        SampledFunction W = read_field_csv(in);
        const Grid& g = W.grid();
        if (g.dim() != problem.x_box().dim() + 1)
            throw GridMismatch("candidate field dimension does not match the problem");
        std::size_t steps = g.axis(0).count - 1;
        std::vector<Axis> xa;
        for (std::size_t a = 1; a < g.dim(); ++a) xa.push_back(g.axis(a));
        candidate = ValueField(g.axis(0).step(), steps, Grid(xa), Provenance::Candidate);
        candidate.field() = W;
    }

    auto report = run_certificate(problem, candidate, H, cfg.verify_settings());
    auto out = open_out(opts, cfg.report_json);
    out << report_to_json(report);
    for (const auto& c : report.checks)
        std::cout << c.name << ": " << to_string(c.verdict) << " (worst " << c.worst_residual
                  << ")\n";
    std::cout << report.conclusion << "\n";
    return report.any_failed() ? 2 : 0;
}

int run_compare(const CommonOpts& opts, const std::string& a_csv, const std::string& b_csv,
                double tol) {
    if (opts.threads >= 1) set_thread_count(opts.threads);
    std::ifstream a(a_csv), b(b_csv);
    if (!a) throw std::runtime_error("cannot read " + a_csv);
    if (!b) throw std::runtime_error("cannot read " + b_csv);
    SampledFunction A = read_field_csv(a), B = read_field_csv(b);
    auto r = compare_fields(A, B, FieldRelation::Eq, tol);
    std::cout << "max_abs_diff = " << r.worst_residual << " (tol " << tol << "): "
              << to_string(r.verdict) << "\n";
    return r.verdict == Verdict::Pass ? 0 : 2;
}

int run_viability(const CommonOpts& opts) {
    RunConfig cfg = load(opts);
    auto problem = cfg.make_problem();
    auto box = search_box(cfg, problem);
    auto H = make_table(cfg, problem);
    ValueField V = solve_dp(problem, cfg.dt, cfg.steps(), problem.x_box(), box);

    DiscreteSet K = epigraph(V.field(), GraphSide::Epi);
    VelocityMap G = epigraph_velocity_map(problem.lagrangian(), H, 2.0 * box.u_max);

    // sample points on the graph of the solved field, away from t = 0
    std::vector<Vec> pts;
    auto interior = interior_sample_points(V.field(), 10.0 * cfg.dt, 16, cfg.seed);
    for (const Vec& z : interior) {
        Vec q(z.size() + 1);
        for (std::size_t a = 0; a < z.size(); ++a) q[a] = z[a];
        q[z.size()] = V.field().interp(z);
        pts.push_back(q);
    }

    auto domain = check_viability_domain(K, G, pts, 0.05);
    PolarReport polar;
    polar.pass = true;
    if (!pts.empty()) {
        auto p_dirs = unit_directions(pts.front().size(), 32);
        polar = polar_condition(K, G, pts.front(), p_dirs, 0.05);
    }
    auto out = open_out(opts, "viability.json");
    out << viability_to_json(domain, polar);
    std::cout << "domain: " << (domain.pass ? "PASS" : "FAIL")
              << ", polar: " << (polar.pass ? "PASS" : "FAIL") << "\n";
    return domain.pass && polar.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"value functions of Bolza problems: conjugation, dynamic "
                 "programming, and viscosity/viability verification"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string candidate_csv, a_csv, b_csv;
    double compare_tol = 1e-12;

    auto* conjugate = app.add_subcommand("conjugate", "emit the Hamiltonian table CSV");
    add_common(conjugate, opts);

    auto* solve = app.add_subcommand("solve", "solve the dynamic program and emit the field CSV");
    add_common(solve, opts);

    auto* verify = app.add_subcommand("verify", "run the certificate battery, emit JSON");
    add_common(verify, opts);
    verify->add_option("--field", candidate_csv,
                       "candidate field CSV (default: solve the configured problem)");

    auto* compare = app.add_subcommand("compare", "diff two field CSVs");
    add_common(compare, opts, false);
    compare->add_option("a", a_csv, "first field CSV")->required();
    compare->add_option("b", b_csv, "second field CSV")->required();
    compare->add_option("--eq-tol", compare_tol, "equality tolerance");

    auto* viability = app.add_subcommand("viability", "epigraph viability checks, emit JSON");
    add_common(viability, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (conjugate->parsed()) return run_conjugate(opts);
        if (solve->parsed()) return run_solve(opts);
        if (verify->parsed()) return run_verify(opts, candidate_csv);
        if (compare->parsed()) return run_compare(opts, a_csv, b_csv, compare_tol);
        return run_viability(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
