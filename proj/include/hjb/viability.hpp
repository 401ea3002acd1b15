#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hjb/nonsmooth.hpp"
#include "hjb/problem.hpp"
#include "hjb/transform.hpp"

namespace hjb {

struct EmptyValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Escaped : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Set-valued velocity map with support-function queries. Either a direct
// sample generator (analytic fields) or the space-time-cost map of a Bolza
// problem, G(t,x,r) = {(-1, u, -L(x,u) - rho) : rho >= 0}.
class VelocityMap {
public:
    using Sampler = std::function<std::vector<Vec>(const Vec&)>;

    static VelocityMap analytic(Sampler samples, double truncation_radius);
    static VelocityMap bolza_epigraph(const LagrangianModel& L, const HamiltonianTable& H,
                                      double truncation_radius);

    double truncation_radius() const { return radius_; }
    bool is_epigraph_map() const { return static_cast<bool>(lagrangian_); }

    // G(y) intersected with the closed ball of radius r (r <= truncation radius)
    std::vector<Vec> samples(const Vec& y, double r) const;
    std::vector<Vec> samples(const Vec& y) const { return samples(y, radius_); }

    // raw support function sup_{g in G(y)} <p, g>
    double support(const Vec& y, const Vec& p) const;

    // epigraph-map support in graph coordinates (p_t, p_x, q): the finite
    // branch lives at q < 0 where sigma = -p_t + |q| H(x, p_x/|q|); q = 0
    // forces p_x = 0 (else +inf) and q > 0 is +inf outright.
    double sigma(const Vec& y, const Vec& p) const;

private:
    VelocityMap() = default;

    Sampler sampler_;
    double radius_ = 1.0;
    std::shared_ptr<const LagrangianModel> lagrangian_;
    std::shared_ptr<const HamiltonianTable> hamiltonian_;
};

struct ViabilityPointReport {
    Vec x;
    double best_ratio = kPlusInfinity;  // min over (u, h) of dist(x + h u, K)/h
    Vec best_u;
    bool pass = false;
};

struct ViabilityReport {
    bool pass = false;
    std::vector<ViabilityPointReport> points;
};

ViabilityReport check_viability_domain(const DiscreteSet& K, const VelocityMap& G,
                                       const std::vector<Vec>& points, double tol);

struct PolarReport {
    bool pass = false;
    double worst = -kPlusInfinity;  // max over polar p of inf_u <p, u>
    Vec worst_p;
    std::size_t polar_count = 0;
};

PolarReport polar_condition(const DiscreteSet& K, const VelocityMap& G, const Vec& x,
                            const std::vector<Vec>& p_sample, double tol);

struct DescentStep {
    double h = 0.0;
    Vec u_h;
    Vec x_h;
    Vec p_h;
    double g = 0.0;      // = dist(x + h G(x), K)^2 / 2
    double ratio = 0.0;  // = dist(x + h u_h, K)/h
    bool polar_normal_ok = true;    // p_h against [T_K(x_h)]^-
    bool support_touch_ok = true;   // sigma(x, -p_h) = <-p_h, u_h>
};

struct DescentTrace {
    Vec base;
    std::vector<DescentStep> steps;
    double h_eps = 0.0;  // largest h whose whole tail meets the g(h) bound
    bool pass = false;
};

DescentTrace distance_descent(const DiscreteSet& K, const VelocityMap& G, const Vec& x,
                              double R, const std::vector<double>& h_grid, double eps,
                              double tol = 0.1);

struct EulerRun {
    TrajectoryPath path;
    double max_pre_projection = 0.0;       // worst dist before projecting back
    double max_pre_projection_ratio = 0.0; // ... divided by h^2
};

EulerRun viable_euler(const DiscreteSet& K, const VelocityMap& G, const Vec& x0, double h,
                      double horizon, double tol_escape = 0.1);

VelocityMap epigraph_velocity_map(const LagrangianModel& L, const HamiltonianTable& H, double R);

double usc_margin(const HamiltonianTable& H, const Vec& x, double eps);

}  // namespace hjb
