#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "hjb/transform.hpp"

namespace hjb {

struct ValidationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutOfDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class LagrangianKind { Quadratic, Quartic, CustomSampled, Custom };

// Running cost L(x,u) >= 0, convex in u per slice, with an attached
// coercivity witness. Quadratic is |u|^2/2 + potential(x), quartic is
// |u|^4/4 + potential(x).
class LagrangianModel {
public:
    using Potential = std::function<double(const Vec& x)>;

    static LagrangianModel quadratic(Grid x_box, Grid u_box, Potential potential = nullptr);
    static LagrangianModel quartic(Grid x_box, Grid u_box, Potential potential = nullptr);
    static LagrangianModel custom(Grid x_box, Grid u_box, LagrangianEval eval,
                                  CoercivityWitness theta, bool x_independent = false);
    static LagrangianModel custom_sampled(Grid x_box, Grid u_box, SampledFunction samples,
                                          CoercivityWitness theta, bool x_independent = false);

    LagrangianKind kind() const { return kind_; }
    const Grid& x_box() const { return x_box_; }
    const Grid& u_box() const { return u_box_; }
    const CoercivityWitness& theta() const { return theta_; }
    bool x_independent() const { return x_independent_; }

    double operator()(const Vec& x, const Vec& u) const { return eval_(x, u); }
    LagrangianEval eval() const { return eval_; }

private:
    LagrangianModel() = default;
    LagrangianKind kind_ = LagrangianKind::Custom;
    Grid x_box_;
    Grid u_box_;
    LagrangianEval eval_;
    CoercivityWitness theta_;
    bool x_independent_ = false;
};

enum class TerminalKind { Analytic, Sampled, IndicatorPoint, IndicatorSet };

// Lower-semicontinuous terminal cost phi >= 0, extended-real.
class TerminalCost {
public:
    static TerminalCost analytic(std::function<double(const Vec&)> f);
    static TerminalCost sampled(SampledFunction values);
    static TerminalCost indicator_point(const Grid& x_grid, const Vec& z);
    static TerminalCost indicator_set(const Grid& x_grid, std::vector<std::size_t> nodes);

    TerminalKind kind() const { return kind_; }
    double operator()(const Vec& x) const { return eval_(x); }

    // Values tabulated on a grid (indicator kinds snap; sampled kinds must
    // share the grid; analytic kinds evaluate).
    SampledFunction tabulate(const Grid& x_grid) const;

private:
    TerminalCost() = default;
    TerminalKind kind_ = TerminalKind::Analytic;
    std::function<double(const Vec&)> eval_;
    std::optional<SampledFunction> samples_;
};

// Piecewise-linear trajectory on a uniform time step.
struct TrajectoryPath {
    double t_start = 0.0;
    double step = 0.0;  // h > 0
    std::vector<Vec> nodes;

    double t_end() const { return t_start + step * static_cast<double>(nodes.size() - 1); }
    Vec velocity(std::size_t k) const {
        Vec v = nodes[k + 1] - nodes[k];
        v *= 1.0 / step;
        return v;
    }
};

// Immutable validated Bolza problem instance.
class BolzaProblem {
public:
    BolzaProblem(LagrangianModel lagrangian, TerminalCost terminal,
                 CoercivityReport coercivity = {});

    const LagrangianModel& lagrangian() const { return L_; }
    const TerminalCost& terminal() const { return phi_; }
    const Grid& x_box() const { return L_.x_box(); }
    const Grid& u_box() const { return L_.u_box(); }
    const CoercivityReport& coercivity_report() const { return coercivity_; }

private:
    LagrangianModel L_;
    TerminalCost phi_;
    CoercivityReport coercivity_;
};

// Validates all invariants (nonnegativity, per-slice convexity in u,
// coercivity) and returns the immutable handle. Throws ValidationFailed
// naming the violated invariant.
BolzaProblem build_problem(LagrangianModel lagrangian, TerminalCost terminal);

// Lagrange-problem reduction: indicator cost that is 0 at the grid node
// nearest to z (tie -> lowest index) and +inf elsewhere.
TerminalCost lagrange_reduction(const Grid& x_grid, const Vec& z);

// Left-endpoint quadrature of the Bolza action along a path:
// sum_k h L(y_k, u_k) + phi(y_end), saturating at +inf.
double eval_action(const TrajectoryPath& path, const BolzaProblem& problem);

}  // namespace hjb
