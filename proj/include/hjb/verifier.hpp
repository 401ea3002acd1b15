#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjb/nonsmooth.hpp"
#include "hjb/value.hpp"
#include "hjb/viability.hpp"

namespace hjb {

struct OutOfTable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        default: return "INCONCLUSIVE";
    }
}

struct CheckResult {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    double worst_residual = 0.0;
    Vec witness;                   // point of the worst residual / violation
    double vacuous_fraction = 0.0; // points with empty differential samples
    std::string note;
};

// Hamilton-Jacobi inequality modes on a space-time candidate W(t,x):
// Super checks p_t + H(x,-p_x) >= -tol over the subdifferential, Sub the
// <= side over the superdifferential, Equation demands |residual| <= tol
// over the subdifferential, and SubLsc is the <= inequality taken over the
// subdifferential (the lower-semicontinuous subsolution form).
enum class HjMode { Super, Sub, Equation, SubLsc };

struct HjSettings {
    double tol = 0.2;
    double sample_radius = 0.0;    // 0 -> 3 * max grid step
    double delta = 0.0;            // 0 -> 0.5 * (dt + dx)
    double p_window = 0.3;         // half-width of the p-grid around the FD gradient
    std::size_t p_nodes = 31;      // per axis
};

CheckResult check_hj(const SampledFunction& W, const HamiltonianTable& H, HjMode mode,
                     const std::vector<Vec>& points, const HjSettings& settings);

// liminf of W(h, y) as (h, y) -> (0+, x) against the terminal cost.
CheckResult check_initial(const SampledFunction& W, const TerminalCost& phi,
                          const std::vector<Vec>& boundary_points,
                          const std::vector<double>& h_sequence, double tol);

struct TechnicalSettings {
    double tol = 0.5;            // dive guard for the (0,0) direction profile
    std::size_t u_samples = 9;   // per axis, for the (-1,u) finiteness search
    double u_max = 2.0;
};

// the two technical conditions: no profile dive in the null direction and
// a finite contingent quotient in some backward direction (-1, u)
CheckResult check_technical(const SampledFunction& W, const std::vector<Vec>& points,
                            const TechnicalSettings& settings = {});

enum class FieldRelation { Geq, Leq, Eq };

CheckResult compare_fields(const SampledFunction& W, const SampledFunction& V_ref,
                           FieldRelation relation, double tol);

struct CertificateReport {
    std::vector<CheckResult> checks;
    std::string conclusion;
    double tol = 0.0;
    double lipschitz_estimate = 0.0;

    bool all_passed() const {
        for (const auto& c : checks)
            if (c.verdict != Verdict::Pass) return false;
        return true;
    }
    bool any_failed() const {
        for (const auto& c : checks)
            if (c.verdict == Verdict::Fail) return true;
        return false;
    }
};

struct VerifySettings {
    double tol = 0.0;              // residual tolerance; 0 -> 10 (dt + dx)
    double compare_tol = 0.05;
    double t_min = 0.0;            // 0 -> 10 dt
    std::size_t interior_samples = 120;
    std::size_t boundary_samples = 15;
    std::size_t technical_samples = 20;
    bool run_viability = false;
    double viability_tol = 0.05;
    std::uint32_t seed = 2024;
};

// Runs the full battery on a candidate: the four HJ modes, the initial
// condition, the technical conditions, optionally the epigraph viability
// check, and a nodewise comparison against a freshly computed DP field.
CertificateReport run_certificate(const BolzaProblem& problem, const ValueField& candidate,
                                  const HamiltonianTable& H, const VerifySettings& settings = {});

// Deterministic interior sample points (t >= t_min, away from kinks
// detected by large spatial second differences).
std::vector<Vec> interior_sample_points(const SampledFunction& W, double t_min,
                                        std::size_t count, std::uint32_t seed);

}  // namespace hjb
