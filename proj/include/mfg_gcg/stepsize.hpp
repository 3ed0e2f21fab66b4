#pragma once

// Step-size rules for the convex-combination update
//   (mbar, wbar) <- (1 - delta) (mbar, wbar) + delta (m, w).
//
//   QAG            delta = tau^i, smallest i >= 1 with J(delta) <= J(0) - c delta sigma
//   GoldenSection  delta ~ argmin_{[0,1]} J(delta) to interval width kappa
//   Exploitability delta = min(1, sigma / (2 L_f D))
//   Predefined     delta = k2 / (k + k1)

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>

#include "error.hpp"
#include "field_io.hpp"

namespace mfg {

struct QagRule {
    double c = 0.25;
    double tau = 0.75;
    bool operator==(const QagRule&) const = default;
};

struct GoldenSectionRule {
    double kappa = 1e-5;
    bool operator==(const GoldenSectionRule&) const = default;
};

struct ExploitabilityRule {
    double lipschitz = 0.0;  // L_f of the coupling
    bool operator==(const ExploitabilityRule&) const = default;
};

struct PredefinedRule {
    double k1 = 1.0;
    double k2 = 1.0;
    bool operator==(const PredefinedRule&) const = default;
};

using StepRule = std::variant<QagRule, GoldenSectionRule, ExploitabilityRule, PredefinedRule>;

inline void validate(const StepRule& rule, int dim) {
    if (const auto* q = std::get_if<QagRule>(&rule)) {
        const double c_max = dim >= 2 ? 0.5 : 1.0;
        const bool c_ok = dim >= 2 ? (q->c > 0.0 && q->c <= c_max) : (q->c > 0.0 && q->c < c_max);
        if (!c_ok) throw ValidationError("step.c", dim >= 2 ? "must lie in (0, 1/2] for d >= 2" : "must lie in (0, 1)");
        if (!(q->tau > 0.0 && q->tau < 1.0)) throw ValidationError("step.tau", "must lie in (0, 1)");
    } else if (const auto* gs = std::get_if<GoldenSectionRule>(&rule)) {
        if (!(gs->kappa > 0.0 && gs->kappa < 1.0)) throw ValidationError("step.kappa", "must lie in (0, 1)");
    } else if (const auto* e = std::get_if<ExploitabilityRule>(&rule)) {
        if (!(e->lipschitz >= 0.0)) throw ValidationError("step.lipschitz", "must be >= 0");
    } else if (const auto* p = std::get_if<PredefinedRule>(&rule)) {
        if (!(p->k2 >= 1.0)) throw ValidationError("step.k2", "must be >= 1");
        if (!(p->k1 >= p->k2)) throw ValidationError("step.k1", "must be >= step.k2");
    }
}

inline std::string rule_name(const StepRule& rule) {
    switch (rule.index()) {
        case 0: return "qag";
        case 1: return "golden";
        case 2: return "exploitability";
        default: return "predefined";
    }
}

// J along the segment delta -> (1 - delta) current + delta best-response,
// with J(0) cached at construction.
class LineEvaluator {
public:
    LineEvaluator(std::function<double(double)> j, double sigma)
        : j_(std::move(j)), j0_(j_(0.0)), sigma_(sigma) {}

    double operator()(double delta) const {
        ++evaluations_;
        return delta == 0.0 ? j0_ : j_(delta);
    }
    double j0() const { return j0_; }
    double sigma() const { return sigma_; }
    int evaluations() const { return evaluations_; }

private:
    std::function<double(double)> j_;
    double j0_;
    double sigma_;
    mutable int evaluations_ = 0;
};

inline constexpr int kQagMaxExponent = 200;

inline double qag_step(const LineEvaluator& J, double c, double tau) {
    const double sigma = J.sigma();
    if (!(sigma > 0.0)) throw SolverError("qag_step: sigma must be positive");
    double delta = 1.0;
    for (int i = 1; i <= kQagMaxExponent; ++i) {
        delta *= tau;
        if (J(delta) <= J.j0() - c * delta * sigma) return delta;
    }
    throw QagExhausted("QAG condition not met for any tau^i, i <= 200 (sigma = " + format_double(sigma) + ")");
}

// Golden-section search on [0, 1]: probe {a, b, c, d}, keep the sub-interval
// next to the argmin, stop once d - a <= kappa. The final argmin is compared
// against J(0) so the step never increases J.
inline double golden_section_step(const LineEvaluator& J, double kappa) {
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    double a = 0.0, d = 1.0;
    double ja = J(a), jd = J(d);
    double best = ja <= jd ? a : d;
    double jbest = std::min(ja, jd);
    while (d - a > kappa) {
        const double b = d - (d - a) / phi;
        const double c = a + (d - a) / phi;
        const double jb = J(b), jc = J(c);
        // first minimum in the order a, b, c, d
        int arg = 0;
        double jm = ja;
        if (jb < jm) { arg = 1; jm = jb; }
        if (jc < jm) { arg = 2; jm = jc; }
        if (jd < jm) { arg = 3; jm = jd; }
        best = arg == 0 ? a : arg == 1 ? b : arg == 2 ? c : d;
        jbest = jm;

        const double width = d - a;
        switch (arg) {
            case 0: d = b; jd = jb; break;
            case 1: d = c; jd = jc; break;
            case 2: a = b; ja = jb; break;
            default: a = c; ja = jc; break;
        }
        if (!(d - a < width)) break;  // interval below double resolution
    }
    return J.j0() < jbest ? 0.0 : best;
}

inline double exploitability_step(double sigma, double d_k, double lipschitz) {
    const double denom = 2.0 * lipschitz * d_k;
    if (denom == 0.0) return 1.0;
    return std::clamp(sigma / denom, 0.0, 1.0);
}

inline double predefined_step(int k, double k1, double k2) { return k2 / (k + k1); }

} // namespace mfg
