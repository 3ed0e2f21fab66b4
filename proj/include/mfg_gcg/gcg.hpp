#pragma once

// Generalized conditional gradient iteration for the potential MFG:
//
//   gamma_k = f(mbar_k)
//   (u_k, m_k) = best response to gamma_k       (Cole-Hopf HJB, then FP)
//   w_k = m_k v_k,  v_k = -grad u_k + h
//   sigma_k = Z[gamma_k](mbar_k, wbar_k) - Z[gamma_k](m_k, w_k)
//   (mbar, wbar)_{k+1} = (1 - delta_k)(mbar, wbar)_k + delta_k (m, w)_k
//
// By default m_k comes from the flux-form FP driven by v_k, so every pair the
// functionals see satisfies the same discrete continuity equation and sigma_k
// is a true linearization gap; FpSolver::ColeHopf uses m_k = phi_k psi_k.
//
// The run stops when sigma_k < 0, sigma_k < tol_sigma, the iteration cap is
// hit, or a solve fails. Given identical inputs the history is bit-identical.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "coupling.hpp"
#include "error.hpp"
#include "functionals.hpp"
#include "grid.hpp"
#include "linear_solve.hpp"
#include "pde.hpp"
#include "stepsize.hpp"

namespace mfg {

// Sampled data of one game on a grid.
struct Problem {
    Grid grid;
    CouplingSpec coupling;
    SpatialField g;   // terminal cost
    SpatialField m0;  // initial density, unit discrete mass
    VectorField h;    // drift of the Hamiltonian |p|^2/2 - h.p
};

enum class FpSolver { Flux, ColeHopf };

struct GcgConfig {
    Problem problem;
    StepRule step = QagRule{};
    double tol_sigma = 1e-5;
    int max_iters = 1000;
    // Reference production runs a fixed number of iterations regardless of sigma.
    bool stop_on_sigma = true;
    bool record_wall_time = true;
    FpSolver fp_solver = FpSolver::Flux;
    KrylovOptions krylov{};
};

struct Reference {
    FlowPair pair;
    double j_value = 0.0;
};

struct IterationMetrics {
    int k = 0;
    std::optional<double> delta;  // absent on the terminal row
    double sigma = 0.0;
    double j_value = 0.0;
    std::optional<double> eps;
    double d_k = 0.0;
    double mass_err = 0.0;
    double wall_ms = 0.0;
    std::optional<double> star_error;
    std::size_t clamped = 0;  // negative density samples clamped in f(mbar)
};

enum class StopReason { ToleranceReached, NegativeSigma, MaxIters, QagExhausted, SolverError };

inline std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::ToleranceReached: return "ToleranceReached";
        case StopReason::NegativeSigma: return "NegativeSigma";
        case StopReason::MaxIters: return "MaxIters";
        case StopReason::QagExhausted: return "QagExhausted";
        case StopReason::SolverError: return "SolverError";
    }
    return "?";
}

struct GcgState {
    int k = 0;
    FlowPair bar;  // current averaged iterate
    std::vector<IterationMetrics> history;
    // Best response of the last completed iteration.
    SpaceTimeField u_last;
    FlowPair best_last;
};

struct GcgResult {
    GcgState state;
    StopReason stop = StopReason::MaxIters;
    std::string detail;

    // Number of completed updates before the stopping test fired.
    int iterations() const { return state.history.empty() ? 0 : state.history.back().k; }
};

// Called once per iteration after the best response is known and before the
// update; `bar` is still the k-th iterate.
struct IterationView {
    int k;
    const FlowPair& bar;
    const FlowPair& best;
    const HjbSolution& hjb;
    const SpaceTimeField& gamma;
};
using IterationObserver = std::function<void(const IterationView&)>;

inline VectorField compute_momentum(const SpaceTimeField& m, const VectorField& v) {
    VectorField w = v;
    const auto& mv = m.values();
    for (int a = 0; a < w.dim(); ++a) {
        auto& wa = w[a].values();
        for (std::size_t i = 0; i < wa.size(); ++i) wa[i] *= mv[i];
    }
    return w;
}

inline void update_pair(FlowPair& bar, const FlowPair& pair, double delta) {
    const double keep = 1.0 - delta;
    auto blend = [&](std::vector<double>& x, const std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = keep * x[i] + delta * y[i];
    };
    blend(bar.m.values(), pair.m.values());
    for (int a = 0; a < bar.w.dim(); ++a) blend(bar.w[a].values(), pair.w[a].values());
}

inline void update_pair(GcgState& state, const FlowPair& pair, double delta) { update_pair(state.bar, pair, delta); }

// Heat-equation evolution of m0 with zero momentum.
inline FlowPair initial_guess(const Problem& problem, const KrylovOptions& krylov = {}) {
    const Grid& grid = problem.grid;
    FlowPair pair{solve_fp_direct(VectorField(grid), problem.m0, grid, krylov), VectorField(grid)};
    return pair;
}

inline double max_mass_error(const SpaceTimeField& m, double mass0, const Grid& grid) {
    double err = 0.0;
    for (int n = 0; n <= grid.nt; ++n) err = std::max(err, std::abs(integrate_space(m.slice(n), grid) - mass0));
    return err;
}

inline void validate(const GcgConfig& cfg) {
    const Problem& pb = cfg.problem;
    pb.grid.validate();
    pb.coupling.validate(pb.grid.dim);
    validate(cfg.step, pb.grid.dim);
    if (pb.g.size() != pb.grid.points()) throw ValidationError("terminal", "g does not match grid");
    if (pb.m0.size() != pb.grid.points()) throw ValidationError("initial", "m0 does not match grid");
    if (pb.h.dim() != pb.grid.dim || !pb.h[0].matches(pb.grid)) throw ValidationError("drift", "h does not match grid");
    if (!(cfg.tol_sigma > 0.0)) throw ValidationError("gcg.tol_sigma", "must be > 0");
    if (cfg.max_iters < 1) throw ValidationError("gcg.max_iters", "must be >= 1");
}

inline GcgResult run(const GcgConfig& cfg, const Reference* reference = nullptr,
                     const IterationObserver& observer = {}) {
    validate(cfg);
    const Problem& pb = cfg.problem;
    const Grid& grid = pb.grid;
    if (reference && !reference->pair.matches(grid))
        throw DigestMismatch("reference grid does not match the run grid");

    const Coupling coupling(pb.coupling, grid);
    const double mass0 = integrate_space(pb.m0, grid);
    using Clock = std::chrono::steady_clock;

    GcgResult result;
    GcgState& st = result.state;
    try {
        st.bar = initial_guess(pb, cfg.krylov);
    } catch (const mfg::SolverError& e) {
        result.stop = StopReason::SolverError;
        result.detail = e.what();
        return result;
    }

    SpaceTimeField gamma(grid);
    for (int k = 0;; ++k) {
        const auto t0 = Clock::now();
        st.k = k;
        IterationMetrics row;
        row.k = k;
        for (int n = 0; n <= grid.nt; ++n) coupling.eval(st.bar.m.slice(n), gamma.slice(n), &row.clamped);

        HjbSolution hjb;
        FlowPair best;
        try {
            hjb = solve_hjb_cole_hopf(gamma, pb.g, pb.h, grid, cfg.krylov);
            if (cfg.fp_solver == FpSolver::ColeHopf)
                best.m = solve_fp_cole_hopf(gamma, hjb.phi, pb.h, pb.m0, grid, cfg.krylov).m;
            else
                best.m = solve_fp_direct(hjb.v, pb.m0, grid, cfg.krylov);
            best.w = compute_momentum(best.m, hjb.v);
        } catch (const mfg::SolverError& e) {
            result.stop = StopReason::SolverError;
            result.detail = e.what();
            return result;
        }
        if (observer) observer(IterationView{k, st.bar, best, hjb, gamma});

        const double z_best = j1(best, pb.g, pb.h, grid) + pairing(gamma, best.m, grid);
        const JParts jbar = evaluate_j_combination(st.bar, st.bar, 0.0, pb.g, pb.h, &coupling, grid);
        row.sigma = jbar.j1() + pairing(gamma, st.bar.m, grid) - z_best;
        row.j_value = jbar.total();
        row.d_k = d_k(best.m, st.bar.m, grid);
        row.mass_err = max_mass_error(st.bar.m, mass0, grid);
        if (reference) {
            row.eps = row.j_value - reference->j_value;
            row.star_error = star_error(st.bar, reference->pair, grid);
        }

        auto finish = [&](StopReason reason, std::string detail = {}) {
            if (cfg.record_wall_time)
                row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            st.history.push_back(row);
            st.u_last = std::move(hjb.u);
            st.best_last = std::move(best);
            result.stop = reason;
            result.detail = std::move(detail);
            return std::move(result);
        };

        if (cfg.stop_on_sigma) {
            if (row.sigma < 0.0) return finish(StopReason::NegativeSigma);
            if (row.sigma < cfg.tol_sigma) return finish(StopReason::ToleranceReached);
        }
        if (k + 1 >= cfg.max_iters) return finish(StopReason::MaxIters);

        const double jbar_total = row.j_value;
        const LineEvaluator line(
            [&](double delta) {
                if (delta == 0.0) return jbar_total;
                return evaluate_j_combination(st.bar, best, delta, pb.g, pb.h, &coupling, grid).total();
            },
            row.sigma);
        double delta = 0.0;
        try {
            delta = std::visit(
                [&](const auto& rule) -> double {
                    using R = std::decay_t<decltype(rule)>;
                    if constexpr (std::is_same_v<R, QagRule>) return qag_step(line, rule.c, rule.tau);
                    else if constexpr (std::is_same_v<R, GoldenSectionRule>) return golden_section_step(line, rule.kappa);
                    else if constexpr (std::is_same_v<R, ExploitabilityRule>)
                        return exploitability_step(row.sigma, row.d_k, rule.lipschitz);
                    else return predefined_step(k, rule.k1, rule.k2);
                },
                cfg.step);
        } catch (const QagExhausted& e) {
            return finish(StopReason::QagExhausted, e.what());
        } catch (const mfg::SolverError& e) {
            return finish(StopReason::SolverError, e.what());
        }

        row.delta = delta;
        update_pair(st.bar, best, delta);
        if (cfg.record_wall_time)
            row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        st.history.push_back(row);
        st.u_last = std::move(hjb.u);
        st.best_last = std::move(best);
    }
}

} // namespace mfg
