#pragma once

// Inner solves of one GCG iteration for H(p) = |p|^2/2 - h.p:
//
//   phi_t + nu Lap phi + h.grad phi = gamma phi / (2nu),  phi(T) = exp(-g/(2nu))
//   psi_t - nu Lap psi + div(h psi) = -gamma psi / (2nu),  psi(0) = m0 / phi(0)
//   u = -2nu log phi,  v = -grad u + h,  m = phi psi
//
// Both equations step with implicit Euler. The backward step n+1 -> n solves
// (I + ht A_n) phi_n = phi_{n+1}, A_n = -nu Lap - h_n.grad + gamma_n/(2nu);
// the forward step n -> n+1 solves (I + ht A_n^T) psi_{n+1} = psi_n with the
// same A_n. Centered convection makes A_n^T the flux-form operator for
// div(h psi), and pairing the two steps gives
//   <phi_{n+1}, psi_{n+1}> = <(I + ht A_n) phi_n, psi_{n+1}> = <phi_n, psi_n>,
// so m = phi psi keeps the discrete mass of m0 up to solver round-off.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "linear_solve.hpp"

namespace mfg {

struct HjbSolution {
    SpaceTimeField phi;  // Cole-Hopf variable, > 0
    SpaceTimeField u;    // value function
    VectorField v;       // optimal control -grad u + h
};

struct FpSolution {
    SpaceTimeField psi;
    SpaceTimeField m;
    std::vector<double> mass_drift;  // |int m_n - int m_0| per slice

    double max_mass_drift() const {
        return mass_drift.empty() ? 0.0 : *std::max_element(mass_drift.begin(), mass_drift.end());
    }
};

namespace detail {

inline std::vector<std::span<const double>> slices_of(const VectorField& f, int n) {
    std::vector<std::span<const double>> out;
    for (int a = 0; a < f.dim(); ++a) out.push_back(f[a].slice(n));
    return out;
}

inline void require_shape(const SpaceTimeField& f, const Grid& grid, const char* what) {
    if (!f.matches(grid)) throw SolverError(std::string(what) + ": field does not match grid");
}

inline void require_shape(const VectorField& f, const Grid& grid, const char* what) {
    if (f.dim() != grid.dim) throw SolverError(std::string(what) + ": wrong number of components");
    for (int a = 0; a < f.dim(); ++a) require_shape(f[a], grid, what);
}

} // namespace detail

// I + ht (-nu Lap - drift.grad + reaction), centered differences.
// Passing an empty drift means zero drift.
inline StencilOperator backward_step_operator(const Grid& grid, std::span<const double> reaction,
                                              const std::vector<std::span<const double>>& drift) {
    const double ht = grid.ht(), hx = grid.hx();
    const double diff = grid.nu / (hx * hx);
    StencilOperator op(grid);
    for (std::size_t p = 0; p < grid.points(); ++p) {
        op.center[p] = 1.0 + ht * (2.0 * grid.dim * diff + reaction[p]);
        for (int a = 0; a < grid.dim; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const double b = drift.empty() ? 0.0 : drift[ua][p];
            op.lower[ua][p] = ht * (-diff + 0.5 * b / hx);
            op.upper[ua][p] = ht * (-diff - 0.5 * b / hx);
        }
    }
    return op;
}

// Transpose of backward_step_operator: I + ht (-nu Lap + div(drift .) + reaction)
// with the flux-form centered divergence (b_{p+1} x_{p+1} - b_{p-1} x_{p-1})/(2hx).
// Every column sums to one, so the step conserves sum(x) when reaction = 0.
inline StencilOperator forward_step_operator(const Grid& grid, std::span<const double> reaction,
                                             const std::vector<std::span<const double>>& drift) {
    const double ht = grid.ht(), hx = grid.hx();
    const double diff = grid.nu / (hx * hx);
    StencilOperator op(grid);
    for (std::size_t p = 0; p < grid.points(); ++p) {
        op.center[p] = 1.0 + ht * (2.0 * grid.dim * diff + reaction[p]);
        for (int a = 0; a < grid.dim; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const double b_lo = drift.empty() ? 0.0 : drift[ua][grid.shift(p, a, -1)];
            const double b_hi = drift.empty() ? 0.0 : drift[ua][grid.shift(p, a, 1)];
            op.lower[ua][p] = ht * (-diff - 0.5 * b_lo / hx);
            op.upper[ua][p] = ht * (-diff + 0.5 * b_hi / hx);
        }
    }
    return op;
}

inline HjbSolution solve_hjb_cole_hopf(const SpaceTimeField& gamma, std::span<const double> g, const VectorField& h,
                                       const Grid& grid, const KrylovOptions& opts = {}) {
    detail::require_shape(gamma, grid, "solve_hjb_cole_hopf(gamma)");
    detail::require_shape(h, grid, "solve_hjb_cole_hopf(h)");
    const double two_nu = 2.0 * grid.nu;
    const std::size_t np = grid.points();

    HjbSolution sol{SpaceTimeField(grid), SpaceTimeField(grid), VectorField(grid)};
    {
        auto last = sol.phi.slice(grid.nt);
        for (std::size_t p = 0; p < np; ++p) last[p] = std::exp(-g[p] / two_nu);
    }
    SpatialField reaction(np);
    for (int n = grid.nt - 1; n >= 0; --n) {
        const auto gam = gamma.slice(n);
        for (std::size_t p = 0; p < np; ++p) reaction[p] = gam[p] / two_nu;
        const auto op = backward_step_operator(grid, reaction, detail::slices_of(h, n));
        const auto next = sol.phi.slice(n + 1);
        const auto phi_n = solve(op, next, next, next, opts);
        for (std::size_t p = 0; p < np; ++p) {
            if (!(phi_n[p] > 0.0))
                throw NonPositivePhi("phi <= 0 at time index " + std::to_string(n) + ", point " + std::to_string(p));
        }
        std::copy(phi_n.begin(), phi_n.end(), sol.phi.slice(n).begin());
    }

    for (int n = 0; n < grid.nt; ++n) {
        const auto phi_n = sol.phi.slice(n);
        auto u_n = sol.u.slice(n);
        for (std::size_t p = 0; p < np; ++p) u_n[p] = -two_nu * std::log(phi_n[p]);
    }
    std::copy(g.begin(), g.end(), sol.u.slice(grid.nt).begin());

    for (int n = 0; n <= grid.nt; ++n) {
        const auto grad = gradient(sol.u.slice(n), grid);
        for (int a = 0; a < grid.dim; ++a) {
            auto v = sol.v[a].slice(n);
            const auto hv = h[a].slice(n);
            for (std::size_t p = 0; p < np; ++p) v[p] = -grad[static_cast<std::size_t>(a)][p] + hv[p];
        }
    }
    return sol;
}

inline FpSolution solve_fp_cole_hopf(const SpaceTimeField& gamma, const SpaceTimeField& phi, const VectorField& h,
                                     std::span<const double> m0, const Grid& grid, const KrylovOptions& opts = {}) {
    detail::require_shape(gamma, grid, "solve_fp_cole_hopf(gamma)");
    detail::require_shape(phi, grid, "solve_fp_cole_hopf(phi)");
    detail::require_shape(h, grid, "solve_fp_cole_hopf(h)");
    for (double v : phi.values())
        if (!(v > 0.0)) throw NonPositivePhi("solve_fp_cole_hopf: phi must be positive");

    const double two_nu = 2.0 * grid.nu;
    const std::size_t np = grid.points();
    FpSolution sol{SpaceTimeField(grid), SpaceTimeField(grid), std::vector<double>(grid.nt + 1, 0.0)};

    {
        auto psi0 = sol.psi.slice(0);
        const auto phi0 = phi.slice(0);
        for (std::size_t p = 0; p < np; ++p) psi0[p] = m0[p] / phi0[p];
        std::copy(m0.begin(), m0.end(), sol.m.slice(0).begin());
    }
    const double mass0 = integrate_space(m0, grid);

    SpatialField reaction(np), scale(np), guess(np);
    for (int n = 0; n < grid.nt; ++n) {
        const auto gam = gamma.slice(n);
        const auto phi_next = phi.slice(n + 1);
        const auto m_n = sol.m.slice(n);
        for (std::size_t p = 0; p < np; ++p) {
            reaction[p] = gam[p] / two_nu;
            scale[p] = 1.0 / phi_next[p];
            guess[p] = m_n[p] / phi_next[p];
        }
        const auto op = forward_step_operator(grid, reaction, detail::slices_of(h, n));
        const auto psi_next = solve(op, sol.psi.slice(n), scale, guess, opts);
        std::copy(psi_next.begin(), psi_next.end(), sol.psi.slice(n + 1).begin());
        auto m_next = sol.m.slice(n + 1);
        for (std::size_t p = 0; p < np; ++p) m_next[p] = phi_next[p] * psi_next[p];
        sol.mass_drift[static_cast<std::size_t>(n + 1)] = std::abs(integrate_space(m_next, grid) - mass0);
    }
    return sol;
}

// Fokker-Planck m_t - nu Lap m + div(m v) = 0 for a given velocity:
//   (I - ht nu Lap) m_{n+1} = m_n - ht div(w_n),  w_n = m_n v_n,
// with the centered flux-form divergence. The step is linear in (m, w), so
// convex combinations of solutions solve it too, and the momentum it
// transports is exactly the w_n = m_n v_n charged by the kinetic functional.
inline SpaceTimeField solve_fp_direct(const VectorField& v, std::span<const double> m0, const Grid& grid,
                                      const KrylovOptions& opts = {}) {
    detail::require_shape(v, grid, "solve_fp_direct(v)");
    const std::size_t np = grid.points();
    const double ht = grid.ht();
    SpaceTimeField m(grid);
    std::copy(m0.begin(), m0.end(), m.slice(0).begin());
    const SpatialField zero(np, 0.0);
    const auto op = forward_step_operator(grid, zero, {});
    std::vector<SpatialField> w(static_cast<std::size_t>(grid.dim), SpatialField(np));
    SpatialField rhs(np);
    for (int n = 0; n < grid.nt; ++n) {
        const auto m_n = m.slice(n);
        for (int a = 0; a < grid.dim; ++a) {
            const auto va = v[a].slice(n);
            auto& wa = w[static_cast<std::size_t>(a)];
            for (std::size_t p = 0; p < np; ++p) wa[p] = m_n[p] * va[p];
        }
        const auto div = divergence(w, grid);
        for (std::size_t p = 0; p < np; ++p) rhs[p] = m_n[p] - ht * div[p];
        const auto next = solve(op, rhs, {}, m_n, opts);
        std::copy(next.begin(), next.end(), m.slice(n + 1).begin());
    }
    return m;
}

struct NewtonOptions {
    double tol = 1e-10;  // max-norm of the ht-scaled residual
    int max_iters = 50;
};

// Nonlinear HJB -u_t - nu Lap u + |grad u|^2/2 - h.grad u = gamma, stepped
// backward with implicit Euler and a damped Newton solve per step. Used as an
// independent check of the Cole-Hopf route on coarse grids.
inline SpaceTimeField solve_hjb_direct_oracle(const SpaceTimeField& gamma, std::span<const double> g,
                                              const VectorField& h, const Grid& grid,
                                              const NewtonOptions& newton = {}) {
    detail::require_shape(gamma, grid, "solve_hjb_direct_oracle(gamma)");
    detail::require_shape(h, grid, "solve_hjb_direct_oracle(h)");
    const std::size_t np = grid.points();
    const double ht = grid.ht();
    SpaceTimeField u(grid);
    std::copy(g.begin(), g.end(), u.slice(grid.nt).begin());

    for (int n = grid.nt - 1; n >= 0; --n) {
        const auto u_next = u.slice(n + 1);
        const auto gam = gamma.slice(n);
        const auto hn = detail::slices_of(h, n);

        // ht-scaled residual: u - u_next - ht (nu Lap u - |grad u|^2/2 + h.grad u + gamma)
        auto residual = [&](std::span<const double> w) {
            const auto lap = laplacian(w, grid);
            const auto grad = gradient(w, grid);
            SpatialField r(np);
            for (std::size_t p = 0; p < np; ++p) {
                double ham = 0.0;
                for (int a = 0; a < grid.dim; ++a) {
                    const double q = grad[static_cast<std::size_t>(a)][p];
                    ham += 0.5 * q * q - hn[static_cast<std::size_t>(a)][p] * q;
                }
                r[p] = w[p] - u_next[p] - ht * (grid.nu * lap[p] - ham + gam[p]);
            }
            return r;
        };

        SpatialField w(u_next.begin(), u_next.end());
        SpatialField r = residual(w);
        double rnorm = norm_Linfx(r);
        int it = 0;
        while (rnorm > newton.tol) {
            if (++it > newton.max_iters)
                throw NewtonDivergence("HJB Newton: no convergence at time index " + std::to_string(n) +
                                       " (residual " + std::to_string(rnorm) + ")");
            // Jacobian: I + ht (-nu Lap + (grad u - h).D)
            const auto grad = gradient(w, grid);
            std::vector<SpatialField> drift(static_cast<std::size_t>(grid.dim), SpatialField(np));
            for (int a = 0; a < grid.dim; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                for (std::size_t p = 0; p < np; ++p) drift[ua][p] = hn[ua][p] - grad[ua][p];
            }
            std::vector<std::span<const double>> drift_spans(drift.begin(), drift.end());
            const auto jac = backward_step_operator(grid, SpatialField(np, 0.0), drift_spans);
            SpatialField neg_r(np);
            for (std::size_t p = 0; p < np; ++p) neg_r[p] = -r[p];
            const auto step = solve(jac, neg_r, {}, {}, KrylovOptions{1e-12, 0});

            double lambda = 1.0;
            SpatialField trial(np);
            SpatialField r_trial;
            double trial_norm = 0.0;
            for (int halvings = 0; halvings < 30; ++halvings) {
                for (std::size_t p = 0; p < np; ++p) trial[p] = w[p] + lambda * step[p];
                r_trial = residual(trial);
                trial_norm = norm_Linfx(r_trial);
                if (trial_norm < rnorm) break;
                lambda *= 0.5;
            }
            if (!(trial_norm < rnorm))
                throw NewtonDivergence("HJB Newton: damping failed at time index " + std::to_string(n));
            w.swap(trial);
            r.swap(r_trial);
            rnorm = trial_norm;
        }
        std::copy(w.begin(), w.end(), u.slice(n).begin());
    }
    return u;
}

} // namespace mfg
