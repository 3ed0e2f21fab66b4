#pragma once

// Scalar diagnostics of the variational formulation:
//   J1(m, w) = int_Q |w - m h|^2 / (2m) + int g m(T)       (0 where m <= floor)
//   J2(m)    = int_0^T F(m(t)) dt
//   Z[gamma](m, w) = J1(m, w) + int_Q gamma m
// Running integrals use the left rectangle rule in time (slices 0..nt-1);
// the terminal slice only enters through g m(T).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

#include "coupling.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace mfg {

inline constexpr double kDensityFloor = 1e-12;

struct FlowPair {
    SpaceTimeField m;  // density
    VectorField w;     // momentum m v

    bool empty() const { return m.slices() == 0; }
    bool matches(const Grid& grid) const {
        if (!m.matches(grid) || w.dim() != grid.dim) return false;
        for (int a = 0; a < w.dim(); ++a)
            if (!w[a].matches(grid)) return false;
        return true;
    }
    bool operator==(const FlowPair&) const = default;
};

namespace detail {

// m L(w/m) with L(v) = |v - h|^2 / 2, written as |w - m h|^2 / (2m).
inline double kinetic_density(double m, const double* w, const double* h, int dim) {
    if (m <= kDensityFloor) return 0.0;
    double s = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double d = w[a] - m * h[a];
        s += d * d;
    }
    return 0.5 * s / m;
}

} // namespace detail

struct JParts {
    double kinetic = 0.0;    // int_Q m L(w/m)
    double terminal = 0.0;   // int g m(T)
    double potential = 0.0;  // J2

    double j1() const { return kinetic + terminal; }
    double total() const { return kinetic + terminal + potential; }
};

// J evaluated on (1 - delta) a + delta b without materialising the
// combination. delta = 0 reproduces the evaluation of `a` bit for bit.
// `coupling` may be null when only J1 is wanted.
inline JParts evaluate_j_combination(const FlowPair& a, const FlowPair& b, double delta, std::span<const double> g,
                                     const VectorField& h, const Coupling* coupling, const Grid& grid) {
    const std::size_t np = grid.points();
    const int dim = grid.dim;
    const double keep = 1.0 - delta;
    const double vol = grid.cell_volume();
    JParts out;
    double w[2] = {0.0, 0.0}, hv[2] = {0.0, 0.0};
    SpatialField mix(np);
    for (int n = 0; n < grid.nt; ++n) {
        const auto ma = a.m.slice(n), mb = b.m.slice(n);
        std::span<const double> wa[2], wb[2], hs[2];
        for (int ax = 0; ax < dim; ++ax) {
            wa[ax] = a.w[ax].slice(n);
            wb[ax] = b.w[ax].slice(n);
            hs[ax] = h[ax].slice(n);
        }
        double kin = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            const double m = keep * ma[p] + delta * mb[p];
            for (int ax = 0; ax < dim; ++ax) {
                w[ax] = keep * wa[ax][p] + delta * wb[ax][p];
                hv[ax] = hs[ax][p];
            }
            kin += detail::kinetic_density(m, w, hv, dim);
            mix[p] = m;
        }
        out.kinetic += kin * vol;
        if (coupling) out.potential += coupling->potential(mix);
    }
    out.kinetic *= grid.ht();
    out.potential *= grid.ht();

    const auto ma = a.m.slice(grid.nt), mb = b.m.slice(grid.nt);
    double term = 0.0;
    for (std::size_t p = 0; p < np; ++p) term += g[p] * std::max(keep * ma[p] + delta * mb[p], 0.0);
    out.terminal = term * vol;
    return out;
}

inline double j1(const FlowPair& pair, std::span<const double> g, const VectorField& h, const Grid& grid) {
    return evaluate_j_combination(pair, pair, 0.0, g, h, nullptr, grid).j1();
}

inline double j2(const SpaceTimeField& m, const Coupling& coupling, const Grid& grid) {
    double s = 0.0;
    for (int n = 0; n < grid.nt; ++n) s += coupling.potential(m.slice(n));
    return grid.ht() * s;
}

inline double j2(const SpaceTimeField& m, const CouplingSpec& spec, const Grid& grid) {
    return j2(m, Coupling(spec, grid), grid);
}

inline double j_total(const FlowPair& pair, std::span<const double> g, const VectorField& h, const Coupling& coupling,
                      const Grid& grid) {
    return evaluate_j_combination(pair, pair, 0.0, g, h, &coupling, grid).total();
}

// int_Q gamma m (left rectangle in time).
inline double pairing(const SpaceTimeField& gamma, const SpaceTimeField& m, const Grid& grid) {
    double s = 0.0;
    for (int n = 0; n < grid.nt; ++n) {
        const auto gs = gamma.slice(n), ms = m.slice(n);
        double t = 0.0;
        for (std::size_t p = 0; p < gs.size(); ++p) t += gs[p] * ms[p];
        s += t * grid.cell_volume();
    }
    return grid.ht() * s;
}

inline double z_gamma(const SpaceTimeField& gamma, const FlowPair& pair, std::span<const double> g,
                      const VectorField& h, const Grid& grid) {
    return j1(pair, g, h, grid) + pairing(gamma, pair.m, grid);
}

// sigma_k = Z[gamma_k](current) - Z[gamma_k](best response).
inline double exploitability(const SpaceTimeField& gamma, const FlowPair& best, const FlowPair& current,
                             std::span<const double> g, const VectorField& h, const Grid& grid) {
    return z_gamma(gamma, current, g, h, grid) - z_gamma(gamma, best, g, h, grid);
}

// D_k = int_0^T ||m - mbar||_L1 ||m - mbar||_Linf dt.
inline double d_k(const SpaceTimeField& m, const SpaceTimeField& mbar, const Grid& grid) {
    SpatialField diff(grid.points());
    double s = 0.0;
    for (int n = 0; n < grid.nt; ++n) {
        const auto a = m.slice(n), b = mbar.slice(n);
        for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = a[p] - b[p];
        s += norm_L1x(diff, grid) * norm_Linfx(diff);
    }
    return grid.ht() * s;
}

inline double optimality_gap(double j_current, std::optional<double> j_reference) {
    if (!j_reference) throw MissingReference("optimality gap needs a reference J value");
    return j_current - *j_reference;
}

// ||m - m_ref||_{L2(0,T;Linf)} + ||w - w_ref||_{L2(Q;R^d)}
inline double star_error(const FlowPair& pair, const FlowPair& reference, const Grid& grid) {
    if (reference.empty()) throw MissingReference("star error needs a reference solution");
    if (!reference.matches(grid) || !pair.matches(grid))
        throw DigestMismatch("star error: reference grid does not match");
    SpaceTimeField diff(grid);
    auto& d = diff.values();
    const auto& m = pair.m.values();
    const auto& mr = reference.m.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = m[i] - mr[i];
    const double m_part = norm_L2t_Linfx(diff, grid);
    double w_sq = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
        const auto& w = pair.w[a].values();
        const auto& wr = reference.w[a].values();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = w[i] - wr[i];
        const double na = norm_L2Q(diff, grid);
        w_sq += na * na;
    }
    return m_part + std::sqrt(w_sq);
}

} // namespace mfg
