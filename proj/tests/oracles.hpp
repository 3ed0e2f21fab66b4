#pragma once

// Independent reference computations: plain loops over raw storage and dense
// matrices assembled from the stencil definitions, sharing no code with the
// library's operators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfg_gcg/mfg_gcg.hpp"

namespace mfg::test {

// Plain (n, i, j) loops over the raw storage; no library quadrature.
struct Brute {
    const Grid& g;

    int np() const { return g.dim == 1 ? g.nx : g.nx * g.nx; }
    double vol() const { return g.dim == 1 ? 1.0 / g.nx : 1.0 / (g.nx * g.nx); }
    double ht() const { return g.T / g.nt; }
    double at(const SpaceTimeField& f, int n, int p) const { return f.values()[static_cast<std::size_t>(n * np() + p)]; }

    double j1(const FlowPair& pr, const SpatialField& term, const VectorField& h) const {
        double kin = 0.0;
        for (int n = 0; n < g.nt; ++n)
            for (int p = 0; p < np(); ++p) {
                const double m = at(pr.m, n, p);
                if (m <= 1e-12) continue;
                double s = 0.0;
                for (int a = 0; a < g.dim; ++a) {
                    const double d = at(pr.w[a], n, p) - m * at(h[a], n, p);
                    s += d * d;
                }
                kin += ht() * vol() * s / (2.0 * m);
            }
        double t = 0.0;
        for (int p = 0; p < np(); ++p) t += vol() * term[static_cast<std::size_t>(p)] * at(pr.m, g.nt, p);
        return kin + t;
    }

    double j2(const SpaceTimeField& m, const CouplingSpec& c) const {
        double s = 0.0;
        for (int n = 0; n < g.nt; ++n)
            for (int p = 0; p < np(); ++p) {
                double d2 = 0.0;
                for (int a = 0; a < g.dim; ++a) {
                    const int idx = g.dim == 1 ? p : (a == 0 ? p / g.nx : p % g.nx);
                    const double d = idx / static_cast<double>(g.nx) - c.anchor_center[static_cast<std::size_t>(a)];
                    d2 += d * d;
                }
                const double x = std::max(at(m, n, p), 0.0);
                const double phi = x <= c.clip_level ? c.congestion_weight * x * x / 2.0
                                                     : c.congestion_weight * c.clip_level * (x - c.clip_level / 2.0);
                s += ht() * vol() * (c.anchor_weight * d2 * x + phi);
            }
        return s;
    }

    double pairing(const SpaceTimeField& gamma, const SpaceTimeField& m) const {
        double s = 0.0;
        for (int n = 0; n < g.nt; ++n)
            for (int p = 0; p < np(); ++p) s += ht() * vol() * at(gamma, n, p) * at(m, n, p);
        return s;
    }

    double d_k(const SpaceTimeField& m, const SpaceTimeField& mbar) const {
        double s = 0.0;
        for (int n = 0; n < g.nt; ++n) {
            double l1 = 0.0, linf = 0.0;
            for (int p = 0; p < np(); ++p) {
                const double d = std::abs(at(m, n, p) - at(mbar, n, p));
                l1 += vol() * d;
                linf = std::max(linf, d);
            }
            s += ht() * l1 * linf;
        }
        return s;
    }

    double star(const FlowPair& a, const FlowPair& b) const {
        double mpart = 0.0, wpart = 0.0;
        for (int n = 0; n < g.nt; ++n) {
            double mx = 0.0;
            for (int p = 0; p < np(); ++p) {
                mx = std::max(mx, std::abs(at(a.m, n, p) - at(b.m, n, p)));
                for (int ax = 0; ax < g.dim; ++ax) {
                    const double d = at(a.w[ax], n, p) - at(b.w[ax], n, p);
                    wpart += ht() * vol() * d * d;
                }
            }
            mpart += ht() * mx * mx;
        }
        return std::sqrt(mpart) + std::sqrt(wpart);
    }
};

// Dense matrices of the periodic centered operators, assembled from the
// stencil definitions rather than from the library.
Eigen::MatrixXd dense_laplacian(const Grid& g) {
    const int np = static_cast<int>(g.points());
    const double s = 1.0 / (g.hx() * g.hx());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(np, np);
    for (int i = 0; i < np; ++i) {
        for (int a = 0; a < g.dim; ++a) {
            const int ix = g.dim == 1 ? i : (a == 0 ? i / g.nx : i % g.nx);
            const int base = i - ix * (g.dim == 2 && a == 0 ? g.nx : 1);
            const int stride = g.dim == 2 && a == 0 ? g.nx : 1;
            L(i, base + ((ix + 1) % g.nx) * stride) += s;
            L(i, base + ((ix + g.nx - 1) % g.nx) * stride) += s;
            L(i, i) -= 2.0 * s;
        }
    }
    return L;
}

Eigen::MatrixXd dense_central(const Grid& g, int a) {
    const int np = static_cast<int>(g.points());
    const double s = 0.5 / g.hx();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(np, np);
    const int stride = g.dim == 2 && a == 0 ? g.nx : 1;
    for (int i = 0; i < np; ++i) {
        const int ix = g.dim == 1 ? i : (a == 0 ? i / g.nx : i % g.nx);
        const int base = i - ix * stride;
        D(i, base + ((ix + 1) % g.nx) * stride) += s;
        D(i, base + ((ix + g.nx - 1) % g.nx) * stride) -= s;
    }
    return D;
}

SpaceTimeField dense_fp(const VectorField& v, const SpatialField& m0, const Grid& g) {
    const int np = static_cast<int>(g.points());
    const double ht = g.ht();
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(np, np) - ht * g.nu * dense_laplacian(g);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    SpaceTimeField m(g);
    Eigen::VectorXd cur = Eigen::Map<const Eigen::VectorXd>(m0.data(), np);
    std::copy(m0.begin(), m0.end(), m.slice(0).begin());
    for (int n = 0; n < g.nt; ++n) {
        Eigen::VectorXd rhs = cur;
        for (int a = 0; a < g.dim; ++a) {
            const auto va = v[a].slice(n);
            const Eigen::VectorXd w = cur.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(va.data(), np));
            rhs -= ht * dense_central(g, a) * w;
        }
        cur = lu.solve(rhs);
        std::copy(cur.data(), cur.data() + np, m.slice(n + 1).begin());
    }
    return m;
}

VectorField smooth_velocity(const Grid& g) {
    VectorField v(g);
    for (int a = 0; a < g.dim; ++a)
        for (int n = 0; n <= g.nt; ++n) {
            auto s = v[a].slice(n);
            for (std::size_t p = 0; p < s.size(); ++p) {
                const double x = g.coord(p, a), t = g.time(n);
                s[p] = 0.8 * std::sin(2.0 * std::numbers::pi * (x + 0.3 * a)) * std::cos(3.0 * t) + 0.2;
            }
        }
    return v;
}

} // namespace mfg::test
