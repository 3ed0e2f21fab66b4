#pragma once

// Periodic (2*dim+1)-point stencil operators and their solvers:
//   d = 1: cyclic tridiagonal elimination (Thomas + Sherman-Morrison);
//   d = 2: BiCGSTAB on the diagonally rescaled system D^-1 M D y = D^-1 b.
//
// The rescaling keeps relative accuracy uniform when the solution spans many
// orders of magnitude (Cole-Hopf variables routinely do).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include "error.hpp"
#include "grid.hpp"

namespace mfg {

// (M x)_p = center[p] x_p + sum_a lower[a][p] x_{p-e_a} + upper[a][p] x_{p+e_a}
struct StencilOperator {
    Grid grid;
    std::vector<double> center;
    std::vector<std::vector<double>> lower, upper;

    explicit StencilOperator(const Grid& g)
        : grid(g), center(g.points(), 0.0),
          lower(static_cast<std::size_t>(g.dim), std::vector<double>(g.points(), 0.0)),
          upper(static_cast<std::size_t>(g.dim), std::vector<double>(g.points(), 0.0)) {}

    SpatialField apply(std::span<const double> x) const {
        SpatialField y(x.size());
        for (std::size_t p = 0; p < x.size(); ++p) {
            double s = center[p] * x[p];
            for (int a = 0; a < grid.dim; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                s += lower[ua][p] * x[grid.shift(p, a, -1)] + upper[ua][p] * x[grid.shift(p, a, 1)];
            }
            y[p] = s;
        }
        return y;
    }
};

struct KrylovOptions {
    double rel_tol = 1e-12;
    int max_iters = 0;  // 0 -> 10 * nx^2
};

namespace detail {

inline void thomas(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                   std::span<const double> d, std::span<double> x) {
    const std::size_t n = d.size();
    std::vector<double> cp(n), dp(n);
    double piv = b[0];
    if (piv == 0.0) throw LinearSolveFailure("tridiagonal solve: zero pivot");
    cp[0] = c[0] / piv;
    dp[0] = d[0] / piv;
    for (std::size_t i = 1; i < n; ++i) {
        piv = b[i] - a[i] * cp[i - 1];
        if (piv == 0.0) throw LinearSolveFailure("tridiagonal solve: zero pivot");
        cp[i] = c[i] / piv;
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
}

} // namespace detail

// Solves a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i with periodic wrap
// (a_0 couples to x_{n-1}, c_{n-1} to x_0).
inline SpatialField solve_cyclic_tridiagonal(std::span<const double> a, std::span<const double> b,
                                             std::span<const double> c, std::span<const double> d) {
    const std::size_t n = d.size();
    if (n < 3) throw LinearSolveFailure("cyclic tridiagonal solve needs n >= 3");
    const double alpha = c[n - 1];  // row n-1, column 0
    const double beta = a[0];       // row 0, column n-1
    const double gamma = -b[0];
    std::vector<double> bb(b.begin(), b.end());
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;

    SpatialField x(n), z(n), u(n, 0.0);
    detail::thomas(a, bb, c, d, x);
    u[0] = gamma;
    u[n - 1] = alpha;
    detail::thomas(a, bb, c, u, z);
    const double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if (denom == 0.0) throw LinearSolveFailure("cyclic tridiagonal solve: singular rank-one update");
    const double fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

// Solves M x = rhs. `scale` (optional, strictly positive, one per point) is
// the diagonal D of the rescaled 2D Krylov solve; `guess` seeds it with an
// estimate of x; a guess that satisfies M x = rhs exactly is returned as is.
// The 1D path is a direct solve and ignores `scale`.
inline SpatialField solve(const StencilOperator& op, std::span<const double> rhs,
                          std::span<const double> scale = {}, std::span<const double> guess = {},
                          const KrylovOptions& opts = {}) {
    const Grid& g = op.grid;
    if (!guess.empty() && std::ranges::equal(op.apply(guess), rhs)) return SpatialField(guess.begin(), guess.end());
    SpatialField x;
    if (g.dim == 1) {
        x = solve_cyclic_tridiagonal(op.lower[0], op.center, op.upper[0], rhs);
    } else {
        const auto n = static_cast<Eigen::Index>(g.points());
        auto d = [&](std::size_t p) { return scale.empty() ? 1.0 : scale[p]; };
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(g.points() * 5);
        for (std::size_t p = 0; p < g.points(); ++p) {
            const auto row = static_cast<Eigen::Index>(p);
            const double dp = d(p);
            trips.emplace_back(row, row, op.center[p]);
            for (int a = 0; a < g.dim; ++a) {
                const auto ua = static_cast<std::size_t>(a);
                const std::size_t lo = g.shift(p, a, -1), hi = g.shift(p, a, 1);
                trips.emplace_back(row, static_cast<Eigen::Index>(lo), op.lower[ua][p] * d(lo) / dp);
                trips.emplace_back(row, static_cast<Eigen::Index>(hi), op.upper[ua][p] * d(hi) / dp);
            }
        }
        Eigen::SparseMatrix<double, Eigen::RowMajor> mat(n, n);
        mat.setFromTriplets(trips.begin(), trips.end());

        Eigen::VectorXd b(n), y0(n);
        for (std::size_t p = 0; p < g.points(); ++p) {
            const auto i = static_cast<Eigen::Index>(p);
            b[i] = rhs[p] / d(p);
            y0[i] = guess.empty() ? b[i] / op.center[p] : guess[p] / d(p);
        }
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::IdentityPreconditioner> solver;
        solver.setTolerance(opts.rel_tol);
        solver.setMaxIterations(opts.max_iters > 0 ? opts.max_iters : 10 * g.nx * g.nx);
        solver.compute(mat);
        Eigen::VectorXd y = solver.solveWithGuess(b, y0);
        if (solver.info() != Eigen::Success)
            throw LinearSolveFailure("BiCGSTAB did not converge (iterations " + std::to_string(solver.iterations()) +
                                     ", residual " + std::to_string(solver.error()) + ")");
        x.resize(g.points());
        for (std::size_t p = 0; p < g.points(); ++p) x[p] = d(p) * y[static_cast<Eigen::Index>(p)];
    }
    for (double v : x)
        if (!std::isfinite(v)) throw LinearSolveFailure("non-finite value in linear solve");
    return x;
}

} // namespace mfg
