#pragma once

#include <cstdint>
#include <random>

#include "mfg_gcg/mfg_gcg.hpp"

namespace mfg::test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline SpatialField random_field(std::size_t n, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    SpatialField f(n);
    for (double& v : f) v = u(gen);
    return f;
}

inline SpaceTimeField random_field(const Grid& grid, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    SpaceTimeField f(grid);
    std::uniform_real_distribution<double> u(lo, hi);
    for (double& v : f.values()) v = u(gen);
    return f;
}

inline VectorField random_vector_field(const Grid& grid, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    VectorField f(grid);
    for (int a = 0; a < grid.dim; ++a) f[a] = random_field(grid, gen, lo, hi);
    return f;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// Field sampled from f(x) (1D) or f(x, y) (2D) at every grid point.
template <class F>
SpatialField sample(const Grid& grid, F f) {
    SpatialField out(grid.points());
    for (std::size_t p = 0; p < out.size(); ++p)
        out[p] = grid.dim == 1 ? f(grid.coord(p, 0), 0.0) : f(grid.coord(p, 0), grid.coord(p, 1));
    return out;
}

} // namespace mfg::test
