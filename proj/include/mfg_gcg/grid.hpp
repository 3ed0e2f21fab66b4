#pragma once

// Periodic space-time grids on the unit torus and the discrete calculus
// (centered gradient/divergence, 5-point Laplacian, rectangle quadrature)
// shared by every other module.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace mfg {

struct Grid {
    int dim = 1;     // 1 or 2
    int nx = 64;     // points per spatial axis, hx = 1/nx
    int nt = 64;     // time steps, ht = T/nt
    double T = 1.0;  // horizon
    double nu = 0.01;

    double hx() const { return 1.0 / nx; }
    double ht() const { return T / nt; }
    double cell_volume() const { return dim == 1 ? hx() : hx() * hx(); }
    double time(int n) const { return n * ht(); }

    std::size_t points() const {
        const auto n = static_cast<std::size_t>(nx);
        return dim == 1 ? n : n * n;
    }

    // Row-major, last axis fastest: p = i*nx + j in 2D.
    std::size_t stride(int axis) const {
        return (dim == 2 && axis == 0) ? static_cast<std::size_t>(nx) : 1;
    }

    int index_along(std::size_t p, int axis) const {
        const auto n = static_cast<std::size_t>(nx);
        if (dim == 1) return static_cast<int>(p);
        return static_cast<int>(axis == 0 ? p / n : p % n);
    }

    double coord(std::size_t p, int axis) const { return index_along(p, axis) * hx(); }

    // Neighbour of p displaced by `offset` cells along `axis`, wrapped on the torus.
    std::size_t shift(std::size_t p, int axis, int offset) const {
        const int i = index_along(p, axis);
        const int j = ((i + offset) % nx + nx) % nx;
        return p + static_cast<std::size_t>(j) * stride(axis) - static_cast<std::size_t>(i) * stride(axis);
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw ValidationError("grid.dim", "must be 1 or 2");
        if (nx < 4) throw ValidationError("grid.nx", "must be >= 4");
        if (nt < 2) throw ValidationError("grid.nt", "must be >= 2");
        if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("grid.T", "must be > 0");
        if (!(nu > 0.0) || !std::isfinite(nu)) throw ValidationError("grid.nu", "must be > 0");
    }

    bool operator==(const Grid&) const = default;
};

using SpatialField = std::vector<double>;

// nt+1 time slices of nx^dim samples, stored contiguously.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    explicit SpaceTimeField(const Grid& grid, double fill = 0.0)
        : slices_(grid.nt + 1), points_(grid.points()),
          data_(static_cast<std::size_t>(grid.nt + 1) * grid.points(), fill) {}

    int slices() const { return slices_; }
    std::size_t points_per_slice() const { return points_; }

    std::span<double> slice(int n) {
        assert(n >= 0 && n < slices_);
        return {data_.data() + static_cast<std::size_t>(n) * points_, points_};
    }
    std::span<const double> slice(int n) const {
        assert(n >= 0 && n < slices_);
        return {data_.data() + static_cast<std::size_t>(n) * points_, points_};
    }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool matches(const Grid& grid) const {
        return slices_ == grid.nt + 1 && points_ == grid.points();
    }

    bool operator==(const SpaceTimeField&) const = default;

private:
    int slices_ = 0;
    std::size_t points_ = 0;
    std::vector<double> data_;
};

// One SpaceTimeField per spatial component.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const Grid& grid, double fill = 0.0)
        : components_(static_cast<std::size_t>(grid.dim), SpaceTimeField(grid, fill)) {}

    int dim() const { return static_cast<int>(components_.size()); }
    SpaceTimeField& operator[](int axis) { return components_[static_cast<std::size_t>(axis)]; }
    const SpaceTimeField& operator[](int axis) const { return components_[static_cast<std::size_t>(axis)]; }

    bool operator==(const VectorField&) const = default;

private:
    std::vector<SpaceTimeField> components_;
};

inline SpatialField to_field(std::span<const double> s) { return {s.begin(), s.end()}; }

// ---------------------------------------------------------------------------
// Discrete operators (centered, periodic)

inline std::vector<SpatialField> gradient(std::span<const double> f, const Grid& grid) {
    const double inv2h = 0.5 / grid.hx();
    std::vector<SpatialField> out(static_cast<std::size_t>(grid.dim), SpatialField(f.size()));
    for (int a = 0; a < grid.dim; ++a) {
        auto& comp = out[static_cast<std::size_t>(a)];
        for (std::size_t p = 0; p < f.size(); ++p)
            comp[p] = (f[grid.shift(p, a, 1)] - f[grid.shift(p, a, -1)]) * inv2h;
    }
    return out;
}

inline SpatialField divergence(const std::vector<SpatialField>& vf, const Grid& grid) {
    assert(static_cast<int>(vf.size()) == grid.dim);
    const double inv2h = 0.5 / grid.hx();
    SpatialField out(grid.points(), 0.0);
    for (int a = 0; a < grid.dim; ++a) {
        const auto& comp = vf[static_cast<std::size_t>(a)];
        for (std::size_t p = 0; p < out.size(); ++p)
            out[p] += (comp[grid.shift(p, a, 1)] - comp[grid.shift(p, a, -1)]) * inv2h;
    }
    return out;
}

inline SpatialField laplacian(std::span<const double> f, const Grid& grid) {
    const double inv_h2 = 1.0 / (grid.hx() * grid.hx());
    SpatialField out(f.size(), 0.0);
    for (int a = 0; a < grid.dim; ++a)
        for (std::size_t p = 0; p < f.size(); ++p)
            out[p] += (f[grid.shift(p, a, 1)] - 2.0 * f[p] + f[grid.shift(p, a, -1)]) * inv_h2;
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature and norms. Time integrals use the left rectangle rule (n < nt).

inline double integrate_space(std::span<const double> f, const Grid& grid) {
    double s = 0.0;
    for (double v : f) s += v;
    return s * grid.cell_volume();
}

inline double norm_L1x(std::span<const double> f, const Grid& grid) {
    double s = 0.0;
    for (double v : f) s += std::abs(v);
    return s * grid.cell_volume();
}

inline double norm_Linfx(std::span<const double> f) {
    double s = 0.0;
    for (double v : f) s = std::max(s, std::abs(v));
    return s;
}

inline double norm_L2Q(const SpaceTimeField& f, const Grid& grid) {
    double s = 0.0;
    for (int n = 0; n < grid.nt; ++n) {
        double slice_sum = 0.0;
        for (double v : f.slice(n)) slice_sum += v * v;
        s += slice_sum * grid.cell_volume();
    }
    return std::sqrt(grid.ht() * s);
}

inline double norm_L2t_Linfx(const SpaceTimeField& f, const Grid& grid) {
    double s = 0.0;
    for (int n = 0; n < grid.nt; ++n) {
        const double mx = norm_Linfx(f.slice(n));
        s += mx * mx;
    }
    return std::sqrt(grid.ht() * s);
}

} // namespace mfg
