#pragma once

// Local coupling f(x, m) = a(x) + c * min(m, beta) with
//   a(x) = w * sum_axes (x_a - center_a)^2      (no torus wrap)
// and its potential density Phi(s) = int_0^s c*min(r, beta) dr.
// Negative density samples are clamped to zero before evaluation.

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace mfg {

struct CouplingSpec {
    std::vector<double> anchor_center{0.5};
    double anchor_weight = 0.0;
    double congestion_weight = 0.0;
    double clip_level = 5.0;

    void validate(int dim) const {
        if (static_cast<int>(anchor_center.size()) != dim)
            throw ValidationError("coupling.anchor_center", "needs one coordinate per axis");
        for (double c : anchor_center)
            if (!(c >= 0.0 && c < 1.0)) throw ValidationError("coupling.anchor_center", "coordinates must lie in [0,1)");
        if (!(anchor_weight >= 0.0)) throw ValidationError("coupling.anchor_weight", "must be >= 0");
        if (!(congestion_weight >= 0.0)) throw ValidationError("coupling.congestion_weight", "must be >= 0");
        if (!(clip_level > 0.0)) throw ValidationError("coupling.clip_level", "must be > 0");
    }

    bool operator==(const CouplingSpec&) const = default;
};

inline double lipschitz_constant(const CouplingSpec& spec) { return spec.congestion_weight; }

inline double clipped_congestion(const CouplingSpec& spec, double s) {
    return spec.congestion_weight * std::min(std::max(s, 0.0), spec.clip_level);
}

// Primitive of clipped_congestion, zero at s = 0.
inline double potential_density(const CouplingSpec& spec, double s) {
    s = std::max(s, 0.0);
    const double c = spec.congestion_weight, b = spec.clip_level;
    return s <= b ? 0.5 * c * s * s : c * (b * s - 0.5 * b * b);
}

inline SpatialField anchor_cost(const CouplingSpec& spec, const Grid& grid) {
    SpatialField a(grid.points(), 0.0);
    for (std::size_t p = 0; p < a.size(); ++p) {
        double d2 = 0.0;
        for (int ax = 0; ax < grid.dim; ++ax) {
            const double d = grid.coord(p, ax) - spec.anchor_center[static_cast<std::size_t>(ax)];
            d2 += d * d;
        }
        a[p] = spec.anchor_weight * d2;
    }
    return a;
}

// Coupling parameters plus their anchor field sampled once on a grid; the driver keeps one of
// these for the whole run.
class Coupling {
public:
    Coupling(CouplingSpec spec, const Grid& grid)
        : spec_(std::move(spec)), grid_(grid), anchor_(anchor_cost(spec_, grid)) {}

    const CouplingSpec& spec() const { return spec_; }
    const SpatialField& anchor() const { return anchor_; }

    // gamma(x) = a(x) + c*min(max(m,0), beta). Adds the number of clamped
    // (negative) samples to *clamped when given.
    void eval(std::span<const double> m, std::span<double> out, std::size_t* clamped = nullptr) const {
        std::size_t neg = 0;
        for (std::size_t p = 0; p < m.size(); ++p) {
            if (m[p] < 0.0) ++neg;
            out[p] = anchor_[p] + clipped_congestion(spec_, m[p]);
        }
        if (clamped) *clamped += neg;
    }

    SpatialField eval(std::span<const double> m, std::size_t* clamped = nullptr) const {
        SpatialField out(m.size());
        eval(m, out, clamped);
        return out;
    }

    // F(m) = int a*m + Phi(m) dx, with m clamped at zero.
    double potential(std::span<const double> m) const {
        double s = 0.0;
        for (std::size_t p = 0; p < m.size(); ++p) {
            const double mp = std::max(m[p], 0.0);
            s += anchor_[p] * mp + potential_density(spec_, mp);
        }
        return s * grid_.cell_volume();
    }

private:
    CouplingSpec spec_;
    Grid grid_;
    SpatialField anchor_;
};

inline SpatialField eval_coupling(const CouplingSpec& spec, std::span<const double> m, const Grid& grid,
                                  std::size_t* clamped = nullptr) {
    return Coupling(spec, grid).eval(m, clamped);
}

inline double potential(const CouplingSpec& spec, std::span<const double> m, const Grid& grid) {
    return Coupling(spec, grid).potential(m);
}

} // namespace mfg
