#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace mfg;
using mfg::test::sample;

namespace {

constexpr double kPi = std::numbers::pi;

Grid grid1(int nx) { return Grid{1, nx, 4, 1.0, 0.01}; }
Grid grid2(int nx) { return Grid{2, nx, 4, 1.0, 0.01}; }

double grad_error(int nx) {
    const Grid g = grid1(nx);
    const auto f = sample(g, [](double x, double) { return std::sin(2 * kPi * x); });
    const auto d = gradient(f, g)[0];
    double err = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) err = std::max(err, std::abs(d[p] - 2 * kPi * std::cos(2 * kPi * g.coord(p, 0))));
    return err;
}

double lap_error(int nx) {
    const Grid g = grid1(nx);
    const auto f = sample(g, [](double x, double) { return std::cos(2 * kPi * x); });
    const auto l = laplacian(f, g);
    double err = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) err = std::max(err, std::abs(l[p] + 4 * kPi * kPi * f[p]));
    return err;
}

} // namespace

TEST(Grid, Spacing) {
    const Grid g{2, 40, 40, 0.25, 0.01};
    EXPECT_DOUBLE_EQ(g.hx(), 0.025);
    EXPECT_DOUBLE_EQ(g.ht(), 0.25 / 40);
    EXPECT_EQ(g.points(), 1600u);
    EXPECT_DOUBLE_EQ(g.time(g.nt), 0.25);
}

TEST(Grid, ValidationNamesTheKey) {
    auto key_of = [](Grid g) {
        try {
            g.validate();
        } catch (const ValidationError& e) {
            return e.key();
        }
        return std::string();
    };
    EXPECT_EQ(key_of(Grid{3, 8, 4, 1.0, 0.01}), "grid.dim");
    EXPECT_EQ(key_of(Grid{1, 3, 4, 1.0, 0.01}), "grid.nx");
    EXPECT_EQ(key_of(Grid{1, 8, 1, 1.0, 0.01}), "grid.nt");
    EXPECT_EQ(key_of(Grid{1, 8, 4, 0.0, 0.01}), "grid.T");
    EXPECT_EQ(key_of(Grid{1, 8, 4, 1.0, -1.0}), "grid.nu");
    EXPECT_EQ(key_of(Grid{2, 4, 2, 1.0, 0.01}), "");
}

TEST(Grid, ShiftWrapsOnTheTorus) {
    const Grid g = grid2(5);
    const std::size_t p = 4 * 5 + 0;  // (i, j) = (4, 0)
    EXPECT_EQ(g.shift(p, 0, 1), 0u);
    EXPECT_EQ(g.shift(p, 1, -1), 4u * 5 + 4);
    EXPECT_EQ(g.shift(p, 1, 7), 4u * 5 + 2);
}

TEST(Gradient, ConstantIsZero) {
    for (const Grid& g : {grid1(8), grid2(8)}) {
        const SpatialField f(g.points(), 3.5);
        for (const auto& c : gradient(f, g))
            for (double v : c) EXPECT_EQ(v, 0.0);
    }
}

TEST(Gradient, SineDerivative) { EXPECT_LE(grad_error(256), 1e-3); }

TEST(Gradient, SeparableFieldHasNoCrossComponent) {
    const Grid g = grid2(16);
    const auto f = sample(g, [](double x, double) { return std::cos(2 * kPi * x); });
    for (double v : gradient(f, g)[1]) EXPECT_EQ(v, 0.0);
}

TEST(Divergence, ConstantIsZero) {
    const Grid g = grid2(8);
    const std::vector<SpatialField> vf(2, SpatialField(g.points(), 1.0));
    for (double v : divergence(vf, g)) EXPECT_EQ(v, 0.0);
}

TEST(Divergence, SineDerivative) {
    const Grid g = grid1(256);
    const std::vector<SpatialField> vf{sample(g, [](double x, double) { return std::sin(2 * kPi * x); })};
    const auto d = divergence(vf, g);
    for (std::size_t p = 0; p < d.size(); ++p) EXPECT_NEAR(d[p], 2 * kPi * std::cos(2 * kPi * g.coord(p, 0)), 1e-3);
}

// Centered gradient followed by centered divergence reaches two cells out:
// (f[i+2] - 2 f[i] + f[i-2]) / (4 hx^2) per axis.
TEST(Divergence, OfGradientIsTheWideStencilLaplacian) {
    auto gen = test::rng(11);
    for (const Grid& g : {grid1(16), grid2(16)}) {
        const auto f = test::random_field(g.points(), gen);
        const auto got = divergence(gradient(f, g), g);
        const double h = g.hx();
        for (std::size_t p = 0; p < f.size(); ++p) {
            double want = 0.0;
            for (int a = 0; a < g.dim; ++a)
                want += (f[g.shift(p, a, 2)] - 2.0 * f[p] + f[g.shift(p, a, -2)]) / (4.0 * h * h);
            EXPECT_NEAR(got[p], want, 1e-12 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(Divergence, SummationByParts) {
    auto gen = test::rng(12);
    for (const Grid& g : {grid1(8), grid2(8)}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto f = test::random_field(g.points(), gen);
            std::vector<SpatialField> vf;
            for (int a = 0; a < g.dim; ++a) vf.push_back(test::random_field(g.points(), gen));
            const auto grad = gradient(f, g);
            const auto div = divergence(vf, g);
            double s = 0.0, nf = 0.0, ng = 0.0;
            for (std::size_t p = 0; p < f.size(); ++p) {
                for (int a = 0; a < g.dim; ++a) {
                    s += vf[static_cast<std::size_t>(a)][p] * grad[static_cast<std::size_t>(a)][p];
                    ng += vf[static_cast<std::size_t>(a)][p] * vf[static_cast<std::size_t>(a)][p];
                }
                s += f[p] * div[p];
                nf += f[p] * f[p];
            }
            EXPECT_LE(std::abs(s), 1e-12 * std::sqrt(nf * ng) / g.hx());
        }
    }
}

TEST(Laplacian, ConstantIsZero) {
    const Grid g = grid2(8);
    for (double v : laplacian(SpatialField(g.points(), -2.0), g)) EXPECT_EQ(v, 0.0);
}

TEST(Laplacian, SumsToZero) {
    auto gen = test::rng(13);
    for (const Grid& g : {grid1(9), grid2(7)}) {
        const auto f = test::random_field(g.points(), gen);
        double s = 0.0, scale = 0.0;
        for (double v : laplacian(f, g)) {
            s += v;
            scale += std::abs(v);
        }
        EXPECT_LE(std::abs(s), 1e-14 * scale);
    }
}

TEST(Laplacian, CosineSecondDerivative) { EXPECT_LE(lap_error(256), 1e-2); }

TEST(Operators, SecondOrderConvergence) {
    EXPECT_GE(grad_error(32) / grad_error(64), 3.5);
    EXPECT_GE(grad_error(64) / grad_error(128), 3.5);
    EXPECT_GE(lap_error(32) / lap_error(64), 3.5);
    EXPECT_GE(lap_error(64) / lap_error(128), 3.5);
}

TEST(Operators, CommuteWithLatticeShifts) {
    auto gen = test::rng(14);
    const Grid g = grid2(8);
    const auto f = test::random_field(g.points(), gen);
    for (int a = 0; a < 2; ++a) {
        for (int off : {1, 3, -2}) {
            SpatialField fs(f.size());
            for (std::size_t p = 0; p < f.size(); ++p) fs[p] = f[g.shift(p, a, off)];
            const auto l = laplacian(f, g), ls = laplacian(fs, g);
            const auto gr = gradient(f, g), grs = gradient(fs, g);
            for (std::size_t p = 0; p < f.size(); ++p) {
                EXPECT_EQ(ls[p], l[g.shift(p, a, off)]);
                for (int b = 0; b < 2; ++b)
                    EXPECT_EQ(grs[static_cast<std::size_t>(b)][p], gr[static_cast<std::size_t>(b)][g.shift(p, a, off)]);
            }
        }
    }
}

TEST(Quadrature, UnitVolume) {
    EXPECT_NEAR(integrate_space(SpatialField(10, 1.0), grid1(10)), 1.0, 1e-15);
    EXPECT_NEAR(integrate_space(SpatialField(49, 1.0), grid2(7)), 1.0, 1e-15);
}

TEST(Quadrature, SineIntegratesToZero) {
    for (int nx : {5, 8, 13}) {
        const Grid g = grid1(nx);
        EXPECT_NEAR(integrate_space(sample(g, [](double x, double) { return std::sin(2 * kPi * x); }), g), 0.0, 1e-15);
    }
}

TEST(Quadrature, SineSquaredIsOneHalf) {
    const Grid g = grid1(8);
    const auto f = sample(g, [](double x, double) { return std::sin(2 * kPi * x) * std::sin(2 * kPi * x); });
    double direct = 0.0;
    for (int i = 0; i < 8; ++i) direct += std::pow(std::sin(2 * kPi * i / 8.0), 2) / 8.0;
    EXPECT_NEAR(direct, 0.5, 1e-15);
    EXPECT_NEAR(integrate_space(f, g), 0.5, 1e-15);
}

TEST(Norms, ZeroAndConstants) {
    const Grid g{1, 6, 5, 0.7, 0.01};
    EXPECT_EQ(norm_L2Q(SpaceTimeField(g), g), 0.0);
    EXPECT_EQ(norm_L2t_Linfx(SpaceTimeField(g), g), 0.0);
    EXPECT_NEAR(norm_L2Q(SpaceTimeField(g, 1.0), g), std::sqrt(0.7), 1e-15);
    EXPECT_NEAR(norm_L2t_Linfx(SpaceTimeField(g, 1.0), g), std::sqrt(0.7), 1e-15);
}

TEST(Norms, MatchBruteForceSums) {
    auto gen = test::rng(15);
    for (const Grid& g : {Grid{1, 4, 3, 0.5, 0.01}, Grid{2, 4, 3, 0.5, 0.01}}) {
        const auto f = test::random_field(g, gen);
        const double vol = g.dim == 1 ? 0.25 : 0.0625;
        double l2 = 0.0, linf = 0.0;
        for (int n = 0; n < 3; ++n) {
            double mx = 0.0;
            for (double v : f.slice(n)) {
                l2 += v * v * vol * (0.5 / 3);
                mx = std::max(mx, std::abs(v));
            }
            linf += mx * mx * (0.5 / 3);
        }
        EXPECT_NEAR(norm_L2Q(f, g), std::sqrt(l2), 1e-12);
        EXPECT_NEAR(norm_L2t_Linfx(f, g), std::sqrt(linf), 1e-12);

        const auto s = f.slice(1);
        double l1 = 0.0, mx = 0.0;
        for (double v : s) {
            l1 += std::abs(v) * vol;
            mx = std::max(mx, std::abs(v));
        }
        EXPECT_NEAR(norm_L1x(s, g), l1, 1e-12);
        EXPECT_EQ(norm_Linfx(s), mx);
    }
}

TEST(FieldIo, CsvRoundTripIsExact) {
    auto gen = test::rng(16);
    for (const Grid& g : {Grid{1, 5, 3, 0.5, 0.01}, Grid{2, 4, 2, 0.5, 0.01}}) {
        const auto f = test::random_field(g, gen, -1e3, 1e3);
        std::stringstream ss;
        write_field_csv(ss, f, g);
        EXPECT_EQ(read_field_csv(ss, g), f);
    }
}

TEST(FieldIo, RejectsWrongShape) {
    const Grid g{1, 5, 3, 0.5, 0.01};
    std::stringstream ss;
    write_field_csv(ss, SpaceTimeField(g), g);
    EXPECT_THROW(read_field_csv(ss, Grid{1, 6, 3, 0.5, 0.01}), ParseError);
}
