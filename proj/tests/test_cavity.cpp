#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "ercav/cavity.hpp"
#include "ercav/random.hpp"

using namespace ercav;

namespace {

CavityMode measured_mode() { return CavityMode{1536e-9, 11400.0, 1.65, 1.785}; }

// Smooth separable field on a box [0, Lx] x [0, Ly] x [0, Lz] with the maximum
// at the origin corner; refining the grid keeps the peak offset proportional
// to the spacing, so the midpoint quadrature converges cleanly at second order.
FieldGrid smooth_grid(std::size_t nx, std::size_t ny, std::size_t nz) {
    FieldGrid g;
    g.dims = {nx, ny, nz};
    const double lx = 1e-6, ly = 1e-6, lz = 2e-6;
    g.spacing = {lx / static_cast<double>(nx), ly / static_cast<double>(ny),
                 lz / static_cast<double>(nz)};
    g.field.assign(g.cell_count(), {0, 0, 0});
    g.eps.assign(g.cell_count(), 2.25);
    for (std::size_t iz = 0; iz < nz; ++iz)
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double x = (static_cast<double>(ix) + 0.5) * g.spacing[0];
                const double y = (static_cast<double>(iy) + 0.5) * g.spacing[1];
                const double z = (static_cast<double>(iz) + 0.5) * g.spacing[2];
                const double v = std::cos(0.4 * std::numbers::pi * x / lx) *
                                 std::cos(0.4 * std::numbers::pi * y / ly) *
                                 std::cos(0.45 * std::numbers::pi * z / lz);
                g.field[g.index(ix, iy, iz)] = {v, 0.3 * v, 0.0};
            }
    return g;
}

}  // namespace

TEST_CASE("purcell factor", "[cavity]") {
    SECTION("full overlap at the measured Q reproduces the design estimate") {
        CHECK(purcell_factor(measured_mode(), 1.0) == Catch::Approx(517.0).epsilon(0.02));
        CHECK(purcell_factor(measured_mode(), 1.0) == Catch::Approx(525.028).epsilon(1e-5));
    }

    SECTION("field node gives zero") {
        CHECK(purcell_factor(measured_mode(), 0.0) == 0.0);
    }

    SECTION("linear in overlap and Q, inverse in mode volume") {
        const double full = purcell_factor(measured_mode(), 1.0);
        CHECK(purcell_factor(measured_mode(), 0.5) == Catch::Approx(0.5 * full).epsilon(1e-12));

        std::mt19937_64 rng(3);
        for (int i = 0; i < 100; ++i) {
            CavityMode m{1536e-9, 100.0 + 1e5 * uniform01(rng), 0.1 + 10.0 * uniform01(rng),
                         1.0 + 2.0 * uniform01(rng)};
            const double ov = uniform01(rng);
            const double base = purcell_factor(m, ov);
            CavityMode mq = m;
            mq.q *= 2.0;
            CHECK(purcell_factor(mq, ov) == Catch::Approx(2.0 * base).epsilon(1e-12));
            CavityMode mv = m;
            mv.v_norm *= 2.0;
            CHECK(purcell_factor(mv, ov) == Catch::Approx(0.5 * base).epsilon(1e-12));
        }
    }

    SECTION("overlap outside [0,1] is rejected") {
        CHECK_THROWS_AS(purcell_factor(measured_mode(), -0.1), std::domain_error);
        CHECK_THROWS_AS(purcell_factor(measured_mode(), 1.1), std::domain_error);
    }
}

TEST_CASE("mode volume on a uniform box", "[cavity]") {
    FieldGrid g;
    g.dims = {10, 10, 10};
    g.spacing = {1e-7, 1e-7, 1e-7}; // 1 um^3 box
    g.field.assign(g.cell_count(), {0.7, 0.0, 0.0});
    g.eps.assign(g.cell_count(), 1.0);

    const auto mv = mode_volume(g, 1536e-9);
    CHECK(mv.v_physical == Catch::Approx(1e-18).epsilon(1e-12));
    CHECK(mv.n_at_max == 1.0);
    CHECK(mv.v_norm == Catch::Approx(1e-18 / std::pow(1536e-9, 3)).epsilon(1e-12));
}

TEST_CASE("mode volume is invariant under field rescaling", "[cavity]") {
    auto g = smooth_grid(12, 12, 16);
    const auto base = mode_volume(g, 1536e-9);
    for (auto& e : g.field) {
        e[0] *= 7.0;
        e[1] *= 7.0;
        e[2] *= 7.0;
    }
    const auto scaled = mode_volume(g, 1536e-9);
    CHECK(scaled.v_physical == Catch::Approx(base.v_physical).epsilon(1e-12));
    CHECK(scaled.v_norm == Catch::Approx(base.v_norm).epsilon(1e-12));
}

TEST_CASE("mode volume bounded by the grid volume", "[cavity]") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        FieldGrid g;
        g.dims = {6, 5, 4};
        g.spacing = {3e-8, 4e-8, 5e-8};
        g.field.resize(g.cell_count());
        g.eps.resize(g.cell_count());
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            g.field[i] = {uniform01(rng), uniform01(rng), uniform01(rng)};
            g.eps[i] = 1.0 + 3.0 * uniform01(rng);
        }
        const double total = static_cast<double>(g.cell_count()) * g.cell_volume();
        CHECK(mode_volume(g, 1536e-9).v_physical <= total * (1.0 + 1e-12));
    }

    // equality iff the integrand is constant
    FieldGrid g;
    g.dims = {4, 4, 4};
    g.spacing = {1e-8, 1e-8, 1e-8};
    g.field.assign(g.cell_count(), {0.3, -0.2, 0.1});
    g.eps.assign(g.cell_count(), 3.1);
    const double total = static_cast<double>(g.cell_count()) * g.cell_volume();
    CHECK(mode_volume(g, 1536e-9).v_physical == Catch::Approx(total).epsilon(1e-12));
}

TEST_CASE("mode volume quadrature converges at second order", "[cavity]") {
    const auto v1 = mode_volume(smooth_grid(8, 8, 16), 1536e-9).v_physical;
    const auto v2 = mode_volume(smooth_grid(16, 16, 32), 1536e-9).v_physical;
    const auto v4 = mode_volume(smooth_grid(32, 32, 64), 1536e-9).v_physical;
    const double d1 = std::abs(v2 - v1);
    const double d2 = std::abs(v4 - v2);
    // second order: successive refinements shrink the change by ~4x
    CHECK(d2 < 0.4 * d1);
}

TEST_CASE("mode volume rejects a dead field", "[cavity]") {
    FieldGrid g;
    g.dims = {3, 3, 3};
    g.spacing = {1e-8, 1e-8, 1e-8};
    g.field.assign(g.cell_count(), {0, 0, 0});
    g.eps.assign(g.cell_count(), 2.0);
    CHECK_THROWS_AS(mode_volume(g, 1536e-9), std::domain_error);
}

TEST_CASE("surrogate nanobeam mode", "[cavity]") {
    SECTION("default parameters put the field maximum inside the dielectric") {
        const auto g = surrogate_mode();
        const auto mv = mode_volume(g, 1536e-9);
        CHECK(g.eps[mv.max_cell] > 1.0);
        CHECK(mv.n_at_max == Catch::Approx(1.785).epsilon(1e-12));
    }

    SECTION("normalized volume lands in a sane band") {
        const auto mv = mode_volume(surrogate_mode(), 1536e-9);
        CHECK(mv.v_norm > 0.5);
        CHECK(mv.v_norm < 5.0);
    }

    SECTION("matching the published mode volume fixes the index near 1.785") {
        // 1.65 (lambda/n)^3 = 1.05 um^3
        const double n = 1536e-9 * std::cbrt(1.65 / 1.05e-18);
        CHECK(n == Catch::Approx(1.785).margin(0.005));
    }

    SECTION("too-coarse axial sampling is a configuration error") {
        SurrogateModeParams p;
        p.spacing[2] = p.period / 4.0;
        CHECK_THROWS_AS(surrogate_mode(p), config_error);
    }

    SECTION("cross-section must fit in the grid") {
        SurrogateModeParams p;
        p.dims[0] = 8;
        CHECK_THROWS_AS(surrogate_mode(p), config_error);
    }

    SECTION("deterministic for fixed inputs") {
        const auto a = surrogate_mode();
        const auto b = surrogate_mode();
        CHECK(a.field == b.field);
        CHECK(a.eps == b.eps);
    }
}

TEST_CASE("nitrogen tuning shifts the resonance linearly", "[cavity]") {
    const auto mode = measured_mode();

    SECTION("zero thickness is the identity") {
        const auto same = tuned_resonance(mode, TuningState{0.0, -2e18});
        CHECK(same.lambda0 == mode.lambda0);
        CHECK(same.q == mode.q);
    }

    SECTION("two half deposits equal one full deposit") {
        const TuningState half{5e-9, -2e18};
        const TuningState full{10e-9, -2e18};
        const auto two_step = tuned_resonance(tuned_resonance(mode, half), half);
        const auto one_step = tuned_resonance(mode, full);
        CHECK(two_step.lambda0 == Catch::Approx(one_step.lambda0).epsilon(1e-12));
    }

    SECTION("three deposits walk the resonance monotonically onto the line") {
        const double nu_target = freq_from_wavelength(1536e-9).hz;
        const double sensitivity = -2e18; // Hz per meter of deposited layer
        // start 60 GHz blue of the line; 3 equal steps of 10 nm close the gap
        CavityMode detuned = mode;
        detuned.lambda0 = kCodata2018.c / (nu_target + 60e9);
        double previous_gap = 60e9;
        for (int step = 0; step < 3; ++step) {
            detuned = tuned_resonance(detuned, TuningState{10e-9, sensitivity});
            const double gap = std::abs(detuned.frequency().hz - nu_target);
            CHECK(gap < previous_gap);
            previous_gap = gap;
        }
        CHECK(previous_gap < 1e6); // lands on resonance to < 1 MHz
    }
}

TEST_CASE("bare cavity transmission is a unit-peak lorentzian", "[cavity]") {
    const auto mode = measured_mode();
    const double nu_c = mode.frequency().hz;
    const double kappa = mode.linewidth();

    CHECK(cavity_transmission(OpticalFrequency{nu_c}, mode) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(cavity_transmission(OpticalFrequency{nu_c + kappa / 2}, mode) ==
          Catch::Approx(0.5).epsilon(1e-9));
    CHECK(cavity_transmission(OpticalFrequency{nu_c - kappa / 2}, mode) ==
          Catch::Approx(0.5).epsilon(1e-9));

    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        const double delta = (uniform01(rng) - 0.5) * 10.0 * kappa;
        const double up = cavity_transmission(OpticalFrequency{nu_c + delta}, mode);
        const double down = cavity_transmission(OpticalFrequency{nu_c - delta}, mode);
        CHECK(up == Catch::Approx(down).epsilon(1e-9));
        CHECK(up <= 1.0 + 1e-12);
    }
}

TEST_CASE("ensemble dip follows 1/(1+C)^2", "[cavity]") {
    const auto mode = measured_mode();
    const double nu_c = mode.frequency().hz;

    auto on_resonance = [&](double coop) {
        const EnsembleLine line{nu_c, 500e6, coop};
        return cavity_transmission(OpticalFrequency{nu_c}, mode, line);
    };

    SECTION("40% and 25% dips at the matching cooperativities") {
        CHECK(1.0 - on_resonance(0.291) == Catch::Approx(0.40).margin(0.005));
        CHECK(1.0 - on_resonance(0.155) == Catch::Approx(0.25).margin(0.005));
    }

    SECTION("analytic on-resonance value across cooperativities") {
        std::mt19937_64 rng(13);
        for (int i = 0; i < 50; ++i) {
            const double c = 3.0 * uniform01(rng);
            CHECK(on_resonance(c) == Catch::Approx(1.0 / ((1 + c) * (1 + c))).epsilon(1e-6));
        }
    }

    SECTION("zero cooperativity restores the bare cavity") {
        CHECK(on_resonance(0.0) == Catch::Approx(1.0).epsilon(1e-12));
    }
}
