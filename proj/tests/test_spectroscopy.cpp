#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ercav/random.hpp"
#include "ercav/spectroscopy.hpp"

using namespace ercav;

TEST_CASE("oscillator strength from absorption", "[spectroscopy]") {
    const auto p = er1536();

    SECTION("defaults reproduce the literature value within 15%") {
        const double f = oscillator_strength(p.alpha_max, p.fwhm_abs, p.density, p.n);
        CHECK(f == Catch::Approx(1.095e-7).epsilon(0.15));
    }

    SECTION("linear in the absorption coefficient") {
        const double f1 = oscillator_strength(p.alpha_max, p.fwhm_abs, p.density, p.n);
        const double f2 = oscillator_strength(2.0 * p.alpha_max, p.fwhm_abs, p.density, p.n);
        CHECK(f2 == Catch::Approx(2.0 * f1).epsilon(1e-12));
    }

    SECTION("inverse in the ion density") {
        const double f1 = oscillator_strength(p.alpha_max, p.fwhm_abs, p.density, p.n);
        const double f2 = oscillator_strength(p.alpha_max, p.fwhm_abs, 2.0 * p.density, p.n);
        CHECK(f2 == Catch::Approx(0.5 * f1).epsilon(1e-12));
    }

    SECTION("invalid inputs") {
        CHECK_THROWS_AS(oscillator_strength(-1.0, p.fwhm_abs, p.density, p.n), std::domain_error);
        CHECK_THROWS_AS(oscillator_strength(p.alpha_max, 0.0, p.density, p.n), std::domain_error);
    }
}

TEST_CASE("radiative rate", "[spectroscopy]") {
    SECTION("default convention reproduces the expected single-path rate within 10%") {
        const double rate = radiative_rate(1.095e-7, 1536e-9, 1.785);
        CHECK(rate == Catch::Approx(10.03).epsilon(0.10));
    }

    SECTION("vacuum limit: every convention collapses to the bare formula") {
        for (auto c : {LocalFieldConvention::none, LocalFieldConvention::index_only,
                       LocalFieldConvention::index_lorentz, LocalFieldConvention::virtual_cavity}) {
            const double rate = radiative_rate(1.095e-7, 1536e-9, 1.0, convention(c));
            CHECK(rate == Catch::Approx(radiative_rate(1.095e-7, 1536e-9, 1.0,
                                                       convention(LocalFieldConvention::none)))
                              .epsilon(1e-14));
            CHECK(convention(c).correction(1.0) == Catch::Approx(1.0).epsilon(1e-14));
        }
    }

    SECTION("linear in the oscillator strength") {
        const double r1 = radiative_rate(1.0e-7, 1536e-9, 1.785);
        const double r2 = radiative_rate(2.0e-7, 1536e-9, 1.785);
        CHECK(r2 == Catch::Approx(2.0 * r1).epsilon(1e-12));
    }

    SECTION("convention lookup by name") {
        CHECK(convention_by_name("virtual-cavity").id == LocalFieldConvention::virtual_cavity);
        CHECK_THROWS_AS(convention_by_name("bogus"), std::domain_error);
    }
}

TEST_CASE("branching ratio", "[spectroscopy]") {
    CHECK(branching_ratio(10.03, 11.4e-3) == Catch::Approx(0.114342).epsilon(1e-6));
    CHECK(branching_ratio(50.0, 1.0 / 50.0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(branching_ratio(5.0, 11.4e-3) == Catch::Approx(0.057).epsilon(1e-12));
    CHECK_THROWS_AS(branching_ratio(100.0, 11.4e-3), std::domain_error);
    CHECK_THROWS_AS(branching_ratio(0.0, 1.0), std::domain_error);

    // composing rate and branching stays linear in the oscillator strength
    const double b1 = branching_ratio(radiative_rate(0.5e-7, 1536e-9, 1.785), 11.4e-3);
    const double b2 = branching_ratio(radiative_rate(1.0e-7, 1536e-9, 1.785), 11.4e-3);
    CHECK(b2 == Catch::Approx(2.0 * b1).epsilon(1e-12));
}

TEST_CASE("purcell-modified lifetime", "[spectroscopy]") {
    SECTION("predicted cavity lifetime lands near 0.9 ms") {
        const double tau = purcell_lifetime(11.4e-3, 116.0, 0.114);
        CHECK(tau > 0.78e-3);
        CHECK(tau < 0.92e-3);
        CHECK(11.4e-3 / tau == Catch::Approx(14.224).epsilon(1e-9));
    }

    SECTION("no enhancement leaves the lifetime untouched") {
        CHECK(purcell_lifetime(11.4e-3, 0.0, 0.5) == 11.4e-3);
    }

    SECTION("inverting the measured lifetime pair") {
        // F solving (1 + beta F)/tau_bulk = 1/(1.8 ms)
        const double f_star = (10.8 / 1.8 - 1.0) / 0.1144;
        CHECK(purcell_lifetime(10.8e-3, f_star, 0.1144) == Catch::Approx(1.8e-3).epsilon(1e-12));
    }
}

TEST_CASE("effective purcell from lifetimes", "[spectroscopy]") {
    CHECK(effective_purcell_from_lifetimes(11.4e-3, 1.8e-3, 0.10) ==
          Catch::Approx(53.3333333).epsilon(1e-6));
    CHECK(effective_purcell_from_lifetimes(5e-3, 5e-3, 0.3) == 0.0);
    CHECK_THROWS_AS(effective_purcell_from_lifetimes(1.8e-3, 11.4e-3, 0.1), std::domain_error);
}

TEST_CASE("lifetime mapping and its inverse are exact round trips", "[spectroscopy]") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 500; ++i) {
        const double tau = 1e-4 + uniform01(rng) * 0.1;
        const double f = uniform01(rng) * 600.0;
        const double beta = 0.01 + uniform01(rng) * 0.99;
        const double f_back = effective_purcell_from_lifetimes(tau, purcell_lifetime(tau, f, beta), beta);
        CHECK(f_back == Catch::Approx(f).margin(1e-10 * std::max(f, 1.0)));
    }
}

TEST_CASE("beer-lambert attenuation", "[spectroscopy]") {
    SECTION("bulk absorption over the device length") {
        CHECK(beer_lambert(2450.0, 26e-6) == Catch::Approx(0.0617135568).epsilon(1e-8));
    }

    SECTION("confinement that reproduces the quoted 3.8%") {
        CHECK(confinement_for_attenuation(2450.0, 26e-6, 0.038) ==
              Catch::Approx(0.6081762687).epsilon(1e-8));
        CHECK(beer_lambert(2450.0, 26e-6, 0.608) == Catch::Approx(0.038).margin(2e-4));
    }

    SECTION("vanishing length absorbs nothing") {
        CHECK(beer_lambert(2450.0, 1e-30) == Catch::Approx(0.0).margin(1e-20));
    }

    SECTION("monotone in every argument and bounded by 1") {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 200; ++i) {
            const double a = 1.0 + uniform01(rng) * 1e4;
            const double l = 1e-6 + uniform01(rng) * 1e-3;
            const double cf = 0.05 + 0.9 * uniform01(rng);
            const double base = beer_lambert(a, l, cf);
            CHECK(base < 1.0);
            CHECK(beer_lambert(a * 1.5, l, cf) > base);
            CHECK(beer_lambert(a, l * 1.5, cf) > base);
            CHECK(beer_lambert(a, l, std::min(1.0, cf * 1.1)) > base);
        }
    }
}

TEST_CASE("dip and cooperativity conversions", "[spectroscopy]") {
    CHECK(dip_to_cooperativity(0.25) == Catch::Approx(0.1547005384).epsilon(1e-9));
    CHECK(dip_to_cooperativity(0.40) == Catch::Approx(0.2909944487).epsilon(1e-9));
    CHECK(cooperativity_to_dip(0.0) == 0.0);
    CHECK_THROWS_AS(dip_to_cooperativity(1.0), std::domain_error);

    // Round trip at 1e-10 relative. Above C ~ 1e3 the dip itself saturates to
    // 1 within double spacing (1 - dip < 1e-6 carries < 10 significant bits of
    // C), so the identity is only meaningful below that representability
    // ceiling; every cooperativity in this toolkit is O(0.1).
    std::mt19937_64 rng(23);
    for (int i = 0; i < 400; ++i) {
        const double c = uniform01(rng) * 500.0;
        const double back = dip_to_cooperativity(cooperativity_to_dip(c));
        CHECK(back == Catch::Approx(c).margin(1e-10 * std::max(c, 1.0)));
    }
}

TEST_CASE("saturation of the ensemble cooperativity", "[spectroscopy]") {
    CHECK(saturated_cooperativity(0.291, 0.0) == 0.291);
    // s that collapses the 40% dip to 25%
    CHECK(saturated_cooperativity(0.2909944487, 0.8810176861) ==
          Catch::Approx(0.1547005384).epsilon(1e-8));
    CHECK(saturated_cooperativity(0.291, 1e12) < 1e-9);
}

TEST_CASE("constant injection cancels in the branching chain", "[spectroscopy]") {
    // perturbing eps0 consistently must leave beta = Gamma * tau unchanged
    const auto p = er1536();
    PhysConstants bumped = kCodata2018;
    bumped.eps0 *= 1.1;

    auto beta_with = [&](const PhysConstants& k) {
        const double f = oscillator_strength(p.alpha_max, p.fwhm_abs, p.density, p.n, convention(), k);
        const double rate = radiative_rate(f, p.lambda0, p.n, convention(), k);
        return branching_ratio(rate, p.tau_bulk);
    };
    CHECK(beta_with(bumped) == Catch::Approx(beta_with(kCodata2018)).epsilon(1e-12));
}

TEST_CASE("transition parameter validation", "[spectroscopy]") {
    auto p = er1536();
    CHECK_NOTHROW(p.validate());
    p.lambda0 = 500e-9;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p = er1536();
    p.density = 0.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
}
