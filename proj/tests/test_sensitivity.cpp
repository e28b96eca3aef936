#include "doctest.h"

#include <cmath>

#include "angio/errors.hpp"
#include "angio/sensitivity.hpp"

using namespace angio;

TEST_SUITE("sensitivity") {

TEST_CASE("family formulas") {
    const auto sp = SensitivitySpec::saturating_power(2);
    CHECK(sp(0.5) == doctest::Approx(0.25 / 1.25));
    CHECK(sp.derivative(0.5) == doctest::Approx(2 * 0.5 / (1.25 * 1.25)));
    const auto ls = SensitivitySpec::linear_saturating();
    CHECK(ls(2.0) == doctest::Approx(2.0 / 3));
    const auto tl = SensitivitySpec::truncated_linear(0.3);
    CHECK(tl(0.2) == 0.2);
    CHECK(tl(0.7) == 0.3);
    CHECK(tl.derivative(0.7) == 0);
    // odd extension
    CHECK(sp(-0.5) == -sp(0.5));
    CHECK(sp.derivative(-0.5) == sp.derivative(0.5));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(SensitivitySpec::saturating_power(0.5), DomainConfigError);
    CHECK_THROWS_AS(SensitivitySpec::truncated_linear(-1), DomainConfigError);
    CHECK_THROWS_AS(SensitivitySpec::tabulated({0, 1}, {0}), DomainConfigError);
    CHECK_THROWS_AS(SensitivitySpec::tabulated({0.1, 1}, {0, 1}), DomainConfigError);
    CHECK_THROWS_AS(SensitivitySpec::tabulated({0, 1, 1}, {0, 1, 2}), DomainConfigError);
}

TEST_CASE("family names round trip") {
    for (auto f : {SensitivityFamily::saturating_power, SensitivityFamily::linear_saturating,
                   SensitivityFamily::truncated_linear, SensitivityFamily::tabulated})
        CHECK(sensitivity_family_from_string(to_string(f)) == f);
    CHECK_THROWS_AS(sensitivity_family_from_string("quadratic"), DomainConfigError);
}

TEST_CASE("positivity and derivative consistency") {
    for (const auto& v : {SensitivitySpec::saturating_power(1), SensitivitySpec::saturating_power(2),
                          SensitivitySpec::saturating_power(3.5), SensitivitySpec::linear_saturating(),
                          SensitivitySpec::truncated_linear(1.0)}) {
        const auto r = check_positivity(v);
        CHECK(r.v0_zero);
        CHECK(r.positive);
        CHECK(r.pass());
        CHECK(r.derivative_consistent);
    }
    const auto zero = check_positivity(SensitivitySpec::truncated_linear(0));
    CHECK_FALSE(zero.positive);
    CHECK_FALSE(zero.pass());
}

TEST_CASE("H1 growth orders") {
    const auto a2 = check_H1(SensitivitySpec::saturating_power(2), 1, 0.1);
    CHECK(a2.k0 == doctest::Approx(2).epsilon(0.02));
    CHECK(a2.j == doctest::Approx(1).epsilon(0.03));
    CHECK(a2.pass);
    const auto lin = check_H1(SensitivitySpec::linear_saturating(), 1, 0.1);
    CHECK(lin.k0 == doctest::Approx(1).epsilon(0.03));
    CHECK_FALSE(lin.pass);
    const auto a3 = check_H1(SensitivitySpec::saturating_power(3), 2, 0.1);
    CHECK(a3.k0 == doctest::Approx(3).epsilon(0.02));
    CHECK(a3.j == doctest::Approx(2).epsilon(0.02));
    CHECK(a3.pass);
    // exactly at the bound, the margin rejects it
    CHECK_FALSE(check_H1(SensitivitySpec::saturating_power(1.5), 1, 0.01).pass);
    CHECK_THROWS_AS(check_H1(SensitivitySpec::truncated_linear(0), 1, 0.1), HypothesisViolation);
    CHECK_THROWS_AS(check_H1(SensitivitySpec::linear_saturating(), 1, 2.0), DomainConfigError);
}

TEST_CASE("growth envelope") {
    const auto a2 = check_growth_envelope(SensitivitySpec::saturating_power(2), 2, 1);
    CHECK(a2.c_m == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a2.C_M == doctest::Approx(1).epsilon(1e-12));
    CHECK(a2.pass);
    const auto lin = check_growth_envelope(SensitivitySpec::linear_saturating(), 1, 1);
    CHECK(lin.c_m == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lin.C_M == doctest::Approx(1).epsilon(1e-7));
    CHECK(lin.pass);
    const auto wrong = check_growth_envelope(SensitivitySpec::saturating_power(2), 1, 1);
    CHECK(wrong.c_m == 0);
    CHECK_FALSE(wrong.pass);
    const auto blowup = check_growth_envelope(SensitivitySpec::linear_saturating(), 2, 1);
    CHECK(std::isinf(blowup.C_M));
    CHECK_FALSE(blowup.pass);
}

TEST_CASE("f and g diagnostics") {
    const auto id = f_g_diagnostics(SensitivitySpec::truncated_linear(10), 0.1);
    CHECK(id.f == doctest::Approx(0.01).epsilon(1e-12));
    const auto a2 = f_g_diagnostics(SensitivitySpec::saturating_power(2), 0.1);
    CHECK(a2.f == doctest::Approx(std::pow(0.01 / 1.01, 2)).epsilon(1e-9));
    for (const auto& v : {SensitivitySpec::saturating_power(2), SensitivitySpec::linear_saturating()}) {
        double pf = 0, pg = 0;
        for (double d : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0}) {
            const auto fg = f_g_diagnostics(v, d);
            CHECK(fg.f >= pf);
            CHECK(fg.g >= pg);
            pf = fg.f;
            pg = fg.g;
        }
        const auto tiny = f_g_diagnostics(v, 1e-8);
        CHECK(tiny.f < 1e-14);
        CHECK(tiny.g < 1e-14);
    }
}

TEST_CASE("saturating power is bounded by 1") {
    for (double alpha : {1.0, 2.0, 4.0}) {
        const auto v = SensitivitySpec::saturating_power(alpha);
        for (int k = 0; k <= 400; ++k) {
            const double s = std::pow(10.0, -8 + 10.0 * k / 400);
            CHECK(v(s) <= 1);
        }
    }
}

TEST_CASE("tabulated monotone cubic") {
    std::vector<double> s, vals;
    for (int k = 0; k <= 20; ++k) {
        s.push_back(0.25 * k);
        vals.push_back(s.back() * s.back() / (1 + s.back() * s.back()));
    }
    const auto tab = SensitivitySpec::tabulated(s, vals);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(tab(s[k]) == doctest::Approx(vals[k]).epsilon(1e-14));
    double prev = -1;
    for (int k = 0; k <= 1000; ++k) {
        const double x = 5.0 * k / 1000;
        CHECK(tab(x) >= prev);
        prev = tab(x);
        CHECK(std::abs(tab(x) - x * x / (1 + x * x)) < 6e-3);
    }
    // reference monotone-cubic values for this table
    const std::pair<double, double> ref[] = {{0.125, 0.021237024221453286}, {0.3, 0.07933564013840828},
                                             {1.1, 0.5473068523200477},    {2.6, 0.8711304383046999},
                                             {4.875, 0.9596260621619044}};
    for (const auto& [x, y] : ref) CHECK(tab(x) == doctest::Approx(y).epsilon(1e-12));
    const auto pos = check_positivity(tab);
    CHECK(pos.v0_zero);
    CHECK(pos.derivative_consistent);
}

TEST_CASE("max |V'| sampling") {
    CHECK(max_abs_derivative(SensitivitySpec::linear_saturating(), 1.0) == doctest::Approx(1));
    CHECK(max_abs_derivative(SensitivitySpec::saturating_power(2), 0.0) == 0);
    // peak of 2s/(1+s^2)^2 at s = 1/sqrt(3)
    const double peak = 2 / std::sqrt(3.0) / std::pow(4.0 / 3, 2);
    CHECK(max_abs_derivative(SensitivitySpec::saturating_power(2), 2.0) == doctest::Approx(peak).epsilon(1e-3));
}

}
