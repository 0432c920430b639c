#include <doctest.h>

#include "logsob/profiles.hpp"

#include <cmath>

using namespace logsob;

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kE = std::exp(1.0);
}  // namespace

TEST_CASE("flat_euclidean: M vanishes at t = 1/(pi e^2)") {
    Profile p = Profile::flat_euclidean(2);
    CHECK(p(1.0 / (kPi * kE * kE)) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(p(1.0) == doctest::Approx(-std::log(kPi * kE * kE)).epsilon(1e-14));
}

TEST_CASE("flat_euclidean: tensor identity M_n = n * M_1") {
    Profile m1 = Profile::flat_euclidean(1);
    for (int n : {2, 3, 7}) {
        Profile mn = Profile::flat_euclidean(n);
        for (double t : {1e-3, 0.2, 1.0, 42.0}) {
            CHECK(mn(t) == doctest::Approx(n * m1(t)).epsilon(1e-15));
        }
    }
}

TEST_CASE("schrodinger_kato: zero ratio vanishes at pi t = 1") {
    Profile p = Profile::schrodinger_kato(3, 0.0);
    CHECK(p(1.0 / kPi) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK_THROWS_AS(Profile::schrodinger_kato(3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Profile::schrodinger_kato(3, 1.5), std::invalid_argument);
}

TEST_CASE("very_degenerate: value at t = 1 with unit constants") {
    Profile p = Profile::very_degenerate(1.0, 1.0, 1.0);
    // c2 2^g' t^{-g'} - ln t + ln(2 c1) = 2 + ln 2
    CHECK(p(1.0) == doctest::Approx(2.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("domain_dirichlet and lie_polynomial formulas") {
    Profile d = Profile::domain_dirichlet(2, 5.0);
    CHECK(d(0.7) == doctest::Approx(std::log(5.0 * std::pow(kPi * kE * kE * 0.7, -1.0))));
    Profile l = Profile::lie_polynomial(4, 3.0);
    CHECK(l(0.5) == doctest::Approx(2.0 * std::log(3.0) - 2.0 * std::log(0.25)));
}

TEST_CASE("damek_ricci: both branches as printed, jump only when n != 3") {
    Profile p3 = Profile::damek_ricci(3, 2.0, 1.0);
    CHECK(p3(0.5) == doctest::Approx(1.5 * std::log(2.0) - 1.5 * std::log(0.5) - 0.25));
    CHECK(p3(2.0) == doctest::Approx(1.5 * std::log(2.0) - 1.5 * std::log(2.0) - 1.0));

    auto r3 = check_nonincreasing(p3, log_spaced(1e-3, 1e3, 200));
    CHECK(r3.ok);
    REQUIRE(r3.junction_jumps.size() == 1);
    CHECK(std::abs(r3.junction_jumps[0]) < 1e-6);  // continuous when n = 3

    Profile p5 = Profile::damek_ricci(5, 2.0, 1.0);
    auto r5 = check_nonincreasing(p5, log_spaced(1e-3, 1e3, 200));
    CHECK(r5.ok);  // junction reported separately, not failed
    CHECK(r5.junction_jumps[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-5));
}

TEST_CASE("eval_profile rejects nonpositive t") {
    Profile p = Profile::flat_euclidean(1);
    CHECK_THROWS_AS(p(0.0), std::invalid_argument);
    CHECK_THROWS_AS(p(-1.0), std::invalid_argument);
}

TEST_CASE("check_nonincreasing: increasing custom profile fails at first pair") {
    Profile p = Profile::custom([](double t) { return t; });
    ArrayXd grid = log_spaced(1e-2, 1e2, 32);
    auto r = check_nonincreasing(p, grid);
    CHECK_FALSE(r.ok);
    REQUIRE(r.first_violation_t.has_value());
    CHECK(*r.first_violation_t == doctest::Approx(grid[1]));
}

TEST_CASE("catalog profiles are non-increasing on [1e-4, 1e4]") {
    ArrayXd grid = log_spaced(1e-4, 1e4, 400);
    std::vector<Profile> catalog = {
        Profile::flat_euclidean(1),        Profile::flat_euclidean(3),
        Profile::domain_dirichlet(2, 4.0), Profile::lie_polynomial(3, 2.0),
        Profile::damek_ricci(4, 2.0, 1.5), Profile::schrodinger_kato(3, 0.5),
        Profile::very_degenerate(1.0, 0.5, 1.0 / 3.0),
    };
    for (const auto& p : catalog) {
        auto r = check_nonincreasing(p, grid);
        CHECK(r.ok);
    }
}

TEST_CASE("custom_table: log-linear interpolation and round-trippable data") {
    Profile p = Profile::custom_table({0.1, 1.0, 10.0}, {3.0, 1.0, 0.0});
    CHECK(p(0.1) == doctest::Approx(3.0));
    CHECK(p(1.0) == doctest::Approx(1.0));
    CHECK(p(std::sqrt(10.0)) == doctest::Approx(0.5));
    CHECK(check_nonincreasing(p, log_spaced(0.05, 20.0, 64)).ok);
}

TEST_CASE("gross catalog constants") {
    CHECK(gross_gaussian().a == 2.0);
    CHECK(gross_torus().a == 2.0);
    CHECK(gross_interval_uniform(kPi).a == doctest::Approx(2.0));
    CHECK(gross_interval_periodic(2.0 * kPi).a == doctest::Approx(2.0));
    CHECK(gross_weighted_sin(1.5).a == doctest::Approx(2.0));
    CHECK(gross_weighted_jacobi(1.0, 2.0).a == doctest::Approx(2.0 / (1.0 * 5.0)));
    CHECK(gross_ultraspherical(0.5).a == doctest::Approx(1.0));
    CHECK(gross_flat_lebesgue().a == doctest::Approx(1.0 / (kPi * kE * kE)));
    CHECK(gross_domain(2, 4.0).a == doctest::Approx(4.0 / (kPi * kE * kE)));
    CHECK_THROWS_AS(gross_weighted_sin(0.4), std::invalid_argument);
    CHECK_THROWS_AS(gross_weighted_jacobi(0.3, 2.0), std::invalid_argument);
}

TEST_CASE("kato coupling constant: c_3 = pi") {
    // pi^{3/2} / Gamma(1/2) with Gamma(1/2) = sqrt(pi)
    CHECK(kato_coupling_constant(3) == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("kato norm: zero potential") {
    RadialPotential V{[](double) { return 0.0; }, {}, 8.0};
    CHECK(kato_norm_radial(V, 3, log_spaced(1e-3, 4.0, 9)) == 0.0);
}

TEST_CASE("kato norm: unit-ball indicator equals 2 pi, supremum at the center") {
    RadialPotential V{[](double r) { return r < 1.0 ? 1.0 : 0.0; }, {1.0}, 8.0};
    ArrayXd probes(6);
    probes << 0.0, 0.25, 0.5, 1.0, 2.0, 4.0;
    const double norm = kato_norm_radial(V, 3, probes);
    CHECK(norm == doctest::Approx(2.0 * kPi).epsilon(1e-8));
    // Off-center probes give strictly smaller values: 2pi - (2pi/3) a^2 for a < 1.
    const double at_half = kato_norm_radial(V, 3, ArrayXd::Constant(1, 0.5));
    CHECK(at_half == doctest::Approx(2.0 * kPi - 2.0 * kPi / 3.0 * 0.25).epsilon(1e-8));
}

TEST_CASE("kato norm: shell reduction agrees with a direct spherical oracle") {
    // Independent oracle: full spherical integral
    //   int |V(|y|)| / |x - y| dy = 2 pi int_0^inf int_{-1}^{1} |V(r)| r^2
    //                               / sqrt(r^2 + a^2 - 2 a r c) dc dr
    // evaluated by brute-force midpoint quadrature, no shell theorem.
    const double a = 0.5;
    const int nr = 3000, nc = 3000;
    double oracle = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double r = (i + 0.5) / nr;  // V supported on [0,1]
        double inner = 0.0;
        for (int j = 0; j < nc; ++j) {
            const double c = -1.0 + 2.0 * (j + 0.5) / nc;
            inner += 1.0 / std::sqrt(r * r + a * a - 2.0 * a * r * c);
        }
        inner *= 2.0 / nc;
        oracle += r * r * inner / nr;
    }
    oracle *= 2.0 * kPi;

    RadialPotential V{[](double r) { return r < 1.0 ? 1.0 : 0.0; }, {1.0}, 8.0};
    const double reduced = kato_norm_radial(V, 3, ArrayXd::Constant(1, a));
    CHECK(reduced == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("kato norm: monotone in |V|") {
    RadialPotential small{[](double r) { return r < 1.0 ? 0.5 : 0.0; }, {1.0}, 8.0};
    RadialPotential big{[](double r) { return r < 1.5 ? 1.0 : 0.0; }, {1.5}, 8.0};
    ArrayXd probes = log_spaced(1e-2, 4.0, 7);
    CHECK(kato_norm_radial(small, 3, probes) <= kato_norm_radial(big, 3, probes));
}

TEST_CASE("kato norm: r^{-3} singularity is rejected as not Kato") {
    RadialPotential V{[](double r) { return std::pow(std::max(r, 1e-300), -3.0); }, {}, 2.0};
    CHECK_THROWS_WITH_AS(kato_norm_radial(V, 3, ArrayXd::Zero(1)), doctest::Contains("not Kato"),
                         std::runtime_error);
}

TEST_CASE("kato norm: only n = 3 in scope") {
    RadialPotential V{[](double) { return 0.0; }, {}, 2.0};
    CHECK_THROWS_AS(kato_norm_radial(V, 4, ArrayXd::Zero(1)), std::invalid_argument);
}
