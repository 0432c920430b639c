#include <doctest.h>

#include "logsob/functionals.hpp"
#include "logsob/grid.hpp"

#include <cmath>

using namespace logsob;

namespace {

constexpr double kPi = 3.14159265358979323846;

double std_normal_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

TestFunction constant_fn(int dim, double c, const Box& support) {
    TestFunction f;
    f.dim = dim;
    f.eval = [c](const VectorXd&) { return c; };
    f.partials.assign(static_cast<size_t>(dim), [](const VectorXd&) { return 0.0; });
    f.support = support;
    return f;
}

// sqrt of the 1-D heat kernel p_t, so that f^2 = p_t.
TestFunction sqrt_heat_kernel_1d(double t, double radius) {
    TestFunction f;
    f.dim = 1;
    const double norm = std::pow(2.0 * kPi * t, -0.25);
    f.eval = [=](const VectorXd& x) { return norm * std::exp(-x[0] * x[0] / (4.0 * t)); };
    f.partials = {[=](const VectorXd& x) {
        return -x[0] / (2.0 * t) * norm * std::exp(-x[0] * x[0] / (4.0 * t));
    }};
    f.support = Box::of({-radius}, {radius});
    return f;
}

}  // namespace

TEST_CASE("integrate: constant on [0,1] with unit weight is exact") {
    Discretization d(single_factor_space(lebesgue_factor(0.0, 1.0, 64)));
    CHECK(d.integrate(ArrayXd::Ones(d.size())) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integrate: standard Gaussian density has unit mass") {
    FactorSpace g = lebesgue_factor(8.0, 2048);
    g.measure_weight = std_normal_density;
    Discretization d(single_factor_space(g));
    // Probability-factor normalization: tail beyond |x|=8 is ~1.2e-15.
    CHECK(d.integrate(ArrayXd::Ones(d.size())) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("integrate: Gaussian second moment") {
    FactorSpace g = lebesgue_factor(8.0, 2048);
    g.measure_weight = std_normal_density;
    Discretization d(single_factor_space(g));
    ArrayXd xsq = d.axis(0).square();
    CHECK(d.integrate(xsq) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("integrate: non-finite node value rejected with coordinates") {
    Discretization d(single_factor_space(lebesgue_factor(0.0, 1.0, 16)));
    ArrayXd v = ArrayXd::Ones(d.size());
    v[3] = std::nan("");
    CHECK_THROWS_WITH_AS(d.integrate(v) /* node named in message */,
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("quadrature: midpoint exact for affine integrands") {
    Discretization d(single_factor_space(lebesgue_factor(-1.0, 3.0, 32)));
    ArrayXd v = 2.0 + 0.75 * d.axis(0);
    // integral of 2 + 0.75 x over [-1,3] = 8 + 3 = 11
    CHECK(d.integrate(v) == doctest::Approx(11.0).epsilon(1e-14));
}

TEST_CASE("quadrature: doubling nodes reduces smooth-integrand error by >= 3.9") {
    // sin has nonvanishing boundary derivative on [0,1], so the h^2 term is genuine.
    const double exact = 1.0 - std::cos(1.0);
    auto err = [&](int n) {
        Discretization d(single_factor_space(lebesgue_factor(0.0, 1.0, n)));
        return std::abs(d.integrate(d.axis(0).sin()) - exact);
    };
    const double e1 = err(64), e2 = err(128);
    CHECK(e1 / e2 >= 3.9);
    CHECK(e1 / e2 <= 4.1);
}

TEST_CASE("entropy: constant function on a probability space vanishes") {
    FactorSpace g = lebesgue_factor(8.0, 1024);
    g.measure_weight = std_normal_density;
    ProductSpace space = single_factor_space(g);
    TestFunction f = constant_fn(1, 3.0, space_box(space));
    CHECK(entropy(space, f) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("entropy: Gaussian heat kernel at t=1 matches the closed form") {
    // f^2 = (2 pi)^{-1/2} exp(-x^2/2): entropy = -ln(2 pi)/2 - 1/2.
    ProductSpace space = single_factor_space(lebesgue_factor(8.0, 2048));
    TestFunction f = sqrt_heat_kernel_1d(1.0, 8.0);
    const double expected = -0.5 * std::log(2.0 * kPi) - 0.5;
    CHECK(entropy(space, f) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("entropy: scales as c^2 under f -> c f and is invariant under f -> -f") {
    ProductSpace space = single_factor_space(lebesgue_factor(8.0, 512));
    TestFunction f = sqrt_heat_kernel_1d(0.7, 8.0);
    const double base = entropy(space, f);

    for (double c : {2.0, 0.3, -1.0}) {
        TestFunction g = f;
        auto eval = f.eval;
        g.eval = [eval, c](const VectorXd& x) { return c * eval(x); };
        auto d0 = f.partials[0];
        g.partials = {[d0, c](const VectorXd& x) { return c * d0(x); }};
        CHECK(entropy(space, g) == doctest::Approx(c * c * base).epsilon(1e-12));
    }
}

TEST_CASE("entropy: null function rejected") {
    ProductSpace space = single_factor_space(lebesgue_factor(0.0, 1.0, 32));
    TestFunction z = constant_fn(1, 0.0, space_box(space));
    CHECK_THROWS_WITH_AS(entropy(space, z), doctest::Contains("null function"),
                         std::invalid_argument);
}

TEST_CASE("entropy: invariant under factor relabeling for pure tensor measures") {
    FactorSpace a = lebesgue_factor(0.0, 1.0, 96);
    FactorSpace b = lebesgue_factor(-2.0, 2.0, 128);
    b.measure_weight = [](double x) { return std::exp(-x * x); };

    auto u = [](double x) { return std::sin(kPi * x); };
    auto v = [](double y) { return std::exp(-y * y); };

    ProductSpace ab{{a, b}, {unit_weight()}};
    ProductSpace ba{{b, a}, {unit_weight()}};

    TestFunction fab;
    fab.dim = 2;
    fab.eval = [=](const VectorXd& x) { return u(x[0]) * v(x[1]); };
    fab.partials = {[=](const VectorXd& x) { return kPi * std::cos(kPi * x[0]) * v(x[1]); },
                    [=](const VectorXd& x) { return u(x[0]) * (-2.0 * x[1]) * v(x[1]); }};
    fab.support = space_box(ab);

    TestFunction fba;
    fba.dim = 2;
    fba.eval = [=](const VectorXd& x) { return u(x[1]) * v(x[0]); };
    fba.partials = {[=](const VectorXd& x) { return u(x[1]) * (-2.0 * x[0]) * v(x[0]); },
                    [=](const VectorXd& x) { return kPi * std::cos(kPi * x[1]) * v(x[0]); }};
    fba.support = space_box(ba);

    CHECK(entropy(ab, fab) == doctest::Approx(entropy(ba, fba)).epsilon(1e-12));
}

TEST_CASE("entropy: nodes with f = 0 contribute exactly zero") {
    // Support on [0.5, 1] only; the [-1, 0.4] portion of the grid is dead.
    ProductSpace big = single_factor_space(lebesgue_factor(-1.0, 1.0, 512));
    ProductSpace small = single_factor_space(lebesgue_factor(0.5, 1.0, 128));
    TestFunction f;
    f.dim = 1;
    f.eval = [](const VectorXd& x) {
        const double u = (x[0] - 0.5) / 0.5;
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return std::exp(-1.0 / (u * (1.0 - u)));
    };
    f.fd_step = 1e-5;
    f.support = Box::of({0.5}, {1.0});
    // Same node set on [0.5,1] in both spaces (grids align: 512 over 2.0 vs 128 over 0.5
    // share spacing 1/256), so equality is exact up to summation order.
    CHECK(entropy(big, f) == doctest::Approx(entropy(small, f)).epsilon(1e-12));
}

TEST_CASE("dirichlet_energy: constant gives zero in every slot") {
    ProductSpace space{{lebesgue_factor(1.0, 32), lebesgue_factor(1.0, 32)}, {unit_weight()}};
    TestFunction f = constant_fn(2, 1.0, space_box(space));
    auto b = dirichlet_energy(space, f, Eigen::Vector2d(1.0, 2.0));
    CHECK(b.total == 0.0);
    CHECK(b.per_slot[0] == 0.0);
    CHECK(b.per_slot[1] == 0.0);
}

TEST_CASE("dirichlet_energy: sin on the normalized torus gives 1/2") {
    FactorSpace torus = lebesgue_factor(-kPi, kPi, 256);
    torus.measure_weight = [](double) { return 1.0 / (2.0 * kPi); };
    ProductSpace space = single_factor_space(torus);
    TestFunction f;
    f.dim = 1;
    f.eval = [](const VectorXd& x) { return std::sin(x[0]); };
    f.partials = {[](const VectorXd& x) { return std::cos(x[0]); }};
    f.support = space_box(space);
    auto b = dirichlet_energy(space, f, VectorXd::Ones(1));
    CHECK(b.total == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("dirichlet_energy: Grushin weight against a brute-force oracle") {
    const double R = 6.0;
    const int n = 512;
    ProductSpace space{{lebesgue_factor(R, n), lebesgue_factor(R, n)},
                       {SlotWeight{[](const VectorXd& p) { return std::abs(p[0]); },
                                   {SingularLocus{0, 0.0}}}}};
    TestFunction f;
    f.dim = 2;
    f.eval = [](const VectorXd& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); };
    f.partials = {[](const VectorXd& x) {
                      return -2.0 * x[0] * std::exp(-(x[0] * x[0] + x[1] * x[1]));
                  },
                  [](const VectorXd& x) {
                      return -2.0 * x[1] * std::exp(-(x[0] * x[0] + x[1] * x[1]));
                  }};
    f.support = space_box(space);

    const double t0 = 0.8, t1 = 1.7;
    auto b = dirichlet_energy(space, f, Eigen::Vector2d(t0, t1));

    // Independent dense-grid midpoint sum with analytic partials, no library code.
    const int m = 1536;
    const double h = 2.0 * R / m;
    double oracle = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = -R + (i + 0.5) * h;
        for (int j = 0; j < m; ++j) {
            const double y = -R + (j + 0.5) * h;
            const double e = std::exp(-(x * x + y * y));
            const double fx = -2.0 * x * e, fy = -2.0 * y * e;
            oracle += (t0 * fx * fx + t1 * x * x * fy * fy) * h * h;
        }
    }
    CHECK(b.total == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("dirichlet_energy: missing partials and unset fd_step is an error") {
    ProductSpace space = single_factor_space(lebesgue_factor(1.0, 32));
    TestFunction f;
    f.dim = 1;
    f.eval = [](const VectorXd& x) { return x[0]; };
    f.support = space_box(space);
    f.fd_step = 0.0;
    CHECK_THROWS_AS(dirichlet_energy(space, f, VectorXd::Ones(1)), std::invalid_argument);
}

TEST_CASE("dirichlet_energy: finite differences agree with analytic partials at O(h^2)") {
    ProductSpace space = single_factor_space(lebesgue_factor(4.0, 256));
    TestFunction g;
    g.dim = 1;
    g.eval = [](const VectorXd& x) { return std::exp(-x[0] * x[0]); };
    g.support = space_box(space);

    TestFunction a = g;
    a.partials = {[](const VectorXd& x) { return -2.0 * x[0] * std::exp(-x[0] * x[0]); }};

    auto fd_err = [&](double step) {
        TestFunction f = g;
        f.fd_step = step;
        return std::abs(dirichlet_energy(space, f, VectorXd::Ones(1)).total -
                        dirichlet_energy(space, a, VectorXd::Ones(1)).total);
    };
    const double e1 = fd_err(2e-2), e2 = fd_err(1e-2);
    CHECK(e1 / e2 > 3.5);  // second order in the step
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("potential_integral: V = 0 gives 0") {
    ProductSpace space = single_factor_space(lebesgue_factor(1.0, 32));
    TestFunction f = constant_fn(1, 1.0, space_box(space));
    auto r = potential_integral(space, f, [](const VectorXd&) { return 0.0; });
    CHECK(r.value == 0.0);
}

TEST_CASE("potential_integral: -ln|x| on a staggered grid integrates to 2") {
    ProductSpace space = single_factor_space(lebesgue_factor(-1.0, 1.0, 4096));
    TestFunction f = constant_fn(1, 1.0, space_box(space));
    auto r = potential_integral(space, f,
                                [](const VectorXd& x) { return -std::log(std::abs(x[0])); });
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-3));
    // The refinement-based estimate must cover the actual deviation.
    CHECK(std::abs(r.value - 2.0) <= 5.0 * r.error_estimate + 1e-6);
}

TEST_CASE("potential_integral: |x|^{-1/2} with an off-center bump vs refined oracle") {
    const int n = 4096;
    ProductSpace space = single_factor_space(lebesgue_factor(-1.0, 1.0, n));
    TestFunction f;
    f.dim = 1;
    f.eval = [](const VectorXd& x) {
        const double u = (x[0] - 0.2) / 0.6;  // support [0.2, 0.8]
        if (u <= 0.0 || u >= 1.0) return 0.0;
        return std::exp(-0.25 / (u * (1.0 - u)));
    };
    f.support = Box::of({0.2}, {0.8});
    auto V = [](const VectorXd& x) { return 1.0 / std::sqrt(std::abs(x[0])); };
    auto r = potential_integral(space, f, V);

    // Brute-force refined-grid oracle (4x nodes, independent loop).
    const int m = 4 * n;
    const double h = 2.0 / m;
    double oracle = 0.0;
    VectorXd pt(1);
    for (int i = 0; i < m; ++i) {
        pt[0] = -1.0 + (i + 0.5) * h;
        const double fv = f(pt);
        oracle += fv * fv / std::sqrt(std::abs(pt[0])) * h;
    }
    CHECK(r.value == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("potential_integral: non-finite V names the node") {
    // Non-staggered grid puts a node exactly at 0 where -ln|x| blows up.
    FactorSpace f0 = lebesgue_factor(-1.0, 1.0, 32);
    f0.staggered = false;
    ProductSpace space = single_factor_space(f0);
    TestFunction f = constant_fn(1, 1.0, space_box(space));
    CHECK_THROWS_WITH_AS(
        potential_integral(space, f,
                           [](const VectorXd& x) { return -std::log(std::abs(x[0])); }),
        doctest::Contains("not finite"), std::runtime_error);
}

TEST_CASE("staggered grids reject nodes on declared singular loci") {
    FactorSpace bad = lebesgue_factor(-1.0, 1.0, 32);
    bad.staggered = false;  // places a node at 0
    ProductSpace space{{bad, lebesgue_factor(1.0, 32)},
                       {SlotWeight{[](const VectorXd& p) { return std::abs(p[0]); },
                                   {SingularLocus{0, 0.0}}}}};
    CHECK_THROWS_AS(space.validate(), std::invalid_argument);
}

TEST_CASE("FactorSpace invariants: node_count >= 16") {
    CHECK_THROWS_AS(lebesgue_factor(0.0, 1.0, 8).validate(), std::invalid_argument);
}
