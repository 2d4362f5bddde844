#include "doctest.h"

#include <cmath>
#include <sstream>

#include "kobalab/common.hpp"
#include "kobalab/quadrature.hpp"
#include "kobalab/rng.hpp"
#include "kobalab/serialize.hpp"

using namespace kobalab;

TEST_CASE("fit_line recovers an exact line") {
    std::vector<double> x, y;
    for (int i = 0; i < 9; ++i) {
        x.push_back(0.3 * i - 1.0);
        y.push_back(2.5 * x.back() - 0.75);
    }
    auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(f.stderr_slope < 1e-10);
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.n == 9);
}

TEST_CASE("fit_line slope error shrinks with sample count") {
    Rng rng(7);
    auto noisy_fit = [&](int n) {
        std::vector<double> x, y;
        for (int i = 0; i < n; ++i) {
            x.push_back(static_cast<double>(i) / n);
            y.push_back(1.5 * x.back() + 0.01 * rng.normal());
        }
        return fit_line(x, y);
    };
    auto small = noisy_fit(20);
    auto large = noisy_fit(2000);
    CHECK(std::abs(large.slope - 1.5) < 0.01);
    CHECK(large.stderr_slope < small.stderr_slope);
}

TEST_CASE("adaptive quadrature on smooth integrands") {
    auto q1 = integrate_adaptive([](double t) { return t * t; }, 0.0, 1.0);
    CHECK(q1.converged);
    CHECK(q1.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    auto q2 = integrate_adaptive([](double t) { return std::sin(t); }, 0.0, M_PI);
    CHECK(q2.value == doctest::Approx(2.0).epsilon(1e-12));

    // reversed interval integrates with a sign
    auto q3 = integrate_adaptive([](double t) { return t; }, 1.0, 0.0);
    CHECK(q3.value == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature near an integrable singularity") {
    auto q = integrate_adaptive([](double t) { return 1.0 / std::sqrt(t); }, 1e-8, 1.0);
    double exact = 2.0 * (1.0 - 1e-4);
    CHECK(q.value == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("rng determinism and ranges") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 64; ++i) {
        double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng c(1);
    for (int i = 0; i < 32; ++i) {
        double u = c.uniform(-2.0, 3.0);
        CHECK(u >= -2.0);
        CHECK(u < 3.0);
        cplx w = c.unit_circle();
        CHECK(std::abs(std::abs(w) - 1.0) < 1e-14);
        cplx zd = c.unit_disc();
        CHECK(std::abs(zd) < 1.0);
        auto s = c.unit_sphere(5);
        double n2 = 0;
        for (double t : s) n2 += t * t;
        CHECK(n2 == doctest::Approx(1.0).epsilon(1e-12));
        auto v = c.unit_cvector(3);
        CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("seeded rng sequences differ across seeds") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 16; ++i)
        if (a.uniform() == b.uniform()) ++same;
    CHECK(same == 0);
}

TEST_CASE("double serialization round-trips at full precision") {
    for (double v : {0.1, 1.0 / 3.0, 2.5e-300, -7.25, 6.02214076e23, 0.0}) {
        std::string s = dtos(v);
        double back = std::strtod(s.c_str(), nullptr);
        CHECK(back == v);
    }
    CHECK(dtos(0.1) == "0.1");
    CHECK(dtos(2.0) == "2");
}

TEST_CASE("csv writer emits header and rows") {
    std::ostringstream os;
    {
        CsvWriter w(os, {"a", "b"});
        w.row({1.5, 2.0});
        w.row_values({"x", "y"});
    }
    CHECK(os.str() == "a,b\n1.5,2\nx,y\n");
}

TEST_CASE("log_sinh matches naive form and survives large input") {
    for (double y : {0.25, 1.0, 5.0, 19.0}) {
        CHECK(log_sinh(y) == doctest::Approx(std::log(std::sinh(y))).epsilon(1e-13));
    }
    // for large y, sinh(y) ~ e^y / 2
    CHECK(log_sinh(800.0) == doctest::Approx(800.0 - std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("fnv1a64 known vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("abc") == 16654208175385433931ull);
    CHECK(fnv1a64("abc") != fnv1a64("abd"));
}
