#include "doctest.h"

#include <cmath>
#include <functional>

#include "kobalab/criteria.hpp"
#include "kobalab/distance.hpp"

using namespace kobalab;

namespace {

// analytic surrogate table, both columns set to the given profile
MProfile make_table(const std::function<double(double)>& M, double r_lo, double r_hi,
                    int n) {
    MProfile t;
    for (int i = 0; i < n; ++i) {
        double lr = std::log(r_lo) +
                    (std::log(r_hi) - std::log(r_lo)) * i / static_cast<double>(n - 1);
        MProfileRow row;
        row.r = std::exp(lr);
        row.M_lower = row.M_upper = M(row.r);
        row.n_samples = 1;
        t.rows.push_back(row);
    }
    return t;
}

}  // namespace

TEST_CASE("growth bound families") {
    GrowthBound lg = GrowthBound::logarithmic(2.0, 3.0);
    CHECK(lg.value(1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(lg.value(std::exp(1.0)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(lg.derivative(4.0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(lg.inverse(lg.value(7.3)) == doctest::Approx(7.3).epsilon(1e-12));
    CHECK(lg.logarithmic_family());
    CHECK(lg.exponent() == 3.0);

    GrowthBound pw = GrowthBound::power(1.0, 0.5, 0.25);
    CHECK(pw.value(16.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(pw.derivative(16.0) == doctest::Approx(0.5 * 0.25 * std::pow(16.0, -0.75))
                                     .epsilon(1e-14));
    CHECK(pw.inverse(pw.value(9.0)) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(!pw.logarithmic_family());
    CHECK(pw.exponent() == 0.25);

    // strict monotonicity needs positive coefficients
    CHECK_THROWS_AS(GrowthBound::logarithmic(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthBound::power(0.0, -1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(GrowthBound::power(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lg.value(0.0), std::domain_error);
    CHECK_THROWS_AS(pw.inverse(0.5), std::domain_error);
}

TEST_CASE("logarithmic reduction of the visibility integrand") {
    GrowthBound lg = GrowthBound::logarithmic(2.0, 3.0);
    for (double r : {1e-8, 1e-5, 1e-3, 0.1, 0.5}) {
        for (double M : {1e-6, 0.02, 0.7}) {
            double g = visibility_integrand(M, r, lg);
            double reduced = 3.0 * M / r;
            CHECK(g == doctest::Approx(reduced).epsilon(1e-12));
        }
    }
}

TEST_CASE("goldilocks classification on analytic profiles") {
    // the unit-disc profile: near 0 the exponent is 1
    MProfile disc = make_table([](double r) { return 2.0 * r - r * r; }, 1e-5, 0.5, 40);
    IntegralReport rd = goldilocks_integral_test(disc, 0.5);
    CHECK(rd.verdict == IntegralVerdict::CONVERGENT);
    CHECK(rd.exponent == doctest::Approx(1.0).epsilon(0.05));
    CHECK(rd.m_to_zero);
    CHECK(std::isfinite(rd.tail_estimate));
    // integral of (2 - r) dr over the table range, up to the log-log
    // interpolation error of the 40-row table
    double exact = 2.0 * (0.5 - 1e-5) - 0.5 * (0.25 - 1e-10);
    CHECK(rd.integral_value == doctest::Approx(exact).epsilon(5e-3));

    MProfile root = make_table([](double r) { return std::sqrt(r); }, 1e-8, 0.25, 40);
    IntegralReport rr = goldilocks_integral_test(root, 0.25);
    CHECK(rr.verdict == IntegralVerdict::CONVERGENT);
    CHECK(rr.exponent == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rr.exponent_band < 1e-9);

    //  1/log(1/r) decays too slowly for the integral to exist
    MProfile slow =
        make_table([](double r) { return 1.0 / std::log(1.0 / r); }, 1e-12, 0.3, 60);
    IntegralReport rs = goldilocks_integral_test(slow, 0.3);
    CHECK(rs.verdict == IntegralVerdict::DIVERGENT);
    CHECK(rs.m_to_zero);
    CHECK(rs.tail_estimate == std::numeric_limits<double>::infinity());

    MProfile tiny = make_table([](double r) { return r; }, 1e-3, 1e-1, 4);
    CHECK_THROWS_AS(goldilocks_integral_test(tiny, 1.0), std::invalid_argument);
}

TEST_CASE("general visibility classification against the analytic threshold") {
    MProfile root = make_table([](double r) { return std::sqrt(r); }, 1e-8, 0.25, 40);
    for (double p0 : {1.1, 1.25, 1.4}) {
        GrowthBound f = GrowthBound::power(1.0, 1.0, p0 - 1.0);
        IntegralReport rep = general_visibility_integral_test(root, f, 0.25);
        CHECK(rep.verdict == IntegralVerdict::CONVERGENT);
        CHECK(rep.m_to_zero);
    }
    for (double p0 : {1.6, 2.0}) {
        GrowthBound f = GrowthBound::power(1.0, 1.0, p0 - 1.0);
        IntegralReport rep = general_visibility_integral_test(root, f, 0.25);
        CHECK(rep.verdict == IntegralVerdict::DIVERGENT);
    }

    // logarithmic f agrees with the goldilocks protocol
    GrowthBound lg = GrowthBound::logarithmic(0.0, 2.0);
    IntegralReport rl = general_visibility_integral_test(root, lg, 0.25);
    IntegralReport rg = goldilocks_integral_test(root, 0.25);
    CHECK(rl.verdict == rg.verdict);
    CHECK(rl.exponent == doctest::Approx(rg.exponent).epsilon(1e-12));
    CHECK(rl.integral_value == doctest::Approx(2.0 * rg.integral_value).epsilon(1e-9));

    // a profile with no decay fails the M -> 0 hypothesis and diverges
    MProfile flat = make_table([](double) { return 0.5; }, 1e-8, 0.25, 30);
    IntegralReport rf =
        general_visibility_integral_test(flat, GrowthBound::power(0.0, 1.0, 0.5), 0.25);
    CHECK(rf.verdict == IntegralVerdict::DIVERGENT);
    CHECK(!rf.m_to_zero);

    // exponent grid: convergent exactly when s > q, with a margin
    for (double s : {0.2, 0.5, 0.8, 1.2}) {
        for (double q : {0.1, 0.4, 0.7, 1.0}) {
            if (std::abs(s - q) < 0.1) continue;
            MProfile tab =
                make_table([s](double r) { return std::pow(r, s); }, 1e-8, 0.25, 30);
            GrowthBound f = GrowthBound::power(0.0, 1.0, q);
            IntegralReport rep = general_visibility_integral_test(tab, f, 0.25);
            CHECK(rep.verdict == (s > q ? IntegralVerdict::CONVERGENT
                                        : IntegralVerdict::DIVERGENT));
        }
    }
}

TEST_CASE("change of variable quadratures agree") {
    MProfile lin = make_table([](double r) { return r; }, 1e-6, 0.5, 50);

    // closed-form oracle: f = log t, M = r gives r(t) = exp(-t/2) and both
    // sides equal 2 (r_knot - r_min)
    GrowthBound f0 = GrowthBound::logarithmic(0.0, 1.0);
    ChangeOfVariableReport r0 = change_of_variable_check(lin, f0, 1.0, 0.0, {0.3, 0.1});
    REQUIRE(r0.rows.size() == 2);
    CHECK(r0.rows[0].r_knot == doctest::Approx(0.3));
    CHECK(r0.rows[0].t_integral == doctest::Approx(2.0 * (0.3 - 1e-6)).epsilon(1e-6));
    CHECK(r0.rows[0].r_integral == doctest::Approx(2.0 * (0.3 - 1e-6)).epsilon(1e-6));
    CHECK(r0.agree);
    CHECK(r0.tail_vanishes);
    CHECK(r0.worst_rel_dev < 0.01);

    // shifted and dilated parameters, automatic knots
    GrowthBound f1 = GrowthBound::logarithmic(1.5, 2.0);
    ChangeOfVariableReport r1 = change_of_variable_check(lin, f1, 1.5, 0.3);
    CHECK(r1.agree);
    CHECK(r1.tail_vanishes);

    // power family too
    GrowthBound f2 = GrowthBound::power(0.5, 1.0, 0.4);
    ChangeOfVariableReport r2 = change_of_variable_check(lin, f2, 2.0, 0.1);
    CHECK(r2.agree);
    CHECK(r2.tail_vanishes);

    // a knot at the deep end empties the tail: 0 = 0
    ChangeOfVariableReport r3 = change_of_variable_check(lin, f0, 1.0, 0.0, {1e-6});
    REQUIRE(r3.rows.size() == 1);
    CHECK(r3.rows[0].t_integral == 0.0);
    CHECK(r3.rows[0].r_integral == 0.0);
    CHECK(r3.rows[0].rel_dev == 0.0);

    CHECK_THROWS_AS(change_of_variable_check(lin, f0, 1.0, 0.0, {2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(change_of_variable_check(lin, f0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("non-goldilocks witness on the teardrop") {
    Caltrop c = Caltrop::single_spike(1.25, 1.0, 0.7);
    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k) grid.push_back(1e-2 * std::pow(10.0, -k / 3.0));
    NonGoldilocksReport rep = non_goldilocks_witness(c, grid, 0.25);
    CHECK(rep.verdict == "FAIL-GOLDILOCKS");
    CHECK(rep.growth >= 10.0);
    CHECK(rep.monotone);
    REQUIRE(rep.rows.size() == grid.size());
    // the ratio numerator is the certified lower bound itself
    CVec anchor = spike_anchor(c);
    CVec z = c.lift_meridian(grid[0], 0.0, {1.0, 0.0, 0.0});
    CHECK(rep.rows[0].lower ==
          doctest::Approx(spike_distance_lower(c, anchor, z, 0.25)).epsilon(1e-13));

    NonGoldilocksReport one = non_goldilocks_witness(c, {1e-3}, 0.25);
    CHECK(one.verdict == "INCONCLUSIVE");
    CHECK(one.rows.size() == 1);

    CHECK_THROWS_AS(non_goldilocks_witness(c, {1e-3, 1e-2}, 0.25),
                    std::invalid_argument);
    CHECK_THROWS_AS(non_goldilocks_witness(c, {}, 0.25), std::invalid_argument);
    // 0.05 is beyond the spike chart half-length
    CHECK_THROWS_AS(non_goldilocks_witness(c, {0.05, 1e-3}, 0.25), std::domain_error);
}

TEST_CASE("slow exponent witness stays monotone") {
    // p near 1: the distance lower bound still outgrows the logarithm, but
    // slowly; the ratio trend is increasing even when tenfold growth is out
    // of reach on a short grid
    Caltrop c = Caltrop::single_spike(1.01, 1.0, 0.7);
    double a2 = spike_chart_length(c);
    CHECK(a2 < 1e-10);  // canonical-power chart length collapses as p -> 1
    std::vector<double> grid;
    for (int k = 0; k < 4; ++k) grid.push_back(0.25 * a2 * std::pow(10.0, -4.0 * k));
    NonGoldilocksReport rep = non_goldilocks_witness(c, grid, 0.25);
    CHECK(rep.monotone);
    CHECK(rep.growth > 1.0);
}
