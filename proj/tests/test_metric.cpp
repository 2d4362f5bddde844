#include <cmath>

#include "doctest.h"
#include "kobalab/metric.hpp"
#include "kobalab/rng.hpp"
#include "kobalab/serialize.hpp"

using namespace kobalab;

namespace {

Caltrop teardrop() { return Caltrop::single_spike(1.25, 1.0, 0.7); }

}  // namespace

TEST_CASE("exact metric closed forms") {
    // unit disc
    Domain ud = Disc{};
    CHECK(metric_exact_available(ud));
    CHECK(metric_exact(ud, cvec1(0.0), cvec1(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(metric_exact(ud, cvec1(0.3), cvec1(1.0)) ==
          doctest::Approx(1.0 / 0.91).epsilon(1e-14));
    // scaling and translation
    Domain d2 = Disc{0.5, 2.0};
    CHECK(metric_exact(d2, cvec1(1.2), cvec1(1.0)) ==
          doctest::Approx(0.56980056980056980).epsilon(1e-15));
    // metric is |v|-homogeneous
    CHECK(metric_exact(d2, cvec1(1.2), cvec1(cplx(0.0, -3.0))) ==
          doctest::Approx(3.0 * 0.56980056980056980).epsilon(1e-14));

    Domain ball = Ball{2, {}, 1.0};
    CHECK(metric_exact(ball, {0.5, 0.0}, {0.3, cplx(0.0, 0.4)}) ==
          doctest::Approx(0.61101009266077867).epsilon(1e-14));
    // radial and tangential slices of the unit ball
    CHECK(metric_exact(ball, {0.5, 0.0}, {1.0, 0.0}) ==
          doctest::Approx(1.0 / 0.75).epsilon(1e-14));
    CHECK(metric_exact(ball, {0.5, 0.0}, {0.0, 1.0}) ==
          doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-14));

    Domain poly = Polydisc{{0.1, cplx(0.0, -0.2)}, {1.0, 2.0}};
    CHECK(metric_exact(poly, {0.4, cplx(0.3, 0.5)}, {1.0, cplx(0.0, 2.0)}) ==
          doctest::Approx(1.1695906432748538).epsilon(1e-14));

    // cusp model domain routes through the chart metric
    CuspDomain q(2.0, 1.0, 1.0);
    Domain qd = q;
    CuspMap cm(2.0, 1.0, 1.0);
    cplx z(0.3, 0.05);
    CHECK(metric_exact(qd, cvec1(z), cvec1(1.0)) ==
          doctest::Approx(cm.metric(z, 1.0)).epsilon(1e-15));

    CHECK_FALSE(metric_exact_available(Domain{teardrop()}));
    CHECK_THROWS_AS(metric_exact(Domain{teardrop()}, {0.1, 0.0}, {1.0, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(metric_exact(ud, cvec1(2.0), cvec1(1.0)), std::domain_error);
}

TEST_CASE("inscribed disc upper bound") {
    Domain ud = Disc{};
    // on the unit disc the largest affine disc at z has radius 1 - |z|
    for (double t : {0.0, 0.2, 0.5, 0.8}) {
        double got = metric_upper_disc(ud, cvec1(t), cvec1(1.0));
        CHECK(got == doctest::Approx(1.0 / (1.0 - t)).epsilon(1e-6));
        // always an upper bound for the true metric
        CHECK(got >= metric_exact(ud, cvec1(t), cvec1(1.0)) * (1.0 - 1e-9));
    }
    // tangential direction in the ball: the affine disc is extremal
    Domain ball = Ball{2, {}, 1.0};
    double tang = metric_upper_disc(ball, {0.5, 0.0}, {0.0, 1.0});
    CHECK(tang == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-6));
    // |v|-homogeneity comes from the normalization
    double one = metric_upper_disc(ball, {0.3, 0.2}, {1.0, 1.0});
    double five = metric_upper_disc(ball, {0.3, 0.2}, {5.0, 5.0});
    CHECK(five == doctest::Approx(5.0 * one).epsilon(1e-9));

    CHECK(metric_upper_disc(ud, cvec1(0.1), cvec1(0.0)) == 0.0);
    CHECK_THROWS_AS(metric_upper_disc(ud, cvec1(1.5), cvec1(1.0)), std::domain_error);

    // enlarging the domain never increases the inscribed-disc bound
    Domain big = Disc{0.0, 2.0};
    for (double t : {0.0, 0.3, 0.6}) {
        CHECK(metric_upper_disc(big, cvec1(t), cvec1(1.0)) <=
              metric_upper_disc(ud, cvec1(t), cvec1(1.0)) * (1.0 + 1e-9));
    }
    Domain bigball = Ball{2, {}, 2.0};
    CHECK(metric_upper_disc(bigball, {0.5, 0.0}, {0.0, 1.0}) <=
          metric_upper_disc(ball, {0.5, 0.0}, {0.0, 1.0}) * (1.0 + 1e-9));
}

TEST_CASE("sibony lower bound on elementary domains") {
    // unit disc witness |z|^2 - 1, Levi floor 1, alpha_S = 4:
    // bound = |v| / (2 sqrt(1 - |z|^2)) <= exact 1/(1 - |z|^2)
    Domain ud = Disc{};
    PshWitness w = enclosing_ball_witness(ud);
    CHECK(w.c == doctest::Approx(1.0));
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        cplx z = 0.995 * rng.unit_disc();
        double lo = metric_lower_sibony(w, cvec1(z), cvec1(1.0));
        double expect = 0.5 / std::sqrt(1.0 - std::norm(z));
        CHECK(lo == doctest::Approx(expect).epsilon(1e-12));
        CHECK(lo <= metric_exact(ud, cvec1(z), cvec1(1.0)) * (1.0 + 1e-12));
    }
    // ball witness bounded by the exact ball metric
    Domain ball = Ball{2, {}, 1.0};
    PshWitness wb = enclosing_ball_witness(ball);
    for (int i = 0; i < 200; ++i) {
        CVec z = rng.unit_cvector(2);
        double s = 0.97 * std::sqrt(rng.uniform());
        for (auto& c : z) c *= s;
        CVec v = rng.unit_cvector(2);
        CHECK(metric_lower_sibony(wb, z, v) <=
              metric_exact(ball, z, v) * (1.0 + 1e-12));
    }
    // outside-chart and nonnegative-u failures are loud
    Caltrop c = teardrop();
    PshWitness ws = spike_chart_witness(c, 0);
    CHECK_THROWS_AS(metric_lower_sibony(ws, {0.9, 0.0}, {1.0, 0.0}),
                    std::domain_error);
}

TEST_CASE("spike witness matches the meridian weight") {
    Caltrop c = teardrop();
    PshWitness w = spike_chart_witness(c, 0);
    CHECK(w.c == doctest::Approx(0.25));
    // frozen: on the axis at x = 0.1 the weight is -psi(0.1)^2 and the bound
    // is 0.25/psi(0.1); the axis is the last complex coordinate
    CVec z{0.0, 0.1};
    CHECK(w.in_chart(z));
    CHECK(w.u(z) == doctest::Approx(-sq(0.039237746085102817)).epsilon(1e-13));
    CHECK(metric_lower_sibony(w, z, {1.0, 0.0}) ==
          doctest::Approx(6.3714159181767107).epsilon(1e-13));
    // direction independence and homogeneity
    CHECK(metric_lower_sibony(w, z, {0.0, 2.0}) ==
          doctest::Approx(2.0 * 6.3714159181767107).epsilon(1e-13));
    // teardrop chart spans the full meridian (the arc keeps the Levi floor)
    CHECK(w.in_chart({0.0, 0.29}));
    CHECK(w.in_chart({0.0, 0.5}));
    CHECK_FALSE(w.in_chart({0.0, 0.6}));
    CHECK_FALSE(w.in_chart({0.0, -0.1}));

    // embedded spike charts stop at the Levi chart length instead
    Caltrop multi = Caltrop::multi_spike(
        2, CVec{0.0, 0.0}, 0.5,
        {SpikeChart{{0.0, 0.9}, {0.0, -1.0}, SpikeProfile::pure_power(1.25, 0.5),
                    false}});
    PshWitness wm = spike_chart_witness(multi, 0);
    double chart = multi.levi_chart_len(0);
    CHECK(chart < 0.5);
    CVec inside{0.0, 0.9 - 0.5 * chart};   // on the spike axis, within chart
    CVec outside{0.0, 0.9 - 2.0 * chart};  // past the chart length
    CHECK(wm.in_chart(inside));
    CHECK_FALSE(wm.in_chart(outside));
}

TEST_CASE("strong psc collar bound") {
    Caltrop c = teardrop();
    Domain d = c;
    CollarSpec spec = cap_collar(c);
    // cap-side point: available, formula value
    CVec z{0.0, 0.45};
    REQUIRE(contains(d, z));
    PscBound b = metric_lower_strong_psc(d, z, {1.0, 0.0}, spec);
    REQUIRE(b.available);
    double delta = boundary_distance(d, z);
    CHECK(b.value ==
          doctest::Approx(0.25 * (1.0 - std::sqrt(delta)) / std::sqrt(delta))
              .epsilon(1e-12));
    // spike-side point is outside the declared collar
    CHECK_FALSE(metric_lower_strong_psc(d, {0.0, 0.05}, {1.0, 0.0}, spec).available);
    // the bound stays below the sampled upper bound where both exist
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        double x = rng.uniform(0.31, 0.55);
        double smax = c.spike(0).profile.psi(x);
        CVec p{0.0, cplx(x, 0.6 * smax * rng.uniform())};
        if (!contains(d, p)) continue;
        PscBound pb = metric_lower_strong_psc(d, p, {1.0, 0.0}, spec);
        if (!pb.available) continue;
        CHECK(pb.value <= metric_upper_disc(d, p, {1.0, 0.0}) * (1.0 + 1e-9));
    }
    CHECK_THROWS_AS(cap_collar(Caltrop::multi_spike(
                        2, CVec{0.0, 0.0}, 0.5,
                        {SpikeChart{{0.0, 0.9},
                                    {0.0, -1.0},
                                    SpikeProfile::pure_power(1.25, 0.5),
                                    false}})),
                    std::invalid_argument);
}

TEST_CASE("metric interval brackets and stays ordered") {
    // exact domains collapse to a point interval
    Domain ud = Disc{};
    BoundInterval bi = metric_interval(ud, cvec1(0.4), cvec1(1.0));
    CHECK(bi.lower == bi.upper);
    CHECK(bi.lower_method == "exact-closed-form");
    CuspDomain q(2.0, 1.0, 1.0);
    Domain qd = q;
    BoundInterval bq = metric_interval(qd, cvec1(cplx(0.3, 0.05)), cvec1(1.0));
    CHECK(bq.lower_method == "exact-chart");
    CHECK(bq.lower == doctest::Approx(2.8007591688719511).epsilon(1e-13));

    // caltrop: estimator pair, ordered, tagged
    Caltrop c = teardrop();
    Domain d = c;
    Rng rng(77);
    int spike_tags = 0;
    for (int i = 0; i < 60; ++i) {
        double x = rng.uniform(0.02, 0.5);
        double smax = c.spike(0).profile.psi(x);
        CVec z{0.0, cplx(x, 0.7 * smax * (2.0 * rng.uniform() - 1.0))};
        if (!contains(d, z)) continue;
        CVec v = rng.unit_cvector(2);
        BoundInterval b = metric_interval(d, z, v);
        CHECK(b.lower > 0.0);
        CHECK(b.lower <= b.upper * (1.0 + 1e-9));
        CHECK(b.upper_method == "inscribed-disc-sampled");
        if (b.lower_method == "sibony-spike") ++spike_tags;
    }
    CHECK(spike_tags > 0);
    // zero vector degenerates cleanly
    BoundInterval z0 = metric_interval(d, {0.0, 0.1}, {0.0, 0.0});
    CHECK(z0.lower == 0.0);
    CHECK(z0.upper == 0.0);
}

TEST_CASE("m_profile on the unit disc brackets 2r - r^2") {
    Domain ud = Disc{};
    std::vector<double> grid;
    for (int k = 1; k <= 10; ++k) grid.push_back(0.05 * k);
    MProfile prof = m_profile(ud, grid, 1, 4242, 250);
    REQUIRE(prof.rows.size() == grid.size());
    for (size_t i = 0; i < prof.rows.size(); ++i) {
        double r = prof.rows[i].r;
        double truth = 2.0 * r - r * r;
        CHECK(prof.rows[i].M_lower >= 0.95 * truth);
        CHECK(prof.rows[i].M_lower <= truth * (1.0 + 1e-12));
        CHECK(prof.rows[i].M_upper >= truth);
        CHECK(prof.rows[i].n_samples == 250);
        if (i > 0) {
            CHECK(prof.rows[i].M_lower >= prof.rows[i - 1].M_lower);
            CHECK(prof.rows[i].M_upper >= prof.rows[i - 1].M_upper);
        }
    }
    // identical seeds reproduce byte-identical csv
    std::ostringstream a, b;
    prof.write_csv(a);
    m_profile(ud, grid, 1, 4242, 250).write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, 33) == "r,M_lower,M_upper,n_samples,seed\n");
}

TEST_CASE("m_profile on the teardrop decays like sqrt(r)") {
    Domain d = teardrop();
    std::vector<double> grid{1e-3, 1e-2, 1e-1};
    MProfile prof = m_profile(d, grid, 2, 99, 60);
    REQUIRE(prof.rows.size() == 3);
    // M_upper tracks the sqrt envelope from the spike and collar bounds
    for (const auto& row : prof.rows) {
        CHECK(row.M_upper > 0.0);
        CHECK(row.M_upper <= 8.5 * std::sqrt(row.r));
        CHECK(row.M_lower <= row.M_upper * (1.0 + 1e-12));
    }
    double s01 = std::log(prof.rows[1].M_upper / prof.rows[0].M_upper) / std::log(10.0);
    double s12 = std::log(prof.rows[2].M_upper / prof.rows[1].M_upper) / std::log(10.0);
    CHECK(s01 > 0.42);
    CHECK(s12 > 0.42);
}

TEST_CASE("m_profile input validation") {
    Domain ud = Disc{};
    CHECK_THROWS_AS(m_profile(ud, {}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(m_profile(ud, {0.0, 0.1}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(m_profile(ud, {0.1}, 0, 1), std::invalid_argument);
}

TEST_CASE("derivative decay check on the disc") {
    Domain ud = Disc{};
    std::vector<AnalyticDisc> seq;
    for (int nu = 2; nu <= 32; nu *= 2) {
        double cpt = 1.0 - 1.0 / nu;
        seq.push_back({[cpt](cplx zeta) { return cvec1(cpt + (1.0 - cpt) * zeta); },
                       "affine-" + std::to_string(nu)});
    }
    DecayReport rep = derivative_decay_check(ud, seq);
    CHECK(rep.all_ok);
    REQUIRE(rep.rows.size() == 5);
    for (const auto& row : rep.rows) {
        // margin for the affine disc at c is exactly 1 + c
        CHECK(row.margin == doctest::Approx(2.0 - row.delta).epsilon(1e-4));
        CHECK(row.ok);
    }
    CHECK(rep.trend.slope == doctest::Approx(1.0).epsilon(0.02));

    // a disc that escapes the domain is rejected, not silently scored
    std::vector<AnalyticDisc> bad{
        {[](cplx zeta) { return cvec1(0.5 + zeta); }, "escapes"}};
    CHECK_THROWS_AS(derivative_decay_check(ud, bad), std::runtime_error);
}

TEST_CASE("derivative decay check on the teardrop") {
    Caltrop c = teardrop();
    Domain d = c;
    std::vector<AnalyticDisc> seq;
    for (double x : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
        double delta = boundary_distance(d, {0.0, x});
        double r = 0.5 * delta;
        seq.push_back({[x, r](cplx zeta) { return CVec{0.0, x + r * zeta}; },
                       "axis-" + dtos(x)});
    }
    DecayReport rep = derivative_decay_check(d, seq);
    CHECK(rep.all_ok);
    // derivative shrinks along the sequence and the fit sees the decay
    CHECK(rep.rows.front().deriv_norm > rep.rows.back().deriv_norm);
    CHECK(rep.trend.slope > 0.8);
}
