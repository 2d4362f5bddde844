#include "kobalab/geodesics.hpp"

#include <sstream>

#include "doctest.h"
#include "kobalab/metric.hpp"

using namespace kobalab;

TEST_CASE("exact geodesic on the unit disc") {
    Domain d = Disc{};

    PathSample ps = near_geodesic(d, cvec1(0.0), cvec1(0.5));
    CHECK(ps.method == "exact-disc");
    CHECK(ps.value == doctest::Approx(std::atanh(0.5)).epsilon(1e-14));
    REQUIRE(ps.times.size() == ps.points.size());
    CHECK(ps.times.front() == 0.0);
    CHECK(ps.times.back() == doctest::Approx(ps.value).epsilon(1e-14));
    // the radial segment: real, increasing, endpoints exact
    CHECK(ps.points.front()[0] == cplx(0.0));
    CHECK(ps.points.back()[0] == cplx(0.5));
    for (size_t i = 0; i < ps.points.size(); ++i) {
        CHECK(ps.points[i][0].imag() == 0.0);
        if (i) CHECK(ps.points[i][0].real() > ps.points[i - 1][0].real());
    }
    // hyperbolic-arclength parametrization: pairwise distances match times
    for (size_t i = 0; i < ps.points.size(); i += 3)
        for (size_t j = i + 1; j < ps.points.size(); j += 2) {
            double k = poincare_distance(ps.points[i][0], ps.points[j][0]);
            CHECK(k == doctest::Approx(ps.times[j] - ps.times[i]).epsilon(1e-12));
        }

    // an off-axis pair
    CVec z = cvec1(cplx(0.3, 0.2)), w = cvec1(cplx(-0.5, 0.1));
    PathSample po = near_geodesic(d, z, w);
    CHECK(po.value == doctest::Approx(poincare_distance(z[0], w[0])).epsilon(1e-13));
    CHECK(po.points.front() == z);
    CHECK(po.points.back() == w);
    for (size_t i = 1; i + 1 < po.points.size(); ++i)
        CHECK(std::abs(po.points[i][0]) < 1.0);
    for (size_t i = 0; i + 1 < po.points.size(); ++i) {
        double k = poincare_distance(po.points[i][0], po.points[i + 1][0]);
        CHECK(k == doctest::Approx(po.leg_weights[i]).epsilon(1e-11));
    }

    // a scaled, shifted disc behaves identically through normalization
    Domain ds = Disc{cplx(1.0, 2.0), 3.0};
    PathSample pss = near_geodesic(ds, cvec1(cplx(1.0, 2.0)), cvec1(cplx(2.5, 2.0)));
    CHECK(pss.value == doctest::Approx(std::atanh(0.5)).epsilon(1e-13));

    PathSample p0 = near_geodesic(d, cvec1(0.2), cvec1(0.2));
    CHECK(p0.points.size() == 1);
    CHECK(p0.value == 0.0);
    CHECK(p0.times == std::vector<double>{0.0});

    CHECK_THROWS_AS(near_geodesic(d, cvec1(0.2), cvec1(1.5)), std::domain_error);
}

TEST_CASE("exact geodesic on the cusp model domain") {
    CuspDomain q(2.0, 1.0, 1.0);
    Domain d = q;
    CuspMap cm(q);
    double o = q.base_point();

    // real pair: the path rides the real axis
    CVec zo = cvec1(o), x3 = cvec1(cm.axis_point(3.0));
    PathSample ps = near_geodesic(d, zo, x3);
    CHECK(ps.method == "exact-cusp");
    CHECK(ps.value == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(ps.points.front() == zo);
    CHECK(ps.points.back() == x3);
    for (const auto& p : ps.points) {
        CHECK(p[0].imag() == 0.0);
        CHECK(q.contains(p[0]));
    }
    for (size_t i = 0; i < ps.points.size(); i += 7)
        for (size_t j = i + 1; j < ps.points.size(); j += 5) {
            double k = cm.distance(ps.points[i][0], ps.points[j][0]);
            CHECK(k == doctest::Approx(ps.times[j] - ps.times[i]).epsilon(1e-9));
        }

    // complex pair against the frozen oracle value
    CVec z = cvec1(cplx(0.3, 0.05)), w = cvec1(cplx(0.1, -0.02));
    PathSample pc = near_geodesic(d, z, w);
    CHECK(pc.value == doctest::Approx(1.1612913133465148).epsilon(1e-12));
    CHECK(pc.points.front() == z);
    CHECK(pc.points.back() == w);
    for (const auto& p : pc.points) CHECK(q.contains(p[0]));
    for (size_t i = 0; i + 1 < pc.points.size(); ++i) {
        double k = cm.distance(pc.points[i][0], pc.points[i + 1][0]);
        CHECK(k == doctest::Approx(pc.leg_weights[i]).epsilon(1e-9));
    }

    // a deep pair: the disc coordinate saturates long before this depth, so
    // this exercises the half-plane parametrization end to end
    CVec zd = cvec1(cm.axis_point(40.0));
    PathSample pd = near_geodesic(d, z, zd);
    CHECK(pd.value > 35.0);
    size_t n = pd.points.size() - 1;
    for (auto [i, j] : std::vector<std::pair<size_t, size_t>>{
             {0, n}, {0, n / 2}, {n / 2, n}, {n / 4, 3 * n / 4},
             {n - 1, n}, {n / 2, n / 2 + 1}, {3 * n / 4, n}}) {
        double k = cm.distance(pd.points[i][0], pd.points[j][0]);
        double gap = pd.times[j] - pd.times[i];
        CHECK(k == doctest::Approx(gap).epsilon(1e-8));
    }
    for (const auto& p : pd.points) CHECK(q.contains(p[0]));

    PathSample single = near_geodesic(d, z, z);
    CHECK(single.points.size() == 1);
    CHECK(single.value == 0.0);

    CHECK_THROWS_AS(near_geodesic(d, z, cvec1(cplx(2.0, 0.0))), std::domain_error);
}

TEST_CASE("graph path as a near geodesic on a caltrop") {
    Caltrop c = Caltrop::single_spike(1.25, 1.0, 0.7);
    Domain d = c;
    GridSpec spec;
    spec.spacing = 0.08;
    DomainGraph g(d, spec);

    CVec z = c.lift_meridian(0.45, 0.0, {1.0, 0.0, 0.0});
    CVec w = c.lift_meridian(0.30, 0.10, {1.0, 0.0, 0.0});
    PathSample ps = near_geodesic(g, z, w);
    REQUIRE(ps.points.size() >= 2);
    REQUIRE(ps.times.size() == ps.points.size());
    REQUIRE(ps.leg_weights.size() + 1 == ps.points.size());
    CHECK(ps.times.front() == 0.0);
    double acc = 0.0;
    for (size_t i = 0; i < ps.leg_weights.size(); ++i) {
        acc += ps.leg_weights[i];
        CHECK(ps.times[i + 1] == doctest::Approx(acc).epsilon(1e-12));
    }
    CHECK(ps.times.back() == doctest::Approx(ps.value).epsilon(1e-12));
    CHECK(lipschitz_check(ps) > 0.0);
    CHECK(std::isfinite(lipschitz_check(ps)));
}

TEST_CASE("almost geodesic certification on exact paths") {
    Domain d = Disc{};
    PathSample ps = near_geodesic(d, cvec1(0.0), cvec1(0.8));

    AlmostGeodesicCert a = certify_almost_geodesic(d, ps, 1.01, 0.01);
    CHECK(a.valid);
    CHECK(a.worst_upper_margin <= 0.0);
    CHECK(a.worst_lower_margin <= 0.0);
    CHECK(a.speed_margin <= 0.0);
    CHECK(a.pairs_checked > 10);

    // a true geodesic passes arbitrarily close to (1, 0)
    AlmostGeodesicCert tight = certify_almost_geodesic(d, ps, 1.0, 1e-6);
    CHECK(tight.valid);

    // time dilation breaks the lower distance condition provably
    PathSample bad = ps;
    for (auto& t : bad.times) t *= 2.0;
    AlmostGeodesicCert b = certify_almost_geodesic(d, bad, 1.0, 0.01);
    CHECK_FALSE(b.valid);
    CHECK(b.worst_lower_margin > 0.0);
    CHECK(b.worst_upper_margin <= 0.0);

    // the same dilation also fails at the criterion level (1.01, 0.01)
    AlmostGeodesicCert b2 = certify_almost_geodesic(d, bad, 1.01, 0.01);
    CHECK_FALSE(b2.valid);

    CuspDomain q(2.0, 1.0, 1.0);
    Domain dq = q;
    PathSample pq = near_geodesic(dq, cvec1(cplx(0.3, 0.05)), cvec1(cplx(0.1, -0.02)));
    AlmostGeodesicCert aq = certify_almost_geodesic(dq, pq, 1.01, 0.01);
    CHECK(aq.valid);
    CHECK(aq.speed_nodes == (int)pq.points.size() - 2);

    CHECK_THROWS_AS(certify_almost_geodesic(d, ps, 0.9, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(certify_almost_geodesic(d, ps, 1.1, -0.2), std::invalid_argument);
    PathSample frozen = ps;
    frozen.times[2] = frozen.times[1];
    CHECK_THROWS_AS(certify_almost_geodesic(d, frozen, 1.1, 0.1), std::invalid_argument);
    PathSample missing = ps;
    missing.times.clear();
    CHECK_THROWS_AS(certify_almost_geodesic(d, missing, 1.1, 0.1), std::invalid_argument);
    PathSample outside = ps;
    outside.points[1] = cvec1(cplx(5.0, 0.0));
    CHECK_THROWS_AS(certify_almost_geodesic(d, outside, 1.1, 0.1), std::domain_error);
}

TEST_CASE("certification of graph paths on the cusp domain") {
    CuspDomain q(2.0, 1.0, 1.0);
    Domain d = q;
    GridSpec coarse;
    coarse.spacing = 0.1;
    DomainGraph g(d, coarse);
    CVec z = cvec1(cplx(0.3, 0.05)), w = cvec1(cplx(0.8, 0.1));

    PathSample ps = g.shortest_path(z, w);
    AlmostGeodesicCert a = certify_almost_geodesic(d, ps, 1.2, 0.2, &g);
    CHECK(a.valid);
    // at this spacing the path overhead genuinely exceeds the tighter budget
    AlmostGeodesicCert tight = certify_almost_geodesic(d, ps, 1.1, 0.1, &g);
    CHECK_FALSE(tight.valid);

    auto g2 = g.refined();
    PathSample ps2 = g2->shortest_path(z, w);
    AlmostGeodesicCert a2 = certify_almost_geodesic(d, ps2, 1.1, 0.1, g2.get());
    CHECK(a2.valid);

    // refinement shrinks the overhead of the path value over the true
    // distance, which is what lets the certificate level tighten
    double exact = distance_exact(d, z, w);
    CHECK(ps.value >= exact);
    CHECK(ps2.value >= exact);
    CHECK(ps2.value <= ps.value + 1e-12);
}

TEST_CASE("lipschitz bounds along paths") {
    PathSample seg;
    seg.points = {cvec1(0.0), cvec1(1.0)};
    seg.times = {0.0, 2.0};
    CHECK(lipschitz_check(seg) == doctest::Approx(0.5).epsilon(1e-15));

    PathSample flat;
    flat.points = {cvec1(0.3), cvec1(0.3)};
    flat.times = {0.0, 1.0};
    CHECK(lipschitz_check(flat) == 0.0);

    // unit-speed radial geodesic: Euclidean speed 1 - sigma^2 decays toward
    // the boundary, so per-leg ratios decrease and the max sits at the start
    Domain d = Disc{};
    PathSample ps = near_geodesic(d, cvec1(0.0), cvec1(0.95));
    double prev = 2.0;
    for (size_t i = 0; i + 1 < ps.points.size(); ++i) {
        double r = dist(ps.points[i + 1], ps.points[i]) /
                   (ps.times[i + 1] - ps.times[i]);
        CHECK(r < prev);
        prev = r;
    }
    double first = dist(ps.points[1], ps.points[0]) / (ps.times[1] - ps.times[0]);
    CHECK(lipschitz_check(ps) == doctest::Approx(first).epsilon(1e-15));
    CHECK(lipschitz_check(ps) < 1.0);

    PathSample one;
    one.points = {cvec1(0.0)};
    one.times = {0.0};
    CHECK_THROWS_AS(lipschitz_check(one), std::invalid_argument);
    PathSample stuck;
    stuck.points = {cvec1(0.0), cvec1(0.5)};
    stuck.times = {1.0, 1.0};
    CHECK_THROWS_AS(lipschitz_check(stuck), std::invalid_argument);
}

TEST_CASE("visibility experiment on the cusp model domain") {
    CuspDomain q(2.0, 1.0, 1.0);
    Domain d = q;
    CVec tip = cvec1(0.0), nose = cvec1(q.x_max());

    VisibilityReport rep = visibility_experiment(d, tip, nose, {0.45, 0.2}, 3, 4242);
    REQUIRE(rep.rows.size() == 15);
    REQUIRE(rep.depth_per_scale.size() == 5);
    CHECK(rep.rho0 > 0.05);
    CHECK(rep.all_reenter);
    CHECK(rep.stable);
    for (double depth : rep.depth_per_scale) CHECK(depth >= rep.rho0);
    // every path passes near the interior reference point on the axis
    for (const auto& r : rep.rows) {
        CHECK(r.ref_miss < 0.5);
        CHECK(r.compact_hit);
        CHECK(r.delta_z <= 2.0 * r.scale);
        CHECK(r.delta_z >= 0.4 * r.scale);
        CHECK(r.path_value > 0.0);
    }
    // deeper endpoints make longer paths
    CHECK(rep.rows.back().path_value > rep.rows.front().path_value);

    std::ostringstream csv;
    rep.write_csv(csv);
    std::string text = csv.str();
    CHECK(text.rfind("scale,delta_z,delta_w,path_value,reentry_delta", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 16);

    CHECK_THROWS_AS(visibility_experiment(d, tip, tip, {0.1, 0.1}, 2, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(visibility_experiment(d, tip, nose, {0.6, 0.6}, 2, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(visibility_experiment(d, tip, nose, {0.0, 0.2}, 2, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(visibility_experiment(d, tip, nose, {0.45, 0.2}, 0, 1),
                    std::invalid_argument);
}

TEST_CASE("quasi triangle property along certified paths") {
    CuspDomain q(2.0, 1.0, 1.0);
    Domain d = q;
    CuspMap cm(q);
    CVec z = cvec1(q.base_point()), w = cvec1(cplx(0.3, 0.05));
    double kzw = cm.distance(z[0], w[0]);

    // exact geodesic: passing through any node is exactly additive
    PathSample ps = near_geodesic(d, z, w);
    AlmostGeodesicCert cert = certify_almost_geodesic(d, ps, 1.0, 1e-6);
    REQUIRE(cert.valid);
    for (const auto& p : ps.points) {
        double sum = cm.distance(z[0], p[0]) + cm.distance(p[0], w[0]);
        CHECK(sum <= kzw + 3e-6 + 1e-9);
        CHECK(sum >= kzw - 1e-9);
    }

    // graph path certified at (1, kappa): detours cost at most 3 kappa
    DomainGraph g(d, GridSpec{});
    PathSample pg = g.shortest_path(z, w);
    AlmostGeodesicCert cg = certify_almost_geodesic(d, pg, 1.0, 0.35, &g);
    REQUIRE(cg.valid);
    for (const auto& p : pg.points) {
        double sum = cm.distance(z[0], p[0]) + cm.distance(p[0], w[0]);
        CHECK(sum <= kzw + 3.0 * 0.35 + 1e-9);
    }
}
