#include "kobalab/geodesics.hpp"

#include <algorithm>
#include <memory>
#include <variant>

#include "kobalab/metric.hpp"
#include "kobalab/rng.hpp"
#include "kobalab/serialize.hpp"

namespace kobalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const cplx kI(0.0, 1.0);

PathSample single_point(const CVec& z, const char* tag) {
    PathSample ps;
    ps.method = tag;
    ps.points = {z};
    ps.times = {0.0};
    return ps;
}

void uniform_times(PathSample& ps, double total, int legs) {
    ps.value = total;
    ps.times.resize((size_t)legs + 1);
    ps.leg_weights.assign((size_t)legs, total / legs);
    for (int i = 0; i <= legs; ++i)
        ps.times[(size_t)i] = total * (double)i / (double)legs;
}

// Exact unit-speed geodesic of a (scaled) disc: normalize, move z to the
// origin with a Mobius map, walk tanh(t) along the straight ray to the
// image of w, map back.
PathSample disc_geodesic(const Disc& dc, const CVec& z, const CVec& w, double dt) {
    if (z.size() != 1 || w.size() != 1)
        throw std::invalid_argument("near_geodesic: disc points are 1-dimensional");
    cplx z1 = (z[0] - dc.center) / dc.radius;
    cplx z2 = (w[0] - dc.center) / dc.radius;
    if (!(std::abs(z1) < 1.0) || !(std::abs(z2) < 1.0))
        throw std::domain_error("near_geodesic: endpoint outside the disc");
    if (z1 == z2) return single_point(z, "exact-disc");

    cplx m = (z2 - z1) / (1.0 - std::conj(z1) * z2);
    double rho = std::abs(m);
    double total = std::atanh(rho);
    cplx phase = m / rho;
    int legs = std::max(1, (int)std::ceil(total / dt));

    PathSample ps;
    ps.method = "exact-disc";
    ps.points.reserve((size_t)legs + 1);
    for (int i = 0; i <= legs; ++i) {
        cplx xi = phase * std::tanh(total * (double)i / (double)legs);
        cplx zeta = (xi + z1) / (1.0 + std::conj(z1) * xi);
        ps.points.push_back(cvec1(dc.center + dc.radius * zeta));
    }
    ps.points.front() = z;
    ps.points.back() = w;
    uniform_times(ps, total, legs);
    return ps;
}

// Signed arclength coordinate of a real axis point: positive into the cusp.
double signed_axis_time(const CuspMap& cm, double x) {
    double t = cm.axis_distance(x);
    return x <= cm.domain().base_point() ? t : -t;
}

// Exact geodesic of a cusp model domain. Real endpoints ride the axis
// parametrization directly; complex ones go through the upper half-plane
// coordinate s = -i sinh L, where the chart stays finite far beyond the
// depth at which the disc coordinate itself saturates. The half-plane
// geodesic is marched one leg at a time with the Mobius frame re-anchored
// at the current node: a single global frame loses the far endpoint to
// cancellation once tanh(t) saturates (around t = 18), while each marching
// step only ever evaluates tanh of one leg and aims at the remaining
// target, so the samples stay on the geodesic at any depth.
PathSample cusp_geodesic(const CuspDomain& q, const CVec& z, const CVec& w, double dt) {
    if (z.size() != 1 || w.size() != 1)
        throw std::invalid_argument("near_geodesic: cusp domain points are 1-dimensional");
    CuspMap cm(q);
    double total = cm.distance(z[0], w[0]);  // membership is validated here
    if (total == 0.0) return single_point(z, "exact-cusp");
    int legs = std::max(1, (int)std::ceil(total / dt));

    PathSample ps;
    ps.method = "exact-cusp";
    ps.points.reserve((size_t)legs + 1);

    if (z[0].imag() == 0.0 && w[0].imag() == 0.0) {
        double t1 = signed_axis_time(cm, z[0].real());
        double t2 = signed_axis_time(cm, w[0].real());
        for (int i = 0; i <= legs; ++i) {
            double f = (double)i / (double)legs;
            ps.points.push_back(cvec1(cm.axis_point(t1 + f * (t2 - t1))));
        }
    } else {
        cplx l1 = cm.log_e(z[0]), l2 = cm.log_e(w[0]);
        if (std::abs(l1.real()) > 690.0 || std::abs(l2.real()) > 690.0)
            throw saturation_error(
                "near_geodesic: endpoint too deep for the half-plane parametrization");
        cplx sw = -kI * std::sinh(l2);
        double step = std::tanh(total / (double)legs);
        cplx zc = z[0];
        ps.points.push_back(z);
        for (int i = 1; i < legs; ++i) {
            cplx sc = -kI * std::sinh(cm.log_e(zc));
            cplx m = (sw - sc) / (sw - std::conj(sc));
            cplx xi = m / std::abs(m) * step;
            cplx sn = (sc - std::conj(sc) * xi) / (1.0 - xi);
            cplx u = q.a() - (2.0 * q.h() / M_PI) * asinh_stable(kI * sn);
            zc = std::exp(-q.alpha() * std::log(u));
            ps.points.push_back(cvec1(zc));
        }
        ps.points.push_back(w);
    }
    ps.points.front() = z;
    ps.points.back() = w;
    uniform_times(ps, total, legs);
    return ps;
}

PathSample dispatch(const Domain& d, const CVec& z, const CVec& w, double dt,
                    const DomainGraph* g, const GridSpec& spec) {
    if (const auto* dc = std::get_if<Disc>(&d)) return disc_geodesic(*dc, z, w, dt);
    if (const auto* q = std::get_if<CuspDomain>(&d)) return cusp_geodesic(*q, z, w, dt);
    if (g) return g->shortest_path(z, w);
    DomainGraph local(d, spec);
    return local.shortest_path(z, w);
}

}  // namespace

PathSample near_geodesic(const Domain& d, const CVec& z, const CVec& w,
                         const GridSpec& spec) {
    return dispatch(d, z, w, spec.spacing, nullptr, spec);
}

PathSample near_geodesic(const DomainGraph& g, const CVec& z, const CVec& w) {
    return dispatch(g.domain(), z, w, g.spec().spacing, &g, g.spec());
}

AlmostGeodesicCert certify_almost_geodesic(const Domain& d, const PathSample& path,
                                           double lambda, double kappa,
                                           const DomainGraph* graph) {
    if (!(lambda >= 1.0) || !(kappa >= 0.0))
        throw std::invalid_argument(
            "certify_almost_geodesic: need lambda >= 1 and kappa >= 0");
    const auto& pts = path.points;
    const auto& tms = path.times;
    if (pts.empty() || tms.size() != pts.size())
        throw std::invalid_argument("certify_almost_geodesic: path times missing");
    for (size_t i = 0; i + 1 < tms.size(); ++i)
        if (!(tms[i + 1] > tms[i]))
            throw std::invalid_argument("certify_almost_geodesic: nonincreasing times");
    for (const auto& p : pts)
        if (!contains(d, p))
            throw std::domain_error("certify_almost_geodesic: path leaves the domain");

    AlmostGeodesicCert cert;
    cert.lambda = lambda;
    cert.kappa = kappa;
    size_t n = pts.size();
    if (n == 1) {
        cert.valid = true;
        return cert;
    }

    bool exact = distance_exact_available(d);
    std::unique_ptr<DomainGraph> own;
    const DomainGraph* g = graph;
    if (!exact && g == nullptr) {
        own = std::make_unique<DomainGraph>(d, GridSpec{});
        g = own.get();
    }

    // pair set: everything when the path is short, otherwise all consecutive
    // pairs plus all pairs of an evenly spaced index subset
    std::vector<std::pair<size_t, size_t>> pairs;
    if (n <= 40) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
    } else {
        for (size_t i = 0; i + 1 < n; ++i) pairs.push_back({i, i + 1});
        const size_t m = 28;
        std::vector<size_t> idx;
        for (size_t k = 0; k < m; ++k) idx.push_back(k * (n - 1) / (m - 1));
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        for (size_t a = 0; a < idx.size(); ++a)
            for (size_t b = a + 1; b < idx.size(); ++b)
                if (idx[b] > idx[a] + 1) pairs.push_back({idx[a], idx[b]});
    }

    for (auto [i, j] : pairs) {
        double lo, hi;
        if (exact) {
            lo = hi = distance_exact(d, pts[i], pts[j]);
        } else {
            BoundInterval b = distance_interval(*g, pts[i], pts[j]);
            lo = b.lower;
            hi = b.upper;
        }
        double gap = tms[j] - tms[i];
        cert.worst_upper_margin =
            std::max(cert.worst_upper_margin, lo - (lambda * gap + kappa));
        cert.worst_lower_margin =
            std::max(cert.worst_lower_margin, (gap / lambda - kappa) - hi);
    }
    cert.pairs_checked = (int)pairs.size();

    // speed condition at interior nodes: central-difference velocity against
    // the metric upper bound, minus a curvature allowance of 2 lambda h^2
    // for the finite-difference error of a unit-speed arc
    bool mex = metric_exact_available(d);
    for (size_t i = 1; i + 1 < n; ++i) {
        double gap = tms[i + 1] - tms[i - 1];
        CVec v(pts[i].size());
        for (size_t c = 0; c < v.size(); ++c) v[c] = (pts[i + 1][c] - pts[i - 1][c]) / gap;
        double sp = mex ? metric_exact(d, pts[i], v) : metric_interval(d, pts[i], v).upper;
        double h = std::min(0.5 * gap, 0.3);
        cert.speed_margin =
            std::max(cert.speed_margin, sp - lambda - 2.0 * lambda * h * h);
        ++cert.speed_nodes;
    }

    cert.valid = cert.worst_upper_margin <= 0.0 && cert.worst_lower_margin <= 0.0 &&
                 cert.speed_margin <= 0.0;
    return cert;
}

double lipschitz_check(const PathSample& path) {
    if (path.points.size() < 2)
        throw std::invalid_argument("lipschitz_check: need at least 2 nodes");
    if (path.times.size() != path.points.size())
        throw std::invalid_argument("lipschitz_check: times missing");
    double worst = 0.0;
    for (size_t i = 0; i + 1 < path.points.size(); ++i) {
        double dt = path.times[i + 1] - path.times[i];
        if (!(dt > 0.0))
            throw std::invalid_argument("lipschitz_check: zero time step");
        worst = std::max(worst, dist(path.points[i + 1], path.points[i]) / dt);
    }
    return worst;
}

namespace {

void emit_rows(CsvWriter& csv, const std::vector<VisibilityPairRow>& rows) {
    for (const auto& r : rows)
        csv.row_values({dtos(r.scale), dtos(r.delta_z), dtos(r.delta_w),
                        dtos(r.path_value), dtos(r.reentry), dtos(r.ref_miss),
                        r.compact_hit ? "1" : "0"});
}

const std::vector<std::string> kVisibilityHeader = {
    "scale", "delta_z", "delta_w", "path_value", "reentry_delta", "ref_miss",
    "compact_hit"};

}  // namespace

void VisibilityReport::write_csv(const std::string& path) const {
    CsvWriter csv(path, kVisibilityHeader);
    emit_rows(csv, rows);
}

void VisibilityReport::write_csv(std::ostream& out) const {
    CsvWriter csv(out, kVisibilityHeader);
    emit_rows(csv, rows);
}

namespace {

// Interior point on the ray from the boundary point toward ref whose
// boundary distance hits the target, found by bisection inside the
// neighborhood ball of the given radius.
CVec ray_point(const Domain& d, const CVec& bp, const CVec& ref, double radius,
               double target) {
    CVec dir = ref;
    for (size_t i = 0; i < dir.size(); ++i) dir[i] -= bp[i];
    double len = norm(dir);
    for (auto& c : dir) c /= len;

    auto depth = [&](double t) {
        CVec p = bp;
        for (size_t i = 0; i < p.size(); ++i) p[i] += t * dir[i];
        return contains(d, p) ? boundary_distance(d, p) : -1.0;
    };

    double hi = radius * (1.0 - 1e-9);
    while (hi > 1e-14 && depth(hi) < target) hi *= 0.5;
    if (hi <= 1e-14)
        throw std::runtime_error(
            "visibility_experiment: cannot reach the target depth inside the "
            "neighborhood");
    double lo = 0.0;
    for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        (depth(mid) >= target ? hi : lo) = mid;
    }
    CVec p = bp;
    for (size_t i = 0; i < p.size(); ++i) p[i] += hi * dir[i];
    double got = boundary_distance(d, p);
    if (!(got >= 0.5 * target) || !(got <= 2.0 * target))
        throw std::runtime_error("visibility_experiment: depth search did not settle");
    return p;
}

}  // namespace

VisibilityReport visibility_experiment(const Domain& d, const CVec& xi, const CVec& eta,
                                       std::pair<double, double> neighborhood_radii,
                                       int pair_count, std::uint64_t seed,
                                       const std::vector<double>& scales,
                                       const GridSpec& grid) {
    auto [r1, r2] = neighborhood_radii;
    if (!(r1 > 0.0) || !(r2 > 0.0))
        throw std::invalid_argument("visibility_experiment: radii must be positive");
    if ((int)xi.size() != dimension(d) || xi.size() != eta.size())
        throw std::invalid_argument("visibility_experiment: dimension mismatch");
    if (!(dist(xi, eta) > r1 + r2))
        throw std::invalid_argument(
            "visibility_experiment: the closed neighborhoods are not disjoint");
    if (pair_count < 1 || scales.empty())
        throw std::invalid_argument("visibility_experiment: need pairs and scales");

    VisibilityReport rep;
    rep.seed = seed;
    rep.scales = scales;

    if (const auto* q = std::get_if<CuspDomain>(&d)) {
        rep.reference = cvec1(q->base_point());
    } else {
        CVec center;
        double radius = 0.0;
        enclosing_ball(d, center, radius);
        rep.reference = contains(d, center)
                            ? center
                            : sample_interior(d, {0.05 * radius, radius}, 1, seed ^ 0x9e3779b9ull)
                                  .points.at(0);
    }

    bool exact = std::holds_alternative<Disc>(d) || std::holds_alternative<CuspDomain>(d);
    std::unique_ptr<DomainGraph> g;
    if (!exact) g = std::make_unique<DomainGraph>(d, grid);

    Rng rng(seed);
    auto sample_endpoint = [&](const CVec& bp, double radius, double target) {
        CVec p = ray_point(d, bp, rep.reference, radius, target);
        // transverse jitter, kept only when it stays deep enough and inside
        // the neighborhood
        CVec u = rng.unit_cvector((int)bp.size());
        double amp = 0.3 * target * rng.uniform();
        CVec cand = p;
        for (size_t i = 0; i < cand.size(); ++i) cand[i] += amp * u[i];
        if (contains(d, cand) && boundary_distance(d, cand) >= 0.5 * target &&
            dist(cand, bp) <= radius)
            return cand;
        return p;
    };

    for (double scale : scales) {
        double batch_depth = kInf;
        for (int j = 0; j < pair_count; ++j) {
            CVec z = sample_endpoint(xi, r1, scale * (1.0 + 0.4 * rng.uniform()));
            CVec w = sample_endpoint(eta, r2, scale * (1.0 + 0.4 * rng.uniform()));
            PathSample ps = exact ? near_geodesic(d, z, w, grid) : near_geodesic(*g, z, w);

            VisibilityPairRow row;
            row.scale = scale;
            row.delta_z = boundary_distance(d, z);
            row.delta_w = boundary_distance(d, w);
            row.path_value = ps.value;
            row.ref_miss = kInf;
            for (const auto& p : ps.points) {
                row.reentry = std::max(row.reentry, boundary_distance(d, p));
                row.ref_miss = std::min(row.ref_miss, dist(p, rep.reference));
            }
            batch_depth = std::min(batch_depth, row.reentry);
            rep.rows.push_back(std::move(row));
        }
        rep.depth_per_scale.push_back(batch_depth);
    }

    double coarse_best = 0.0;
    for (int j = 0; j < pair_count; ++j)
        coarse_best = std::max(coarse_best, rep.rows[(size_t)j].reentry);
    rep.rho0 = 0.5 * coarse_best;

    rep.all_reenter = true;
    for (auto& r : rep.rows) {
        r.compact_hit = r.reentry >= rep.rho0;
        rep.all_reenter = rep.all_reenter && r.compact_hit;
    }
    if (rep.depth_per_scale.size() >= 3) {
        double mx = 0.0, mn = kInf;
        for (size_t k = rep.depth_per_scale.size() - 3; k < rep.depth_per_scale.size(); ++k) {
            mx = std::max(mx, rep.depth_per_scale[k]);
            mn = std::min(mn, rep.depth_per_scale[k]);
        }
        rep.stable = (mx - mn) < 0.2 * mx;
    }
    return rep;
}

}  // namespace kobalab
