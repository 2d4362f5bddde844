#include "kobalab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "kobalab/rng.hpp"
#include "kobalab/serialize.hpp"

namespace kobalab {

namespace {

// Exact metric of the unit-normalized disc formula for a coordinate slice.
double disc_metric(cplx z, cplx c, double R, cplx v) {
    double rho2 = std::norm(z - c);
    double den = R * R - rho2;
    if (den <= 0.0) throw std::domain_error("metric: point not inside disc");
    return std::abs(v) * R / den;
}

double ball_metric(const CVec& z, const CVec& c, double R, const CVec& v) {
    // Kobayashi metric of the ball: translate/scale to the unit ball, where
    // kappa(w; u)^2 = ((1-|w|^2)|u|^2 + |<u,w>|^2) / (1-|w|^2)^2.
    size_t n = z.size();
    CVec w(n), u(n);
    for (size_t i = 0; i < n; ++i) {
        cplx cc = c.empty() ? cplx(0.0) : c[i];
        w[i] = (z[i] - cc) / R;
        u[i] = v[i] / R;
    }
    double t = 1.0 - norm2(w);
    if (t <= 0.0) throw std::domain_error("metric: point not inside ball");
    double num = t * norm2(u) + std::norm(hdot(u, w));
    return std::sqrt(num) / t;
}

struct LowerHit {
    double value = 0.0;
    const char* tag = "none";
};

void consider(LowerHit& best, double value, const char* tag) {
    if (value > best.value) {
        best.value = value;
        best.tag = tag;
    }
}

// Best non-exact lower bound at (z, v). delta < 0 means "not computed yet".
// Every domain kind has at least one always-applicable method, so the
// result is strictly positive for interior z and v != 0.
LowerHit best_estimator_lower(const Domain& d, const CVec& z, const CVec& v,
                              double alpha_S, double delta) {
    double nv = norm(v);
    LowerHit best;
    if (nv == 0.0) return {0.0, "zero-vector"};
    double inv_sqrt_as = 1.0 / std::sqrt(alpha_S);

    // Koebe quarter theorem on simply connected planar domains.
    if (std::holds_alternative<Disc>(d) || std::holds_alternative<CuspDomain>(d)) {
        if (delta < 0.0) delta = boundary_distance(d, z);
        consider(best, 0.25 * nv / delta, "koebe-quarter");
    }

    if (const auto* cal = std::get_if<Caltrop>(&d)) {
        for (size_t j = 0; j < cal->spikes().size(); ++j) {
            const auto& pr = cal->spike(j).profile;
            MeridianCoord mc = cal->meridian_coord(z, j);
            // Full teardrop meridians keep the Levi floor on the closing arc
            // (the axial curvature term is -1 there), so the weight works on
            // the whole body; embedded spikes stop at the chart length.
            double chart = cal->spike(j).full_meridian ? pr.x_end()
                                                       : cal->levi_chart_len(j);
            if (mc.x <= 0.0 || mc.x >= chart) continue;
            double u = mc.S * mc.S - sq(pr.psi(mc.x));
            if (u >= 0.0) continue;  // outside this spike body
            consider(best, 0.5 * inv_sqrt_as * nv / std::sqrt(-u), "sibony-spike");
        }
        if (cal->spikes().size() == 1 && cal->spike(0).full_meridian) {
            const auto& pr = cal->spike(0).profile;
            MeridianCoord mc = cal->meridian_coord(z, 0);
            if (mc.x >= pr.A() && mc.x < pr.x_end()) {
                if (delta < 0.0) delta = boundary_distance(d, z);
                double pre = 1.0 - std::sqrt(delta);
                if (pre > 0.0)
                    consider(best, 0.25 * pre * nv / std::sqrt(delta),
                             "strong-psc-collar");
            }
        }
    }

    // Enclosing-ball weight: total coverage, so lower bounds never come up
    // empty no matter where the sample landed.
    CVec ec;
    double er = 0.0;
    enclosing_ball(d, ec, er);
    double u = 0.0;
    for (size_t i = 0; i < z.size(); ++i) u += std::norm(z[i] - ec[i]);
    u = u / (er * er) - 1.0;
    if (u < 0.0)
        consider(best, (inv_sqrt_as / er) * nv / std::sqrt(-u),
                 "sibony-enclosing-ball");

    if (best.value <= 0.0)
        throw std::logic_error("metric lower bound coverage hole");
    return best;
}

}  // namespace

bool metric_exact_available(const Domain& d) {
    return !std::holds_alternative<Caltrop>(d);
}

double metric_exact(const Domain& d, const CVec& z, const CVec& v) {
    if (static_cast<int>(z.size()) != dimension(d) || v.size() != z.size())
        throw std::invalid_argument("metric_exact: dimension mismatch");
    if (const auto* dc = std::get_if<Disc>(&d))
        return disc_metric(z[0], dc->center, dc->radius, v[0]);
    if (const auto* b = std::get_if<Ball>(&d))
        return ball_metric(z, b->center.empty() ? CVec(b->n, 0.0) : b->center,
                           b->radius, v);
    if (const auto* p = std::get_if<Polydisc>(&d)) {
        // Product domain: the metric is the max over coordinate slices.
        double m = 0.0;
        for (size_t i = 0; i < p->radii.size(); ++i)
            m = std::max(m, disc_metric(z[i], p->center[i], p->radii[i], v[i]));
        return m;
    }
    if (const auto* q = std::get_if<CuspDomain>(&d))
        return CuspMap(*q).metric(z[0], v[0]);
    throw std::invalid_argument("metric_exact: no closed form for this domain");
}

double metric_upper_disc(const Domain& d, const CVec& z, const CVec& v,
                         int circle_samples) {
    if (!contains(d, z))
        throw std::domain_error("metric_upper_disc: point not inside");
    double nv = norm(v);
    if (nv == 0.0) return 0.0;
    if (circle_samples < 8)
        throw std::invalid_argument("metric_upper_disc: too few circle samples");
    CVec dir(v);
    for (auto& c : dir) c /= nv;

    auto circle_ok = [&](double r, int m) {
        // rim plus the half-radius circle; the center is inside by assumption
        for (double scale : {1.0, 0.5}) {
            double rr = r * scale;
            for (int k = 0; k < m; ++k) {
                double th = 2.0 * M_PI * k / m;
                cplx w = rr * cplx(std::cos(th), std::sin(th));
                CVec p(z);
                for (size_t i = 0; i < p.size(); ++i) p[i] += w * dir[i];
                if (!contains(d, p)) return false;
            }
        }
        return true;
    };

    CVec ec;
    double er = 0.0;
    enclosing_ball(d, ec, er);

    auto bisect = [&](double lo, double hi, int m) {
        for (int it = 0; it < 60 && hi - lo > 1e-15 * hi; ++it) {
            double mid = 0.5 * (lo + hi);
            (circle_ok(mid, m) ? lo : hi) = mid;
        }
        return lo;
    };

    double r = bisect(0.0, 2.0 * er + 1.0, circle_samples);
    // re-verify at double density before accepting
    if (!circle_ok(r, 2 * circle_samples))
        r = bisect(0.0, r, 2 * circle_samples);
    if (r < 1e-14)
        throw std::runtime_error("metric_upper_disc: degenerate point (no disc fits)");
    return nv / r;
}

PshWitness spike_chart_witness(const Caltrop& c, std::size_t spike_index,
                               double alpha_S) {
    if (spike_index >= c.spikes().size())
        throw std::invalid_argument("spike_chart_witness: no such spike");
    // See best_estimator_lower: teardrop meridians keep the floor end to end.
    double chart = c.spike(spike_index).full_meridian
                       ? c.spike(spike_index).profile.x_end()
                       : c.levi_chart_len(spike_index);
    PshWitness w;
    w.c = 0.25;
    w.alpha_S = alpha_S;
    w.tag = "sibony-spike";
    w.u = [c, spike_index](const CVec& z) {
        MeridianCoord mc = c.meridian_coord(z, spike_index);
        return mc.S * mc.S - sq(c.spike(spike_index).profile.psi(mc.x));
    };
    w.in_chart = [c, spike_index, chart](const CVec& z) {
        MeridianCoord mc = c.meridian_coord(z, spike_index);
        return mc.x > 0.0 && mc.x < chart;
    };
    return w;
}

PshWitness enclosing_ball_witness(const Domain& d, double alpha_S) {
    CVec ec;
    double er = 0.0;
    enclosing_ball(d, ec, er);
    PshWitness w;
    w.c = 1.0 / (er * er);
    w.alpha_S = alpha_S;
    w.tag = "sibony-enclosing-ball";
    w.u = [ec, er](const CVec& z) {
        double s = 0.0;
        for (size_t i = 0; i < z.size(); ++i) s += std::norm(z[i] - ec[i]);
        return s / (er * er) - 1.0;
    };
    w.in_chart = [](const CVec&) { return true; };
    return w;
}

double metric_lower_sibony(const PshWitness& w, const CVec& z, const CVec& v) {
    if (!w.in_chart(z))
        throw std::domain_error("metric_lower_sibony: point outside witness chart");
    double u = w.u(z);
    if (u >= 0.0)
        throw std::domain_error("metric_lower_sibony: witness not negative here");
    return std::sqrt(w.c / w.alpha_S) * norm(v) / std::sqrt(-u);
}

CollarSpec cap_collar(const Caltrop& c) {
    if (c.spikes().size() != 1 || !c.spike(0).full_meridian)
        throw std::invalid_argument("cap_collar: needs a single-spike teardrop");
    const auto& pr = c.spike(0).profile;
    double A = pr.A(), x_end = pr.x_end();
    CollarSpec s;
    s.sigma = 0.25;
    s.c_collar = 1.0;
    s.inner_radius = pr.arc_radius();
    s.tag = "strong-psc-cap";
    s.in_collar = [c, A, x_end](const CVec& z) {
        MeridianCoord mc = c.meridian_coord(z, 0);
        return mc.x >= A && mc.x < x_end;
    };
    return s;
}

PscBound metric_lower_strong_psc(const Domain& d, const CVec& z,
                                 const CVec& v, const CollarSpec& spec) {
    if (!contains(d, z))
        throw std::domain_error("metric_lower_strong_psc: point not inside");
    if (!spec.in_collar(z)) return {};
    double delta = boundary_distance(d, z);
    double pre = 1.0 - spec.c_collar * std::sqrt(delta);
    if (pre <= 0.0) return {};  // estimate vacuous this far from the boundary
    return {pre * spec.sigma * norm(v) / std::sqrt(delta), true};
}

BoundInterval metric_interval(const Domain& d, const CVec& z, const CVec& v,
                              double alpha_S) {
    if (!contains(d, z))
        throw std::domain_error("metric_interval: point not inside");
    BoundInterval out;
    if (norm(v) == 0.0) {
        out.lower_method = out.upper_method = "zero-vector";
        return out;
    }
    if (metric_exact_available(d)) {
        double ex = metric_exact(d, z, v);
        out.lower = out.upper = ex;
        const char* tag =
            std::holds_alternative<CuspDomain>(d) ? "exact-chart" : "exact-closed-form";
        out.lower_method = out.upper_method = tag;
        return out;
    }
    LowerHit lo = best_estimator_lower(d, z, v, alpha_S, -1.0);
    out.lower = lo.value;
    out.lower_method = lo.tag;
    out.upper = metric_upper_disc(d, z, v);
    out.upper_method = "inscribed-disc-sampled";
    if (out.lower > out.upper * (1.0 + 1e-9))
        throw std::logic_error("metric_interval: lower bound " + dtos(out.lower) +
                               " (" + out.lower_method + ") exceeds upper " +
                               dtos(out.upper));
    return out;
}

void MProfile::write_csv(std::ostream& out) const {
    CsvWriter csv(out, {"r", "M_lower", "M_upper", "n_samples", "seed"});
    for (const auto& row : rows)
        csv.row_values({dtos(row.r), dtos(row.M_lower), dtos(row.M_upper),
                        itos(row.n_samples), std::to_string(seed)});
}

MProfile m_profile(const Domain& d, const std::vector<double>& r_grid,
                   int directions_per_point, std::uint64_t seed,
                   int points_per_radius) {
    if (r_grid.empty()) throw std::invalid_argument("m_profile: empty grid");
    if (directions_per_point < 1 || points_per_radius < 1)
        throw std::invalid_argument("m_profile: counts must be positive");
    std::vector<double> grid(r_grid);
    std::sort(grid.begin(), grid.end());
    if (grid.front() <= 0.0)
        throw std::invalid_argument("m_profile: radii must be positive");

    bool exact = metric_exact_available(d);
    int n = dimension(d);
    Rng rng(seed);
    MProfile prof;
    prof.seed = seed;

    for (double r : grid) {
        SampleResult pts = sample_interior(d, {0.97 * r, r}, points_per_radius,
                                           rng.raw());
        MProfileRow row;
        row.r = r;
        for (const auto& z : pts.points) {
            double delta = boundary_distance(d, z);
            for (int k = 0; k < directions_per_point; ++k) {
                CVec v = rng.unit_cvector(n);
                double up = exact ? metric_exact(d, z, v)
                                  : metric_upper_disc(d, z, v);
                row.M_lower = std::max(row.M_lower, 1.0 / up);
                LowerHit lo = best_estimator_lower(d, z, v, 4.0, delta);
                row.M_upper = std::max(row.M_upper, 1.0 / lo.value);
                ++row.n_samples;
            }
        }
        prof.rows.push_back(row);
    }
    // The true profile is monotone in r; enforce it on both columns.
    for (size_t i = 1; i < prof.rows.size(); ++i) {
        prof.rows[i].M_lower = std::max(prof.rows[i].M_lower, prof.rows[i - 1].M_lower);
        prof.rows[i].M_upper = std::max(prof.rows[i].M_upper, prof.rows[i - 1].M_upper);
    }
    return prof;
}

DecayReport derivative_decay_check(const Domain& d,
                                   const std::vector<AnalyticDisc>& discs,
                                   double alpha_S) {
    DecayReport rep;
    std::vector<double> lx, ly;
    for (const auto& disc : discs) {
        CVec center = disc.map(cplx(0.0));
        if (!contains(d, center))
            throw std::runtime_error("derivative_decay_check: center outside (" +
                                     disc.label + ")");
        for (double rho : {0.25, 0.5, 0.75, 0.95}) {
            for (int k = 0; k < 64; ++k) {
                double th = 2.0 * M_PI * k / 64;
                CVec p = disc.map(rho * cplx(std::cos(th), std::sin(th)));
                if (!contains(d, p))
                    throw std::runtime_error(
                        "derivative_decay_check: disc leaves the domain (" +
                        disc.label + ")");
            }
        }
        const double t = 1e-6;
        CVec hi = disc.map(cplx(t)), lo = disc.map(cplx(-t));
        CVec deriv(hi.size());
        for (size_t i = 0; i < hi.size(); ++i) deriv[i] = (hi[i] - lo[i]) / (2.0 * t);

        DecayRow row;
        row.delta = boundary_distance(d, center);
        row.deriv_norm = norm(deriv);
        CVec dir = row.deriv_norm > 1e-300 ? deriv : CVec(hi.size(), cplx(0.0));
        if (row.deriv_norm <= 1e-300) dir[0] = 1.0;
        double lower = metric_exact_available(d)
                           ? metric_exact(d, center, dir)
                           : best_estimator_lower(d, center, dir, alpha_S, row.delta).value;
        row.bound = norm(dir) / lower;
        row.margin = row.bound / std::max(row.deriv_norm, 1e-300);
        row.ok = row.deriv_norm <= row.bound * (1.0 + 1e-12);
        if (row.deriv_norm > 0.0 && row.delta > 0.0) {
            lx.push_back(std::log(row.delta));
            ly.push_back(std::log(row.deriv_norm));
        }
        rep.rows.push_back(row);
    }
    rep.all_ok = !rep.rows.empty() &&
                 std::all_of(rep.rows.begin(), rep.rows.end(),
                             [](const DecayRow& r) { return r.ok; });
    if (lx.size() >= 2) rep.trend = fit_line(lx, ly);
    return rep;
}

}  // namespace kobalab
