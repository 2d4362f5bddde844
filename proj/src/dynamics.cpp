#include "kobalab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "kobalab/conformal.hpp"
#include "kobalab/serialize.hpp"

namespace kobalab {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite(const CVec& z) {
    for (cplx c : z)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

// Diameter proxy: diagonal of the coordinate bounding box. Cheap, and for
// the cluster ratios used below a constant-factor proxy is all that matters.
double bbox_diag(const std::vector<CVec>& pts, size_t from) {
    if (pts.empty() || from >= pts.size()) return 0.0;
    size_t n = pts[from].size();
    std::vector<double> lo(2 * n, 1e300), hi(2 * n, -1e300);
    for (size_t i = from; i < pts.size(); ++i)
        for (size_t k = 0; k < n; ++k) {
            double re = pts[i][k].real(), im = pts[i][k].imag();
            lo[2 * k] = std::min(lo[2 * k], re);
            hi[2 * k] = std::max(hi[2 * k], re);
            lo[2 * k + 1] = std::min(lo[2 * k + 1], im);
            hi[2 * k + 1] = std::max(hi[2 * k + 1], im);
        }
    double s = 0.0;
    for (size_t k = 0; k < 2 * n; ++k) s += sq(hi[k] - lo[k]);
    return std::sqrt(s);
}

}  // namespace

Mobius Mobius::rotation(double theta) {
    return {std::polar(1.0, theta), 0.0, 0.0, 1.0};
}

const char* to_string(OrbitClass c) {
    switch (c) {
        case OrbitClass::COMPACT_ORBIT: return "COMPACT_ORBIT";
        case OrbitClass::BOUNDARY_CONVERGENT: return "BOUNDARY_CONVERGENT";
        default: return "UNDETERMINED";
    }
}

SelfMapSpec SelfMapSpec::disc_map(const Disc& d, const Mobius& g,
                                  std::uint64_t audit_seed) {
    SelfMapSpec f;
    f.dom_ = d;
    f.kind_ = Kind::kDisc;
    f.g_ = g;
    f.run_audit_(audit_seed, 10000);
    return f;
}

SelfMapSpec SelfMapSpec::cusp_map(const CuspDomain& q, const Mobius& g,
                                  std::uint64_t audit_seed) {
    SelfMapSpec f;
    f.dom_ = q;
    f.kind_ = Kind::kCusp;
    f.g_ = g;
    // Conjugate by the Cayley matrix [[i, i], [-1, 1]] so the map acts on
    // the half-plane coordinate s = -i sinh L of the cusp chart, which is
    // exactly the Cayley image of the disc chart and never saturates.
    Mobius cay{cplx(0, 1), cplx(0, 1), -1.0, 1.0};
    f.half_ = Mobius::compose(cay, Mobius::compose(g, Mobius::inverse(cay)));
    f.run_audit_(audit_seed, 10000);
    return f;
}

SelfMapSpec SelfMapSpec::caltrop_map(const Caltrop& c, const Mobius& g,
                                     cplx transverse_factor,
                                     std::uint64_t audit_seed) {
    SelfMapSpec f;
    f.dom_ = c;
    f.kind_ = Kind::kCaltrop;
    f.g_ = g;
    f.lam_ = transverse_factor;
    f.run_audit_(audit_seed, 10000);
    return f;
}

CVec SelfMapSpec::apply(const CVec& z) const {
    switch (kind_) {
        case Kind::kDisc: {
            const Disc& d = std::get<Disc>(dom_);
            cplx w = g_((z.at(0) - d.center) / d.radius);
            return cvec1(d.center + d.radius * w);
        }
        case Kind::kCusp: {
            const CuspDomain& q = std::get<CuspDomain>(dom_);
            CuspMap chain(q);
            cplx s = cplx(0, -1) * std::sinh(chain.log_e(z.at(0)));
            cplx l = asinh_stable(cplx(0, 1) * half_(s));
            cplx u = q.a() - (2.0 * q.h() / kPi) * l;
            return cvec1(std::exp(-q.alpha() * std::log(u)));
        }
        case Kind::kCaltrop: {
            const Caltrop& c = std::get<Caltrop>(dom_);
            const SpikeChart& sp = c.spike(0);
            CVec d(z.size());
            for (size_t i = 0; i < z.size(); ++i) d[i] = z[i] - sp.tip[i];
            cplx axial = hdot(d, sp.axis);
            cplx moved = g_(axial);
            CVec out(z.size());
            for (size_t i = 0; i < z.size(); ++i) {
                cplx trans = d[i] - axial * sp.axis[i];
                out[i] = sp.tip[i] + moved * sp.axis[i] + lam_ * trans;
            }
            return out;
        }
    }
    throw std::logic_error("self map: unknown kind");
}

void SelfMapSpec::run_audit_(std::uint64_t seed, int samples) {
    SampleResult batch = sample_interior(dom_, {1e-4, 1e9}, samples, seed);
    audit_.samples = static_cast<int>(batch.points.size());
    audit_.seed = seed;
    audit_.worst_margin = 1e300;
    for (size_t i = 0; i < batch.points.size(); ++i) {
        CVec image = apply(batch.points[i]);
        if (!finite(image) || !contains(dom_, image))
            throw std::invalid_argument(
                "self map audit: image left the domain at sample " + itos((long long)i));
        audit_.worst_margin = std::min(audit_.worst_margin, boundary_distance(dom_, image));
    }
    if (batch.points.empty()) audit_.worst_margin = 0.0;
}

void write_orbit_csv(std::ostream& os, const OrbitRecord& orbit) {
    size_t n = orbit.start.size();
    std::vector<std::string> header{"nu"};
    for (size_t k = 0; k < n; ++k) {
        header.push_back("re_" + itos((long long)k));
        header.push_back("im_" + itos((long long)k));
    }
    header.push_back("delta");
    CsvWriter csv(os, header);
    for (size_t i = 0; i < orbit.points.size(); ++i) {
        std::vector<double> row{static_cast<double>(i)};
        for (size_t k = 0; k < n; ++k) {
            row.push_back(orbit.points[i][k].real());
            row.push_back(orbit.points[i][k].imag());
        }
        row.push_back(orbit.deltas[i]);
        csv.row(row);
    }
}

CVec project_boundary(const Domain& d, const CVec& z) {
    // Closed shapes first, where the projection is a one-liner.
    if (const Disc* dd = std::get_if<Disc>(&d)) {
        cplx v = z.at(0) - dd->center;
        double r = std::abs(v);
        if (r < 1e-300) v = 1.0, r = 1.0;
        return cvec1(dd->center + dd->radius * v / r);
    }
    if (const Ball* bb = std::get_if<Ball>(&d)) {
        CVec v(z.size());
        double r = 0.0;
        for (size_t i = 0; i < z.size(); ++i) v[i] = z[i] - bb->center[i];
        r = norm(v);
        if (r < 1e-300) {
            v.assign(z.size(), 0.0);
            v[0] = 1.0;
            r = 1.0;
        }
        CVec out(z.size());
        for (size_t i = 0; i < z.size(); ++i) out[i] = bb->center[i] + bb->radius * v[i] / r;
        return out;
    }

    // Generic walk: the boundary distance is 1-Lipschitz with gradient equal
    // to the inward normal where smooth, so stepping against its numerical
    // gradient by the current distance lands on (or a hair short of) the
    // boundary. Near cusp tips the gradient points up the axis and the walk
    // slides deeper into the cusp instead, which still ends within the
    // current depth of the boundary; that residual is reported by callers.
    CVec p = z;
    size_t n = p.size();
    std::vector<double> grad(2 * n, 0.0);
    double del = boundary_distance(d, p);
    for (int it = 0; it < 8 && del > 1e-13; ++it) {
        double h = std::max(1e-9, 1e-4 * del);
        double gn2 = 0.0;
        for (size_t k = 0; k < 2 * n; ++k) {
            CVec lo = p, hi = p;
            cplx bump = (k % 2 == 0) ? cplx(h, 0) : cplx(0, h);
            lo[k / 2] -= bump;
            hi[k / 2] += bump;
            double dlo = contains(d, lo) ? boundary_distance(d, lo) : 0.0;
            double dhi = contains(d, hi) ? boundary_distance(d, hi) : 0.0;
            grad[k] = (dhi - dlo) / (2.0 * h);
            gn2 += sq(grad[k]);
        }
        if (gn2 < 1e-24) break;
        double step = 0.999 * del / std::sqrt(gn2);
        CVec next = p;
        for (int halve = 0; halve < 6; ++halve) {
            for (size_t k = 0; k < n; ++k)
                next[k] = p[k] - cplx(step * grad[2 * k], step * grad[2 * k + 1]);
            if (contains(d, next)) break;
            step *= 0.5;
        }
        if (!contains(d, next)) break;
        p = next;
        del = boundary_distance(d, p);
    }
    // Final push along the last gradient, allowed to land outside.
    double gn = 0.0;
    for (double g : grad) gn += sq(g);
    if (gn > 1e-24) {
        double step = del / std::sqrt(gn);
        for (size_t k = 0; k < n; ++k)
            p[k] -= cplx(step * grad[2 * k], step * grad[2 * k + 1]);
    }
    return p;
}

OrbitClass classify_orbit(const Domain& d, OrbitRecord& orbit, const OrbitConfig& cfg) {
    orbit.classification = OrbitClass::UNDETERMINED;
    orbit.xi.clear();
    orbit.xi_residual = 0.0;
    size_t len = orbit.points.size();
    if (orbit.exited || len < 50) return orbit.classification;

    size_t tail_len = std::max<size_t>(2, (size_t)std::ceil(cfg.tail_fraction * (double)len));
    tail_len = std::min(tail_len, len);
    size_t t0 = len - tail_len;

    double delta_max = *std::max_element(orbit.deltas.begin(), orbit.deltas.end());
    double delta_last = orbit.deltas.back();
    size_t dec = 0;
    for (size_t i = t0 + 1; i < len; ++i)
        if (orbit.deltas[i] < orbit.deltas[i - 1]) ++dec;
    double dec_frac = (double)dec / (double)(tail_len - 1);

    std::vector<double> tail(orbit.deltas.begin() + (long)t0, orbit.deltas.end());
    std::sort(tail.begin(), tail.end());
    double tail_min = tail.front();
    double tail_med = tail[tail.size() / 2];

    double diam = bbox_diag(orbit.points, 0);
    double tail_diam = bbox_diag(orbit.points, t0);

    // Once the depth reaches the last few ulps of the boundary it can stall
    // there instead of decreasing, so a machine-small final depth counts as
    // a valid trend on its own.
    bool trend_ok = dec_frac >= 0.6 || delta_last <= 1e-10;
    if (trend_ok && delta_last <= 0.2 * delta_max && tail_diam <= 0.25 * diam) {
        CVec xi = project_boundary(d, orbit.points.back());
        double worst = 0.0;
        for (size_t i = t0; i < len; ++i) worst = std::max(worst, dist(orbit.points[i], xi));
        if (worst <= cfg.cluster_radius) {
            orbit.classification = OrbitClass::BOUNDARY_CONVERGENT;
            orbit.xi = xi;
            orbit.xi_residual = dist(orbit.points.back(), xi);
            return orbit.classification;
        }
    }
    if (tail_min >= cfg.delta_floor && tail_med >= 0.3 * delta_max)
        orbit.classification = OrbitClass::COMPACT_ORBIT;
    return orbit.classification;
}

OrbitRecord iterate(const SelfMapSpec& f, const CVec& z0, int n_steps,
                    const OrbitConfig& cfg) {
    if (n_steps < 1) throw std::invalid_argument("iterate: need at least one step");
    if (!contains(f.domain(), z0)) throw std::domain_error("iterate: start not interior");
    OrbitRecord rec;
    rec.start = z0;
    rec.points.reserve((size_t)n_steps + 1);
    rec.deltas.reserve((size_t)n_steps + 1);
    rec.points.push_back(z0);
    rec.deltas.push_back(boundary_distance(f.domain(), z0));
    CVec z = z0;
    for (int nu = 1; nu <= n_steps; ++nu) {
        CVec w = f.apply(z);
        if (finite(w) && !contains(f.domain(), w)) {
            // Allow a hair of rounding: pull back toward the previous
            // iterate by an absolute 1e-12 and retry membership.
            double gap = dist(w, z);
            if (gap > 0.0) {
                double t = std::min(1.0, 1e-12 * (1.0 + norm(w)) / gap);
                CVec w2(w.size());
                for (size_t i = 0; i < w.size(); ++i) w2[i] = w[i] + t * (z[i] - w[i]);
                if (contains(f.domain(), w2)) w = std::move(w2);
            }
        }
        if (!finite(w) || !contains(f.domain(), w)) {
            rec.exited = true;
            rec.exit_step = nu;
            break;
        }
        rec.points.push_back(w);
        rec.deltas.push_back(boundary_distance(f.domain(), w));
        z = std::move(w);
    }
    classify_orbit(f.domain(), rec, cfg);
    return rec;
}

CommonLimitReport common_limit_check(const SelfMapSpec& f, const std::vector<CVec>& starts,
                                     int n_steps, const OrbitConfig& cfg) {
    if (starts.size() < 2)
        throw std::invalid_argument("common limit check: need at least two starts");
    CommonLimitReport rep;
    rep.orbits.reserve(starts.size());
    for (const CVec& s : starts) rep.orbits.push_back(iterate(f, s, n_steps, cfg));

    size_t n_comp = 0, n_bnd = 0;
    for (const auto& o : rep.orbits) {
        if (o.classification == OrbitClass::COMPACT_ORBIT) ++n_comp;
        if (o.classification == OrbitClass::BOUNDARY_CONVERGENT) ++n_bnd;
    }
    rep.all_compact = n_comp == rep.orbits.size();
    rep.all_boundary = n_bnd == rep.orbits.size();
    rep.dichotomy_violation = !rep.all_compact && !rep.all_boundary;
    if (rep.all_boundary) {
        for (size_t i = 0; i < rep.orbits.size(); ++i)
            for (size_t j = i + 1; j < rep.orbits.size(); ++j)
                rep.max_separation =
                    std::max(rep.max_separation, dist(rep.orbits[i].xi, rep.orbits[j].xi));
        rep.common_limit = rep.max_separation <= cfg.cluster_radius;
        rep.xi = rep.orbits.front().xi;
    }
    return rep;
}

namespace {

// One distance evaluation for the sequence checks: exact where the lab has
// a closed form, interval bounds through the supplied graph elsewhere.
double seq_distance(const Domain& d, const DomainGraph* bounds, const CVec& z,
                    const CVec& w, bool want_lower) {
    if (distance_exact_available(d)) return distance_exact(d, z, w);
    if (!bounds)
        throw std::invalid_argument(
            "sequence check: this domain has no closed-form distance; pass a bounds graph");
    BoundInterval b = distance_interval(*bounds, z, w);
    return want_lower ? b.lower : b.upper;
}

}  // namespace

DistanceBlowupReport distance_blowup_check(const Domain& d, const CVec& z0,
                                           const std::vector<std::vector<CVec>>& sequences,
                                           const DomainGraph* bounds) {
    if (!contains(d, z0)) throw std::domain_error("blowup check: base point not interior");
    DistanceBlowupReport rep;
    rep.all_diverging = !sequences.empty();
    for (const auto& seq : sequences) {
        if (seq.size() < 3)
            throw std::invalid_argument("blowup check: sequence needs at least three points");
        for (const CVec& w : seq)
            if (!contains(d, w))
                throw std::invalid_argument("blowup check: sequence not interior");
        double d_first = boundary_distance(d, seq.front());
        double d_last = boundary_distance(d, seq.back());
        if (!(d_last < 0.1 * d_first))
            throw std::invalid_argument(
                "blowup check: sequence does not approach the boundary");

        BlowupSequence row;
        row.lower_values.reserve(seq.size());
        for (const CVec& w : seq)
            row.lower_values.push_back(seq_distance(d, bounds, z0, w, true));
        size_t up = 0;
        for (size_t i = 1; i < row.lower_values.size(); ++i)
            if (row.lower_values[i] > row.lower_values[i - 1]) ++up;
        row.increase_fraction = (double)up / (double)(row.lower_values.size() - 1);
        row.diverging = row.increase_fraction >= 0.8 &&
                        row.lower_values.back() >= 5.0 * row.lower_values.front();
        rep.all_diverging = rep.all_diverging && row.diverging;
        rep.sequences.push_back(std::move(row));
    }
    return rep;
}

KarlssonReport karlsson_subsequence_check(const SelfMapSpec& f, const CVec& o, int n_steps,
                                          const OrbitConfig& cfg, const DomainGraph* bounds) {
    KarlssonReport rep;
    rep.orbit = iterate(f, o, n_steps, cfg);
    double best = -1.0;
    for (size_t nu = 1; nu < rep.orbit.points.size(); ++nu) {
        double kd = seq_distance(f.domain(), bounds, rep.orbit.points[nu], o, false);
        if (kd > best) {
            best = kd;
            rep.record_steps.push_back((int)nu);
            rep.record_values.push_back(kd);
        }
    }
    if (!rep.record_steps.empty()) {
        // Escaping orbits keep breaking their record into the last stretch
        // and gain at least a unit of distance; bounded orbits do neither.
        bool late = rep.record_steps.back() >= (int)(0.8 * (double)n_steps);
        bool grew = rep.record_values.back() >= rep.record_values.front() + 1.0;
        rep.blowing_up = late && grew;
    }
    if (rep.orbit.classification == OrbitClass::BOUNDARY_CONVERGENT &&
        !rep.record_steps.empty()) {
        rep.limit_gap =
            dist(rep.orbit.points[(size_t)rep.record_steps.back()], rep.orbit.xi);
        rep.limit_match = rep.limit_gap <= cfg.cluster_radius;
    }
    return rep;
}

}  // namespace kobalab
