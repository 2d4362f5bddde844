#include "kobalab/domains.hpp"

#include <algorithm>
#include <cmath>

namespace kobalab {

namespace {

constexpr double kGolden = 0.6180339887498949;

// Golden-section minimization of f on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi, int iters = 48) {
    double x1 = hi - kGolden * (hi - lo);
    double x2 = lo + kGolden * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGolden * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGolden * (hi - lo);
            f2 = f(x2);
        }
    }
    return std::min(f1, f2);
}

// Deterministic orthonormal frame whose last vector is `axis`.
std::vector<CVec> complete_frame(const CVec& axis) {
    const int n = static_cast<int>(axis.size());
    std::vector<CVec> frame;
    frame.reserve(n);
    for (int i = 0; i < n && static_cast<int>(frame.size()) < n - 1; ++i) {
        CVec e(n, 0.0);
        e[i] = 1.0;
        cplx c = hdot(e, axis);
        for (int k = 0; k < n; ++k) e[k] -= c * axis[k];
        for (const auto& f : frame) {
            cplx d = hdot(e, f);
            for (int k = 0; k < n; ++k) e[k] -= d * f[k];
        }
        double nn = norm(e);
        if (nn > 1e-8) {
            for (auto& z : e) z /= nn;
            frame.push_back(std::move(e));
        }
    }
    if (static_cast<int>(frame.size()) != n - 1)
        throw std::runtime_error("caltrop: failed to complete unitary frame");
    frame.push_back(axis);
    return frame;
}

}  // namespace

// ---------------------------------------------------------------------------
// CuspDomain

CuspDomain::CuspDomain(double alpha, double a, double h)
    : alpha_(alpha), a_(a), h_(h) {
    if (!(alpha > 1.0)) throw std::invalid_argument("cusp domain: alpha must be > 1");
    if (!(a > 0.0)) throw std::invalid_argument("cusp domain: a must be > 0");
    if (!(h > 0.0)) throw std::invalid_argument("cusp domain: h must be > 0");
    max_arg_ = alpha * std::atan(h / a);
    // The principal branch of z^(1/alpha) must invert w -> w^alpha on the
    // whole sliver; that needs the total argument spread to stay below pi.
    if (!(max_arg_ < M_PI))
        throw std::invalid_argument("cusp domain: alpha*atan(h/a) must be < pi");
    base_point_ = std::pow((2.0 * h / M_PI) * std::log(1.0 + std::sqrt(2.0)) + a, -alpha);
    x_max_ = std::pow(a, -alpha);

    // Boundary polyline: upper wall from deep inside the cusp to the nose,
    // the nose arc, then the lower wall back. Wall abscissae log-spaced so
    // the relative spacing stays uniform all the way into the cusp.
    const double xfar = wall_far_();
    const double lstep = std::log(xfar / a) / (wall_n_ - 1);
    poly_.reserve(2 * wall_n_ + nose_n_);
    poly_param_.reserve(2 * wall_n_ + nose_n_);
    poly_arc_.reserve(2 * wall_n_ + nose_n_);
    for (int i = 0; i < wall_n_; ++i) {
        double x = a * std::exp(lstep * (wall_n_ - 1 - i));
        poly_.push_back(wall_point(x, +1));
        poly_param_.push_back(x);
        poly_arc_.push_back(0);
    }
    for (int i = 0; i < nose_n_; ++i) {
        double t = -1.0 + 2.0 * i / (nose_n_ - 1);
        poly_.push_back(nose_point(t));
        poly_param_.push_back(t);
        poly_arc_.push_back(1);
    }
    for (int i = 0; i < wall_n_; ++i) {
        double x = a * std::exp(lstep * i);
        poly_.push_back(wall_point(x, -1));
        poly_param_.push_back(x);
        poly_arc_.push_back(2);
    }

    // Spatial hash over the polyline.
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& z : poly_) {
        xlo = std::min(xlo, z.real());
        xhi = std::max(xhi, z.real());
        ylo = std::min(ylo, z.imag());
        yhi = std::max(yhi, z.imag());
    }
    hash_x0_ = xlo;
    hash_y0_ = ylo;
    hash_cell_ = std::max(xhi - xlo, yhi - ylo) / hash_dim_ + 1e-300;
    hash_cells_.assign(hash_dim_ * hash_dim_, {});
    for (int i = 0; i < static_cast<int>(poly_.size()); ++i) {
        int cx = std::clamp(static_cast<int>((poly_[i].real() - hash_x0_) / hash_cell_), 0, hash_dim_ - 1);
        int cy = std::clamp(static_cast<int>((poly_[i].imag() - hash_y0_) / hash_cell_), 0, hash_dim_ - 1);
        hash_cells_[cy * hash_dim_ + cx].push_back(i);
    }
}

double CuspDomain::wall_far_() const {
    // Far enough that the wall polyline reaches |z| ~ 1e-14 scales.
    return std::max(1e7, a_ * 1e6);
}

cplx CuspDomain::wall_point(double x, int sign) const {
    cplx u(x, sign > 0 ? -h_ : h_);
    return std::exp(-alpha_ * std::log(u));
}

cplx CuspDomain::nose_point(double t) const {
    cplx u(a_, h_ * t);
    return std::exp(-alpha_ * std::log(u));
}

cplx CuspDomain::strip_image(cplx z) const {
    return std::exp(-std::log(z) / alpha_);
}

bool CuspDomain::contains(cplx z) const {
    if (z == cplx(0.0) || (z.real() < 0.0 && z.imag() == 0.0)) return false;
    cplx u = strip_image(z);
    return u.real() > a_ && std::abs(u.imag()) < h_;
}

double CuspDomain::arc_min_dist_(cplx z, int arc, double lo, double hi) const {
    auto point = [&](double t) {
        return arc == 1 ? nose_point(t) : wall_point(std::exp(t), arc == 0 ? +1 : -1);
    };
    // Walls are searched in log-abscissa; the nose in its native parameter.
    auto f = [&](double t) { return std::abs(z - point(t)); };
    return golden_min(f, lo, hi);
}

double CuspDomain::boundary_distance(cplx z) const {
    double best = std::abs(z);  // the cusp tip is always a boundary point

    const double deep = 0.02 * x_max_;
    if (std::abs(z) < deep) {
        // Deep in the cusp the hash cells are too coarse; seed the wall
        // search from the magnitude instead. The wall point at abscissa x
        // has |.| close to x^(-alpha), so the matching abscissa for z is
        // |z|^(-1/alpha). A generous log window around it covers the true
        // nearest point.
        double xs = std::pow(std::abs(z), -1.0 / alpha_);
        double lo = std::log(std::max(a_, xs / 16.0));
        double hi = std::log(std::min(wall_far_(), xs * 16.0));
        if (hi > lo) {
            best = std::min(best, arc_min_dist_(z, 0, lo, hi));
            best = std::min(best, arc_min_dist_(z, 2, lo, hi));
        }
        return best;
    }

    // Nearest polyline vertex via the spatial hash (expanding ring scan).
    int cx = std::clamp(static_cast<int>((z.real() - hash_x0_) / hash_cell_), 0, hash_dim_ - 1);
    int cy = std::clamp(static_cast<int>((z.imag() - hash_y0_) / hash_cell_), 0, hash_dim_ - 1);
    int best_idx = -1;
    double best_v = 1e300;
    for (int ring = 0; ring < hash_dim_; ++ring) {
        bool any_cell = false;
        for (int dy = -ring; dy <= ring; ++dy) {
            for (int dx = -ring; dx <= ring; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                int gx = cx + dx, gy = cy + dy;
                if (gx < 0 || gy < 0 || gx >= hash_dim_ || gy >= hash_dim_) continue;
                any_cell = true;
                for (int idx : hash_cells_[gy * hash_dim_ + gx]) {
                    double d = std::abs(z - poly_[idx]);
                    if (d < best_v) {
                        best_v = d;
                        best_idx = idx;
                    }
                }
            }
        }
        if (best_idx >= 0 && ring > best_v / hash_cell_ + 1) break;
        if (!any_cell && ring > 2 * hash_dim_) break;
    }

    if (best_idx >= 0) {
        // Refine on the owning arc around the best vertex.
        int arc = poly_arc_[best_idx];
        int i0 = std::max(0, best_idx - 2), i1 = std::min<int>(poly_.size() - 1, best_idx + 2);
        while (i0 > 0 && poly_arc_[i0] != arc) ++i0;
        while (i1 < static_cast<int>(poly_.size()) && poly_arc_[i1] != arc) --i1;
        double plo = std::min(poly_param_[i0], poly_param_[i1]);
        double phi = std::max(poly_param_[i0], poly_param_[i1]);
        if (arc != 1) {
            plo = std::log(plo);
            phi = std::log(phi);
        }
        best = std::min(best, arc_min_dist_(z, arc, plo, phi));
        // A vertex at an arc junction can shadow the neighbor arc; check the
        // adjacent arcs when the vertex sits near an end.
        if (best_idx < 4 || best_idx + 4 >= static_cast<int>(poly_.size()) ||
            poly_arc_[std::max(0, best_idx - 4)] != arc ||
            poly_arc_[std::min<int>(poly_.size() - 1, best_idx + 4)] != arc) {
            best = std::min(best, arc_min_dist_(z, 1, -1.0, 1.0));
            double l0 = std::log(a_), l1 = std::log(a_) + 0.1 * std::log(wall_far_() / a_);
            best = std::min(best, arc_min_dist_(z, 0, l0, l1));
            best = std::min(best, arc_min_dist_(z, 2, l0, l1));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Caltrop

Caltrop Caltrop::single_spike(double p, double total_len, double B, int n) {
    if (n < 2) throw std::invalid_argument("caltrop: complex dimension must be >= 2");
    Caltrop c;
    c.n_ = n;
    SpikeChart chart;
    chart.tip.assign(n, 0.0);
    chart.axis.assign(n, 0.0);
    chart.axis[n - 1] = 1.0;
    chart.profile = SpikeProfile::power_circle_blend(p, total_len, B);
    chart.full_meridian = true;
    c.spikes_.push_back(std::move(chart));
    return c;
}

Caltrop Caltrop::multi_spike(int n, CVec ball_center, double ball_radius,
                             std::vector<SpikeChart> spikes) {
    if (n < 2) throw std::invalid_argument("caltrop: complex dimension must be >= 2");
    if (!(ball_radius > 0.0)) throw std::invalid_argument("caltrop: ball radius must be > 0");
    if (spikes.empty()) throw std::invalid_argument("caltrop: need at least one spike");
    for (size_t i = 0; i < spikes.size(); ++i) {
        auto& s = spikes[i];
        if (static_cast<int>(s.tip.size()) != n || static_cast<int>(s.axis.size()) != n)
            throw std::invalid_argument("caltrop: spike frame dimension mismatch");
        double nn = norm(s.axis);
        if (std::abs(nn - 1.0) > 1e-9)
            throw std::invalid_argument("caltrop: spike axis must be a unit vector");
        s.full_meridian = false;
        for (size_t j = 0; j < i; ++j)
            if (dist(s.tip, spikes[j].tip) < 1e-12)
                throw std::invalid_argument("caltrop: spike tips must be distinct");
    }
    Caltrop c;
    c.n_ = n;
    c.cap_center_ = std::move(ball_center);
    c.cap_radius_ = ball_radius;
    c.spikes_ = std::move(spikes);
    return c;
}

MeridianCoord Caltrop::meridian_coord(const CVec& z, size_t spike_idx) const {
    const auto& sp = spikes_.at(spike_idx);
    if (z.size() != sp.tip.size())
        throw std::invalid_argument("caltrop: point dimension mismatch");
    CVec d(z.size());
    for (size_t i = 0; i < z.size(); ++i) d[i] = z[i] - sp.tip[i];
    cplx zn = hdot(d, sp.axis);
    double x = zn.real();
    double s2 = norm2(d) - x * x;
    return {x, s2 > 0.0 ? std::sqrt(s2) : 0.0};
}

CVec Caltrop::lift_meridian(double x, double S, const std::vector<double>& trans_dir,
                            size_t spike_idx) const {
    const auto& sp = spikes_.at(spike_idx);
    if (static_cast<int>(trans_dir.size()) != 2 * n_ - 1)
        throw std::invalid_argument("caltrop: transverse direction needs 2n-1 components");
    cplx zn(x, S * trans_dir[0]);
    CVec local(n_, 0.0);
    for (int k = 0; k + 1 < n_; ++k)
        local[k] = cplx(S * trans_dir[1 + 2 * k], S * trans_dir[2 + 2 * k]);
    local[n_ - 1] = zn;
    auto frame = complete_frame(sp.axis);  // frame[k] for z'_k, frame[n-1] = axis
    CVec out = sp.tip;
    for (int k = 0; k < n_; ++k)
        for (int i = 0; i < n_; ++i) out[i] += local[k] * frame[k][i];
    return out;
}

bool Caltrop::contains(const CVec& z) const {
    for (size_t j = 0; j < spikes_.size(); ++j) {
        const auto& sp = spikes_[j];
        auto mc = meridian_coord(z, j);
        if (mc.x > 0.0 && mc.x < sp.reach() && mc.S < sp.profile.psi(mc.x)) return true;
    }
    if (cap_radius_ > 0.0) {
        if (dist(z, cap_center_) < cap_radius_) return true;
    }
    return false;
}

double Caltrop::meridian_boundary_distance(double x, double S, size_t spike_idx) const {
    const auto& prof = spikes_.at(spike_idx).profile;
    const bool full = spikes_[spike_idx].full_meridian;
    double best = std::hypot(x, S);  // tip

    // Power segment: coarse scan (log-spaced plus uniform) then refine.
    const double A = prof.A();
    double seg_best_t = A;
    double seg_best = 1e300;
    auto seg_d = [&](double t) { return std::hypot(t - x, prof.psi(t) - S); };
    const int N = 96;
    for (int i = 0; i <= N; ++i) {
        double t = A * std::pow(1e-12, 1.0 - static_cast<double>(i) / N);  // log from A*1e-12 to A
        double d = seg_d(t);
        if (d < seg_best) {
            seg_best = d;
            seg_best_t = t;
        }
        t = A * (static_cast<double>(i) / N);
        if (t > 0.0) {
            d = seg_d(t);
            if (d < seg_best) {
                seg_best = d;
                seg_best_t = t;
            }
        }
    }
    double lo = std::max(0.0, seg_best_t * 0.25), hi = std::min(A, seg_best_t * 4.0 + 1e-6 * A);
    best = std::min(best, golden_min(seg_d, lo, hi));

    if (full && prof.shape() == SpikeProfile::Shape::PowerCircleBlend) {
        // Circular cap: exact point-to-arc distance.
        double cx = prof.arc_center(), R = prof.arc_radius();
        double dc = std::hypot(x - cx, S);
        double theta = std::atan2(S, x - cx);
        double theta_joint = std::atan2(prof.psi(A), A - cx);
        if (theta >= 0.0 && theta <= theta_joint)
            best = std::min(best, std::abs(dc - R));
        best = std::min(best, std::hypot(x - prof.x_end(), S));
    }
    return best;
}

double Caltrop::boundary_distance(const CVec& z) const {
    double best = 1e300;
    for (size_t j = 0; j < spikes_.size(); ++j) {
        auto mc = meridian_coord(z, j);
        best = std::min(best, meridian_boundary_distance(mc.x, mc.S, j));
    }
    if (cap_radius_ > 0.0) {
        double din = cap_radius_ - dist(z, cap_center_);
        if (din > 0.0) best = std::min(best, din);
        // Note: near chart overlaps this is the distance to the nearest piece
        // surface, which can only under-estimate the true boundary distance.
    }
    return best;
}

double Caltrop::levi_form(const CVec& z, const CVec& v, size_t spike_idx) const {
    const auto& sp = spikes_.at(spike_idx);
    auto mc = meridian_coord(z, spike_idx);
    if (!(mc.x > 0.0 && mc.x < sp.reach()))
        throw std::domain_error("caltrop levi_form: point outside spike chart");
    cplx vn = hdot(v, sp.axis);
    double vp2 = std::max(0.0, norm2(v) - std::norm(vn));
    return vp2 + 0.5 * (1.0 - sp.profile.levi_excess(mc.x)) * std::norm(vn);
}

void Caltrop::enclosing_ball(CVec& center, double& radius) const {
    if (cap_radius_ == 0.0) {
        // Teardrop: contained in the ball about the arc center. On the power
        // segment d/dt[(t-c)^2+psi^2] = 2(t-c)+2 psi psi' <= 2(t-A) <= 0, so
        // the farthest meridian point from (c,0) is the tip at distance c.
        const auto& sp = spikes_[0];
        double c = sp.profile.arc_center();
        center = sp.tip;
        for (int i = 0; i < n_; ++i) center[i] += c * sp.axis[i];
        radius = c;
        return;
    }
    center = cap_center_;
    radius = cap_radius_;
    for (const auto& sp : spikes_) {
        double A = sp.reach();
        double bulge = std::sqrt(A * A + sq(sp.profile.psi(std::min(A, sp.profile.A()))));
        radius = std::max(radius, dist(sp.tip, cap_center_) + bulge);
    }
}

double Caltrop::levi_chart_len(size_t spike_idx) const {
    const auto& prof = spikes_.at(spike_idx).profile;
    // levi_excess is increasing on the power segment, so bisect for 1/2.
    double lo = 0.0, hi = prof.A();
    if (prof.levi_excess(hi) <= 0.5) return hi;
    for (int i = 0; i < 80; ++i) {
        double m = 0.5 * (lo + hi);
        (prof.levi_excess(m) <= 0.5 ? lo : hi) = m;
    }
    return lo;
}

OverlapAudit audit_multi_spike(const Caltrop& c, int samples, std::uint64_t seed) {
    OverlapAudit audit;
    if (!c.has_cap_ball()) {
        audit.detail = "single-chart domain; nothing to audit";
        return audit;
    }
    Rng rng(seed);
    for (size_t j = 0; j < c.spikes().size(); ++j) {
        const auto& sp = c.spike(j);
        double xbase = sp.reach() * 0.999;
        for (int i = 0; i < samples; ++i) {
            // Points just inside the spike base must lie in the cap ball, or
            // the union would be disconnected there.
            double S = sp.profile.psi(std::min(xbase, sp.profile.A())) * 0.95 *
                       rng.uniform();
            auto dir = rng.unit_sphere(2 * c.dim() - 1);
            CVec z = c.lift_meridian(xbase, S, dir, j);
            ++audit.checked;
            if (dist(z, c.cap_center()) >= c.cap_radius()) ++audit.failures;
        }
    }
    if (audit.failures)
        audit.detail = "spike base points outside the cap ball";
    return audit;
}

// ---------------------------------------------------------------------------
// Variant dispatch

int dimension(const Domain& d) {
    return std::visit(
        [](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Disc> || std::is_same_v<T, CuspDomain>)
                return 1;
            else if constexpr (std::is_same_v<T, Ball>)
                return v.n;
            else if constexpr (std::is_same_v<T, Polydisc>)
                return static_cast<int>(v.radii.size());
            else
                return v.dim();
        },
        d);
}

static void check_dim(const Domain& d, const CVec& z) {
    if (static_cast<int>(z.size()) != dimension(d))
        throw std::invalid_argument("domain point dimension mismatch");
}

bool contains(const Domain& d, const CVec& z) {
    check_dim(d, z);
    return std::visit(
        [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Disc>)
                return std::abs(z[0] - v.center) < v.radius;
            else if constexpr (std::is_same_v<T, Ball>) {
                CVec c = v.center.empty() ? CVec(v.n, 0.0) : v.center;
                return dist(z, c) < v.radius;
            } else if constexpr (std::is_same_v<T, Polydisc>) {
                for (size_t i = 0; i < v.radii.size(); ++i)
                    if (std::abs(z[i] - v.center[i]) >= v.radii[i]) return false;
                return true;
            } else if constexpr (std::is_same_v<T, CuspDomain>)
                return v.contains(z[0]);
            else
                return v.contains(z);
        },
        d);
}

double boundary_distance(const Domain& d, const CVec& z) {
    check_dim(d, z);
    if (!contains(d, z)) throw std::domain_error("boundary_distance: point not interior");
    return std::visit(
        [&](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Disc>)
                return v.radius - std::abs(z[0] - v.center);
            else if constexpr (std::is_same_v<T, Ball>) {
                CVec c = v.center.empty() ? CVec(v.n, 0.0) : v.center;
                return v.radius - dist(z, c);
            } else if constexpr (std::is_same_v<T, Polydisc>) {
                double m = 1e300;
                for (size_t i = 0; i < v.radii.size(); ++i)
                    m = std::min(m, v.radii[i] - std::abs(z[i] - v.center[i]));
                return m;
            } else if constexpr (std::is_same_v<T, CuspDomain>)
                return v.boundary_distance(z[0]);
            else
                return v.boundary_distance(z);
        },
        d);
}

void enclosing_ball(const Domain& d, CVec& center, double& radius) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Disc>) {
                center = {v.center};
                radius = v.radius;
            } else if constexpr (std::is_same_v<T, Ball>) {
                center = v.center.empty() ? CVec(v.n, 0.0) : v.center;
                radius = v.radius;
            } else if constexpr (std::is_same_v<T, Polydisc>) {
                center = v.center;
                radius = 0.0;
                double s = 0.0;
                for (double r : v.radii) s += r * r;
                radius = std::sqrt(s);
            } else if constexpr (std::is_same_v<T, CuspDomain>) {
                // |w| <= 1/a on the sliver, so |z| <= a^-alpha.
                center = {cplx(0.0)};
                radius = v.x_max() * 1.0000000001;
            } else {
                v.enclosing_ball(center, radius);
            }
        },
        d);
}

void bounding_box(const Domain& d, std::vector<double>& lo, std::vector<double>& hi) {
    if (const auto* q = std::get_if<CuspDomain>(&d)) {
        double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
        for (const auto& z : q->boundary_polyline()) {
            xlo = std::min(xlo, z.real());
            xhi = std::max(xhi, z.real());
            ylo = std::min(ylo, z.imag());
            yhi = std::max(yhi, z.imag());
        }
        lo = {xlo, ylo};
        hi = {xhi, yhi};
        return;
    }
    CVec c;
    double r = 0;
    enclosing_ball(d, c, r);
    const int n = dimension(d);
    lo.assign(2 * n, 0.0);
    hi.assign(2 * n, 0.0);
    for (int i = 0; i < n; ++i) {
        lo[2 * i] = c[i].real() - r;
        hi[2 * i] = c[i].real() + r;
        lo[2 * i + 1] = c[i].imag() - r;
        hi[2 * i + 1] = c[i].imag() + r;
    }
}

// ---------------------------------------------------------------------------
// Interior sampling

SampleResult sample_interior(const Domain& d, std::pair<double, double> r_range,
                             int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("sample_interior: count must be >= 1");
    if (r_range.first > r_range.second || r_range.first < 0.0)
        throw std::invalid_argument("sample_interior: bad delta range");
    {
        // no interior point is farther from the boundary than the enclosing
        // ball radius, so an open-ended upper limit can be clamped
        CVec ec;
        double er = 0.0;
        enclosing_ball(d, ec, er);
        if (r_range.second > er) r_range.second = er;
        if (r_range.first > r_range.second)
            throw std::runtime_error("sample_interior: no points found in delta range");
    }
    Rng rng(seed);
    SampleResult out;
    out.points.reserve(count);
    long attempts = 0;
    const long max_attempts = 4000L * count + 100000L;

    auto in_range = [&](double delta) {
        return delta >= r_range.first && delta <= r_range.second;
    };

    while (static_cast<int>(out.points.size()) < count) {
        if (attempts++ > max_attempts)
            throw std::runtime_error("sample_interior: no points found in delta range");
        CVec z;
        if (const auto* disc = std::get_if<Disc>(&d)) {
            double dmax = std::min(r_range.second, disc->radius);
            if (r_range.first > dmax) throw std::runtime_error("sample_interior: empty range");
            double delta = rng.uniform(r_range.first, dmax);
            z = {disc->center + (disc->radius - delta) * rng.unit_circle()};
        } else if (const auto* ball = std::get_if<Ball>(&d)) {
            double dmax = std::min(r_range.second, ball->radius);
            if (r_range.first > dmax) throw std::runtime_error("sample_interior: empty range");
            double delta = rng.uniform(r_range.first, dmax);
            CVec c = ball->center.empty() ? CVec(ball->n, 0.0) : ball->center;
            CVec dir = rng.unit_cvector(ball->n);
            z = c;
            for (int i = 0; i < ball->n; ++i) z[i] += (ball->radius - delta) * dir[i];
        } else if (const auto* pd = std::get_if<Polydisc>(&d)) {
            const int n = static_cast<int>(pd->radii.size());
            int jmin = static_cast<int>(attempts % n);
            double dmax = std::min(r_range.second, pd->radii[jmin]);
            if (r_range.first > dmax) throw std::runtime_error("sample_interior: empty range");
            double delta = rng.uniform(r_range.first, dmax);
            z.assign(n, 0.0);
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                if (i == jmin)
                    z[i] = pd->center[i] + (pd->radii[i] - delta) * rng.unit_circle();
                else {
                    double slack = pd->radii[i] - delta;
                    if (slack <= 0.0) {
                        ok = false;
                        break;
                    }
                    z[i] = pd->center[i] + slack * std::sqrt(rng.uniform()) * rng.unit_circle();
                }
            }
            if (!ok) continue;
        } else if (const auto* q = std::get_if<CuspDomain>(&d)) {
            // Offset a random boundary vertex along the inward normal.
            const auto& poly = q->boundary_polyline();
            int idx = 1 + static_cast<int>(rng.uniform() * (poly.size() - 2));
            cplx b = poly[idx];
            cplx tang = poly[idx + 1] - poly[idx - 1];
            double tn = std::abs(tang);
            if (tn == 0.0) continue;
            cplx nrm = tang / tn * cplx(0.0, 1.0);
            double delta = rng.uniform(r_range.first, r_range.second);
            cplx cand = b + delta * nrm;
            if (!q->contains(cand)) {
                cand = b - delta * nrm;
                if (!q->contains(cand)) continue;
            }
            if (!in_range(q->boundary_distance(cand))) continue;
            z = {cand};
        } else if (const auto* cal = std::get_if<Caltrop>(&d)) {
            const auto& sp = cal->spike(0);
            double u = rng.uniform();
            double t = sp.reach() * std::pow(u, 3.0);  // bias toward the cusp
            if (t <= 0.0) continue;
            double psi = sp.profile.psi(t);
            if (t >= sp.reach() * 0.999999) continue;
            double dpsi = sp.profile.dpsi(t);
            double nn = std::hypot(dpsi, 1.0);
            double delta = rng.uniform(r_range.first, r_range.second);
            double x0 = t + delta * dpsi / nn;
            double S0 = psi - delta / nn;
            if (S0 < 0.0 || x0 <= 0.0) continue;
            auto dir = rng.unit_sphere(2 * cal->dim() - 1);
            CVec cand = cal->lift_meridian(x0, S0, dir, 0);
            if (!cal->contains(cand)) continue;
            if (!in_range(cal->boundary_distance(cand))) continue;
            z = cand;
        }
        if (!z.empty() && contains(d, z)) out.points.push_back(std::move(z));
    }
    out.acceptance_rate = static_cast<double>(out.points.size()) / attempts;
    return out;
}

}  // namespace kobalab
