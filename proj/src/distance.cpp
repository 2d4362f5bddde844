#include "kobalab/distance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>
#include <sstream>

namespace kobalab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// |phi_a(b)| in the unit ball; the exact ball distance is arctanh of this.
double ball_pseudo(const CVec& a, const CVec& b) {
    double na = norm2(a), nb = norm2(b);
    double den = std::norm(cplx(1.0, 0.0) - hdot(b, a));
    double m2 = 1.0 - (1.0 - na) * (1.0 - nb) / den;
    return std::sqrt(std::max(0.0, m2));
}

double ball_distance(const CVec& c, double R, const CVec& a, const CVec& b) {
    CVec as(a.size()), bs(b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        cplx ci = i < c.size() ? c[i] : cplx(0.0);
        as[i] = (a[i] - ci) / R;
        bs[i] = (b[i] - ci) / R;
    }
    return std::atanh(std::min(ball_pseudo(as, bs), 1.0 - 1e-16));
}

double disc_distance(cplx c, double R, cplx a, cplx b) {
    cplx as = (a - c) / R, bs = (b - c) / R;
    double m = std::abs((as - bs) / (cplx(1.0, 0.0) - as * std::conj(bs)));
    return std::atanh(std::min(m, 1.0 - 1e-16));
}

// Certified pair bound through the inscribed balls at the endpoints;
// nullopt when the gap is too wide for both balls at the admissibility
// fraction.
std::optional<double> pair_bound(double r, double da, double db, double frac) {
    double best = kInf;
    if (da > 0.0 && r <= frac * da) best = std::min(best, std::atanh(r / da));
    if (db > 0.0 && r <= frac * db) best = std::min(best, std::atanh(r / db));
    if (best == kInf) return std::nullopt;
    return best;
}

std::string graph_tag(const GridSpec& s) {
    std::ostringstream os;
    os << "graph(spacing=" << s.spacing << ",frac=" << s.edge_frac
       << ",seed=" << s.seed << ")";
    return os.str();
}

double real_coord(const CVec& z, int i) {
    return (i % 2 == 0) ? z[i / 2].real() : z[i / 2].imag();
}

// Model domains reused across embedding calls; keyed by parameters, kept
// alive for the process (CuspMap holds a non-owning pointer into this).
const CuspDomain& cached_model(double alpha, double a, double h) {
    static std::vector<std::pair<std::array<double, 3>, std::unique_ptr<CuspDomain>>> cache;
    std::array<double, 3> key{alpha, a, h};
    for (const auto& e : cache)
        if (e.first == key) return *e.second;
    cache.emplace_back(key, std::make_unique<CuspDomain>(alpha, a, h));
    return *cache.back().second;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec

GridSpec GridSpec::refined() const {
    GridSpec r = *this;
    if (r.edge_radius == 0.0) r.edge_radius = 2.6 * r.spacing;
    r.spacing *= 0.5;
    if (r.ladder_step > 0.0) r.ladder_step *= 0.5;
    return r;
}

// ---------------------------------------------------------------------------
// DomainGraph

DomainGraph::DomainGraph(const Domain& d, GridSpec spec) : dom_(d), spec_(spec) {
    build_({});
}

DomainGraph::DomainGraph(const Domain& d, GridSpec spec, std::vector<CVec> seed_hubs)
    : dom_(d), spec_(spec) {
    build_(std::move(seed_hubs));
}

std::unique_ptr<DomainGraph> DomainGraph::refined() const {
    GridSpec r = spec_;  // autos were materialized at build time
    r.spacing *= 0.5;
    if (r.ladder_step > 0.0) r.ladder_step *= 0.5;
    std::vector<CVec> seed;
    seed.reserve(hubs_.size());
    for (int h : hubs_) seed.push_back(nodes_[h]);
    return std::unique_ptr<DomainGraph>(new DomainGraph(dom_, r, std::move(seed)));
}

void DomainGraph::build_(std::vector<CVec> seed_hubs) {
    if (!(spec_.spacing > 0.0))
        throw std::invalid_argument("DomainGraph: spacing must be positive");
    if (!(spec_.edge_frac > 0.0 && spec_.edge_frac < 1.0))
        throw std::invalid_argument("DomainGraph: edge_frac must lie in (0,1)");
    if (spec_.edge_radius == 0.0) spec_.edge_radius = 2.6 * spec_.spacing;
    if (spec_.ladder_step == 0.0) {
        if (std::holds_alternative<CuspDomain>(dom_)) {
            spec_.ladder_step = std::min(0.3, 4.0 * spec_.spacing);
        } else if (const auto* cal = std::get_if<Caltrop>(&dom_)) {
            // increment of x^{-(p-1)} per rung; proportional to the profile
            // scale so consecutive rungs stay inscribed-ball admissible
            const auto& pr = cal->spike(0).profile;
            spec_.ladder_step = 0.42 * pr.scale() * (pr.p() - 1.0);
        } else {
            spec_.ladder_step = 1.0;  // no ladder on elementary domains
        }
    }
    build_nodes_();

    // spatial hash at the edge radius (frozen across refinement)
    cell_ = spec_.edge_radius;
    const int D = 2 * dimension(dom_);
    hash_dims_.assign(D, 1);
    long total_cells = 1;
    for (int i = 0; i < D; ++i) {
        hash_dims_[i] =
            std::max(1, (int)std::floor((box_hi_[i] - box_lo_[i]) / cell_) + 1);
        total_cells *= hash_dims_[i];
        if (total_cells > 8000000)
            throw std::invalid_argument("DomainGraph: edge radius too small for the box");
    }
    cells_.assign((size_t)total_cells, {});
    for (int idx = 0; idx < (int)nodes_.size(); ++idx) {
        long flat = 0, stride = 1;
        for (int i = 0; i < D; ++i) {
            int c = (int)std::floor((real_coord(nodes_[idx], i) - box_lo_[i]) / cell_);
            c = std::clamp(c, 0, hash_dims_[i] - 1);
            flat += stride * c;
            stride *= hash_dims_[i];
        }
        cells_[flat].push_back(idx);
    }

    pick_hubs_(seed_hubs);
    build_edges_();
}

void DomainGraph::build_nodes_() {
    bounding_box(dom_, box_lo_, box_hi_);
    const double s = spec_.spacing;
    const int n = dimension(dom_);
    const int D = 2 * n;

    std::vector<long> klo(D), khi(D);
    double total = 1.0;
    for (int i = 0; i < D; ++i) {
        klo[i] = (long)std::ceil(box_lo_[i] / s - 1e-12);
        khi[i] = (long)std::floor(box_hi_[i] / s + 1e-12);
        total *= (double)(khi[i] - klo[i] + 1);
    }
    if (total > 4e6)
        throw std::invalid_argument("DomainGraph: lattice too large; increase spacing");

    // lattice points at exact integer multiples of the spacing, so a halved
    // lattice reproduces every parent node bit for bit
    std::vector<long> k = klo;
    CVec z((size_t)n);
    for (;;) {
        for (int i = 0; i < n; ++i)
            z[(size_t)i] = cplx((double)k[2 * i] * s, (double)k[2 * i + 1] * s);
        if (contains(dom_, z)) nodes_.push_back(z);
        int i = 0;
        for (; i < D; ++i) {
            if (++k[i] <= khi[i]) break;
            k[i] = klo[i];
        }
        if (i == D) break;
    }

    if (const auto* q = std::get_if<CuspDomain>(&dom_)) {
        // axis ladder at equal geodesic-parameter steps; integer multiples
        // nest under halving just like the lattice
        CuspMap chart(*q);
        int first = (int)nodes_.size();
        for (int j = 0;; ++j) {
            double T = j * spec_.ladder_step;
            if (T > spec_.ladder_depth) break;
            nodes_.push_back(cvec1(cplx(chart.axis_point(T), 0.0)));
        }
        ladder_ranges_.push_back({first, (int)nodes_.size()});
    } else if (const auto* cal = std::get_if<Caltrop>(&dom_)) {
        // spike ladders with rungs equally spaced in x^{-(p-1)}, which keeps
        // the rung gap proportional to the local boundary distance
        for (size_t sj = 0; sj < cal->spikes().size(); ++sj) {
            const auto& ch = cal->spike(sj);
            double p = ch.profile.p();
            double e0 = std::pow(ch.profile.A(), -(p - 1.0));
            int first = (int)nodes_.size();
            for (int j = 0;; ++j) {
                double x = std::pow(e0 + j * spec_.ladder_step, -1.0 / (p - 1.0));
                if (x < spec_.ladder_min_x) break;
                CVec node = ch.tip;
                for (size_t i = 0; i < node.size(); ++i) node[i] += x * ch.axis[i];
                if (cal->contains(node)) nodes_.push_back(node);
            }
            ladder_ranges_.push_back({first, (int)nodes_.size()});
        }
    }

    delta_.resize(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i)
        delta_[i] = boundary_distance(dom_, nodes_[i]);
}

std::vector<int> DomainGraph::near_nodes_(const CVec& p, double radius) const {
    const int D = (int)hash_dims_.size();
    std::vector<int> clo(D), chi(D);
    for (int i = 0; i < D; ++i) {
        double x = real_coord(p, i);
        clo[i] = std::clamp((int)std::floor((x - radius - box_lo_[i]) / cell_), 0,
                            hash_dims_[i] - 1);
        chi[i] = std::clamp((int)std::floor((x + radius - box_lo_[i]) / cell_), 0,
                            hash_dims_[i] - 1);
    }
    std::vector<int> out;
    std::vector<int> c = clo;
    for (;;) {
        long flat = 0, stride = 1;
        for (int i = 0; i < D; ++i) {
            flat += stride * c[i];
            stride *= hash_dims_[i];
        }
        for (int idx : cells_[flat])
            if (dist(nodes_[idx], p) <= radius) out.push_back(idx);
        int i = 0;
        for (; i < D; ++i) {
            if (++c[i] <= chi[i]) break;
            c[i] = clo[i];
        }
        if (i == D) break;
    }
    return out;
}

void DomainGraph::build_edges_() {
    adj_.assign(nodes_.size(), {});
    for (int i = 0; i < (int)nodes_.size(); ++i) {
        for (int j : near_nodes_(nodes_[i], spec_.edge_radius)) {
            if (j <= i) continue;
            double r = dist(nodes_[i], nodes_[j]);
            double best = kInf;
            if (auto w = pair_bound(r, delta_[i], delta_[j], spec_.edge_frac))
                best = *w;
            // a shared witness ball is usually much deeper than either
            // endpoint, so its exact distance beats the endpoint-ball bound
            for (int h : common_hubs_(i, j))
                best = std::min(best, ball_distance(nodes_[h],
                                                    delta_[h] * (1.0 - 1e-9),
                                                    nodes_[i], nodes_[j]));
            if (best < kInf) {
                adj_[i].push_back({j, best});
                adj_[j].push_back({i, best});
            }
        }
    }
    // deep ladder rungs sit farther apart than the search radius while still
    // being admissible relative to their own boundary distance
    for (auto [first, last] : ladder_ranges_) {
        for (int i = first; i + 1 < last; ++i) {
            double r = dist(nodes_[i], nodes_[i + 1]);
            if (r <= spec_.edge_radius) continue;  // found by the radius search
            if (auto w = pair_bound(r, delta_[i], delta_[i + 1], spec_.edge_frac)) {
                adj_[i].push_back({i + 1, *w});
                adj_[i + 1].push_back({i, *w});
            }
        }
    }
    // exact ball-formula edges from each hub center into its ball
    for (size_t hi = 0; hi < hubs_.size(); ++hi) {
        int h = hubs_[hi];
        double R = delta_[h] * (1.0 - 1e-9);
        for (int i : members_[hi]) {
            if (i == h) continue;
            double w = ball_distance(nodes_[h], R, nodes_[h], nodes_[i]);
            adj_[h].push_back({i, w});
            adj_[i].push_back({h, w});
        }
    }
}

// Hubs are witness-ball centers. The cover pass walks the nodes shallow
// to deep and, for every node not yet inside some ball with a sphere
// margin of at least 3/4 of its own boundary distance, recruits the
// deepest node whose inscribed ball grants that margin; such a ball is
// close to internally tangent near the node, where its metric is tight.
// Spread hubs then top up the deep core. Refinement lowers the cover
// floor with the spacing, so refined graphs add shallower witness balls
// and their paths tighten near the boundary.
void DomainGraph::pick_hubs_(const std::vector<CVec>& inherited) {
    hubs_.clear();
    if (nodes_.empty()) return;
    const int N = (int)nodes_.size();
    std::vector<char> is_hub((size_t)N, 0);
    const double margin_frac = 0.75;

    // Inherited hub centers exist verbatim in the refined node set; relocate
    // them so refined graphs keep every parent hub ball.
    for (const auto& pos : inherited) {
        auto cand = near_nodes_(pos, 0.5 * spec_.spacing + 1e-12);
        int best = -1;
        double bd = kInf;
        for (int idx : cand) {
            double r = dist(nodes_[idx], pos);
            if (r < bd) {
                bd = r;
                best = idx;
            }
        }
        if (best >= 0 && !is_hub[best]) {
            is_hub[best] = 1;
            hubs_.push_back(best);
        }
    }

    double dmax = *std::max_element(delta_.begin(), delta_.end());
    double floor = dimension(dom_) == 1
                       ? std::max(1.2 * spec_.spacing, 0.02 * dmax)
                       : 0.45 * dmax;

    std::vector<char> covered((size_t)N, 0);
    auto cover_with = [&](int h) {
        for (int i = 0; i < N; ++i) {
            if (covered[(size_t)i]) continue;
            if (delta_[(size_t)h] - dist(nodes_[(size_t)i], nodes_[(size_t)h]) >=
                margin_frac * delta_[(size_t)i])
                covered[(size_t)i] = 1;
        }
    };
    for (int h : hubs_) cover_with(h);

    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (delta_[(size_t)a] != delta_[(size_t)b])
            return delta_[(size_t)a] < delta_[(size_t)b];
        return a < b;
    });

    const int hub_cap = 400;
    for (int i : order) {
        if ((int)hubs_.size() >= hub_cap) break;
        if (covered[(size_t)i] || delta_[(size_t)i] < floor) continue;
        int best = -1;
        double best_depth = -kInf, best_margin = -kInf;
        for (int h = 0; h < N; ++h) {
            double m = delta_[(size_t)h] - dist(nodes_[(size_t)i], nodes_[(size_t)h]);
            if (m >= margin_frac * delta_[(size_t)i]) {
                if (delta_[(size_t)h] > best_depth) {
                    best_depth = delta_[(size_t)h];
                    best = h;
                }
            } else if (best < 0 && m > best_margin) {
                best_margin = m;  // fallback: least-bad witness
                best = h;
            }
        }
        if (best < 0 || is_hub[(size_t)best]) {
            covered[(size_t)i] = 1;
            continue;
        }
        is_hub[(size_t)best] = 1;
        hubs_.push_back(best);
        cover_with(best);
    }

    while ((int)hubs_.size() < spec_.n_hubs) {
        // deepest first, then spread among deep candidates
        int best = -1;
        double score = -1.0;
        for (int i = 0; i < N; ++i) {
            if (is_hub[(size_t)i] || delta_[(size_t)i] < 0.5 * dmax) continue;
            double m = hubs_.empty() ? delta_[(size_t)i] : kInf;
            for (int h : hubs_) m = std::min(m, dist(nodes_[(size_t)i], nodes_[(size_t)h]));
            if (m > score + 1e-15) {
                score = m;
                best = i;
            }
        }
        if (best < 0) break;
        is_hub[(size_t)best] = 1;
        hubs_.push_back(best);
    }

    members_.assign(hubs_.size(), {});
    hub_lists_.assign((size_t)N, {});
    for (size_t hi = 0; hi < hubs_.size(); ++hi) {
        int h = hubs_[hi];
        double R = delta_[(size_t)h] * (1.0 - 1e-9);
        for (int idx : near_nodes_(nodes_[(size_t)h], R)) {
            if (dist(nodes_[(size_t)idx], nodes_[(size_t)h]) < R) {
                members_[hi].push_back(idx);
                hub_lists_[(size_t)idx].push_back((int)hi);
            }
        }
    }
}

std::vector<int> DomainGraph::common_hubs_(int i, int j) const {
    std::vector<int> out;
    const auto& a = hub_lists_[(size_t)i];
    const auto& b = hub_lists_[(size_t)j];
    for (int hi : a)
        if (std::find(b.begin(), b.end(), hi) != b.end())
            out.push_back(hubs_[(size_t)hi]);
    return out;
}

std::vector<std::pair<int, double>> DomainGraph::attach_(const CVec& p) const {
    std::vector<std::pair<int, double>> out;
    double dp = boundary_distance(dom_, p);
    for (int idx : near_nodes_(p, spec_.edge_radius)) {
        double r = dist(nodes_[idx], p);
        if (auto w = pair_bound(r, dp, delta_[idx], spec_.edge_frac))
            out.push_back({idx, *w});
    }
    // inside a hub ball the exact ball formula reaches every node of that
    // ball, not just its center, so paths can cross from one ball to the
    // next without detouring through the centers
    for (size_t hi = 0; hi < hubs_.size(); ++hi) {
        int h = hubs_[hi];
        double R = delta_[(size_t)h] * (1.0 - 1e-9);
        if (dist(p, nodes_[(size_t)h]) >= R) continue;
        for (int idx : members_[hi])
            out.push_back({idx, ball_distance(nodes_[(size_t)h], R, p, nodes_[(size_t)idx])});
    }
    return out;
}

PathSample DomainGraph::shortest_path(const CVec& z, const CVec& w) const {
    if (!contains(dom_, z) || !contains(dom_, w))
        throw std::domain_error("DomainGraph: endpoint not inside the domain");
    PathSample ps;
    ps.method = graph_tag(spec_);
    if (dist(z, w) == 0.0) {
        ps.points = {z};
        ps.times = {0.0};
        return ps;
    }

    auto az = attach_(z), aw = attach_(w);

    // one-leg candidates: inscribed-ball pair bound and shared hub balls
    double best_direct = kInf;
    double dz = boundary_distance(dom_, z), dw = boundary_distance(dom_, w);
    if (auto e = pair_bound(dist(z, w), dz, dw, spec_.edge_frac)) best_direct = *e;
    for (int h : hubs_) {
        double R = delta_[h] * (1.0 - 1e-9);
        if (dist(z, nodes_[h]) < R && dist(w, nodes_[h]) < R)
            best_direct = std::min(best_direct, ball_distance(nodes_[h], R, z, w));
    }

    if ((az.empty() || aw.empty()) && best_direct == kInf)
        throw NoPathError(
            "distance_upper_graph: cannot attach an endpoint at this spacing; "
            "refine the grid");

    const int N = (int)nodes_.size();
    std::vector<double> dd((size_t)N, kInf);
    std::vector<int> prev((size_t)N, -1);
    std::vector<char> done((size_t)N, 0);
    std::vector<double> exit_w((size_t)N, kInf);
    for (auto [i, wt] : aw) exit_w[(size_t)i] = std::min(exit_w[(size_t)i], wt);

    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    for (auto [i, wt] : az) {
        if (wt < dd[(size_t)i]) {
            dd[(size_t)i] = wt;
            prev[(size_t)i] = -2;  // direct from z
            pq.push({wt, i});
        }
    }

    double best_total = best_direct;
    int best_exit = -1;
    while (!pq.empty()) {
        auto [d0, i] = pq.top();
        pq.pop();
        if (d0 >= best_total) break;
        if (done[(size_t)i]) continue;
        done[(size_t)i] = 1;
        if (exit_w[(size_t)i] < kInf && d0 + exit_w[(size_t)i] < best_total) {
            best_total = d0 + exit_w[(size_t)i];
            best_exit = i;
        }
        for (auto [j, wt] : adj_[(size_t)i]) {
            double nd = d0 + wt;
            if (nd < dd[(size_t)j] && nd < best_total) {
                dd[(size_t)j] = nd;
                prev[(size_t)j] = i;
                pq.push({nd, j});
            }
        }
    }

    if (best_total == kInf)
        throw NoPathError(
            "distance_upper_graph: endpoints not connected at this spacing; "
            "refine the grid");

    ps.value = best_total;
    if (best_exit < 0) {
        ps.points = {z, w};
        ps.leg_weights = {best_total};
        ps.times = {0.0, best_total};
        return ps;
    }
    std::vector<int> chain;
    int c = best_exit;
    for (;;) {
        chain.push_back(c);
        int pc = prev[(size_t)c];
        if (pc < 0) break;
        c = pc;
    }
    std::reverse(chain.begin(), chain.end());
    std::vector<CVec> raw;
    std::vector<double> raw_w;
    raw.push_back(z);
    for (int idx : chain) raw.push_back(nodes_[(size_t)idx]);
    raw.push_back(w);
    raw_w.push_back(dd[(size_t)chain.front()]);
    for (size_t t = 0; t + 1 < chain.size(); ++t)
        raw_w.push_back(dd[(size_t)chain[t + 1]] - dd[(size_t)chain[t]]);
    raw_w.push_back(exit_w[(size_t)best_exit]);

    // an endpoint that lands on a node (or within an ulp of one) would
    // otherwise repeat as a zero-length leg; fold such legs into their
    // neighbor so the sum still bounds every merged sub-distance
    ps.points.push_back(raw.front());
    double carry = 0.0;
    for (size_t t = 0; t + 1 < raw.size(); ++t) {
        double w_acc = raw_w[t] + carry;
        carry = 0.0;
        bool near = dist(ps.points.back(), raw[t + 1]) < 1e-9;
        if (near && t + 2 < raw.size()) {
            carry = w_acc;  // drop an interior duplicate
        } else if (near && ps.points.size() >= 2) {
            ps.points.back() = raw[t + 1];  // keep the exact terminal point
            ps.leg_weights.back() += w_acc;
        } else {
            ps.points.push_back(raw[t + 1]);
            ps.leg_weights.push_back(w_acc);
        }
    }
    ps.times.push_back(0.0);
    for (double lw : ps.leg_weights) ps.times.push_back(ps.times.back() + lw);
    return ps;
}

// ---------------------------------------------------------------------------
// Free estimators

std::pair<double, PathSample> distance_upper_graph(const DomainGraph& g,
                                                   const CVec& z, const CVec& w) {
    PathSample ps = g.shortest_path(z, w);
    double v = ps.value;
    return {v, std::move(ps)};
}

double distance_lower_linear(const Domain& d, const CVec& z, const CVec& w) {
    if (!contains(d, z) || !contains(d, w))
        throw std::domain_error("distance_lower_linear: point outside the domain");
    CVec c;
    double R = 0.0;
    enclosing_ball(d, c, R);
    return dist(z, w) / R;
}

double distance_lower_halfspace(const Domain& d, const CVec& xi, const CVec& nu,
                                const CVec& z, const CVec& w) {
    if (!contains(d, z) || !contains(d, w))
        throw std::domain_error("distance_lower_halfspace: point outside the domain");
    auto proj = [&](const CVec& p) {
        cplx s = 0.0;
        for (size_t i = 0; i < p.size(); ++i) s += (xi[i] - p[i]) * std::conj(nu[i]);
        return s;
    };
    cplx sz = proj(z), sw = proj(w);
    if (!(sz.real() > 0.0) || !(sw.real() > 0.0))
        throw std::domain_error("distance_lower_halfspace: endpoint outside the half-space");
    // audit the support property on a deterministic interior sample
    auto sample = sample_interior(d, {1e-12, 1e9}, 200, 20210u);
    for (const auto& p : sample.points)
        if (proj(p).real() < -1e-9)
            throw std::domain_error(
                "distance_lower_halfspace: support audit failed, the domain "
                "crosses the plane");
    double m = std::abs((sz - sw) / (sz + std::conj(sw)));
    return std::atanh(std::min(m, 1.0 - 1e-16));
}

void cap_support(const Caltrop& c, double theta, CVec& xi, CVec& nu) {
    if (c.spikes().size() != 1 || !c.spike(0).full_meridian)
        throw std::invalid_argument("cap_support: needs a single-spike teardrop");
    const auto& ch = c.spike(0);
    const auto& pr = ch.profile;
    double R = pr.arc_radius(), cc = pr.arc_center();
    // worst transverse alignment of every meridian point against the plane
    const int M = 2000;
    for (int i = 0; i <= M; ++i) {
        double x = pr.x_end() * i / (double)M;
        double s = (i == 0) ? 0.0 : pr.psi(x);
        double val = (x - cc) * std::cos(theta) + s * std::abs(std::sin(theta));
        if (val > R + 1e-9)
            throw std::domain_error(
                "cap_support: tangent plane cut by the body at this angle");
    }
    cplx e = std::polar(1.0, theta);
    xi = ch.tip;
    nu = CVec(ch.axis.size(), cplx(0.0));
    for (size_t i = 0; i < ch.axis.size(); ++i) {
        xi[i] += (cc + R * e) * ch.axis[i];
        nu[i] = e * ch.axis[i];
    }
}

double spike_chart_length(const Caltrop& c, std::size_t spike_index) {
    const auto& pr = c.spike(spike_index).profile;
    double p = pr.p();
    // Levi condition length of the canonical power model x^p: the axial
    // excess p(2p-1) x^{2p-2} stays below 1/2
    double len = std::pow(2.0 * p * (2.0 * p - 1.0), -1.0 / (2.0 * p - 2.0));
    len = std::min(len, pr.A());
    // boundary-gap comparability: the true boundary distance must keep more
    // than half of the profile drop psi(x) - S at sampled near-wall probes
    for (int i = 0; i < 40; ++i) {
        double x = len * std::pow(10.0, -6.0 * i / 39.0);
        for (double f : {0.0, 0.5, 0.9}) {
            double S = f * pr.psi(x);
            double gap = pr.psi(x) - S;
            double dm = c.meridian_boundary_distance(x, S, spike_index);
            if (!(dm > 0.5 * gap)) len = std::min(len, 0.45 * x);
        }
    }
    return len;
}

CVec spike_anchor(const Caltrop& c, std::size_t spike_index) {
    const auto& ch = c.spike(spike_index);
    double half = 0.5 * spike_chart_length(c, spike_index);
    CVec z = ch.tip;
    for (size_t i = 0; i < z.size(); ++i) z[i] += half * ch.axis[i];
    return z;
}

double spike_tail_integral(double p, double A2, double x) {
    if (!(p > 1.0) || !(A2 > 0.0) || !(x > 0.0) || !(x <= 0.5 * A2))
        throw std::invalid_argument(
            "spike_tail_integral: need p > 1 and 0 < x <= A2/2");
    double q = p - 1.0;
    return (std::pow(x, -q) - std::pow(0.5 * A2, -q)) / q;
}

double spike_distance_lower(const Caltrop& c, const CVec& z0, const CVec& z,
                            double b_const, std::size_t spike_index) {
    CVec anchor = spike_anchor(c, spike_index);
    if (dist(z0, anchor) > 1e-9 * (1.0 + norm(anchor)))
        throw std::invalid_argument("spike_distance_lower: z0 must be the chart anchor");
    if (!c.contains(z))
        throw std::domain_error("spike_distance_lower: z outside the domain");
    double A2 = spike_chart_length(c, spike_index);
    MeridianCoord mc = c.meridian_coord(z, spike_index);
    if (!(mc.x > 0.0 && mc.x < 0.5 * A2))
        throw std::domain_error("spike_distance_lower: z outside the deep half-chart");
    const auto& pr = c.spike(spike_index).profile;
    return (b_const / pr.comparability()) *
           spike_tail_integral(pr.p(), A2, mc.x);
}

SpikeEmbedding fit_spike_embedding(const Caltrop& c, std::size_t spike_index) {
    const auto& ch = c.spike(spike_index);
    const auto& pr = ch.profile;
    double p = pr.p();
    double A = pr.A();
    SpikeEmbedding f;
    f.alpha = 1.0 / (p - 1.0);
    f.a = std::pow(4.0 / A, p - 1.0);  // model reach a^{-alpha} = A/4
    f.B = 0.5 * A;                     // usable depth Re(w_n) < A/4
    f.margin_M = 3.0;
    f.h = 0.9 / (pr.comparability() * f.margin_M * f.alpha);
    if (!(f.margin_M * f.h * f.alpha < 1.0 / pr.comparability()))
        throw std::runtime_error("fit_spike_embedding: width margin violated");
    const CuspDomain& q = cached_model(f.alpha, f.a, f.h);
    f.base_point = q.base_point();

    // transverse unit vector for the off-axis membership probes
    size_t m = 0;
    for (size_t i = 1; i < ch.axis.size(); ++i)
        if (std::abs(ch.axis[i]) < std::abs(ch.axis[m])) m = i;
    CVec tv(ch.axis.size(), cplx(0.0));
    tv[m] = 1.0;
    cplx ip = hdot(tv, ch.axis);
    for (size_t i = 0; i < tv.size(); ++i) tv[i] -= ip * ch.axis[i];
    double tn = norm(tv);
    if (tn > 1e-9)
        for (auto& v : tv) v /= tn;

    // sampled inclusion: the translated model copy must stay in the body for
    // representative anchor depths, wall offsets, and transverse splits
    std::vector<cplx> zetas;
    for (double xs : {1.0, 1.3, 2.0, 4.0, 10.0, 40.0, 200.0})
        for (double yf : {0.0, 0.5, -0.5, 0.95, -0.95}) {
            cplx u(f.a * xs, f.h * yf);
            zetas.push_back(std::exp(-f.alpha * std::log(u)));
        }
    for (double xf : {0.99, 0.5, 0.1, 0.01, 1e-3}) {
        double wx = 0.5 * f.B * xf;
        for (double sf : {0.0, 0.5, 0.9, 0.99}) {
            double S = sf * pr.psi(wx);
            for (int variant = 0; variant < 3; ++variant) {
                if (S == 0.0 && variant > 0) continue;
                double s_prime = variant == 0 ? S : (variant == 1 ? 0.0 : S / std::sqrt(2.0));
                double s_imag = variant == 0 ? 0.0 : (variant == 1 ? S : S / std::sqrt(2.0));
                if (tn <= 1e-9) {
                    s_imag = std::sqrt(s_prime * s_prime + s_imag * s_imag);
                    s_prime = 0.0;
                }
                CVec w = ch.tip;
                for (size_t i = 0; i < w.size(); ++i)
                    w[i] += cplx(wx, s_imag) * ch.axis[i] + s_prime * tv[i];
                if (!c.contains(w)) continue;
                cplx wn = 0.0;
                for (size_t i = 0; i < w.size(); ++i)
                    wn += (w[i] - ch.tip[i]) * std::conj(ch.axis[i]);
                cplx cw(pr.psi_inv(S), wn.imag());
                for (cplx zeta : zetas) {
                    CVec img = w;
                    cplx shift = cw + zeta - wn;
                    for (size_t i = 0; i < img.size(); ++i)
                        img[i] += shift * ch.axis[i];
                    if (!c.contains(img))
                        throw std::runtime_error(
                            "fit_spike_embedding: inclusion check failed; channel "
                            "parameters do not fit this spike");
                }
            }
        }
    }
    return f;
}

std::pair<double, CVec> spike_distance_upper(const Caltrop& c, const CVec& w,
                                             std::size_t spike_index) {
    if (!c.contains(w))
        throw std::domain_error("spike_distance_upper: w outside the domain");
    SpikeEmbedding f = fit_spike_embedding(c, spike_index);
    const auto& ch = c.spike(spike_index);
    const auto& pr = ch.profile;
    MeridianCoord mc = c.meridian_coord(w, spike_index);
    if (!(mc.x > 0.0 && mc.x < 0.5 * f.B))
        throw std::domain_error("spike_distance_upper: w outside the channel depth");
    cplx wn = 0.0;
    for (size_t i = 0; i < w.size(); ++i)
        wn += (w[i] - ch.tip[i]) * std::conj(ch.axis[i]);
    double xshift = pr.psi_inv(mc.S);
    double zeta = wn.real() - xshift;
    if (!(zeta > 0.0))
        throw std::logic_error("spike_distance_upper: nonpositive channel coordinate");
    CuspMap model(cached_model(f.alpha, f.a, f.h));
    double val = model.distance(cplx(f.base_point, 0.0), cplx(zeta, 0.0));
    CVec anchor = w;
    cplx shift = cplx(xshift + f.base_point, wn.imag()) - wn;
    for (size_t i = 0; i < anchor.size(); ++i) anchor[i] += shift * ch.axis[i];
    if (!c.contains(anchor))
        throw std::logic_error("spike_distance_upper: anchor escaped the body");
    return {val, anchor};
}

std::pair<double, CVec> smooth_collar_upper(const Domain& d, const CVec& w,
                                            const CollarSpec& spec) {
    const auto* cal = std::get_if<Caltrop>(&d);
    if (!cal || spec.inner_radius <= 0.0)
        throw std::invalid_argument(
            "smooth_collar_upper: needs a caltrop collar with an inner disc");
    if (spec.inner_radius > 1.0)
        throw std::invalid_argument("smooth_collar_upper: inner radius must be <= 1");
    if (!contains(d, w))
        throw std::domain_error("smooth_collar_upper: w outside the domain");
    if (!spec.in_collar(w))
        throw std::domain_error("smooth_collar_upper: w outside the collar");
    const auto& ch = cal->spike(0);
    double R = spec.inner_radius;
    CVec anchor = ch.tip;
    for (size_t i = 0; i < anchor.size(); ++i)
        anchor[i] += ch.profile.arc_center() * ch.axis[i];
    double rho = dist(w, anchor);
    if (rho >= R)
        throw std::domain_error("smooth_collar_upper: w outside the inner ball");
    if (rho > 1e-14) {
        // membership-sample the affine disc of radius R through w
        CVec dir(w.size());
        for (size_t i = 0; i < w.size(); ++i) dir[i] = (w[i] - anchor[i]) / rho;
        const double two_pi = 2.0 * std::acos(-1.0);
        for (double rr : {0.5, 0.9, 0.999}) {
            for (int t = 0; t < 48; ++t) {
                cplx zeta = std::polar(rr * R, two_pi * t / 48.0);
                CVec pt = anchor;
                for (size_t i = 0; i < pt.size(); ++i) pt[i] += zeta * dir[i];
                if (!contains(d, pt))
                    throw std::runtime_error(
                        "smooth_collar_upper: inner disc leaves the domain at "
                        "sampled resolution");
            }
        }
    }
    double delta = boundary_distance(d, w);
    double bound = 0.5 * std::log(2.0) + 0.5 * std::log(1.0 / delta);
    return {bound, anchor};
}

bool distance_exact_available(const Domain& d) {
    return !std::holds_alternative<Caltrop>(d);
}

double distance_exact(const Domain& d, const CVec& z, const CVec& w) {
    if ((int)z.size() != dimension(d) || (int)w.size() != dimension(d))
        throw std::invalid_argument("distance_exact: dimension mismatch");
    if (!contains(d, z) || !contains(d, w))
        throw std::domain_error("distance_exact: point outside the domain");
    if (const auto* dc = std::get_if<Disc>(&d))
        return disc_distance(dc->center, dc->radius, z[0], w[0]);
    if (const auto* b = std::get_if<Ball>(&d))
        return ball_distance(b->center, b->radius, z, w);
    if (const auto* pd = std::get_if<Polydisc>(&d)) {
        double v = 0.0;
        for (size_t i = 0; i < pd->radii.size(); ++i) {
            cplx ci = i < pd->center.size() ? pd->center[i] : cplx(0.0);
            v = std::max(v, disc_distance(ci, pd->radii[i], z[i], w[i]));
        }
        return v;
    }
    if (const auto* q = std::get_if<CuspDomain>(&d))
        return CuspMap(*q).distance(z[0], w[0]);
    throw std::invalid_argument("distance_exact: no closed form for this domain");
}

// ---------------------------------------------------------------------------
// Interval composition

namespace {

struct Attach {
    CVec pt;
    double cost;
    std::string tag;
};

std::vector<Attach> attach_options(const DomainGraph& g, const CVec& e) {
    std::vector<Attach> out;
    out.push_back({e, 0.0, "graph"});
    const auto* cal = std::get_if<Caltrop>(&g.domain());
    if (!cal) return out;
    for (size_t j = 0; j < cal->spikes().size(); ++j) {
        try {
            auto [bd, anchor] = spike_distance_upper(*cal, e, j);
            out.push_back({std::move(anchor), bd, "spike-channel"});
        } catch (const std::domain_error&) {
        }
    }
    if (cal->spikes().size() == 1 && cal->spike(0).full_meridian) {
        try {
            CollarSpec cs = cap_collar(*cal);
            auto [bd, anchor] = smooth_collar_upper(g.domain(), e, cs);
            out.push_back({std::move(anchor), bd, "smooth-collar"});
        } catch (const std::domain_error&) {
        }
    }
    return out;
}

struct UpperHit {
    double value = kInf;
    std::string tag = "none";
};

UpperHit upper_only(const DomainGraph& g, const CVec& a, const CVec& b) {
    UpperHit best;
    auto oa = attach_options(g, a);
    auto ob = attach_options(g, b);
    for (const auto& xa : oa) {
        for (const auto& xb : ob) {
            double base = xa.cost + xb.cost;
            if (base >= best.value) continue;
            double gv = 0.0;
            std::string gtag = "0";
            if (dist(xa.pt, xb.pt) != 0.0) {
                try {
                    PathSample ps = g.shortest_path(xa.pt, xb.pt);
                    gv = ps.value;
                    gtag = ps.method;
                } catch (const NoPathError&) {
                    continue;
                }
            }
            if (base + gv < best.value) {
                best.value = base + gv;
                if (xa.tag == "graph" && xb.tag == "graph")
                    best.tag = gtag;
                else
                    best.tag = xa.tag + "+graph+" + xb.tag;
            }
        }
    }
    return best;
}

}  // namespace

BoundInterval distance_interval(const DomainGraph& g, const CVec& z, const CVec& w) {
    const Domain& d = g.domain();
    if (!contains(d, z) || !contains(d, w))
        throw std::domain_error("distance_interval: point outside the domain");
    BoundInterval out;
    if (dist(z, w) == 0.0) {
        out.lower_method = out.upper_method = "identical";
        return out;
    }
    UpperHit up = upper_only(g, z, w);
    if (up.value == kInf)
        throw NoPathError("distance_interval: no certified upper path; refine the grid");

    double lo = distance_lower_linear(d, z, w);
    std::string lo_tag = "linear-enclosing";
    if (const auto* cal = std::get_if<Caltrop>(&d)) {
        // anchored projection: the deep endpoint's weight integral minus a
        // certified bound on the anchor-to-other-endpoint distance
        for (size_t j = 0; j < cal->spikes().size(); ++j) {
            CVec anchor = spike_anchor(*cal, j);
            for (int ord = 0; ord < 2; ++ord) {
                const CVec& deep = ord ? w : z;
                const CVec& other = ord ? z : w;
                double s = 0.0;
                try {
                    s = spike_distance_lower(*cal, anchor, deep, 0.25, j);
                } catch (const std::domain_error&) {
                    continue;
                }
                UpperHit ua = upper_only(g, anchor, other);
                if (ua.value == kInf) continue;
                if (s - ua.value > lo) {
                    lo = s - ua.value;
                    lo_tag = "spike-tail-anchored";
                }
            }
        }

        // supporting half-spaces: the tip plane and cap contact planes give
        // projection bounds that keep growing near the smooth collar, where
        // the spike weight integral does not apply
        auto try_plane = [&](const CVec& xi, const CVec& nu, const char* tag) {
            try {
                double v = distance_lower_halfspace(d, xi, nu, z, w);
                if (v > lo) {
                    lo = v;
                    lo_tag = tag;
                }
            } catch (const std::domain_error&) {
            }
        };
        {
            const auto& sp = cal->spike(0);
            CVec nu_tip = sp.axis;
            for (auto& comp : nu_tip) comp = -comp;
            try_plane(sp.tip, nu_tip, "halfspace-tip");
            if (sp.full_meridian &&
                sp.profile.shape() == SpikeProfile::Shape::PowerCircleBlend) {
                std::vector<double> thetas = {0.0};
                for (const CVec* e : {&z, &w}) {
                    MeridianCoord mc = cal->meridian_coord(*e, 0);
                    if (mc.x > sp.profile.A())
                        thetas.push_back(
                            std::atan2(mc.S, mc.x - sp.profile.arc_center()));
                }
                for (double th : thetas) {
                    try {
                        CVec xi, nu;
                        cap_support(*cal, th, xi, nu);
                        try_plane(xi, nu, "halfspace-cap");
                    } catch (const std::domain_error&) {
                    }
                }
            }
        }
    }

    out.lower = std::max(0.0, lo);
    out.upper = up.value;
    out.lower_method = lo_tag;
    out.upper_method = up.tag;
    if (out.lower > out.upper * (1.0 + 1e-9) + 1e-12)
        throw std::logic_error("distance_interval: lower " + std::to_string(out.lower) +
                               " exceeded upper " + std::to_string(out.upper));
    return out;
}

BoundInterval distance_interval(const Domain& d, const CVec& z, const CVec& w,
                                const GridSpec& spec) {
    DomainGraph g(d, spec);
    return distance_interval(g, z, w);
}

}  // namespace kobalab
