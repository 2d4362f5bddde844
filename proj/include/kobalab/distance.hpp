#pragma once

#include <optional>
#include <utility>

#include "kobalab/common.hpp"
#include "kobalab/conformal.hpp"
#include "kobalab/domains.hpp"
#include "kobalab/metric.hpp"

namespace kobalab {

// Interval estimators for the Kobayashi distance. Upper bounds come from
// certified path decompositions (inscribed-ball edges, inscribed-ball pair
// formulas, cusp-channel embeddings); lower bounds from contractions onto
// enclosing balls, supporting half-spaces, and the spike weight integral.

// A polyline path with its certified per-leg weights. times holds the
// cumulative weight at each node (so it increases from 0 to value) and is
// the parametrization the almost-geodesic certifier works against.
struct PathSample {
    std::vector<CVec> points;
    std::vector<double> leg_weights;  // size points.size()-1
    std::vector<double> times;        // size points.size(), starts at 0
    double value = 0.0;               // sum of leg weights
    std::string method;
};

// Node layout parameters for the distance graph. Refinement halves the
// lattice and ladder spacing but keeps the edge radius, so a refined graph
// contains every node and edge of its parent and shortest paths can only
// shrink.
struct GridSpec {
    double spacing = 0.05;
    double edge_radius = 0.0;   // 0: set to 2.6*spacing when the graph is built
    double edge_frac = 0.8;     // edge admissible when gap <= frac * delta
    int n_hubs = 6;
    double ladder_step = 0.0;   // 0: auto; cusp/spike axis ladder increment
    double ladder_depth = 12.0; // cusp ladder reach, in distance units
    double ladder_min_x = 2e-3; // spike ladder reach, in axial units
    std::uint64_t seed = 1;     // recorded in outputs; layout is deterministic

    GridSpec refined() const;
};

struct NoPathError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Immutable shortest-path machine over interior sample nodes. Edge weights
// are certified upper bounds for the Kobayashi distance between the two
// endpoints (arctanh of the gap over the inscribed-ball radius, or the
// exact ball formula inside a hub ball), so any path value is a true upper
// bound. Cusp domains get a geodesic-spaced ladder of axis nodes; teardrop
// caltrops get a profile-spaced axis ladder into the spike.
class DomainGraph {
public:
    DomainGraph(const Domain& d, GridSpec spec);

    DomainGraph(const DomainGraph&) = delete;
    DomainGraph& operator=(const DomainGraph&) = delete;
    DomainGraph(DomainGraph&&) = delete;

    // Same layout at half spacing; parent nodes, edges, and hub centers are
    // all retained, so values are monotone under refinement.
    std::unique_ptr<DomainGraph> refined() const;

    const Domain& domain() const { return dom_; }
    const GridSpec& spec() const { return spec_; }
    std::size_t node_count() const { return nodes_.size(); }

    // Certified shortest path z -> w. Throws NoPathError if the terminals
    // cannot be attached or connected at this resolution.
    PathSample shortest_path(const CVec& z, const CVec& w) const;

private:
    DomainGraph(const Domain& d, GridSpec spec, std::vector<CVec> seed_hubs);
    void build_(std::vector<CVec> seed_hubs);
    void build_nodes_();
    void build_edges_();
    void pick_hubs_(const std::vector<CVec>& inherited);
    std::vector<int> near_nodes_(const CVec& p, double radius) const;
    std::vector<int> common_hubs_(int i, int j) const;
    std::vector<std::pair<int, double>> attach_(const CVec& p) const;

    Domain dom_;
    GridSpec spec_;
    std::vector<CVec> nodes_;
    std::vector<double> delta_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<int> hubs_;
    std::vector<std::vector<int>> members_;    // nodes inside each hub ball
    std::vector<std::vector<int>> hub_lists_;  // hub indices whose ball holds the node
    std::vector<std::pair<int, int>> ladder_ranges_;  // [first, last) node index
    // spatial hash over real coordinates
    std::vector<double> box_lo_, box_hi_;
    double cell_ = 0.0;
    std::vector<int> hash_dims_;
    std::vector<std::vector<int>> cells_;
};

// Shortest-path upper bound; value >= k(z,w) always.
std::pair<double, PathSample> distance_upper_graph(const DomainGraph& g,
                                                   const CVec& z, const CVec& w);

// ||z - w|| / R through the enclosing ball B(c, R); always <= k(z,w).
double distance_lower_linear(const Domain& d, const CVec& z, const CVec& w);

// Contraction onto the supporting half-space {Re <xi - p, nu> > 0}: the
// complex-linear projection sends the domain into a half-plane where the
// distance is explicit. nu must be a unit outward direction whose support
// property is audited on sampled interior points (throws on violation).
double distance_lower_halfspace(const Domain& d, const CVec& xi, const CVec& nu,
                                const CVec& z, const CVec& w);

// Supporting contact data (point on the cap sphere, outward normal) for a
// teardrop cap direction; theta is the polar angle from the spike axis at
// the cap center, valid while the tip stays weakly inside the tangent
// plane. Throws std::domain_error when the support condition fails.
void cap_support(const Caltrop& c, double theta, CVec& xi, CVec& nu);

// Chart length for the spike weight integral: the Levi condition length of
// the canonical power model x^p intersected with a sampled boundary-gap
// comparability test (gap-to-wall over profile drop ratio > 1/2).
double spike_chart_length(const Caltrop& c, std::size_t spike_index = 0);

// The anchor tip + (A''/2) * axis used by the spike lower bound.
CVec spike_anchor(const Caltrop& c, std::size_t spike_index = 0);

// (x^{-(p-1)} - (A2/2)^{-(p-1)}) / (p-1), the weight integral from x to the
// anchor depth A2/2. Pure formula, exposed for direct testing.
double spike_tail_integral(double p, double A2, double x);

// Lower bound for k(z0, z) when z sits in the spike chart at axial depth
// below A''/2: (b_const / C) * tail integral, C the profile comparability
// constant. z0 must be the chart anchor. Throws std::domain_error when z is
// outside the chart, std::invalid_argument when z0 is not the anchor.
double spike_distance_lower(const Caltrop& c, const CVec& z0, const CVec& z,
                            double b_const, std::size_t spike_index = 0);

// Affine cusp-channel embedding parameters for one spike: the model domain
// Q^{alpha,a,h} with alpha = 1/(p-1) slides along the chart, shifted so its
// tip touches the wall. Inclusion is verified by membership sampling at
// construction; M is the width-margin constant of the fit and M*h*alpha <
// 1/C is checked numerically.
struct SpikeEmbedding {
    double alpha = 0.0;
    double a = 0.0;
    double h = 0.0;
    double B = 0.0;        // usable axial depth: Re(w_n) < B/2
    double margin_M = 0.0;
    double base_point = 0.0;  // base point of the model domain
};
SpikeEmbedding fit_spike_embedding(const Caltrop& c, std::size_t spike_index = 0);

// Upper bound for k(anchor_w, w) through the embedded channel, with the
// anchor z_w = embedding image of the model base point. The value is the
// exact model-domain distance from its base point to the pulled-back
// coordinate of w (fully numeric, no symbolic constant).
std::pair<double, CVec> spike_distance_upper(const Caltrop& c, const CVec& w,
                                             std::size_t spike_index = 0);

// log(sqrt 2) + (1/2) log(1/delta(w)) as a bound on k(anchor, w) for w in
// the declared collar, anchor = center of the inner-normal disc (the cap
// center for teardrops). The inner disc is membership-sampled first.
std::pair<double, CVec> smooth_collar_upper(const Domain& d, const CVec& w,
                                            const CollarSpec& spec);

// True where a closed-form distance is implemented (disc, ball, polydisc,
// cusp model domain); the oracle the interval estimators are tested against.
bool distance_exact_available(const Domain& d);
double distance_exact(const Domain& d, const CVec& z, const CVec& w);

// Best two-sided bracket from the estimators above (never consults the
// closed forms, so on disc/ball/Q the interval genuinely tests them).
// lower = max(linear, anchored spike projection); upper = min(graph,
// channel/collar bound + graph stitch through the anchor).
BoundInterval distance_interval(const DomainGraph& g, const CVec& z, const CVec& w);

// Convenience: builds a throwaway graph with the given spec.
BoundInterval distance_interval(const Domain& d, const CVec& z, const CVec& w,
                                const GridSpec& spec = {});

}  // namespace kobalab
