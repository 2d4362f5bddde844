#pragma once

#include <iosfwd>
#include <limits>

#include "kobalab/conformal.hpp"
#include "kobalab/distance.hpp"

namespace kobalab {

// Near-geodesic paths, two-sided almost-geodesic certification, and the
// visibility experiment.
//
// On the unit disc and on cusp model domains the true geodesic is available
// through the disc chart and is returned with exact unit-speed time
// parametrization; everywhere else the path comes from the distance graph,
// reparametrized by cumulative certified edge weight, and the certifier
// grades how close to a geodesic it actually is.

// Certificate for the two almost-geodesic conditions at parameters
// (lambda, kappa). Positive margins are provable violations: every margin is
// computed from the conservative side of a distance or metric interval, so
// valid means "no sampled condition is provably broken". The speed margin
// absorbs a curvature allowance for the central-difference velocity.
struct AlmostGeodesicCert {
    double lambda = 1.0;
    double kappa = 0.0;
    // max over sampled (s,t) of k_lower - (lambda |t-s| + kappa)
    double worst_upper_margin = -std::numeric_limits<double>::infinity();
    // max over sampled (s,t) of (|t-s|/lambda - kappa) - k_upper
    double worst_lower_margin = -std::numeric_limits<double>::infinity();
    // max over interior nodes of speed_upper - lambda - fd_allowance
    double speed_margin = -std::numeric_limits<double>::infinity();
    int pairs_checked = 0;
    int speed_nodes = 0;
    bool valid = false;
};

// Path from z to w whose time parameter tracks Kobayashi arc length. Unit
// disc and cusp model domains get the exact chart geodesic sampled at time
// step spec.spacing (real endpoints on a cusp domain produce a real axis
// path); other domains fall back to the certified graph path. Throws
// NoPathError if the graph cannot connect the endpoints.
PathSample near_geodesic(const Domain& d, const CVec& z, const CVec& w,
                         const GridSpec& spec = {});

// Same, but reuses an already-built graph for the fallback (and its spacing
// for the exact sampling step).
PathSample near_geodesic(const DomainGraph& g, const CVec& z, const CVec& w);

// Grades path against the (lambda, kappa) conditions: pairwise times versus
// distance intervals on a sampled set of node pairs (all pairs when the path
// is short, a stride subsample plus all consecutive pairs when long), and
// central-difference speed against the metric upper bound at interior nodes.
// Exact distances are used where available; otherwise the intervals come
// from the supplied graph (one is built at spec defaults when absent, which
// is slow for repeated calls). Throws std::invalid_argument for lambda < 1,
// kappa < 0, or a path whose times are missing or not strictly increasing.
AlmostGeodesicCert certify_almost_geodesic(const Domain& d, const PathSample& path,
                                           double lambda, double kappa,
                                           const DomainGraph* graph = nullptr);

// max over consecutive nodes of Euclidean step over time step. Throws
// std::invalid_argument on fewer than 2 nodes or a nonpositive time step.
double lipschitz_check(const PathSample& path);

// One endpoint pair of the visibility experiment.
struct VisibilityPairRow {
    double scale = 0.0;      // target boundary-distance scale for this batch
    double delta_z = 0.0;    // realized boundary distance of the z endpoint
    double delta_w = 0.0;
    double path_value = 0.0; // certified length (k upper bound) of the path
    double reentry = 0.0;    // max over path nodes of boundary distance
    double ref_miss = 0.0;   // min over path nodes of distance to the reference point
    bool compact_hit = false;
};

struct VisibilityReport {
    std::vector<VisibilityPairRow> rows;
    std::vector<double> scales;
    std::vector<double> depth_per_scale;  // min over the batch of reentry
    CVec reference;                       // interior reference point used for ref_miss
    double rho0 = 0.0;                    // half the best reentry of the coarsest batch
    bool all_reenter = false;             // every path reaches {delta >= rho0}
    bool stable = false;                  // depth varies < 20% over the last 3 scales
    std::uint64_t seed = 0;

    void write_csv(const std::string& path) const;
    void write_csv(std::ostream& out) const;
};

// Joins sampled points near the boundary point xi (within radius
// neighborhood_radii.first) to points near eta (within .second) by
// near-geodesics, at geometrically decreasing boundary-distance scales, and
// reports how deep into the domain the paths re-enter. Throws
// std::invalid_argument when the two closed neighborhoods are not disjoint
// or a radius is nonpositive.
VisibilityReport visibility_experiment(const Domain& d, const CVec& xi, const CVec& eta,
                                       std::pair<double, double> neighborhood_radii,
                                       int pair_count, std::uint64_t seed,
                                       const std::vector<double>& scales =
                                           {1e-2, 1e-3, 1e-4, 1e-5, 1e-6},
                                       const GridSpec& grid = {});

}  // namespace kobalab
