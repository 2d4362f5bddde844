#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kobalab/distance.hpp"
#include "kobalab/domains.hpp"

namespace kobalab {

// Fractional linear map (a z + b) / (c z + d). Used both as a disc self-map
// in the unit-disc coordinate and, after conjugation, as an upper half plane
// map in the cusp chart.
struct Mobius {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    cplx operator()(cplx z) const { return (a * z + b) / (c * z + d); }

    // Matrix product, so compose(g, h)(z) = g(h(z)).
    static Mobius compose(const Mobius& g, const Mobius& h) {
        return {g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
                g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
    }
    static Mobius inverse(const Mobius& g) { return {g.d, -g.b, -g.c, g.a}; }
    static Mobius rotation(double theta);
};

enum class OrbitClass { COMPACT_ORBIT, BOUNDARY_CONVERGENT, UNDETERMINED };

const char* to_string(OrbitClass c);

// Thresholds for orbit classification and for declaring a common boundary
// limit. Defaults suit exponential convergence; orbits that crawl toward the
// boundary at a polynomial rate (cusp tips under parabolic-type maps) need a
// looser cluster_radius, which is why it sits in the config.
struct OrbitConfig {
    double tail_fraction = 0.5;    // trailing share of the orbit examined
    double delta_floor = 1e-8;     // compact orbits stay above this depth
    double cluster_radius = 1e-6;  // tail must sit this close to one boundary point
};

// Record of the sampled invariance audit a self-map passed at construction.
struct MembershipAudit {
    int samples = 0;
    std::uint64_t seed = 0;
    double worst_margin = 0.0;  // smallest boundary distance over all images
};

// A holomorphic self-map of one of the lab domains, validated at
// construction by mapping a seeded batch of interior points and requiring
// every image to stay interior. Construction throws if any sample escapes,
// so a held SelfMapSpec always carries a passing audit.
class SelfMapSpec {
public:
    // g in the unit-disc coordinate, applied to a general disc by scaling.
    static SelfMapSpec disc_map(const Disc& d, const Mobius& g,
                                std::uint64_t audit_seed = 7001);

    // Conjugate of a unit-disc self-map g through the cusp chart. Iteration
    // runs in the half-plane coordinate of the chart, which stays finite
    // arbitrarily deep in the cusp where the disc coordinate would round
    // onto the unit circle.
    static SelfMapSpec cusp_map(const CuspDomain& q, const Mobius& g,
                                std::uint64_t audit_seed = 7001);

    // Product map on a caltrop spike frame: the complex axial coordinate
    // moves by the planar map g, the transverse block scales by the constant
    // factor. Invariance is exactly what the audit is for here.
    static SelfMapSpec caltrop_map(const Caltrop& c, const Mobius& g,
                                   cplx transverse_factor,
                                   std::uint64_t audit_seed = 7001);

    const Domain& domain() const { return dom_; }
    const MembershipAudit& invariance_check() const { return audit_; }

    CVec apply(const CVec& z) const;

private:
    SelfMapSpec() = default;
    void run_audit_(std::uint64_t seed, int samples);

    enum class Kind { kDisc, kCusp, kCaltrop };
    Domain dom_;
    Kind kind_ = Kind::kDisc;
    Mobius g_;          // disc or axial coefficients as given
    Mobius half_;       // cusp kind: the conjugated half-plane matrix
    cplx lam_{0.0};     // caltrop kind: transverse factor
    MembershipAudit audit_;
};

struct OrbitRecord {
    CVec start;
    std::vector<CVec> points;    // F^0(start) .. F^N(start), or truncated
    std::vector<double> deltas;  // boundary distance per point
    OrbitClass classification = OrbitClass::UNDETERMINED;
    CVec xi;                   // boundary cluster point when convergent
    double xi_residual = 0.0;  // distance from the last iterate to xi
    bool exited = false;
    int exit_step = -1;
};

// Columns: nu, then re/im per coordinate, then delta.
void write_orbit_csv(std::ostream& os, const OrbitRecord& orbit);

// Nearest boundary point, found by walking down the numerical gradient of
// the boundary distance. Falls back gracefully at corners and cusp tips
// where the gradient degenerates; the result is within a few steps' rounding
// of the boundary, not exactly on it.
CVec project_boundary(const Domain& d, const CVec& z);

// Functional iteration with membership re-checked each step. A step that
// leaves the domain by more than a 1e-12 pull-back slack stops the orbit
// early and marks it exited. The returned record is already classified.
OrbitRecord iterate(const SelfMapSpec& f, const CVec& z0, int n_steps,
                    const OrbitConfig& cfg = {});

// Dichotomy call on a finished orbit: fills classification, xi and
// xi_residual in place and returns the class. Orbits shorter than 50 points
// and exited orbits stay UNDETERMINED.
OrbitClass classify_orbit(const Domain& d, OrbitRecord& orbit,
                          const OrbitConfig& cfg = {});

struct CommonLimitReport {
    std::vector<OrbitRecord> orbits;
    bool all_compact = false;
    bool all_boundary = false;
    bool dichotomy_violation = false;  // mixed classes, or UNDETERMINED seen
    bool common_limit = false;
    CVec xi;                      // shared limit when common_limit
    double max_separation = 0.0;  // max pairwise gap between orbit limits
};

// Iterates every start and checks the limits agree when all orbits reach
// the boundary. Needs at least two interior starts.
CommonLimitReport common_limit_check(const SelfMapSpec& f,
                                     const std::vector<CVec>& starts, int n_steps,
                                     const OrbitConfig& cfg = {});

struct BlowupSequence {
    std::vector<double> lower_values;  // distance lower bound per point
    double increase_fraction = 0.0;    // share of steps that went up
    bool diverging = false;
};

struct DistanceBlowupReport {
    std::vector<BlowupSequence> sequences;
    bool all_diverging = false;
};

// Completeness probe: lower distance bounds from z0 along sequences that
// approach the boundary must blow up. Each sequence needs interior points
// with final depth below a tenth of its initial depth. A sequence passes
// when the bound rises on at least 80 percent of steps and ends at five
// times its first value. Domains without a closed-form distance need the
// bounds graph.
DistanceBlowupReport distance_blowup_check(const Domain& d, const CVec& z0,
                                           const std::vector<std::vector<CVec>>& sequences,
                                           const DomainGraph* bounds = nullptr);

struct KarlssonReport {
    OrbitRecord orbit;
    std::vector<int> record_steps;      // nu whose distance beats all earlier
    std::vector<double> record_values;  // upper distance bound at those nu
    bool blowing_up = false;
    bool limit_match = false;  // last record point near the classified xi
    double limit_gap = 0.0;
};

// Distance-record subsequence of an orbit: steps where k(F^nu(o), o) reaches
// a running maximum. Escaping orbits keep setting records until the end;
// orbits on compact sets stop early and report not blowing up.
KarlssonReport karlsson_subsequence_check(const SelfMapSpec& f, const CVec& o,
                                          int n_steps, const OrbitConfig& cfg = {},
                                          const DomainGraph* bounds = nullptr);

}  // namespace kobalab
