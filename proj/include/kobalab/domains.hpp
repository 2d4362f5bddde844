#pragma once

#include <optional>
#include <variant>

#include "kobalab/common.hpp"
#include "kobalab/rng.hpp"
#include "kobalab/spike_profile.hpp"

namespace kobalab {

// ---------------------------------------------------------------------------
// Elementary domains

struct Disc {
    cplx center = 0.0;
    double radius = 1.0;
};

struct Ball {
    int n = 2;
    CVec center;  // empty means origin
    double radius = 1.0;
};

struct Polydisc {
    CVec center;
    std::vector<double> radii;
};

// ---------------------------------------------------------------------------
// Planar cusp model domain.
//
// Start from the half-strip S = {Re u > a, |Im u| < h}, invert (u -> 1/u) to
// get a sliver T pinched at the origin, then apply w -> w^alpha. The result
// is a bounded planar domain with a single boundary cusp at 0 whose profile
// exponent is (1+alpha)/alpha. Membership is decided exactly through the
// inverse chain: z is inside iff u = z^(-1/alpha) (principal branch) lands in
// S. The principal branch is safe as long as alpha*atan(h/a) < pi, which the
// constructor asserts.
class CuspDomain {
public:
    CuspDomain(double alpha, double a, double h);

    double alpha() const { return alpha_; }
    double a() const { return a_; }
    double h() const { return h_; }

    // The distinguished real axis point that the disc uniformization sends
    // to 0; equals ((2h/pi) log(1+sqrt 2) + a)^(-alpha).
    double base_point() const { return base_point_; }

    // Rightmost real point, a^(-alpha). The real trace is (0, x_max).
    double x_max() const { return x_max_; }

    // Largest |arg z| over the closure.
    double max_arg() const { return max_arg_; }

    bool contains(cplx z) const;

    // u = z^(-1/alpha); lands in S exactly when z is inside.
    cplx strip_image(cplx z) const;

    double boundary_distance(cplx z) const;

    // Dense boundary polyline (upper wall from deep in the cusp to the nose,
    // around the nose, lower wall back into the cusp). Resolution fields say
    // how it was sampled.
    const std::vector<cplx>& boundary_polyline() const { return poly_; }
    int wall_samples() const { return wall_n_; }
    int nose_samples() const { return nose_n_; }

    // Boundary wall point (1/(x - ih))^alpha for the upper wall (sign=+1)
    // or its mirror (sign=-1); x >= a. Nose arc point for t in [-1,1].
    cplx wall_point(double x, int sign) const;
    cplx nose_point(double t) const;

private:
    double wall_far_() const;
    double arc_min_dist_(cplx z, int arc, double lo, double hi) const;

    double alpha_, a_, h_;
    double base_point_, x_max_, max_arg_;
    int wall_n_ = 8000, nose_n_ = 2000;
    std::vector<cplx> poly_;          // full ordered polyline
    std::vector<double> poly_param_;  // arc parameter per vertex
    std::vector<int> poly_arc_;       // 0 = upper wall, 1 = nose, 2 = lower wall
    // uniform spatial hash over the polyline for nearest-seed lookup
    int hash_dim_ = 192;
    double hash_x0_ = 0, hash_y0_ = 0, hash_cell_ = 0;
    std::vector<std::vector<int>> hash_cells_;
};

// ---------------------------------------------------------------------------
// Caltrop domains: solids of revolution with power cusps.

// One cusp chart. Spike-local coordinates of z: z_n = <z - tip, axis>
// (Hermitian inner product, axis a unit vector), x = Re z_n, and
// S^2 = |z - tip|^2 - x^2 = Im(z_n)^2 + ||z'||^2. The body is
// {0 < x < reach, S < psi(x)}.
struct SpikeChart {
    CVec tip;
    CVec axis;
    SpikeProfile profile;
    bool full_meridian = true;  // teardrop: reach = profile.x_end(); else reach = profile.A()

    double reach() const { return full_meridian ? profile.x_end() : profile.A(); }
};

struct MeridianCoord {
    double x = 0.0;  // axial coordinate
    double S = 0.0;  // revolution radius
};

class Caltrop {
public:
    // The single-cusp teardrop: power profile of exponent p blended into a
    // circular cap, spanning the axis segment (0, x_end). The scale constant
    // is picked by the profile so the defining function S^2 - psi(x)^2 has
    // Levi form >= 1/4 |v|^2 over the whole body.
    static Caltrop single_spike(double p, double total_len, double B, int n = 2);

    // Multi-cusp assembly: ball plus user-supplied spike charts whose bases
    // are submerged in the ball. Membership is the chart-wise union.
    static Caltrop multi_spike(int n, CVec ball_center, double ball_radius,
                               std::vector<SpikeChart> spikes);

    int dim() const { return n_; }
    const std::vector<SpikeChart>& spikes() const { return spikes_; }
    const SpikeChart& spike(size_t j = 0) const { return spikes_.at(j); }
    bool has_cap_ball() const { return cap_radius_ > 0.0; }
    double cap_radius() const { return cap_radius_; }
    const CVec& cap_center() const { return cap_center_; }

    bool contains(const CVec& z) const;
    double boundary_distance(const CVec& z) const;

    MeridianCoord meridian_coord(const CVec& z, size_t spike_idx = 0) const;
    // Inverse of meridian_coord on the default axis frame: lift (x, S) with a
    // given transverse direction (unit vector in R^{2n-1}).
    CVec lift_meridian(double x, double S, const std::vector<double>& trans_dir,
                       size_t spike_idx = 0) const;

    // Levi form of the spike-chart defining function S^2 - psi(x)^2 at z
    // applied to tangent v: ||v'||^2 + (1 - (psi psi'' + psi'^2))/2 * |v_n|^2.
    double levi_form(const CVec& z, const CVec& v, size_t spike_idx = 0) const;

    // Distance from (x,S) to the meridian curve of spike j (2-D problem).
    double meridian_boundary_distance(double x, double S, size_t spike_idx = 0) const;

    // Center/radius of a tight enclosing ball (used for distance lower bounds).
    void enclosing_ball(CVec& center, double& radius) const;

    // Largest x with levi_excess <= 1/2 on the profile (Levi chart length).
    double levi_chart_len(size_t spike_idx = 0) const;

private:
    int n_ = 2;
    std::vector<SpikeChart> spikes_;
    double cap_radius_ = 0.0;
    CVec cap_center_;
};

// Sampled consistency audit for multi-spike assemblies: checks spike bases
// are submerged in the ball and membership is stable across charts.
struct OverlapAudit {
    int checked = 0;
    int failures = 0;
    std::string detail;
};
OverlapAudit audit_multi_spike(const Caltrop& c, int samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Variant dispatch

using Domain = std::variant<Disc, Ball, Polydisc, CuspDomain, Caltrop>;

int dimension(const Domain& d);
bool contains(const Domain& d, const CVec& z);
double boundary_distance(const Domain& d, const CVec& z);
// Center and radius of a ball containing the domain.
void enclosing_ball(const Domain& d, CVec& center, double& radius);
// Box [lo_i, hi_i] per real coordinate (2n reals) containing the domain.
void bounding_box(const Domain& d, std::vector<double>& lo, std::vector<double>& hi);

struct SampleResult {
    std::vector<CVec> points;
    double acceptance_rate = 1.0;
};

// Deterministic seeded sampling of interior points with boundary distance in
// [r_range.first, r_range.second]. Domain-aware (direct construction where
// the geometry allows it, rejection elsewhere); every returned point is
// re-checked against contains() and the delta range.
SampleResult sample_interior(const Domain& d, std::pair<double, double> r_range,
                             int count, std::uint64_t seed);

inline CVec cvec1(cplx z) { return CVec{z}; }

}  // namespace kobalab
