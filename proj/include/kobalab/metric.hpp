#pragma once

#include <functional>
#include <iosfwd>

#include "kobalab/common.hpp"
#include "kobalab/conformal.hpp"
#include "kobalab/domains.hpp"

namespace kobalab {

// Two-sided estimators for the infinitesimal Kobayashi metric.
//
// Upper bounds come from inscribed analytic discs (exact closed forms where
// we have them, sampled-membership affine discs elsewhere); lower bounds
// come from plurisubharmonic weight functions and from declared
// strongly-pseudoconvex collar constants. Every bound records how it was
// obtained so downstream consumers can tell a certificate from a heuristic.

// True where a closed-form metric is implemented (disc, ball, polydisc,
// cusp model domain).
bool metric_exact_available(const Domain& d);

// The closed-form metric. Throws std::invalid_argument when no closed form
// exists for this domain kind, std::domain_error when z is outside.
double metric_exact(const Domain& d, const CVec& z, const CVec& v);

// Largest r such that the affine disc zeta -> z + zeta * r * v/|v| stays
// inside the domain, decided by bisection with membership checked on
// sampled circles (circle_samples points on the rim and on the half-radius
// circle per trial, re-verified at twice the density before acceptance).
// Returns |v| / r, an upper bound for the metric up to sampling gaps.
// Throws std::runtime_error if even r = 1e-14 fails (degenerate point).
double metric_upper_disc(const Domain& d, const CVec& z, const CVec& v,
                         int circle_samples = 256);

// A negative plurisubharmonic weight with a local Levi floor, the input to
// the Sibony-style lower bound. u must be < 0 on the whole domain and its
// complex Hessian must be >= c |w|^2 for points where in_chart is true;
// alpha_S is the theorem's normalization constant (recorded, configurable).
struct PshWitness {
    std::function<double(const CVec&)> u;
    std::function<bool(const CVec&)> in_chart;
    double c = 0.25;
    double alpha_S = 4.0;
    std::string tag;
};

// Weight |z'|^2 + (Im z_n)^2 - psi(Re z_n)^2 in the meridian chart of one
// spike; valid on 0 < Re z_n < levi_chart_len (Hessian floor c = 1/4 there).
PshWitness spike_chart_witness(const Caltrop& c, std::size_t spike_index,
                               double alpha_S = 4.0);

// Weight |z - center|^2 / R^2 - 1 built from the enclosing ball; valid on
// the whole domain with Hessian floor 1/R^2. Weak deep in a spike but it
// covers everything, so it is the fallback that keeps lower bounds total.
PshWitness enclosing_ball_witness(const Domain& d, double alpha_S = 4.0);

// kappa(z; v) >= sqrt(c / alpha_S) |v| / sqrt(|u(z)|).
// Throws std::domain_error when z is outside the witness chart or u >= 0.
double metric_lower_sibony(const PshWitness& w, const CVec& z, const CVec& v);

// A declared strongly-pseudoconvex boundary collar: sigma is the declared
// Levi constant of the boundary piece, c_collar the declared geometry
// constant of the estimate (both inputs, not derived).
struct CollarSpec {
    double sigma = 0.25;
    double c_collar = 1.0;
    double inner_radius = 0.0;  // radius of the inner-normal disc, 0 = none
    std::function<bool(const CVec&)> in_collar;
    std::string tag;
};

// The cap-side collar of a single-spike caltrop: meridian coordinate past
// the power/arc joint, where the boundary is a round sphere piece.
CollarSpec cap_collar(const Caltrop& c);

struct PscBound {
    double value = 0.0;
    bool available = false;  // false: outside collar or prefactor <= 0
};

// kappa(z; v) >= (1 - c_collar sqrt(delta)) sigma |v| / sqrt(delta) for z
// in the declared collar, delta = boundary distance. Evaluated on the unit
// vector v/|v| and rescaled by |v|; a nonpositive prefactor is reported as
// unavailable rather than clamped to a fake positive bound.
PscBound metric_lower_strong_psc(const Domain& d, const CVec& z,
                                 const CVec& v, const CollarSpec& spec);

// Best available two-sided bracket at (z, v). Lower = max over applicable
// lower methods, upper = min over uppers; exact closed forms serve as both
// where implemented. Throws std::logic_error if lower > upper (that can
// only mean an estimator is wrong, so it must not pass silently).
BoundInterval metric_interval(const Domain& d, const CVec& z, const CVec& v,
                              double alpha_S = 4.0);

// One row of the reciprocal-metric growth profile.
struct MProfileRow {
    double r = 0.0;
    double M_lower = 0.0;   // max sampled 1/upper: certified underestimate
    double M_upper = 0.0;   // max sampled 1/lower: overestimate where valid
    int n_samples = 0;
};

struct MProfile {
    std::vector<MProfileRow> rows;
    std::uint64_t seed = 0;
    // Writes header r,M_lower,M_upper,n_samples,seed and one row per radius.
    void write_csv(std::ostream& out) const;
};

// Profile of M(r) = sup { 1/kappa(z; v) : delta(z) <= r, |v| = 1 }.
// Samples points in the window delta in [0.97 r, r] (the sup lives at the
// outer edge), directions uniformly on the sphere, and post-processes both
// columns with a running max over increasing r so they are monotone, which
// the true M is. The M_upper column deliberately uses the estimator lower
// bounds even where an exact metric exists: a sampled max of the exact
// reciprocal can only undershoot the sup, while 1/lower dominates it.
MProfile m_profile(const Domain& d, const std::vector<double>& r_grid,
                   int directions_per_point, std::uint64_t seed,
                   int points_per_radius = 1000);

// A closed-form analytic disc into the domain, for derivative decay checks.
struct AnalyticDisc {
    std::function<CVec(cplx)> map;
    std::string label;
};

struct DecayRow {
    double delta = 0.0;       // boundary distance of the disc center
    double deriv_norm = 0.0;  // |map'(0)|
    double bound = 0.0;       // 1/metric_lower at the center, direction map'(0)
    double margin = 0.0;      // bound / deriv_norm, >= 1 when the row passes
    bool ok = false;
};

struct DecayReport {
    std::vector<DecayRow> rows;
    bool all_ok = false;
    LineFit trend;  // log deriv_norm against log delta
};

// Checks |phi'(0)| <= 1/kappa_lower(phi(0)) for each disc in the sequence,
// with membership of each disc validated on sampled circles first
// (violation throws std::runtime_error: the input was not an analytic disc
// into the domain, so no conclusion about the metric follows).
DecayReport derivative_decay_check(const Domain& d,
                                   const std::vector<AnalyticDisc>& discs,
                                   double alpha_S = 4.0);

}  // namespace kobalab
