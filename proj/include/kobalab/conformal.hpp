#pragma once

#include <memory>

#include "kobalab/common.hpp"
#include "kobalab/domains.hpp"

namespace kobalab {

// Kobayashi (= Poincare, curvature -4 normalization) distance on the unit
// disc: k(0, r) = arctanh r. Throws if an argument is not strictly inside.
double poincare_distance(cplx z, cplx w);
// Infinitesimal form |v| / (1 - |z|^2).
double poincare_metric(cplx z, cplx v);

// Principal arcsin/arcsinh that stay accurate (and finite) for inputs whose
// square would overflow; the large-argument branches use log(2x) asymptotics
// accurate to O(1/|x|^2).
cplx asin_stable(cplx s);
cplx asinh_stable(cplx m);

// Exact disc chart of a cusp model domain.
//
// The chart composes six elementary pieces: the principal root z^{1/alpha}
// into the pinched sliver, inversion into the half-strip
// {Re u > a, |Im u| < h}, the affine rotation i(u - a), scaling by pi/(2h),
// sin onto the upper half-plane, and the Cayley map (s - i)/(s + i).
//
// Internally everything reduces to L(z) = -(pi/2h)(z^{-1/alpha} - a): with
// E = e^L the chart is (1 - 2E - E^2)/(1 + 2E - E^2), and distances are
// evaluated on a log scale in E so they stay accurate arbitrarily deep in
// the cusp, long after the disc coordinate itself has rounded onto the unit
// circle. forward() refuses to return such a rounded coordinate and throws
// saturation_error instead; distance() and metric() have no such limit.
class CuspMap {
public:
    // Non-owning view; the caller keeps the domain alive.
    explicit CuspMap(const CuspDomain& q) : q_(&q) {}
    CuspMap(double alpha, double a, double h)
        : owned_(std::make_shared<CuspDomain>(alpha, a, h)), q_(owned_.get()) {}

    const CuspDomain& domain() const { return *q_; }

    // L(z) = log of the half-disc coordinate; finite for every z in Q.
    cplx log_e(cplx z) const;

    // Disc coordinate of z. Throws saturation_error once |result| would
    // round to 1 (z of roughly 1e-3 scale and below for the default
    // parameters; depth-unlimited work goes through distance()/metric()).
    cplx forward(cplx z) const;

    // Same map evaluated literally stage by stage; used to cross-check the
    // closed form. Saturates like forward().
    cplx forward_stagewise(cplx z) const;

    // Inverse chart; |w| < 1 required. Inverts stage by stage with principal
    // branches and validates half-strip membership of the intermediate point.
    cplx inverse(cplx w) const;

    // d(forward)/dz.
    cplx derivative(cplx z) const;

    // Kobayashi distance on Q through the chart, stable at any depth.
    double distance(cplx z, cplx w) const;

    // Infinitesimal Kobayashi metric at z applied to the tangent scalar v.
    double metric(cplx z, cplx v) const;

    // Distance from the base point o to the real axis point x in (0, x_max);
    // closed form (1/2)|log sinh Y(x)| with Y = (pi/2h)(x^{-1/alpha} - a).
    double axis_distance(double x) const;

    // The real axis point at signed distance T from o along the axis
    // geodesic; T > 0 heads into the cusp, T < 0 toward the smooth end.
    double axis_point(double T) const;

private:
    void require_member(cplx z, const char* who) const;
    std::shared_ptr<const CuspDomain> owned_;
    const CuspDomain* q_;
};

// Contract-named free wrappers (the CLI and the test harness speak these).
inline cplx phi_forward(const CuspMap& chain, cplx z) { return chain.forward(z); }
inline cplx phi_inverse(const CuspMap& chain, cplx w) { return chain.inverse(w); }
inline double kobayashi_distance_Q(const CuspMap& chain, cplx z, cplx w) {
    return chain.distance(z, w);
}
inline double kobayashi_metric_Q(const CuspMap& chain, cplx z, cplx v) {
    return chain.metric(z, v);
}

// Fit of the boundary profile exponent near the cusp tip. Samples upper-wall
// boundary points, fits log|Im z| against log Re z, and reports the fitted
// exponent together with the two-sided comparability constants
// c1 <= |Im z| / (Re z)^p <= c2 observed over the samples.
struct CuspExponentReport {
    double p_hat = 0.0;       // fitted slope
    double p_expected = 0.0;  // (1 + alpha)/alpha
    double c1 = 0.0;
    double c2 = 0.0;
    double c2_cap = 0.0;      // M*h*alpha with M = 2
    bool c2_within_cap = false;
    LineFit fit;
};
CuspExponentReport cusp_exponent_check(const CuspMap& chain, int n_samples);

}  // namespace kobalab
