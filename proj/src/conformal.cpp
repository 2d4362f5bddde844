#include "kobalab/conformal.hpp"

#include <cmath>

namespace kobalab {

namespace {
const cplx kI(0.0, 1.0);
}

double poincare_distance(cplx z, cplx w) {
    if (std::abs(z) >= 1.0 || std::abs(w) >= 1.0)
        throw std::domain_error("poincare_distance: arguments must be inside the disc");
    double rho = std::abs(z - w) / std::abs(1.0 - z * std::conj(w));
    if (rho >= 1.0)
        throw std::domain_error("poincare_distance: pseudo-hyperbolic ratio rounded to 1");
    return std::atanh(rho);
}

double poincare_metric(cplx z, cplx v) {
    if (std::abs(z) >= 1.0)
        throw std::domain_error("poincare_metric: point must be inside the disc");
    return std::abs(v) / (1.0 - std::norm(z));
}

cplx asin_stable(cplx s) {
    if (std::abs(s) > 1e12) {
        // asin(s) = -i log(is + sqrt(1-s^2)); for |s| large the bracket is
        // ~ 2is (upper half-plane) so asin(s) ~ pi/2 - arg s + i log(2|s|).
        // Relative error O(1/|s|^2), far below double precision here.
        if (s.imag() >= 0.0)
            return cplx(M_PI_2 - std::arg(s), std::log(2.0 * std::abs(s)));
        // conjugate symmetry asin(conj s) = conj(asin s)
        return cplx(M_PI_2 + std::arg(s), -std::log(2.0 * std::abs(s)));
    }
    return std::asin(s);
}

cplx asinh_stable(cplx m) {
    if (std::abs(m) > 1e12) {
        // asinh(m) = log(2m) + O(1/m^2) on the principal branch (Re m >= 0);
        // for Re m < 0 use the odd symmetry.
        if (m.real() >= 0.0) return std::log(2.0 * std::abs(m)) + kI * std::arg(m);
        return -(std::log(2.0 * std::abs(m)) + kI * std::arg(-m));
    }
    return std::asinh(m);
}

void CuspMap::require_member(cplx z, const char* who) const {
    if (!q_->contains(z))
        throw std::domain_error(std::string(who) + ": point is not in the model domain");
}

cplx CuspMap::log_e(cplx z) const {
    require_member(z, "cusp chart");
    cplx u = q_->strip_image(z);
    return -(M_PI / (2.0 * q_->h())) * (u - q_->a());
}

cplx CuspMap::forward(cplx z) const {
    cplx L = log_e(z);
    cplx E = std::exp(L);
    cplx E2 = E * E;
    cplx w = (1.0 - 2.0 * E - E2) / (1.0 + 2.0 * E - E2);
    if (!(std::abs(w) < 1.0))
        throw saturation_error(
            "cusp chart: disc coordinate rounded onto the unit circle "
            "(point too deep in the cusp for a direct chart value)");
    return w;
}

cplx CuspMap::forward_stagewise(cplx z) const {
    require_member(z, "cusp chart");
    cplx w1 = std::exp(std::log(z) / q_->alpha());   // principal root into the sliver
    cplx u = 1.0 / w1;                              // inversion into the half-strip
    cplx t1 = kI * (u - q_->a());                    // rotate to a vertical strip
    cplx t2 = M_PI * t1 / (2.0 * q_->h());           // normalize the width
    cplx s = std::sin(t2);                          // half-strip onto the upper half-plane
    cplx w = (s - kI) / (s + kI);                   // Cayley onto the disc
    if (!(std::abs(w) < 1.0))
        throw saturation_error("cusp chart: stagewise disc coordinate saturated");
    return w;
}

cplx CuspMap::inverse(cplx w) const {
    if (!(std::abs(w) < 1.0))
        throw std::domain_error("cusp chart inverse: argument must be inside the disc");
    cplx s = kI * (1.0 + w) / (1.0 - w);           // Cayley inverse, upper half-plane
    cplx t2 = asin_stable(s);                      // principal branch: |Re| < pi/2, Im > 0
    cplx u = q_->a() - kI * (2.0 * q_->h() / M_PI) * t2;
    // The principal arcsin lands in the correct vertical strip exactly when
    // u is in the half-strip; a gross violation means the branch bookkeeping
    // broke down, not a rounding smudge.
    if (u.real() < q_->a() - 1e-9 * std::max(1.0, std::abs(u)) ||
        std::abs(u.imag()) > q_->h() * (1.0 + 1e-9) + 1e-12)
        throw std::domain_error("cusp chart inverse: branch validation failed");
    return std::exp(-q_->alpha() * std::log(u));
}

cplx CuspMap::derivative(cplx z) const {
    cplx L = log_e(z);
    cplx E = std::exp(L);
    cplx dL = (M_PI / (2.0 * q_->h() * q_->alpha())) *
              std::exp((-1.0 / q_->alpha() - 1.0) * std::log(z));
    cplx D = 1.0 + 2.0 * E - E * E;
    // d/dz of (1-2E-E^2)/(1+2E-E^2) via dPhi/dE = -4(1+E^2)/D^2, dE/dz = E dL.
    return -4.0 * (1.0 + E * E) * E * dL / (D * D);
}

double CuspMap::distance(cplx z, cplx w) const {
    if (z == w) {
        require_member(z, "cusp distance");
        return 0.0;
    }
    cplx Lz = log_e(z), Lw = log_e(w);
    // Work with e = E_z, f = E_w scaled by e^{-c} so at least one factor has
    // modulus 1. The pseudo-hyperbolic ratio on the half-plane coordinate
    // M = (1-E^2)/(2E) is |M_z - M_w| / |M_z + conj(M_w)|, whose numerator
    // and denominator share the factorizations
    //   M_z - M_w        = (f - e)(1 + ef) / (2ef)
    //   M_z + conj(M_w)  = (e + conj(f))(1 - e conj(f)) / (2 e conj(f)),
    // and arctanh comes out as (1/2) log((Q+P)/(Q-P)) with
    //   Q - P = (Q^2 - P^2)/(Q+P),
    //   Q^2 - P^2 = 4 Re(e) Re(f) (1-|e|^2)(1-|f|^2).
    // Everything below is that identity on a log scale.
    double c = std::max(Lz.real(), Lw.real());
    cplx ep = std::exp(Lz - c), fp = std::exp(Lw - c);
    cplx e = std::exp(Lz), f = std::exp(Lw);
    double A = std::abs(fp - ep) * std::abs(1.0 + e * f) +
               std::abs(fp + std::conj(ep)) * std::abs(1.0 - std::conj(e) * f);
    // grouped pairwise so the value is exactly symmetric in (z, w)
    double s_re = Lz.real() + Lw.real();
    double s_cos = std::log(std::cos(Lz.imag())) + std::log(std::cos(Lw.imag()));
    double s_exp = std::log(-std::expm1(2.0 * Lz.real())) +
                   std::log(-std::expm1(2.0 * Lw.real()));
    double sub = 0.5 * (std::log(4.0) + (s_re + (s_cos + s_exp)));
    double k = c + std::log(A) - sub;
    return k > 0.0 ? k : 0.0;
}

double CuspMap::metric(cplx z, cplx v) const {
    cplx L = log_e(z);
    cplx E = std::exp(L);
    double dL = (M_PI / (2.0 * q_->h() * q_->alpha())) *
                std::exp((-1.0 / q_->alpha() - 1.0) * std::log(std::abs(z)));
    // |Phi'| / (1 - |Phi|^2) collapses to this after the same factorization
    // as in distance(); cos(Im L) = Re(E)/|E| and -expm1(2 Re L) = 1-|E|^2.
    return std::abs(1.0 + E * E) * dL * std::abs(v) /
           (2.0 * std::cos(L.imag()) * (-std::expm1(2.0 * L.real())));
}

double CuspMap::axis_distance(double x) const {
    if (!(x > 0.0 && x < q_->x_max()))
        throw std::domain_error("axis distance: x must be on the real trace (0, x_max)");
    double Y = (M_PI / (2.0 * q_->h())) * (std::pow(x, -1.0 / q_->alpha()) - q_->a());
    return 0.5 * std::abs(log_sinh(Y));
}

double CuspMap::axis_point(double T) const {
    // Solve (1/2) log sinh Y = T for Y, then map back to the axis.
    double t2 = 2.0 * T;
    // asinh(e^t2) = t2 + log 2 + O(e^{-2 t2}); the tail is below one ulp
    // once t2 > 36, and the direct form would overflow past t2 ~ 709.
    double Y = t2 > 36.0 ? t2 + std::log(2.0) : std::asinh(std::exp(t2));
    return std::pow((2.0 * q_->h() / M_PI) * Y + q_->a(), -q_->alpha());
}

CuspExponentReport cusp_exponent_check(const CuspMap& chain, int n_samples) {
    if (n_samples < 10)
        throw std::invalid_argument("cusp_exponent_check: need at least 10 samples");
    const CuspDomain& q = chain.domain();
    CuspExponentReport rep;
    rep.p_expected = (1.0 + q.alpha()) / q.alpha();
    rep.c2_cap = 2.0 * q.h() * q.alpha();

    // Upper-wall boundary points z = (x - ih)^{-alpha} for large x sit near
    // the tip; the wall parameter range keeps the quadratic correction terms
    // h^2/x^2 well below the fit tolerance.
    double x_lo = 200.0 * (q.a() + q.h());
    double x_hi = 2e6 * (q.a() + q.h());
    std::vector<double> lx, ly;
    rep.c1 = 1e300;
    rep.c2 = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        double x = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (n_samples - 1));
        cplx zb = q.wall_point(x, +1);
        if (zb.real() <= 0.0 || std::abs(zb.imag()) <= 0.0) continue;  // tip-degenerate
        lx.push_back(std::log(zb.real()));
        ly.push_back(std::log(std::abs(zb.imag())));
        double ratio = std::abs(zb.imag()) / std::pow(zb.real(), rep.p_expected);
        rep.c1 = std::min(rep.c1, ratio);
        rep.c2 = std::max(rep.c2, ratio);
    }
    if (lx.size() < 3)
        throw std::runtime_error("cusp_exponent_check: degenerate boundary sample");
    rep.fit = fit_line(lx, ly);
    rep.p_hat = rep.fit.slope;
    rep.c2_within_cap = rep.c2 <= rep.c2_cap;
    return rep;
}

}  // namespace kobalab
