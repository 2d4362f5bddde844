#include "kobalab/spike_profile.hpp"

#include <cmath>

namespace kobalab {

SpikeProfile SpikeProfile::pure_power(double p, double A) {
    if (p <= 1.0) throw std::invalid_argument("spike profile: p must be > 1");
    if (A <= 0.0) throw std::invalid_argument("spike profile: A must be > 0");
    SpikeProfile s;
    s.shape_ = Shape::PurePower;
    s.p_ = p;
    s.C_ = 1.0;
    s.A_ = A;
    s.k_ = 1.0;
    s.x_end_ = A;
    return s;
}

SpikeProfile SpikeProfile::power_circle_blend(double p, double total_len, double B) {
    if (p <= 1.0 || p >= 1.5)
        throw std::invalid_argument("blend profile: need 1 < p < 3/2");
    if (!(B > 0.0 && B < total_len))
        throw std::invalid_argument("blend profile: need 0 < B < total length");
    SpikeProfile s;
    s.shape_ = Shape::PowerCircleBlend;
    s.p_ = p;
    s.A_ = total_len - B;

    // psi = k x^p with k^2 * p(2p-1) x^{2(p-1)} = 1/2 at the blend point, so
    // the axial Levi term keeps a 1/4 floor on the whole power segment.
    double cs = 0.5 / (p * (2.0 * p - 1.0) * std::pow(s.A_, 2.0 * (p - 1.0)));
    if (cs > 1.0) cs = 1.0;
    s.k_ = std::sqrt(cs);
    s.C_ = 1.0 / s.k_;

    // C^1 circular cap: circle through (A, psi(A)) with matching slope,
    // center on the axis.
    double v = s.k_ * std::pow(s.A_, p);
    double slope = s.k_ * p * std::pow(s.A_, p - 1.0);
    s.circ_c_ = s.A_ + slope * v;
    s.circ_r_ = v * std::sqrt(1.0 + slope * slope);
    s.x_end_ = s.circ_c_ + s.circ_r_;
    return s;
}

void SpikeProfile::check_range(double x, double hi) const {
    if (!(x >= 0.0 && x <= hi))
        throw std::domain_error("spike profile: x outside [0, " + std::to_string(hi) + "]");
}

double SpikeProfile::psi(double x) const {
    check_range(x, x_end_);
    if (x <= A_ || shape_ == Shape::PurePower) return k_ * std::pow(x, p_);
    double d = x - circ_c_;
    double t = circ_r_ * circ_r_ - d * d;
    return t > 0.0 ? std::sqrt(t) : 0.0;
}

double SpikeProfile::dpsi(double x) const {
    check_range(x, x_end_);
    if (x <= A_ || shape_ == Shape::PurePower)
        return k_ * p_ * std::pow(x, p_ - 1.0);
    double d = x - circ_c_;
    double y = psi(x);
    if (y <= 0.0) throw std::domain_error("spike profile: derivative at meridian endpoint");
    return -d / y;
}

double SpikeProfile::ddpsi(double x) const {
    check_range(x, x_end_);
    if (x <= A_ || shape_ == Shape::PurePower)
        return k_ * p_ * (p_ - 1.0) * std::pow(x, p_ - 2.0);
    double y = psi(x);
    if (y <= 0.0) throw std::domain_error("spike profile: curvature at meridian endpoint");
    return -circ_r_ * circ_r_ / (y * y * y);
}

double SpikeProfile::psi_inv(double y) const {
    double top = psi(A_);
    if (!(y >= 0.0 && y <= top))
        throw std::domain_error("spike profile: psi_inv argument outside [0, psi(A)]");
    if (y == 0.0) return 0.0;
    // Power segment inverts in closed form; keep a bisection cross-check path
    // for any future non-power family.
    double x = std::pow(y / k_, 1.0 / p_);
    if (x <= A_) return x;
    return A_;
}

double SpikeProfile::levi_excess(double x) const {
    check_range(x, x_end_);
    if (x <= A_ || shape_ == Shape::PurePower) {
        // psi ddpsi + dpsi^2 = k^2 p (2p-1) x^{2(p-1)}
        return k_ * k_ * p_ * (2.0 * p_ - 1.0) * std::pow(x, 2.0 * (p_ - 1.0));
    }
    return -1.0;  // circle identity: y y'' + y'^2 = -1
}

}  // namespace kobalab
