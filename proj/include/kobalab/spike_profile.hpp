#pragma once

#include <stdexcept>

#include "kobalab/common.hpp"

namespace kobalab {

// Cusp profile psi on [0, A]: psi(0) = 0, psi strictly increasing and convex,
// comparable to x^p (within the constant C). Two shapes:
//
//   PurePower:        psi(x) = x^p on [0, A], C = 1.
//   PowerCircleBlend: psi(x) = k*x^p on [0, A] followed by a circular arc
//                     joined C^1 at x = A; the arc closes the meridian back
//                     to psi = 0 at x_end. Used to build teardrop solids of
//                     revolution whose defining function has a uniform Levi
//                     floor. k is chosen so psi*psi'' + psi'^2 <= 1/2 on the
//                     whole power segment (equality exactly at x = A), and on
//                     the circular arc that expression is identically -1.
//
// The increasing segment [0, A] is the profile proper; psi/dpsi/ddpsi also
// evaluate on the closing arc (A, x_end] so boundary-distance code can see
// the full meridian.
class SpikeProfile {
public:
    enum class Shape { PurePower, PowerCircleBlend };

    // Defaults to x^1.25 on [0,1]; use the named factories for anything real.
    SpikeProfile() = default;

    static SpikeProfile pure_power(double p, double A = 1.0);
    // total_len is the x-extent of the power segment plus B of headroom used
    // to pick the arc: power part covers [0, total_len - B].
    static SpikeProfile power_circle_blend(double p, double total_len, double B);

    double psi(double x) const;
    double dpsi(double x) const;
    double ddpsi(double x) const;

    // Inverse of the increasing segment, y in [0, psi(A)]. Closed form for
    // power shapes; bisection fallback kept for future profile families.
    double psi_inv(double y) const;

    // psi*psi'' + psi'^2 at x. The Levi form of S^2 - psi(x)^2 in the axial
    // direction is (1 - this)/2, so values <= 1/2 give the 1/4 floor.
    double levi_excess(double x) const;

    double p() const { return p_; }
    double comparability() const { return C_; }  // (1/C) x^p <= psi <= C x^p on [0,A]
    double A() const { return A_; }
    double scale() const { return k_; }
    double x_end() const { return x_end_; }
    double arc_center() const { return circ_c_; }
    double arc_radius() const { return circ_r_; }
    Shape shape() const { return shape_; }

private:
    void check_range(double x, double hi) const;

    Shape shape_ = Shape::PurePower;
    double p_ = 1.25;
    double C_ = 1.0;
    double A_ = 1.0;
    double k_ = 1.0;      // psi = k x^p on the power segment
    double x_end_ = 1.0;  // meridian extent (== A_ for pure power)
    double circ_c_ = 0.0; // arc center on the axis
    double circ_r_ = 0.0; // arc radius
};

}  // namespace kobalab
