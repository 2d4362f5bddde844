#pragma once

#include <string>
#include <vector>

#include "kobalab/common.hpp"
#include "kobalab/domains.hpp"
#include "kobalab/metric.hpp"

namespace kobalab {

// Integral convergence criteria driven by reciprocal-metric growth tables,
// plus the caltrop witness that rules out a logarithmic distance bound.
//
// No finite quadrature can certify an improper integral at 0, so verdicts
// here are explicitly model-based: the small-r behavior of the table is
// extrapolated as a power law, the extrapolation exponent carries an
// uncertainty band, and a verdict is only issued when the band clears the
// convergence threshold. INCONCLUSIVE is a first-class outcome.

// Strictly increasing C^1 growth bound, either C + alpha*log(t) or
// C0 + C1*t^q with alpha, C1, q > 0. Used as the distance-growth profile f
// in the visibility integral criterion.
class GrowthBound {
public:
    static GrowthBound logarithmic(double C, double alpha);
    static GrowthBound power(double C0, double C1, double q);

    double value(double t) const;       // f(t), t > 0
    double derivative(double t) const;  // f'(t), t > 0
    // f^{-1}(y); throws std::domain_error when y is not attained.
    double inverse(double y) const;

    bool logarithmic_family() const { return log_; }
    // alpha for the logarithmic family, q for the power family
    double exponent() const { return log_ ? c1_ : q_; }

private:
    GrowthBound() = default;
    bool log_ = true;
    double c0_ = 0.0;  // C or C0
    double c1_ = 1.0;  // alpha or C1
    double q_ = 1.0;
};

enum class IntegralVerdict { CONVERGENT, DIVERGENT, INCONCLUSIVE };
const char* to_string(IntegralVerdict v);

struct IntegralReport {
    IntegralVerdict verdict = IntegralVerdict::INCONCLUSIVE;
    double exponent = 0.0;       // extrapolated small-r exponent of M
    double exponent_band = 0.0;  // uncertainty half-width of the exponent
    double threshold = 0.0;      // convergence needs exponent > threshold
    double integral_value = 0.0;  // quadrature over the tabulated range
    double tail_estimate = 0.0;   // extrapolated piece below r_min; inf if divergent
    bool m_to_zero = true;        // numeric check of the M -> 0 hypothesis
    double fit_residual = 0.0;    // rms residual of the log-log fit
    int fit_rows = 0;
    std::string note;
};

// Convergence of integral of M_upper(r)/r near r = 0.
// Throws std::invalid_argument with fewer than 5 usable rows at r <= r0.
IntegralReport goldilocks_integral_test(const MProfile& table, double r0);

// Integrand M_r / r^2 * f'(1/r) of the visibility criterion.
double visibility_integrand(double M_r, double r, const GrowthBound& f);

// Convergence of the visibility integrand near r = 0. With a logarithmic f
// this coincides with the Goldilocks test up to the constant factor alpha.
IntegralReport general_visibility_integral_test(const MProfile& table,
                                                const GrowthBound& f, double r0);

struct ChangeOfVariableRow {
    double r_knot = 0.0;      // substitution boundary radius
    double b_prime = 0.0;     // corresponding lower t limit
    double t_integral = 0.0;  // direct quadrature in the t variable
    double r_integral = 0.0;  // substituted quadrature in the r variable
    double rel_dev = 0.0;
};

struct ChangeOfVariableReport {
    std::vector<ChangeOfVariableRow> rows;
    double worst_rel_dev = 0.0;
    bool agree = false;          // every row within 1 percent
    bool tail_vanishes = false;  // t-integrals strictly decrease as b' grows
};

// Quadrature cross-check of the substitution r = 1/f^{-1}(t/(2 lambda) - kappa/2):
// integral over [b', T] of M(r(t)) dt against 2 lambda times the visibility
// integrand integral over [r_min, r_knot]. Knots default to interior points
// of the table's log range; explicit knots must lie within the table.
ChangeOfVariableReport change_of_variable_check(const MProfile& table,
                                                const GrowthBound& f, double lambda,
                                                double kappa,
                                                const std::vector<double>& knots = {});

struct WitnessRow {
    double x = 0.0;      // axial depth of the probe point
    double lower = 0.0;  // certified distance lower bound from the anchor
    double delta = 0.0;  // boundary distance of the probe point
    double ratio = 0.0;  // lower / log(1/delta)
};

struct NonGoldilocksReport {
    std::vector<WitnessRow> rows;
    double growth = 0.0;  // last ratio over first ratio
    bool monotone = false;
    std::string verdict;  // FAIL-GOLDILOCKS or INCONCLUSIVE
};

// Along axis points at depths x_grid (strictly decreasing), compares the
// spike-channel distance lower bound against log(1/delta). A tenfold ratio
// growth certifies that no logarithmic bound C + alpha*log(1/delta) can
// dominate the distance from the anchor.
NonGoldilocksReport non_goldilocks_witness(const Caltrop& c,
                                           const std::vector<double>& x_grid,
                                           double b_const);

}  // namespace kobalab
