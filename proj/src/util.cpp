#include <cmath>
#include <stdexcept>

#include "kobalab/common.hpp"
#include "kobalab/quadrature.hpp"

namespace kobalab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matched samples");
    const size_t n = x.size();
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    f.stderr_slope = n > 2 ? std::sqrt(ss_res / ((n - 2) * sxx)) : 0.0;
    return f;
}

namespace {

struct SimpsonCtx {
    const std::function<double(double)>* f;
    double tol;
    int budget;
    bool converged;
};

double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(SimpsonCtx& ctx, double a, double b, double fa, double fm, double fb,
             double whole, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = (*ctx.f)(lm), frm = (*ctx.f)(rm);
    double left = simpson(fa, flm, fm, a, m);
    double right = simpson(fm, frm, fb, m, b);
    ctx.budget -= 2;
    double err = left + right - whole;
    if (depth > 60 || ctx.budget <= 0) {
        if (std::abs(err) > ctx.tol) ctx.converged = false;
        return left + right + err / 15.0;
    }
    if (std::abs(err) <= 15.0 * ctx.tol)
        return left + right + err / 15.0;
    return adapt(ctx, a, m, fa, flm, fm, left, depth + 1) +
           adapt(ctx, m, b, fm, frm, fb, right, depth + 1);
}

}  // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double panel_tol, int max_panels) {
    QuadResult r;
    if (a == b) return r;
    SimpsonCtx ctx{&f, panel_tol, max_panels, true};
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = simpson(fa, fm, fb, a, b);
    r.value = adapt(ctx, a, b, fa, fm, fb, whole, 0);
    r.panels = max_panels - ctx.budget;
    r.converged = ctx.converged;
    r.err_est = panel_tol * std::max(1, r.panels / 2);
    return r;
}

}  // namespace kobalab
