#pragma once

#include <cmath>
#include <functional>

namespace kobalab {

struct QuadResult {
    double value = 0.0;
    double err_est = 0.0;
    int panels = 0;
    bool converged = true;
};

// Adaptive Simpson with per-panel absolute tolerance and a hard cap on the
// number of panel splits. Non-recursive settings chosen so criteria below
// never silently spin on an improper endpoint: callers are expected to keep
// endpoints strictly inside the integrand's domain.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                              double b, double panel_tol = 1e-9,
                              int max_panels = 1 << 20);

}  // namespace kobalab
