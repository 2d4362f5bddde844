#pragma once

#include <complex>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kobalab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Thrown when a conformal map output would round to the closed unit circle
// (input too deep in the cusp for double precision).
struct saturation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Interval [lower, upper] certified by two independent estimation methods.
struct BoundInterval {
    double lower = 0.0;
    double upper = 0.0;
    std::string lower_method;
    std::string upper_method;
};

inline double sq(double x) { return x * x; }

inline double norm2(const CVec& v) {
    double s = 0.0;
    for (const auto& c : v) s += std::norm(c);
    return s;
}

inline double norm(const CVec& v) { return std::sqrt(norm2(v)); }

// Hermitian inner product <a,b> = sum a_i * conj(b_i)
inline cplx hdot(const CVec& a, const CVec& b) {
    cplx s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

inline double dist(const CVec& a, const CVec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

inline CVec axpy(const CVec& a, double t, const CVec& d) {
    CVec r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] += t * d[i];
    return r;
}

// Ordinary least squares y = slope*x + intercept, with the standard error of
// the slope. Used for log-log exponent fits everywhere; callers are expected
// to pass already-transformed coordinates.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r2 = 0.0;
    size_t n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// log(sinh(y)) without overflow for large y.
inline double log_sinh(double y) {
    if (y > 20.0) return y - std::log(2.0) + std::log1p(-std::exp(-2.0 * y));
    return std::log(std::sinh(y));
}

// 64-bit FNV-1a, used for config fingerprints in run manifests.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace kobalab
