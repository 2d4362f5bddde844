#pragma once

#include <random>

#include "kobalab/common.hpp"

namespace kobalab {

// Seeded generator wrapper. mt19937_64 output is specified by the standard,
// and the uniform mapping below is fixed arithmetic, so identical seeds give
// identical streams on every platform/compiler. Do not swap in
// std::uniform_real_distribution here: its output is implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform on the unit circle.
    cplx unit_circle() {
        double t = uniform(0.0, 2.0 * M_PI);
        return {std::cos(t), std::sin(t)};
    }

    // Uniform w.r.t. area on the unit disc.
    cplx unit_disc() {
        double r = std::sqrt(uniform());
        return r * unit_circle();
    }

    // Standard normal via Box-Muller (both values used, deterministic order).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double m = std::sqrt(-2.0 * std::log(u1));
        spare_ = m * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return m * std::cos(2.0 * M_PI * u2);
    }

    // Uniform direction on the real unit sphere S^{d-1}.
    std::vector<double> unit_sphere(int d) {
        std::vector<double> v(d);
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (int i = 0; i < d; ++i) {
                v[i] = normal();
                n2 += v[i] * v[i];
            }
        } while (n2 < 1e-24);
        double inv = 1.0 / std::sqrt(n2);
        for (auto& t : v) t *= inv;
        return v;
    }

    // Uniform complex direction (unit vector in C^n).
    CVec unit_cvector(int n) {
        auto raw = unit_sphere(2 * n);
        CVec v(n);
        for (int i = 0; i < n; ++i) v[i] = cplx(raw[2 * i], raw[2 * i + 1]);
        return v;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace kobalab
