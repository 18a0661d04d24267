#pragma once

// Test-only closed form for the diagonal crossing entropy kappa(a, 1). In the large-L
// limit the walls of the block do not constrain the column runs, so counting L columns,
// each a horizontal step plus a monotone vertical run, with a L steps and net rise L:
//   a kappa(a,1) = inf_{z,t} [ log g(z,t) - a log z - log t ],
//   g(z,t) = z (1 + z t / (1 - z t) + (z / t) / (1 - z / t)).

#include <cmath>
#include <functional>

namespace legendre {

inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return std::min(fc, fd);
}

inline double kappa_diag(double a) {
    auto F = [a](double u, double v) {
        const double z = std::exp(u), t = std::exp(v);
        const double g = z * (1.0 + z * t / (1.0 - z * t) + (z / t) / (1.0 - z / t));
        return std::log(g) - a * u - v;
    };
    auto outer = [&](double u) {
        const double eps = 1e-13;
        return golden_min([&](double v) { return F(u, v); }, u + eps, -u - eps);
    };
    return golden_min(outer, -30.0, -1e-10) / a;
}

} // namespace legendre
