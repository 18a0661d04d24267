#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace emulsion {

struct Maximum {
    double x = 0.0;
    double value = 0.0;
};

// Maximizes a unimodal function on [lo, hi] (Brent's golden-section search with
// parabolic steps). Endpoints are compared explicitly so boundary optima are exact.
Maximum maximize_unimodal(const std::function<double(double)>& f, double lo, double hi, int bits = 40);

// Grid scan over [lo, hi] with `points` nodes, then local refinement around the
// best node. Tolerates mild non-unimodality.
Maximum maximize_scan(const std::function<double(double)>& f, double lo, double hi, int points, int bits = 40);

// Tensor-product cubic spline on a uniform 2D grid, evaluated as
// bicubic Hermite patches with node derivatives taken from 1D cubic B-splines.
class BicubicGrid {
public:
    BicubicGrid() = default;
    BicubicGrid(double x0, double hx, int nx, double y0, double hy, int ny, std::vector<double> values);

    double operator()(double x, double y) const;
    bool covers(double x, double y) const;

    double x_min() const { return x0_; }
    double x_max() const { return x0_ + hx_ * (nx_ - 1); }
    double y_min() const { return y0_; }
    double y_max() const { return y0_ + hy_ * (ny_ - 1); }

private:
    double x0_ = 0, hx_ = 1, y0_ = 0, hy_ = 1;
    int nx_ = 0, ny_ = 0;
    std::vector<double> f_, fx_, fy_, fxy_;
};

// Cubic spline on a uniform 1D grid.
class UniformSpline {
public:
    UniformSpline() = default;
    UniformSpline(double x0, double h, std::vector<double> values);

    double operator()(double x) const;
    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * (n_ - 1); }

private:
    double x0_ = 0, h_ = 1;
    int n_ = 0;
    std::vector<double> f_, fp_;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Extrapolates finite-size values v(L) to L -> infinity. With three or more sizes it
// fits v = v_inf + (c log L + d) / L on consecutive triples, otherwise v = v_inf + d / L.
// The error is the spread of the last two extrapolants.
struct Extrapolation {
    double value = 0.0;
    double error = 0.0;
};

Extrapolation extrapolate_sizes(const std::vector<double>& sizes, const std::vector<double>& values);

} // namespace emulsion
