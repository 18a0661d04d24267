#include "emulsion/numeric.hpp"

#include <Eigen/Dense>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emulsion {

Maximum maximize_unimodal(const std::function<double(double)>& f, double lo, double hi, int bits) {
    if (!(hi >= lo)) {
        throw std::invalid_argument("maximize_unimodal: empty bracket");
    }
    Maximum best{lo, f(lo)};
    if (hi == lo) {
        return best;
    }
    const double fhi = f(hi);
    if (fhi > best.value) {
        best = {hi, fhi};
    }
    auto neg = [&](double x) { return -f(x); };
    const auto r = boost::math::tools::brent_find_minima(neg, lo, hi, bits);
    if (-r.second > best.value) {
        best = {r.first, -r.second};
    }
    return best;
}

Maximum maximize_scan(const std::function<double(double)>& f, double lo, double hi, int points, int bits) {
    if (points < 3 || !(hi > lo)) {
        return maximize_unimodal(f, lo, hi, bits);
    }
    const double h = (hi - lo) / (points - 1);
    int best_i = 0;
    double best_v = f(lo);
    for (int i = 1; i < points; ++i) {
        const double v = f(lo + h * i);
        if (v > best_v) {
            best_v = v;
            best_i = i;
        }
    }
    const double a = lo + h * std::max(0, best_i - 1);
    const double b = lo + h * std::min(points - 1, best_i + 1);
    Maximum m = maximize_unimodal(f, a, b, bits);
    if (best_v > m.value) {
        m = {lo + h * best_i, best_v};
    }
    return m;
}

namespace {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

std::vector<double> spline_slopes(const std::vector<double>& v, double h) {
    const int n = static_cast<int>(v.size());
    std::vector<double> out(n, 0.0);
    if (n < 2) {
        return out;
    }
    if (n < 4) {
        for (int i = 0; i < n; ++i) {
            const int a = std::max(0, i - 1);
            const int b = std::min(n - 1, i + 1);
            out[i] = (v[b] - v[a]) / (h * (b - a));
        }
        return out;
    }
    Spline s(v.begin(), v.end(), 0.0, h);
    for (int i = 0; i < n; ++i) {
        out[i] = s.prime(std::min(h * i, h * (n - 1)));
    }
    return out;
}

void hermite_basis(double t, double h, double out[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    out[0] = 2 * t3 - 3 * t2 + 1;
    out[1] = (t3 - 2 * t2 + t) * h;
    out[2] = -2 * t3 + 3 * t2;
    out[3] = (t3 - t2) * h;
}

} // namespace

BicubicGrid::BicubicGrid(double x0, double hx, int nx, double y0, double hy, int ny, std::vector<double> values)
    : x0_(x0), hx_(hx), y0_(y0), hy_(hy), nx_(nx), ny_(ny), f_(std::move(values)) {
    if (nx < 2 || ny < 2 || f_.size() != static_cast<std::size_t>(nx) * ny) {
        throw std::invalid_argument("BicubicGrid: bad grid shape");
    }
    fx_.assign(f_.size(), 0.0);
    fy_.assign(f_.size(), 0.0);
    fxy_.assign(f_.size(), 0.0);
    auto at = [&](int i, int j) { return static_cast<std::size_t>(i) * ny_ + j; };
    std::vector<double> line;
    for (int i = 0; i < nx_; ++i) {
        line.assign(f_.begin() + at(i, 0), f_.begin() + at(i, 0) + ny_);
        const auto d = spline_slopes(line, hy_);
        for (int j = 0; j < ny_; ++j) {
            fy_[at(i, j)] = d[j];
        }
    }
    for (int j = 0; j < ny_; ++j) {
        line.resize(nx_);
        for (int i = 0; i < nx_; ++i) {
            line[i] = f_[at(i, j)];
        }
        auto d = spline_slopes(line, hx_);
        for (int i = 0; i < nx_; ++i) {
            fx_[at(i, j)] = d[i];
            line[i] = fy_[at(i, j)];
        }
        d = spline_slopes(line, hx_);
        for (int i = 0; i < nx_; ++i) {
            fxy_[at(i, j)] = d[i];
        }
    }
}

bool BicubicGrid::covers(double x, double y) const {
    const double eps = 1e-12;
    return x >= x_min() - eps && x <= x_max() + eps && y >= y_min() - eps && y <= y_max() + eps;
}

double BicubicGrid::operator()(double x, double y) const {
    const double sx = std::clamp((x - x0_) / hx_, 0.0, double(nx_ - 1));
    const double sy = std::clamp((y - y0_) / hy_, 0.0, double(ny_ - 1));
    const int i = std::min(static_cast<int>(sx), nx_ - 2);
    const int j = std::min(static_cast<int>(sy), ny_ - 2);
    double bx[4];
    double by[4];
    hermite_basis(sx - i, hx_, bx);
    hermite_basis(sy - j, hy_, by);
    double total = 0.0;
    for (int di = 0; di < 2; ++di) {
        for (int dj = 0; dj < 2; ++dj) {
            const std::size_t k = static_cast<std::size_t>(i + di) * ny_ + (j + dj);
            const double vx = bx[2 * di];
            const double dx = bx[2 * di + 1];
            const double vy = by[2 * dj];
            const double dy = by[2 * dj + 1];
            total += f_[k] * vx * vy + fx_[k] * dx * vy + fy_[k] * vx * dy + fxy_[k] * dx * dy;
        }
    }
    return total;
}

UniformSpline::UniformSpline(double x0, double h, std::vector<double> values)
    : x0_(x0), h_(h), n_(static_cast<int>(values.size())), f_(std::move(values)) {
    if (n_ < 2) {
        throw std::invalid_argument("UniformSpline: need at least two nodes");
    }
    fp_ = spline_slopes(f_, h_);
}

double UniformSpline::operator()(double x) const {
    const double s = std::clamp((x - x0_) / h_, 0.0, double(n_ - 1));
    const int i = std::min(static_cast<int>(s), n_ - 2);
    double b[4];
    hermite_basis(s - i, h_, b);
    return f_[i] * b[0] + fp_[i] * b[1] + f_[i + 1] * b[2] + fp_[i + 1] * b[3];
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_line: need at least two points");
    }
    Eigen::MatrixXd a(x.size(), 2);
    Eigen::VectorXd b(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        a(i, 0) = x[i];
        a(i, 1) = 1.0;
        b(i) = y[i];
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
    return {c(0), c(1)};
}

namespace {

double extrapolate_pair(double l1, double v1, double l2, double v2) {
    // v = v_inf + d / L
    return (l2 * v2 - l1 * v1) / (l2 - l1);
}

double extrapolate_triple(const double* l, const double* v) {
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = std::log(l[i]) / l[i];
        a(i, 2) = 1.0 / l[i];
        b(i) = v[i];
    }
    return a.fullPivLu().solve(b)(0);
}

} // namespace

Extrapolation extrapolate_sizes(const std::vector<double>& sizes, const std::vector<double>& values) {
    const std::size_t n = sizes.size();
    if (n != values.size() || n < 2) {
        throw std::invalid_argument("extrapolation needs at least two sizes");
    }
    if (n == 2) {
        const double e = extrapolate_pair(sizes[0], values[0], sizes[1], values[1]);
        return {e, std::abs(e - values[1])};
    }
    const double last = extrapolate_triple(&sizes[n - 3], &values[n - 3]);
    const double prev = n >= 4 ? extrapolate_triple(&sizes[n - 4], &values[n - 4])
                               : extrapolate_pair(sizes[n - 2], values[n - 2], sizes[n - 1], values[n - 1]);
    return {last, std::abs(last - prev)};
}

} // namespace emulsion
