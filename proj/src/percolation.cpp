#include "emulsion/percolation.hpp"

#include "emulsion/random.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace emulsion {

BlockExtent percolation_extent(long length) { return {0, -length, length, 2 * length}; }

std::vector<long> max_A_counts(const EmulsionField& field, const std::vector<long>& lengths) {
    if (lengths.empty() || !std::is_sorted(lengths.begin(), lengths.end()) || lengths.front() < 1) {
        throw std::invalid_argument("percolation lengths must be positive and sorted");
    }
    const long n = lengths.back();
    const BlockExtent need = percolation_extent(n);
    const BlockExtent& have = field.extent();
    if (have.x0 > need.x0 || have.y0 > need.y0 || have.x0 + have.nx < need.x0 + need.nx ||
        have.y0 + have.ny < need.y0 + need.ny) {
        throw std::out_of_range("emulsion extent too small for coarse paths of length " + std::to_string(n));
    }
    constexpr long kNone = std::numeric_limits<long>::min() / 2;
    // best[Y + n] = max A-count of a path at corner (X, Y)
    std::vector<long> best(2 * n + 1, kNone), next(2 * n + 1, kNone);
    best[n] = 0;
    std::vector<long> out;
    std::size_t r = 0;
    for (long x = 0; x < n; ++x) {
        std::fill(next.begin(), next.end(), kNone);
        for (long y = -x; y <= x; y += 2) {
            const long v = best[y + n];
            const long up = v + (field.label(x, y) == Species::A);
            const long dn = v + (field.label(x, y - 1) == Species::A);
            next[y + 1 + n] = std::max(next[y + 1 + n], up);
            next[y - 1 + n] = std::max(next[y - 1 + n], dn);
        }
        std::swap(best, next);
        while (r < lengths.size() && lengths[r] == x + 1) {
            out.push_back(*std::max_element(best.begin(), best.end()));
            ++r;
        }
    }
    return out;
}

double max_A_frequency(const EmulsionField& field, long length) {
    return static_cast<double>(max_A_counts(field, {length})[0]) / static_cast<double>(length);
}

namespace {

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= n;
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

} // namespace

PercolationEstimate rho_star(double p, long length, int samples, std::uint64_t seed) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("percolation density p must lie in (0,1)");
    }
    if (length < 2 || samples < 1) {
        throw std::invalid_argument("percolation needs length >= 2 and at least one sample");
    }
    const long half = length / 2;
    std::vector<double> full(samples), part(samples), ext(samples);
    tbb::parallel_for(0, samples, [&](int k) {
        const std::uint64_t s = derive_key(seed, Stream::percolation, static_cast<std::uint64_t>(k));
        const EmulsionField field = sample_emulsion(percolation_extent(length), p, s);
        const auto c = max_A_counts(field, {half, length});
        part[k] = static_cast<double>(c[0]) / static_cast<double>(half);
        full[k] = static_cast<double>(c[1]) / static_cast<double>(length);
        ext[k] = (static_cast<double>(length) * full[k] - static_cast<double>(half) * part[k]) /
                 static_cast<double>(length - half);
    });
    PercolationEstimate e;
    e.p = p;
    e.length = length;
    e.samples = samples;
    e.seed = seed;
    std::tie(e.rho_star, e.stderr) = mean_stderr(full);
    e.rho_half = mean_stderr(part).first;
    std::tie(e.rho_extrapolated, e.stderr_extrapolated) = mean_stderr(ext);
    return e;
}

CriticalDensity estimate_p_c(long length, int samples, double tol, std::uint64_t seed, double p_tol) {
    if (!(tol > 0.0 && tol < 1.0)) {
        throw std::invalid_argument("p_c tolerance must lie in (0,1)");
    }
    CriticalDensity out;
    auto reaches = [&](double p) {
        ++out.evaluations;
        return rho_star(p, length, samples, seed).rho_extrapolated >= 1.0 - tol;
    };
    double lo = 0.05;
    double hi = 0.95;
    if (reaches(lo) || !reaches(hi)) {
        throw std::runtime_error("p_c bisection is not bracketed by [0.05, 0.95] at tol " + std::to_string(tol));
    }
    while (hi - lo > p_tol) {
        const double mid = 0.5 * (lo + hi);
        if (reaches(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.p_c = 0.5 * (lo + hi);
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    return out;
}

} // namespace emulsion
