#pragma once

#include "emulsion/model.hpp"

#include <cstdint>
#include <vector>

namespace emulsion {

// Blocks needed by coarse paths of the given length started at corner (0,0).
BlockExtent percolation_extent(long length);

// Maximum number of A-blocks crossed by coarse paths of each requested length (max-plus
// DP). From corner (X,Y) an up-step crosses block (X,Y), a down-step block (X,Y-1).
std::vector<long> max_A_counts(const EmulsionField& field, const std::vector<long>& lengths);

double max_A_frequency(const EmulsionField& field, long length);

struct PercolationEstimate {
    double p = 0.0;
    double rho_star = 0.0;       // mean at the full length
    double stderr = 0.0;
    long length = 0;
    int samples = 0;
    std::uint64_t seed = 0;
    double rho_half = 0.0;       // mean at half the length
    double rho_extrapolated = 0.0; // 2 rho(N) - rho(N/2)
    double stderr_extrapolated = 0.0;
};

PercolationEstimate rho_star(double p, long length, int samples, std::uint64_t seed);

struct CriticalDensity {
    double p_c = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int evaluations = 0;
};

// Smallest p whose extrapolated rho* reaches 1 - tol, by bisection.
CriticalDensity estimate_p_c(long length, int samples, double tol, std::uint64_t seed, double p_tol = 1e-3);

} // namespace emulsion
