#pragma once

#include "emulsion/block_pairs.hpp"
#include "emulsion/model.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace emulsion {

struct BlockTimeMatrix {
    std::array<double, 4> a{2.0, 2.0, 2.0, 2.0}; // indexed by PairKind
};

struct VisitFrequencyMatrix {
    std::array<double, 4> rho{1.0, 0.0, 0.0, 0.0};
};

// Model of the set of pair-visit frequencies: rows sum to at most the percolation caps.
struct RModel {
    double rho_A = 1.0; // cap on rho_AA + rho_AB, i.e. rho*(p)
    double rho_B = 1.0; // cap on rho_BA + rho_BB, i.e. rho*(1-p)

    double x_min() const;
    double x_max() const;
};

// Caps from the extrapolated percolation density; values within snap_tol of 1 become 1.
RModel estimate_r_model(double p, long length, int samples, std::uint64_t seed, double snap_tol = 0.005);

struct ToleranceLedger {
    double kappa = 0.0;      // entropy-table extrapolation error near the optimizer
    double interface = 0.0;  // interface extrapolation error plus two standard errors, if used
    double optimizer = 0.0;  // final Dinkelbach residual per unit time

    double total() const { return kappa + interface + optimizer; }
};

struct FreeEnergyResult {
    InteractionParams params;
    double p = 0.5;
    double f = 0.0;
    BlockTimeMatrix a;
    VisitFrequencyMatrix rho;
    std::array<PairGain, 4> gains; // pair optima at the final lambda
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> lambda_history;
    ToleranceLedger tolerance;
    bool bracket_breach = false;

    const PairStrategy& strategy(PairKind k) const { return gains[static_cast<int>(k)].strategy; }
};

// Dinkelbach iteration for the fractional program over pair times and visit frequencies.
FreeEnergyResult evaluate_f(const InteractionParams& params, double p, const PairTables& tables, const RModel& caps,
                            double tol = 1e-10, int max_iterations = 100);

std::vector<FreeEnergyResult> f_surface(const std::vector<InteractionParams>& grid, double p,
                                        const PairTables& tables, const RModel& caps, double tol = 1e-10);

} // namespace emulsion
