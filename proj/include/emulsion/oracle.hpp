#pragma once

#include "emulsion/model.hpp"

#include <cstdint>
#include <vector>

namespace emulsion {

// Blocks reachable by n-step paths with block size L started at corner (0,0).
BlockExtent oracle_extent(long n, int L);

// log of the partition sum over all n-step block-pair paths from (0,0); the last
// pair traversal may be incomplete. States below `prune` times the current maximum
// are dropped (0 keeps everything).
double exact_log_Z(long n, int L, const CopolymerSequence& omega, const EmulsionField& field,
                   const InteractionParams& params, double prune = 0.0);

struct OracleResult {
    long n = 0;
    int L = 0;
    std::vector<double> log_Z;    // per sample
    std::vector<double> per_sample; // log_Z / n
    double mean = 0.0;
    double stderr = 0.0;
    double sample_std = 0.0;
};

inline constexpr double kOraclePrune = 1e-60;

OracleResult quenched_f_mc(const InteractionParams& params, double p, long n, int L, int samples, std::uint64_t seed,
                           double prune = kOraclePrune);

} // namespace emulsion
