#pragma once

#include <cstdint>

namespace emulsion {

// Stream identifiers for counter-based seed derivation.
enum class Stream : std::uint64_t {
    copolymer = 1,
    emulsion = 2,
    interface = 3,
    percolation = 4,
    oracle = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// Independent key for (seed, stream, index); the same triple always gives the same key.
std::uint64_t derive_key(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

// Maps a key to a uniform double in [0, 1) using the top 53 bits.
double unit_uniform(std::uint64_t key);

// Sequential draws from a derived key: draw i is a pure function of (key, i).
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key) : key_(key) {}

    std::uint64_t at(std::uint64_t i) const;
    std::uint64_t next() { return at(counter_++); }
    double uniform() { return unit_uniform(next()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace emulsion
