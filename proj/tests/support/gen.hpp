#pragma once

// Small deterministic generator for property tests.

#include "emulsion/model.hpp"

#include <cstdint>
#include <vector>

namespace gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * ((next() >> 11) * 0x1.0p-53); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool coin() { return next() >> 63; }

    std::vector<emulsion::Species> species(std::size_t n) {
        std::vector<emulsion::Species> v(n);
        for (auto& s : v) {
            s = coin() ? emulsion::Species::B : emulsion::Species::A;
        }
        return v;
    }
    emulsion::EmulsionField field(emulsion::BlockExtent e, int L) {
        return emulsion::EmulsionField(e, L, species(static_cast<std::size_t>(e.nx * e.ny)));
    }

private:
    std::uint64_t s_;
};

} // namespace gen
