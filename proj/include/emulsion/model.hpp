#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace emulsion {

enum class Species : std::uint8_t { A = 0, B = 1 };

inline Species flip(Species s) { return s == Species::A ? Species::B : Species::A; }
char to_char(Species s);

class InteractionParams {
public:
    InteractionParams() = default;
    InteractionParams(double alpha, double beta);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    bool in_cone() const;

    // Exponent of the Boltzmann weight of a monomer on an edge of the given region.
    double match_gain(Species monomer, Species region) const;

    bool operator==(const InteractionParams&) const = default;

private:
    double alpha_ = 0.0;
    double beta_ = 0.0;
};

class CopolymerSequence {
public:
    CopolymerSequence() = default;
    explicit CopolymerSequence(std::vector<Species> labels);

    std::size_t size() const { return labels_.size(); }
    Species operator[](std::size_t i) const { return labels_[i]; }
    const std::vector<Species>& labels() const { return labels_; }
    std::size_t count(Species s) const;
    CopolymerSequence flipped() const;

private:
    std::vector<Species> labels_;
};

// Rectangle of blocks [x0, x0+nx) x [y0, y0+ny) in block coordinates.
// Block (X, Y) covers the lattice square (XL, XL+L] x (YL, YL+L].
struct BlockExtent {
    long x0 = 0;
    long y0 = 0;
    long nx = 0;
    long ny = 0;

    bool contains(long x, long y) const { return x >= x0 && x < x0 + nx && y >= y0 && y < y0 + ny; }
    bool operator==(const BlockExtent&) const = default;
};

class EmulsionField {
public:
    EmulsionField(BlockExtent extent, int block_size, std::vector<Species> labels);
    static EmulsionField filled(BlockExtent extent, int block_size, Species s);

    const BlockExtent& extent() const { return extent_; }
    int block_size() const { return block_size_; }
    bool contains(long x, long y) const { return extent_.contains(x, y); }
    Species label(long x, long y) const;
    EmulsionField flipped() const;

private:
    BlockExtent extent_;
    int block_size_;
    std::vector<Species> labels_;
};

enum class Step : std::uint8_t { up, down, right };

struct Site {
    long x = 0;
    long y = 0;
    bool operator==(const Site&) const = default;
};

class DirectedPath {
public:
    DirectedPath(Site start, std::vector<Step> steps);

    const Site& start() const { return start_; }
    const std::vector<Step>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    std::vector<Site> sites() const;
    DirectedPath reflected() const;

private:
    Site start_;
    std::vector<Step> steps_;
};

struct BlockIndex {
    long x = 0;
    long y = 0;
    bool operator==(const BlockIndex&) const = default;
};

// Block carrying each edge of a path under the block-pair rule; throws
// std::invalid_argument if the path leaves its pair or starts off a block corner.
std::vector<BlockIndex> attribute_edges(const DirectedPath& path, int block_size);

// Non-throwing form of attribute_edges; every prefix of a valid path is valid.
bool is_valid_pair_prefix(const DirectedPath& path, int block_size);

double hamiltonian(const DirectedPath& path, const CopolymerSequence& omega,
                   const EmulsionField& field, const InteractionParams& params);

CopolymerSequence sample_copolymer(std::size_t n, std::uint64_t seed);
EmulsionField sample_emulsion(BlockExtent extent, double p, std::uint64_t seed, int block_size = 1);

struct SymmetryTransform {
    bool swap_labels = false;
    bool reflect = false;
    double affine_offset = 0.0;

    SymmetryTransform inverse() const { return {swap_labels, reflect, -affine_offset}; }
};

// A parameter point with the offset such that f(original) = offset + f(params; p).
struct ReducedPoint {
    InteractionParams params;
    double p = 0.5;
    double offset = 0.0;
    SymmetryTransform transform;
};

ReducedPoint apply_symmetry(bool swap_labels, bool reflect, double alpha, double beta, double p);
ReducedPoint apply_symmetry(const SymmetryTransform& t, double alpha, double beta, double p);
ReducedPoint cone_reduce(double alpha, double beta, double p);

} // namespace emulsion
