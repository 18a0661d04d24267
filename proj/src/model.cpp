#include "emulsion/model.hpp"

#include "emulsion/random.hpp"

#include <cmath>
#include <stdexcept>

namespace emulsion {

char to_char(Species s) { return s == Species::A ? 'A' : 'B'; }

InteractionParams::InteractionParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument("interaction parameters must be finite");
    }
}

bool InteractionParams::in_cone() const { return alpha_ >= std::abs(beta_); }

double InteractionParams::match_gain(Species monomer, Species region) const {
    if (monomer != region) {
        return 0.0;
    }
    return monomer == Species::A ? alpha_ : beta_;
}

CopolymerSequence::CopolymerSequence(std::vector<Species> labels) : labels_(std::move(labels)) {
    for (Species s : labels_) {
        if (s != Species::A && s != Species::B) {
            throw std::invalid_argument("copolymer label outside {A,B}");
        }
    }
}

std::size_t CopolymerSequence::count(Species s) const {
    std::size_t c = 0;
    for (Species x : labels_) {
        c += (x == s);
    }
    return c;
}

CopolymerSequence CopolymerSequence::flipped() const {
    std::vector<Species> out(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        out[i] = flip(labels_[i]);
    }
    return CopolymerSequence(std::move(out));
}

EmulsionField::EmulsionField(BlockExtent extent, int block_size, std::vector<Species> labels)
    : extent_(extent), block_size_(block_size), labels_(std::move(labels)) {
    if (block_size < 1) {
        throw std::invalid_argument("block size must be positive");
    }
    if (extent.nx < 1 || extent.ny < 1) {
        throw std::invalid_argument("emulsion extent must be non-empty");
    }
    if (labels_.size() != static_cast<std::size_t>(extent.nx * extent.ny)) {
        throw std::invalid_argument("label count does not match extent");
    }
}

EmulsionField EmulsionField::filled(BlockExtent extent, int block_size, Species s) {
    return EmulsionField(extent, block_size, std::vector<Species>(extent.nx * extent.ny, s));
}

Species EmulsionField::label(long x, long y) const {
    if (!extent_.contains(x, y)) {
        throw std::out_of_range("block (" + std::to_string(x) + "," + std::to_string(y) +
                                ") outside emulsion extent");
    }
    return labels_[(y - extent_.y0) * extent_.nx + (x - extent_.x0)];
}

EmulsionField EmulsionField::flipped() const {
    std::vector<Species> out(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        out[i] = flip(labels_[i]);
    }
    return EmulsionField(extent_, block_size_, std::move(out));
}

DirectedPath::DirectedPath(Site start, std::vector<Step> steps) : start_(start), steps_(std::move(steps)) {
    for (std::size_t i = 1; i < steps_.size(); ++i) {
        Step a = steps_[i - 1];
        Step b = steps_[i];
        if ((a == Step::up && b == Step::down) || (a == Step::down && b == Step::up)) {
            throw std::invalid_argument("path reverses a vertical step at step " + std::to_string(i));
        }
    }
}

std::vector<Site> DirectedPath::sites() const {
    std::vector<Site> out;
    out.reserve(steps_.size() + 1);
    Site s = start_;
    out.push_back(s);
    for (Step st : steps_) {
        if (st == Step::right) {
            ++s.x;
        } else if (st == Step::up) {
            ++s.y;
        } else {
            --s.y;
        }
        out.push_back(s);
    }
    return out;
}

DirectedPath DirectedPath::reflected() const {
    std::vector<Step> out(steps_);
    for (Step& s : out) {
        if (s == Step::up) {
            s = Step::down;
        } else if (s == Step::down) {
            s = Step::up;
        }
    }
    return DirectedPath({start_.x, -start_.y}, std::move(out));
}

namespace {

long floor_div(long a, long b) {
    long q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

// Walks a path through its block pairs. Local coordinates (u, v) are relative
// to the entry corner: u in [0, L], v in [-L, L]; the upper block of the pair is
// the one with the entry corner as its lower-left corner.
std::optional<std::string> walk_pairs(const DirectedPath& path, int L, std::vector<BlockIndex>* out) {
    const Site start = path.start();
    if (start.x % L != 0 || start.y % L != 0) {
        return "path must start at a block corner";
    }
    long cx = floor_div(start.x, L);
    long cy = floor_div(start.y, L);
    bool at_corner = true;
    long u = 0;
    long v = 0;
    const auto& steps = path.steps();
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const Step st = steps[i];
        bool upper = false;
        if (at_corner) {
            if (st != Step::right) {
                return "step " + std::to_string(i) + " must be RIGHT at a block corner";
            }
            at_corner = false;
            u = 0;
            v = 0;
        }
        if (st == Step::right) {
            if (u >= L) {
                return "step " + std::to_string(i) + " leaves the block pair to the right";
            }
            upper = v > 0;
            ++u;
        } else if (st == Step::up) {
            if (v >= L) {
                return "step " + std::to_string(i) + " leaves the block pair upwards";
            }
            upper = v >= 0;
            ++v;
        } else {
            if (v <= -L) {
                return "step " + std::to_string(i) + " leaves the block pair downwards";
            }
            upper = v - 1 >= 0;
            --v;
        }
        if (out != nullptr) {
            out->push_back(upper ? BlockIndex{cx, cy} : BlockIndex{cx, cy - 1});
        }
        if (u == L) {
            if (v == 0) {
                return "step " + std::to_string(i) + " reaches the shared corner of the pair";
            }
            if (v == L || v == -L) {
                cx += 1;
                cy += (v == L) ? 1 : -1;
                at_corner = true;
            }
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<BlockIndex> attribute_edges(const DirectedPath& path, int block_size) {
    if (block_size < 1) {
        throw std::invalid_argument("block size must be positive");
    }
    std::vector<BlockIndex> out;
    out.reserve(path.size());
    if (auto err = walk_pairs(path, block_size, &out)) {
        throw std::invalid_argument(*err);
    }
    return out;
}

bool is_valid_pair_prefix(const DirectedPath& path, int block_size) {
    return block_size >= 1 && !walk_pairs(path, block_size, nullptr).has_value();
}

double hamiltonian(const DirectedPath& path, const CopolymerSequence& omega,
                   const EmulsionField& field, const InteractionParams& params) {
    if (path.size() != omega.size()) {
        throw std::invalid_argument("path length " + std::to_string(path.size()) +
                                    " does not match copolymer length " + std::to_string(omega.size()));
    }
    const auto blocks = attribute_edges(path, field.block_size());
    double h = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        h -= params.match_gain(omega[i], field.label(blocks[i].x, blocks[i].y));
    }
    return h;
}

CopolymerSequence sample_copolymer(std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("copolymer length must be positive");
    }
    CounterStream rng(derive_key(seed, Stream::copolymer));
    std::vector<Species> labels(n);
    for (auto& s : labels) {
        s = (rng.next() >> 63) ? Species::B : Species::A;
    }
    return CopolymerSequence(std::move(labels));
}

namespace {

std::uint64_t zigzag(long v) {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

} // namespace

EmulsionField sample_emulsion(BlockExtent extent, double p, std::uint64_t seed, int block_size) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("emulsion density p must lie in (0,1)");
    }
    if (extent.nx < 1 || extent.ny < 1) {
        throw std::invalid_argument("emulsion extent must be non-empty");
    }
    // Each block's uniform depends only on its coordinates, so fields of
    // different p or extent are coupled monotonically.
    const std::uint64_t key = derive_key(seed, Stream::emulsion);
    std::vector<Species> labels(extent.nx * extent.ny);
    for (long j = 0; j < extent.ny; ++j) {
        for (long i = 0; i < extent.nx; ++i) {
            const std::uint64_t cell = (zigzag(extent.x0 + i) << 32) ^ zigzag(extent.y0 + j);
            const double u = unit_uniform(splitmix64(key ^ splitmix64(cell)));
            labels[j * extent.nx + i] = u < p ? Species::A : Species::B;
        }
    }
    return EmulsionField(extent, block_size, std::move(labels));
}

ReducedPoint apply_symmetry(bool swap_labels, bool reflect, double alpha, double beta, double p) {
    double a = alpha;
    double b = beta;
    double q = p;
    double offset = 0.0;
    if (reflect) {
        offset = 0.5 * (alpha + beta);
        a = -beta;
        b = -alpha;
    }
    if (swap_labels) {
        std::swap(a, b);
        q = 1.0 - q;
    }
    return {InteractionParams(a, b), q, offset, {swap_labels, reflect, offset}};
}

ReducedPoint apply_symmetry(const SymmetryTransform& t, double alpha, double beta, double p) {
    return apply_symmetry(t.swap_labels, t.reflect, alpha, beta, p);
}

ReducedPoint cone_reduce(double alpha, double beta, double p) {
    for (bool reflect : {false, true}) {
        for (bool swap : {false, true}) {
            ReducedPoint r = apply_symmetry(swap, reflect, alpha, beta, p);
            if (r.params.in_cone()) {
                return r;
            }
        }
    }
    throw std::logic_error("no symmetry image lies in the cone");
}

} // namespace emulsion
