#include "emulsion/oracle.hpp"

#include "emulsion/random.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace emulsion {

namespace {

long last_pair(long n, int L) { return (n - 1) / (2L * L); }

// Pairs (X, Y) with |Y| <= X and Y = X (mod 2), stored triangularly.
std::size_t pair_index(long x, long y) { return static_cast<std::size_t>(x * (x + 1) / 2 + (y + x) / 2); }

class OracleDp {
public:
    OracleDp(long n, int L, const CopolymerSequence& omega, const EmulsionField& field,
             const InteractionParams& params, double prune)
        : n_(n), L_(L), omega_(omega), prune_(prune), x_max_(last_pair(n, L) + 1), rows_(2 * L + 1),
          local_(static_cast<std::size_t>(L) * rows_ * 3) {
        const std::size_t pairs = pair_index(x_max_, x_max_) + 1;
        cur_.assign(pairs * local_, 0.0);
        nxt_.assign(pairs * local_, 0.0);
        corner_.assign(pairs, 0.0);
        corner_next_.assign(pairs, 0.0);
        upper_.assign(pairs, Species::A);
        lower_.assign(pairs, Species::A);
        for (long x = 0; x < x_max_; ++x) {
            for (long y = -x; y <= x; y += 2) {
                upper_[pair_index(x, y)] = field.label(x, y);
                lower_[pair_index(x, y)] = field.label(x, y - 1);
            }
        }
        ea_ = std::exp(params.alpha());
        eb_ = std::exp(params.beta());
    }

    double run() {
        corner_[pair_index(0, 0)] = 1.0;
        std::vector<std::size_t> active{pair_index(0, 0)};
        std::vector<std::pair<long, long>> coords{{0, 0}};
        std::vector<char> listed(corner_.size(), 0);
        double log_scale = 0.0;
        double carry = 1.0;
        for (long t = 0; t < n_; ++t) {
            const double inv = 1.0 / carry;
            const bool a = omega_[t] == Species::A;
            std::fill(corner_next_.begin(), corner_next_.end(), 0.0);
            double mx = 0.0;
            for (std::size_t q = 0; q < active.size(); ++q) {
                const auto [x, y] = coords[q];
                const std::size_t p = active[q];
                const double wu = inv * (a ? (upper_[p] == Species::A ? ea_ : 1.0) : (upper_[p] == Species::B ? eb_ : 1.0));
                const double wl = inv * (a ? (lower_[p] == Species::A ? ea_ : 1.0) : (lower_[p] == Species::B ? eb_ : 1.0));
                mx = std::max(mx, step_pair(x, y, p, wu, wl));
            }
            for (double v : corner_next_) {
                mx = std::max(mx, v);
            }
            log_scale += std::log(carry);
            carry = mx > 0.0 ? mx : 1.0;
            std::swap(cur_, nxt_);
            std::swap(corner_, corner_next_);
            // Rebuild the active list: pairs holding any state above the pruning threshold.
            const double thr = prune_ * mx;
            std::vector<std::size_t> next_active;
            std::vector<std::pair<long, long>> next_coords;
            auto consider = [&](long x, long y) {
                if (x >= x_max_ + 1) {
                    return;
                }
                const std::size_t p = pair_index(x, y);
                if (listed[p]) {
                    return;
                }
                bool keep = corner_[p] > thr && corner_[p] > 0.0;
                if (!keep && x < x_max_) {
                    const double* s = &cur_[p * local_];
                    for (std::size_t i = 0; i < local_; ++i) {
                        if (s[i] > thr && s[i] > 0.0) {
                            keep = true;
                            break;
                        }
                    }
                }
                if (keep) {
                    listed[p] = 1;
                    next_active.push_back(p);
                    next_coords.push_back({x, y});
                }
            };
            for (const auto& [x, y] : coords) {
                consider(x, y);
                consider(x + 1, y + 1);
                consider(x + 1, y - 1);
            }
            for (std::size_t p : next_active) {
                listed[p] = 0;
            }
            active.swap(next_active);
            coords.swap(next_coords);
        }
        double z = 0.0;
        for (std::size_t q = 0; q < active.size(); ++q) {
            const std::size_t p = active[q];
            z += corner_[p];
            if (coords[q].first < x_max_) {
                const double* s = &cur_[p * local_];
                for (std::size_t i = 0; i < local_; ++i) {
                    z += s[i];
                }
            }
        }
        return z > 0.0 ? std::log(z) + log_scale : -std::numeric_limits<double>::infinity();
    }

private:
    std::size_t cell(long u, long v, int dir) const {
        return (static_cast<std::size_t>(u - 1) * rows_ + static_cast<std::size_t>(v + L_)) * 3 + dir;
    }

    // Advances one pair by one step; returns the largest value written into the pair.
    double step_pair(long x, long y, std::size_t p, double wu, double wl) {
        enum { R = 0, U = 1, D = 2 };
        const long L = L_;
        const double* s = &cur_[p * local_];
        double* o = &nxt_[p * local_];
        if (x >= x_max_) {
            return 0.0; // terminal corner beyond the last pair with steps
        }
        std::fill(o, o + local_, 0.0);
        double mx = 0.0;
        auto put = [&](long u, long v, int dir, double val) {
            if (u == L && v == 0) {
                return; // shared corner of the pair is not admissible
            }
            if (u == L && v == L) {
                corner_next_[pair_index(x + 1, y + 1)] += val;
                return;
            }
            if (u == L && v == -L) {
                corner_next_[pair_index(x + 1, y - 1)] += val;
                return;
            }
            o[cell(u, v, dir)] += val;
        };
        const double c = corner_[p];
        if (c > 0.0) {
            put(1, 0, R, c * wl);
        }
        for (long u = 1; u <= L; ++u) {
            for (long v = -L; v <= L; ++v) {
                const std::size_t b = cell(u, v, 0);
                const double zr = s[b + R];
                const double zu = s[b + U];
                const double zd = s[b + D];
                const double tot = zr + zu + zd;
                if (tot == 0.0) {
                    continue;
                }
                if (u < L) {
                    put(u + 1, v, R, tot * (v > 0 ? wu : wl));
                }
                if (v < L && zr + zu > 0.0) {
                    put(u, v + 1, U, (zr + zu) * (v >= 0 ? wu : wl));
                }
                if (v > -L && zr + zd > 0.0) {
                    put(u, v - 1, D, (zr + zd) * (v - 1 >= 0 ? wu : wl));
                }
            }
        }
        for (std::size_t i = 0; i < local_; ++i) {
            mx = std::max(mx, o[i]);
        }
        return mx;
    }

    long n_;
    long L_;
    const CopolymerSequence& omega_;
    double prune_;
    long x_max_;
    std::size_t rows_;
    std::size_t local_;
    double ea_ = 1.0, eb_ = 1.0;
    std::vector<double> cur_, nxt_, corner_, corner_next_;
    std::vector<Species> upper_, lower_;
};

} // namespace

BlockExtent oracle_extent(long n, int L) {
    if (L < 1 || n < 1) {
        throw std::invalid_argument("oracle needs n >= 1 and L >= 1");
    }
    const long xm = last_pair(n, L);
    return {0, -xm - 1, xm + 1, 2 * xm + 2};
}

double exact_log_Z(long n, int L, const CopolymerSequence& omega, const EmulsionField& field,
                   const InteractionParams& params, double prune) {
    if (L < 1) {
        throw std::invalid_argument("block size must be positive");
    }
    if (n < 2L * L) {
        throw std::invalid_argument("n = " + std::to_string(n) + " is too small to cross one block pair of size " +
                                    std::to_string(L));
    }
    if (static_cast<long>(omega.size()) != n) {
        throw std::invalid_argument("copolymer length must equal n");
    }
    if (field.block_size() != L) {
        throw std::invalid_argument("emulsion block size does not match L");
    }
    const BlockExtent need = oracle_extent(n, L);
    const BlockExtent& have = field.extent();
    if (have.x0 > need.x0 || have.y0 > need.y0 || have.x0 + have.nx < need.x0 + need.nx ||
        have.y0 + have.ny < need.y0 + need.ny) {
        throw std::out_of_range("emulsion geometry too small for n = " + std::to_string(n));
    }
    OracleDp dp(n, L, omega, field, params, prune);
    return dp.run();
}

OracleResult quenched_f_mc(const InteractionParams& params, double p, long n, int L, int samples, std::uint64_t seed,
                           double prune) {
    if (n < 10L * L) {
        throw std::invalid_argument("quenched oracle requires n >= 10 L");
    }
    if (samples < 1) {
        throw std::invalid_argument("quenched oracle needs at least one sample");
    }
    OracleResult r;
    r.n = n;
    r.L = L;
    r.log_Z.resize(samples);
    r.per_sample.resize(samples);
    tbb::parallel_for(0, samples, [&](int k) {
        const auto omega = sample_copolymer(n, derive_key(seed, Stream::oracle, 2 * static_cast<std::uint64_t>(k)));
        const auto field = sample_emulsion(oracle_extent(n, L), p,
                                           derive_key(seed, Stream::oracle, 2 * static_cast<std::uint64_t>(k) + 1), L);
        r.log_Z[k] = exact_log_Z(n, L, omega, field, params, prune);
        r.per_sample[k] = r.log_Z[k] / static_cast<double>(n);
    });
    double mean = 0.0;
    for (double v : r.per_sample) {
        mean += v;
    }
    mean /= samples;
    double ss = 0.0;
    for (double v : r.per_sample) {
        ss += (v - mean) * (v - mean);
    }
    r.mean = mean;
    r.sample_std = samples > 1 ? std::sqrt(ss / (samples - 1)) : 0.0;
    r.stderr = r.sample_std / std::sqrt(static_cast<double>(samples));
    return r;
}

} // namespace emulsion
